//! Expression-driven Hamiltonians: parse a scalar field over the chart's
//! coordinate labels and integrate it, no recompilation needed. The same
//! machinery backs the CLI's `hamiltonian = "…"` config key.
//!
//! ```bash
//! cargo run --example custom_hamiltonian
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use algmech::dynamics::integrate;
use algmech::expr::parse_expression;
use algmech::models;
use algmech::section::MultiSection;

fn main() {
    let src = "0.5*(pi1^2/I + pi2^2/I + pi3^2/J) + m*g*l*tanh(t)";
    let expr = parse_expression(src).expect("parse");
    println!("parsed:   {src}");
    println!("printed:  {expr}");
    println!("vars:     {:?}", expr.variables());

    let mut sys = models::lagrange_top_full(&models::LagrangeTopParams {
        inertia_i: 1.0,
        inertia_j: 2.0,
        mass: 1.0,
        gravity: 1.0,
        length: 1.0,
    });
    let params: BTreeMap<String, f64> = sys.params.clone();
    let labels = sys.prolong.chart.coord_labels.clone();
    expr.check_bindings(&labels, &params).expect("bindings");
    let expr = Arc::new(expr);
    sys.hamiltonian = MultiSection::scalar(
        sys.prolong.chart.clone(),
        Arc::new(move |x: &[f64]| {
            expr.eval(&|name| {
                labels
                    .iter()
                    .position(|l| l == name)
                    .map(|i| x[i])
                    .or_else(|| params.get(name).copied())
            })
            .unwrap()
        }),
    );

    let traj = integrate(&sys, &[0.0, 0.3, 0.2, -0.1, 0.15], 2.0, 1e-3).expect("integration");
    println!(
        "integrated {} steps; energy drift {:.3e}",
        traj.times.len() - 1,
        traj.energy_drift()
    );
}
