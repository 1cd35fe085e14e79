//! Hamilton–Poincaré equations through the Atiyah local model: the direct
//! transcription and the generic Hamilton equations driven by the local
//! structure functions agree to machine precision.
//!
//! ```bash
//! cargo run --example hamilton_poincare
//! ```

use std::sync::Arc;

use algmech::dynamics::{hamilton_poincare_rhs, hamilton_poincare_rhs_direct};
use algmech::models;
use algmech::prolongation::ProlongationChart;
use algmech::section::MultiSection;

fn main() {
    // one-dimensional base, so(3) fibers, constant connection, flat curvature
    let data = models::atiyah_so3_flat([0.3, -0.2, 0.5]);
    let build_h = |pro: &ProlongationChart| {
        MultiSection::scalar(
            pro.chart.clone(),
            Arc::new(|s: &[f64]| {
                0.5 * s[1] * s[1]
                    + 0.5 * (s[2] * s[2] + 2.0 * s[3] * s[3] + 0.5 * s[4] * s[4])
                    + 0.3 * s[0].sin()
            }),
        )
        .with_gradient(Arc::new(|s: &[f64]| {
            vec![0.3 * s[0].cos(), s[1], s[2], 2.0 * s[3], 0.5 * s[4]]
        }))
    };

    let state = [0.7, 0.4, 0.9, -0.3, 0.2]; // (x, p, p̄₁, p̄₂, p̄₃)
    let rhs = hamilton_poincare_rhs(&data, &build_h, &state).expect("dual-path RHS");
    println!("state (x, p, p̄) = {state:?}");
    println!("ẋ  = {:+.6}", rhs[0]);
    println!("ṗ  = {:+.6}", rhs[1]);
    println!("ṗ̄  = ({:+.6}, {:+.6}, {:+.6})", rhs[2], rhs[3], rhs[4]);

    let chart = models::atiyah_chart(&data);
    let pro = algmech::prolongation::prolong(&chart).expect("prolongation");
    let h = build_h(&pro);
    let direct = hamilton_poincare_rhs_direct(&data, &h, &state).expect("direct RHS");
    let dev = rhs
        .iter()
        .zip(&direct)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    println!("direct-transcription deviation: {dev:.3e}");
}
