//! Commutation of reduction and flow: integrate the full Lagrange top from a
//! state on N, project every state to Ñ, and compare against the reduced
//! trajectory; the two agree up to integrator error.
//!
//! ```bash
//! cargo run --example compare_dynamics
//! ```

use algmech::models::{lagrange_top_reduction, LagrangeTopMutation, LagrangeTopParams};
use algmech::reduction::{run_pipeline, verify_commutation};
use algmech::sample::sample_box;

fn main() {
    let params = LagrangeTopParams {
        inertia_i: 1.0,
        inertia_j: 2.0,
        mass: 1.0,
        gravity: 1.0,
        length: 1.0,
    };
    let setup = lagrange_top_reduction(&params, LagrangeTopMutation::None, 1);
    let pts = sample_box(&setup.sub_box, 1, 25);
    let outcome = run_pipeline(&setup, &pts, 1e-8).expect("pipeline");
    let model = outcome.model.expect("reduced model");
    let h_red = outcome.reduced_h.expect("reduced Hamiltonian");

    let init = [0.0, 0.3, 0.2, -0.1, 0.0];
    println!("init (θ, t, π₁, π₂, π₃) = {init:?}");
    for h in [4e-3, 2e-3, 1e-3] {
        let rep = verify_commutation(&setup, &model, &h_red, &init, 2.0, h).expect("commutation");
        println!(
            "h = {h:>6}: sup deviation {:.3e}, π₃ drift {:.3e}",
            rep.max_deviation, rep.constraint_drift
        );
    }
    println!("the deviation shrinks ≈16× per halving: both flows are RK4-accurate");
}
