//! The prolongation 𝒯^A A* and its canonical symplectic structure:
//! Ω = −dΘ, nondegeneracy, and the induced linear Poisson bracket, shown on
//! the so(3) action algebroid (the Lagrange-top base).
//!
//! ```bash
//! cargo run --example canonical_symplectic
//! ```

use algmech::cartan::differential;
use algmech::prolongation::{canonical_symplectic, dual_coordinate, linear_poisson, liouville, prolong};
use algmech::sample::sample_box;
use algmech::symplectic::{poisson_bracket, verify_symplectic};
use algmech::models;

fn main() {
    let parent = models::action_so3_sphere();
    let pro = prolong(&parent).expect("prolongation");
    println!(
        "prolongation of {}: rank {} over a {}-dimensional chart",
        parent.name,
        pro.chart.rank(),
        pro.chart.base_dim()
    );

    let theta = liouville(&pro);
    let mut omega = canonical_symplectic(&pro).expect("canonical symplectic");
    let d_theta = differential(&theta).expect("dΘ");
    let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 1, 25);
    let mut worst = 0.0f64;
    for p in &pts {
        let lhs = omega.omega.comps_at(p).unwrap();
        let rhs = d_theta.comps_at(p).unwrap();
        for (a, b) in lhs.iter().zip(&rhs) {
            worst = worst.max((a + b).abs());
        }
    }
    println!("max |Ω + dΘ| over 25 points: {worst:.3e}");

    let rep = verify_symplectic(&mut omega, &pts, 1e-8).expect("verify");
    println!(
        "closedness residual {:.3e}, min singular value {:.3}, nondegenerate: {}",
        rep.closedness_residual, rep.min_singular_value, rep.nondegenerate
    );

    // the linear Poisson bracket of dual coordinates is minus the bracket:
    // {ŷ₁, ŷ₂} = −y₃ on so(3)*
    let y1 = dual_coordinate(&pro, 0);
    let y2 = dual_coordinate(&pro, 1);
    let lp = linear_poisson(&pro, &y1, &y2).expect("linear poisson");
    let pb = poisson_bracket(&omega, &y1, &y2).expect("poisson bracket");
    let p = &pts[0];
    println!(
        "at y₃ = {:+.4}: closed-form {{y₁,y₂}} = {:+.4}, symplectic route = {:+.4}",
        p[4],
        lp.value(p).unwrap(),
        pb.value(p).unwrap()
    );
}
