//! Quotienting commutes with prolonging: the structure functions of
//! 𝒯^A A*/G match those of 𝒯^{A/G}(A*/G) frame-wise for the so(3)/S¹
//! instance over the punctured sphere.
//!
//! ```bash
//! cargo run --example quotient_isomorphism
//! ```

use algmech::models;
use algmech::prolongation::prolong;
use algmech::reduction::quotient_algebroid;
use algmech::sample::{sample_box, ChartBox};

fn main() {
    // route 2: quotient the base algebroid first, then prolong
    let (base_chart, base_action, base_frame) = models::so3_s1_base_quotient();
    let base_pts = sample_box(base_chart.box_hint.as_ref().unwrap(), 1, 12);
    let a_mod_g = quotient_algebroid(&base_chart, &base_action, &base_frame, &base_pts, 1e-9)
        .expect("A/G");
    println!(
        "A/G: rank {} over the t-line; ⟦ũ₁,ũ₂⟧ at t = 0.5 has e₁-component {:+.4} (−sinh t)",
        a_mod_g.rank(),
        a_mod_g.structure_at(&[0.5]).unwrap().get(0, 0, 1)
    );
    let route2 = prolong(&a_mod_g).expect("prolongation of A/G");

    // route 1: prolong first, then quotient by the lifted action
    let (pro, action, frame) = models::so3_s1_prolongation_quotient();
    let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 1, 12);
    let route1 =
        quotient_algebroid(&pro.chart, &action, &frame, &pts, 1e-9).expect("(T^A A*)/G");

    let nu_box = ChartBox::new(vec![-1.0; 4], vec![1.0; 4]);
    let mut worst = 0.0f64;
    for nt in sample_box(&nu_box, 7, 15) {
        let c1 = route1.structure_at(&nt).unwrap();
        let c2 = route2.chart.structure_at(&nt).unwrap();
        for a in 0..6 {
            for b in (a + 1)..6 {
                for g in 0..6 {
                    worst = worst.max((c1.get(g, a, b) - c2.get(g, a, b)).abs());
                }
            }
        }
        let d = route1
            .anchor_at(&nt)
            .unwrap()
            .sub(&route2.chart.anchor_at(&nt).unwrap())
            .max_abs();
        worst = worst.max(d);
    }
    println!("frame-wise deviation between the two routes: {worst:.3e}");
}
