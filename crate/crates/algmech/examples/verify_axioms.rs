//! Verify the Lie algebroid axioms of several built-in models by sampled
//! residuals: Jacobi identity on frame triples, anchor compatibility, and
//! the Leibniz rule.
//!
//! ```bash
//! cargo run --example verify_axioms
//! ```

use algmech::algebroid::check_axioms;
use algmech::models;
use algmech::sample::{sample_box, ChartBox};

fn main() {
    let charts = [
        models::abelian_lie_algebra(2),
        models::so3_lie_algebra(),
        models::tangent_bundle(2),
        models::action_so3_sphere(),
        models::atiyah_chart(&models::atiyah_so3_flat([0.3, -0.2, 0.5])),
    ];
    for chart in charts {
        let bx = chart
            .box_hint
            .clone()
            .unwrap_or_else(|| ChartBox::new(vec![], vec![]));
        let pts = sample_box(&bx, 1, 50);
        let rep = check_axioms(&chart, &pts, 1e-8).expect("axiom check");
        println!(
            "{:<22} jacobi {:.2e}  anchor {:.2e}  leibniz {:.2e}  -> {}",
            chart.name,
            rep.jacobi_residual,
            rep.anchor_residual,
            rep.leibniz_residual,
            if rep.pass { "pass" } else { "FAIL" }
        );
    }

    // a corrupted structure field is caught by the anchor-compatibility check
    let bad = models::lagrange_top_chart_corrupted();
    let pts = sample_box(bad.box_hint.as_ref().unwrap(), 1, 50);
    let rep = check_axioms(&bad, &pts, 1e-8).expect("axiom check");
    println!(
        "{:<22} corrupted C³₁₂ = 1.1 -> {} (max residual {:.2e})",
        bad.name,
        if rep.pass { "pass" } else { "FAIL" },
        rep.max_residual()
    );
}
