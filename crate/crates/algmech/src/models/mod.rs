//! Built-in, fully parameterized models: Lie algebras, tangent bundles, the
//! so(3) action algebroid on the punctured sphere, the Atiyah local model and
//! the Lagrange top with its full reduction setup.

mod lagrange_top;
mod registry;

pub use lagrange_top::{
    free_rigid_body, lagrange_top_full, lagrange_top_reduced, lagrange_top_reduction,
    ExplicitReducedTop, LagrangeTopMutation, LagrangeTopParams,
};
pub use registry::{
    build_model, cartan_reduction, kernel_not_ideal_reduction, model_descriptions,
    model_names,
    so3_s1_base_quotient, so3_s1_prolongation_quotient, trivial_reduction, BuiltModel,
    SymplecticModel,
};

use std::sync::Arc;

use crate::chart::{LieAlgebroidChart, StructureArray};
use crate::linalg::Mat;
use crate::sample::ChartBox;

/// so(3) structure constants C^γ_αβ = ε_αβγ (⟦e₁,e₂⟧ = e₃ and cyclic).
pub fn so3_structure() -> StructureArray {
    let mut c = StructureArray::zeros(3);
    c.set(2, 0, 1, 1.0); // ⟦e1,e2⟧ = e3
    c.set(1, 0, 2, -1.0); // ⟦e1,e3⟧ = −e2
    c.set(0, 1, 2, 1.0); // ⟦e2,e3⟧ = e1
    c
}

fn zero_anchor_partials(m: usize, n: usize) -> Arc<crate::chart::AnchorPartialsFn> {
    Arc::new(move |_x: &[f64]| (0..m).map(|_| Mat::zeros(m, n)).collect())
}

fn zero_structure_partials(m: usize, n: usize) -> Arc<crate::chart::StructurePartialsFn> {
    Arc::new(move |_x: &[f64]| (0..m).map(|_| StructureArray::zeros(n)).collect())
}

/// A real Lie algebra as an algebroid over a point (base dimension 0).
pub fn lie_algebra_chart(
    name: &str,
    constants: StructureArray,
    labels: Vec<String>,
) -> Arc<LieAlgebroidChart> {
    let n = constants.rank();
    let c = constants.clone();
    Arc::new(
        LieAlgebroidChart::new(
            name,
            0,
            n,
            Arc::new(move |_x: &[f64]| Mat::zeros(0, n)),
            Arc::new(move |_x: &[f64]| c.clone()),
        )
        .with_labels(vec![], labels)
        .with_partials(zero_anchor_partials(0, n), zero_structure_partials(0, n))
        .with_box(ChartBox::new(vec![], vec![])),
    )
}

/// The abelian Lie algebra ℝⁿ.
pub fn abelian_lie_algebra(n: usize) -> Arc<LieAlgebroidChart> {
    lie_algebra_chart(
        &format!("abelian-{n}"),
        StructureArray::zeros(n),
        (0..n).map(|a| format!("e{}", a + 1)).collect(),
    )
}

/// so(3) as a Lie algebroid over a point.
pub fn so3_lie_algebra() -> Arc<LieAlgebroidChart> {
    lie_algebra_chart(
        "so3",
        so3_structure(),
        vec!["e1".into(), "e2".into(), "e3".into()],
    )
}

/// so(3) with one off-diagonal constant corrupted; breaks the Jacobi identity.
pub fn so3_broken_jacobi() -> Arc<LieAlgebroidChart> {
    let mut c = so3_structure();
    c.set(0, 0, 1, 0.3); // ⟦e1,e2⟧ = 0.3 e1 + e3: Jacobi fails
    lie_algebra_chart(
        "so3-broken",
        c,
        vec!["e1".into(), "e2".into(), "e3".into()],
    )
}

/// TM over an m-dimensional chart: identity anchor, vanishing structure.
pub fn tangent_bundle(m: usize) -> Arc<LieAlgebroidChart> {
    Arc::new(
        LieAlgebroidChart::new(
            format!("tangent-bundle-{m}"),
            m,
            m,
            Arc::new(move |_x: &[f64]| Mat::identity(m)),
            Arc::new(move |_x: &[f64]| StructureArray::zeros(m)),
        )
        .with_labels(
            (0..m).map(|i| format!("x{}", i + 1)).collect(),
            (0..m).map(|i| format!("dx{}", i + 1)).collect(),
        )
        .with_partials(zero_anchor_partials(m, m), zero_structure_partials(m, m))
        .with_box(ChartBox::new(vec![-1.5; m], vec![1.5; m])),
    )
}

/// Cylinder chart of the punctured sphere:
/// μ([θ], t) = (cos θ / cosh t, sin θ / cosh t, tanh t).
pub fn sphere_embedding(p: &[f64]) -> [f64; 3] {
    let (theta, t) = (p[0], p[1]);
    let sech = 1.0 / t.cosh();
    [theta.cos() * sech, theta.sin() * sech, t.tanh()]
}

/// Anchor matrix of the so(3) action algebroid in the cylinder chart,
/// ρ(ξ) = −ξ × μ(θ,t) expressed in (θ, t) coordinates:
///   ρ(e₁) = cosθ sinh t ∂θ − sinθ cosh t ∂t
///   ρ(e₂) = sinθ sinh t ∂θ + cosθ cosh t ∂t
///   ρ(e₃) = −∂θ
fn so3_sphere_anchor(theta: f64, t: f64) -> Mat {
    let (st, ct) = (theta.sin(), theta.cos());
    let (sh, ch) = (t.sinh(), t.cosh());
    Mat::from_rows(&[vec![ct * sh, st * sh, -1.0], vec![-st * ch, ct * ch, 0.0]])
}

/// The action Lie algebroid of so(3) on the punctured sphere (Lagrange-top
/// base chart), with analytic partials.
pub fn action_so3_sphere() -> Arc<LieAlgebroidChart> {
    let anchor = Arc::new(move |x: &[f64]| so3_sphere_anchor(x[0], x[1]));
    let structure = Arc::new(move |_x: &[f64]| so3_structure());
    let anchor_partials = Arc::new(move |x: &[f64]| {
        let (theta, t) = (x[0], x[1]);
        let (st, ct) = (theta.sin(), theta.cos());
        let (sh, ch) = (t.sinh(), t.cosh());
        vec![
            // ∂/∂θ
            Mat::from_rows(&[vec![-st * sh, ct * sh, 0.0], vec![-ct * ch, -st * ch, 0.0]]),
            // ∂/∂t
            Mat::from_rows(&[vec![ct * ch, st * ch, 0.0], vec![-st * sh, ct * sh, 0.0]]),
        ]
    });
    Arc::new(
        LieAlgebroidChart::new("action-so3-sphere", 2, 3, anchor, structure)
            .with_labels(
                vec!["theta".into(), "t".into()],
                vec!["e1".into(), "e2".into(), "e3".into()],
            )
            .with_angles(vec![0])
            .with_partials(anchor_partials, zero_structure_partials(2, 3))
            .with_box(ChartBox::new(
                vec![0.0, -1.4],
                vec![std::f64::consts::TAU, 1.4],
            )),
    )
}

/// The Lagrange-top base chart with C³₁₂ corrupted to 1.1. Still antisymmetric
/// by storage; the anchor-compatibility residual exposes it.
pub fn lagrange_top_chart_corrupted() -> Arc<LieAlgebroidChart> {
    let anchor = Arc::new(move |x: &[f64]| so3_sphere_anchor(x[0], x[1]));
    let structure = Arc::new(move |_x: &[f64]| {
        let mut c = so3_structure();
        c.set(2, 0, 1, 1.1);
        c
    });
    let base = action_so3_sphere();
    Arc::new(
        LieAlgebroidChart::new("lagrange-top-corrupted", 2, 3, anchor, structure)
            .with_labels(base.coord_labels.clone(), base.frame_labels.clone())
            .with_angles(vec![0])
            .with_box(base.box_hint.clone().unwrap()),
    )
}

/// Chart of the Atiyah local model (structure functions of TP/G in a local
/// trivialization): frame (∂/∂x^i-type, ξ_a-type), with
/// C^a_ij = −R^a_ij, C^c_ia = c^c_ab D^b_i, C^c_ab = c^c_ab, ρ^j_i = δ_ij.
pub fn atiyah_chart(data: &crate::dynamics::AtiyahLocalData) -> Arc<LieAlgebroidChart> {
    let mb = data.base_dim;
    let k = data.algebra.rank();
    let n = mb + k;
    let c_alg = data.algebra.clone();
    let conn = data.connection.clone();
    let curv = data.curvature.clone();
    let structure = Arc::new(move |x: &[f64]| {
        let d = conn(x);
        let r = curv(x);
        let mut c = StructureArray::zeros(n);
        for i in 0..mb {
            for j in (i + 1)..mb {
                for a in 0..k {
                    c.set(mb + a, i, j, -r[(StructureArray::pair_index(mb, i, j), a)]);
                }
            }
        }
        for i in 0..mb {
            for a in 0..k {
                for cc in 0..k {
                    let mut v = 0.0;
                    for b in 0..k {
                        v += c_alg.get(cc, a, b) * d[(b, i)];
                    }
                    c.set(mb + cc, i, mb + a, v);
                }
            }
        }
        for a in 0..k {
            for b in (a + 1)..k {
                for cc in 0..k {
                    c.set(mb + cc, mb + a, mb + b, c_alg.get(cc, a, b));
                }
            }
        }
        c
    });
    let anchor = Arc::new(move |_x: &[f64]| {
        Mat::from_fn(mb, n, |i, al| if i == al { 1.0 } else { 0.0 })
    });
    let mut labels = Vec::new();
    for i in 0..mb {
        labels.push(format!("ex{}", i + 1));
    }
    for a in 0..k {
        labels.push(format!("xi{}", a + 1));
    }
    let mut chart = LieAlgebroidChart::new("atiyah-local", mb, n, anchor, structure)
        .with_labels((0..mb).map(|i| format!("x{}", i + 1)).collect(), labels)
        .with_box(ChartBox::new(vec![-1.5; mb], vec![1.5; mb]));
    if data.constant_fields {
        chart = chart.with_partials(zero_anchor_partials(mb, n), zero_structure_partials(mb, n));
    }
    Arc::new(chart)
}

/// Built-in Atiyah instance: one-dimensional base, so(3) fibers, constant
/// connection, flat curvature.
pub fn atiyah_so3_flat(d: [f64; 3]) -> crate::dynamics::AtiyahLocalData {
    crate::dynamics::AtiyahLocalData {
        base_dim: 1,
        algebra: so3_structure(),
        connection: Arc::new(move |_x: &[f64]| Mat::from_fn(3, 1, |a, _| d[a])),
        curvature: Arc::new(move |_x: &[f64]| Mat::zeros(0, 3)),
        constant_fields: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::check_axioms;
    use crate::sample::sample_box;

    #[test]
    fn sphere_chart_lands_on_unit_sphere() {
        // cos²/cosh² + sin²/cosh² + tanh² = 1
        let bx = ChartBox::new(vec![0.0, -3.0], vec![std::f64::consts::TAU, 3.0]);
        for p in sample_box(&bx, 2, 100) {
            let mu = sphere_embedding(&p);
            let r2: f64 = mu.iter().map(|v| v * v).sum();
            assert!((r2 - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn atiyah_flat_model_passes_axioms() {
        let chart = atiyah_chart(&atiyah_so3_flat([0.3, -0.2, 0.5]));
        let pts = sample_box(chart.box_hint.as_ref().unwrap(), 3, 20);
        let rep = check_axioms(&chart, &pts, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn atiyah_frame_anchor_is_coordinate_fields() {
        let chart = atiyah_chart(&atiyah_so3_flat([0.1, 0.2, 0.3]));
        let rho = chart.anchor_at(&[0.4]).unwrap();
        assert_eq!(rho[(0, 0)], 1.0);
        for a in 1..4 {
            assert_eq!(rho[(0, a)], 0.0);
        }
    }

    #[test]
    fn broken_so3_fails_jacobi() {
        let chart = so3_broken_jacobi();
        let rep = check_axioms(&chart, &[vec![]], 1e-8).unwrap();
        assert!(!rep.pass);
        assert!(rep.jacobi_residual > 0.1);
        assert_eq!(rep.anchor_residual, 0.0);
    }
}
