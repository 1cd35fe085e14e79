//! The A-tangent bundle 𝒯^A A* over A*, built from its local model: frame
//! {𝒳_α, 𝒫^α} over coordinates (x^i, y_α), with the Liouville section, the
//! canonical symplectic section and the linear Poisson bracket.

use std::sync::Arc;

use crate::chart::{LieAlgebroidChart, StructureArray};
use crate::error::{structural, Result};
use crate::linalg::Mat;
use crate::sample::ChartBox;
use crate::section::MultiSection;
use crate::symplectic::SymplecticSection;

/// A prolongation chart together with its parent.
#[derive(Clone)]
pub struct ProlongationChart {
    pub parent: Arc<LieAlgebroidChart>,
    pub chart: Arc<LieAlgebroidChart>,
}

impl ProlongationChart {
    /// Index range of the dual coordinates y_α inside the (x, y) chart.
    pub fn dual_coord_range(&self) -> std::ops::Range<usize> {
        self.parent.base_dim()..self.parent.base_dim() + self.parent.rank()
    }

    pub fn split_state<'a>(&self, state: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        state.split_at(self.parent.base_dim())
    }
}

/// Build 𝒯^A A* from the parent's local structure:
/// ρ(𝒳_α) = ρ^i_α ∂/∂x^i, ρ(𝒫^α) = ∂/∂y_α,
/// ⟦𝒳_α, 𝒳_β⟧ = C^γ_αβ 𝒳_γ, all brackets with 𝒫 vanish.
pub fn prolong(parent: &Arc<LieAlgebroidChart>) -> Result<ProlongationChart> {
    let m = parent.base_dim();
    let n = parent.rank();
    let p_anchor = parent.clone();
    let anchor = Arc::new(move |state: &[f64]| -> Mat {
        let rho = p_anchor.anchor_at(&state[..m]).expect("parent anchor");
        let mut out = Mat::zeros(m + n, 2 * n);
        for i in 0..m {
            for a in 0..n {
                out[(i, a)] = rho[(i, a)];
            }
        }
        for a in 0..n {
            out[(m + a, n + a)] = 1.0;
        }
        out
    });
    let p_struct = parent.clone();
    let structure = Arc::new(move |state: &[f64]| -> StructureArray {
        let c = p_struct.structure_at(&state[..m]).expect("parent structure");
        let mut out = StructureArray::zeros(2 * n);
        for a in 0..n {
            for b in (a + 1)..n {
                for g in 0..n {
                    out.set(g, a, b, c.get(g, a, b));
                }
            }
        }
        out
    });

    let mut labels = parent.coord_labels.clone();
    for a in 0..n {
        labels.push(format!("y_{}", parent.frame_labels[a]));
    }
    let mut frames: Vec<String> = parent
        .frame_labels
        .iter()
        .map(|f| format!("X_{f}"))
        .collect();
    for f in &parent.frame_labels {
        frames.push(format!("P_{f}"));
    }
    let bx = parent.box_hint.as_ref().map(|b| {
        let mut lo = b.lo.clone();
        let mut hi = b.hi.clone();
        lo.extend(std::iter::repeat_n(-1.0, n));
        hi.extend(std::iter::repeat_n(1.0, n));
        ChartBox::new(lo, hi)
    });

    let mut chart = LieAlgebroidChart::new(
        format!("prolongation({})", parent.name),
        m + n,
        2 * n,
        anchor,
        structure,
    )
    .with_labels(labels, frames)
    .with_angles(parent.angle_coords.clone());
    if let Some(b) = bx {
        chart = chart.with_box(b);
    }
    if parent.has_analytic_partials() {
        let pa = parent.clone();
        let anchor_partials = Arc::new(move |state: &[f64]| -> Vec<Mat> {
            let dp = pa.anchor_partials_at(&state[..m]).expect("parent partials");
            let mut out: Vec<Mat> = Vec::with_capacity(m + n);
            for i in 0..m {
                let mut d = Mat::zeros(m + n, 2 * n);
                for r in 0..m {
                    for a in 0..n {
                        d[(r, a)] = dp[i][(r, a)];
                    }
                }
                out.push(d);
            }
            for _ in 0..n {
                out.push(Mat::zeros(m + n, 2 * n));
            }
            out
        });
        let ps = parent.clone();
        let structure_partials = Arc::new(move |state: &[f64]| -> Vec<StructureArray> {
            let dc = ps
                .structure_partials_at(&state[..m])
                .expect("parent partials");
            let mut out: Vec<StructureArray> = Vec::with_capacity(m + n);
            for i in 0..m {
                let mut d = StructureArray::zeros(2 * n);
                for a in 0..n {
                    for b in (a + 1)..n {
                        for g in 0..n {
                            d.set(g, a, b, dc[i].get(g, a, b));
                        }
                    }
                }
                out.push(d);
            }
            for _ in 0..n {
                out.push(StructureArray::zeros(2 * n));
            }
            out
        });
        chart = chart.with_partials(anchor_partials, structure_partials);
    }
    Ok(ProlongationChart {
        parent: parent.clone(),
        chart: Arc::new(chart),
    })
}

/// Liouville section Θ = y_α 𝒳^α.
pub fn liouville(pro: &ProlongationChart) -> MultiSection {
    let m = pro.parent.base_dim();
    let n = pro.parent.rank();
    MultiSection::new(
        pro.chart.clone(),
        1,
        Arc::new(move |state: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; 2 * n];
            out[..n].copy_from_slice(&state[m..m + n]);
            out
        }),
    )
}

/// Canonical symplectic section
/// Ω = 𝒳^α∧𝒫_α + ½ C^γ_αβ y_γ 𝒳^α∧𝒳^β  (equal to −dΘ).
pub fn canonical_symplectic(pro: &ProlongationChart) -> Result<SymplecticSection> {
    let m = pro.parent.base_dim();
    let n = pro.parent.rank();
    let parent = pro.parent.clone();
    let comps = Arc::new(move |state: &[f64]| -> Vec<f64> {
        let c = parent.structure_at(&state[..m]).expect("parent structure");
        let y = &state[m..m + n];
        let total = 2 * n;
        let mut out = Vec::with_capacity(total * (total - 1) / 2);
        for a in 0..total {
            for b in (a + 1)..total {
                let v = if a < n && b < n {
                    (0..n).map(|g| c.get(g, a, b) * y[g]).sum()
                } else if a < n && b == n + a {
                    1.0
                } else {
                    0.0
                };
                out.push(v);
            }
        }
        out
    });
    let mut omega = SymplecticSection::new(MultiSection::new(pro.chart.clone(), 2, comps))?;
    omega.nondegenerate_verified = true; // unit symplectic block by construction
    Ok(omega)
}

/// The linear Poisson bracket on A* in closed form:
/// {H,H′} = −H_{y_α} H′_{y_β} C^γ_αβ y_γ + (H_{x^i} H′_{y_α} − H_{y_α} H′_{x^i}) ρ^i_α.
pub fn linear_poisson(
    pro: &ProlongationChart,
    h: &MultiSection,
    h_prime: &MultiSection,
) -> Result<MultiSection> {
    if h.degree != 0 || h_prime.degree != 0 {
        return Err(structural("linear_poisson expects scalar functions on A*"));
    }
    if !h.chart.same_chart(&pro.chart) || !h_prime.chart.same_chart(&pro.chart) {
        return Err(structural("linear_poisson: chart mismatch"));
    }
    let m = pro.parent.base_dim();
    let n = pro.parent.rank();
    let parent = pro.parent.clone();
    let (hc, hp) = (h.clone(), h_prime.clone());
    Ok(MultiSection::scalar(
        pro.chart.clone(),
        Arc::new(move |state: &[f64]| -> f64 {
            let gh = hc.gradient_at(state).expect("grad H");
            let gp = hp.gradient_at(state).expect("grad H'");
            let x = &state[..m];
            let y = &state[m..m + n];
            let c = parent.structure_at(x).expect("structure");
            let rho = parent.anchor_at(x).expect("anchor");
            let mut total = 0.0;
            for a in 0..n {
                for b in 0..n {
                    if a == b {
                        continue;
                    }
                    let mut cy = 0.0;
                    for g in 0..n {
                        cy += c.get(g, a, b) * y[g];
                    }
                    total -= gh[m + a] * gp[m + b] * cy;
                }
            }
            for a in 0..n {
                for i in 0..m {
                    total += (gh[i] * gp[m + a] - gh[m + a] * gp[i]) * rho[(i, a)];
                }
            }
            total
        }),
    ))
}

/// Linear function ŷ_α ↦ y_α on the prolongation base (the hat of a frame
/// section), with analytic gradient.
pub fn dual_coordinate(pro: &ProlongationChart, alpha: usize) -> MultiSection {
    let m = pro.parent.base_dim();
    let n = pro.parent.rank();
    MultiSection::scalar(
        pro.chart.clone(),
        Arc::new(move |state: &[f64]| state[m + alpha]),
    )
    .with_gradient(Arc::new(move |_state: &[f64]| {
        let mut g = vec![0.0; m + n];
        g[m + alpha] = 1.0;
        g
    }))
}

/// Pullback f∘τ of a base function to A*, with analytic gradient when given.
pub fn base_function(
    pro: &ProlongationChart,
    f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad: Option<Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>>,
) -> MultiSection {
    let m = pro.parent.base_dim();
    let n = pro.parent.rank();
    let mut s = MultiSection::scalar(
        pro.chart.clone(),
        Arc::new(move |state: &[f64]| f(&state[..m])),
    );
    if let Some(g) = grad {
        s = s.with_gradient(Arc::new(move |state: &[f64]| {
            let mut out = g(&state[..m]);
            out.extend(std::iter::repeat_n(0.0, n));
            out
        }));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::check_axioms;
    use crate::cartan::differential;
    use crate::models;
    use crate::sample::sample_box;
    use crate::symplectic::{poisson_bracket, verify_symplectic};

    #[test]
    fn prolongation_of_tm_is_t_tstar() {
        // parent TM over ℝ: rank 2 over ℝ², all C = 0, anchor = identity
        let pro = prolong(&models::tangent_bundle(1)).unwrap();
        assert_eq!(pro.chart.base_dim(), 2);
        assert_eq!(pro.chart.rank(), 2);
        let rho = pro.chart.anchor_at(&[0.3, 0.5]).unwrap();
        assert_eq!(rho, Mat::identity(2));
        assert_eq!(pro.chart.structure_at(&[0.3, 0.5]).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn prolongation_of_so3_has_so3_brackets() {
        let pro = prolong(&models::so3_lie_algebra()).unwrap();
        assert_eq!(pro.chart.base_dim(), 3);
        assert_eq!(pro.chart.rank(), 6);
        let c = pro.chart.structure_at(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(c.get(2, 0, 1), 1.0); // ⟦X₁,X₂⟧ = X₃
        assert_eq!(c.get(0, 1, 2), 1.0);
        for a in 0..6 {
            for b in (a + 1)..6 {
                if b >= 3 {
                    for g in 0..6 {
                        assert_eq!(c.get(g, a, b), 0.0); // brackets with P vanish
                    }
                }
            }
        }
    }

    #[test]
    fn prolongation_of_action_algebroid_anchor_blocks() {
        let parent = models::action_so3_sphere();
        let pro = prolong(&parent).unwrap();
        let state = [0.6, -0.3, 0.2, 0.1, -0.4];
        let rho = pro.chart.anchor_at(&state).unwrap();
        let parent_rho = parent.anchor_at(&state[..2]).unwrap();
        for i in 0..2 {
            for a in 0..3 {
                assert_eq!(rho[(i, a)], parent_rho[(i, a)]);
                assert_eq!(rho[(i, 3 + a)], 0.0);
            }
        }
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(rho[(2 + a, 3 + b)], if a == b { 1.0 } else { 0.0 });
                assert_eq!(rho[(2 + a, b)], 0.0);
            }
        }
    }

    #[test]
    fn prolongation_passes_axioms_when_parent_does() {
        for parent in [
            models::tangent_bundle(2),
            models::so3_lie_algebra(),
            models::action_so3_sphere(),
        ] {
            let pro = prolong(&parent).unwrap();
            let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 3, 25);
            let rep = check_axioms(&pro.chart, &pts, 1e-8).unwrap();
            assert!(rep.pass, "prolongation of {} fails: {rep:?}", parent.name);
        }
    }

    #[test]
    fn liouville_components_and_minus_d_theta() {
        let pro = prolong(&models::action_so3_sphere()).unwrap();
        let theta = liouville(&pro);
        let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 4, 10);
        for p in &pts {
            let comps = theta.comps_at(p).unwrap();
            for a in 0..3 {
                assert_eq!(comps[a], p[2 + a]); // Θ(𝒳_α) = y_α
                assert_eq!(comps[3 + a], 0.0); // Θ(𝒫) = 0
            }
            // at y = 0 the section vanishes
        }
        let mut zero_pt = pts[0].clone();
        zero_pt[2] = 0.0;
        zero_pt[3] = 0.0;
        zero_pt[4] = 0.0;
        assert!(theta.comps_at(&zero_pt).unwrap().iter().all(|v| *v == 0.0));

        // Ω = −dΘ componentwise
        let omega = canonical_symplectic(&pro).unwrap();
        let d_theta = differential(&theta).unwrap();
        for p in &pts {
            let lhs = omega.omega.comps_at(p).unwrap();
            let rhs = d_theta.comps_at(p).unwrap();
            for (l, r) in lhs.iter().zip(&rhs) {
                assert!(
                    (l + r).abs() < 1e-8,
                    "−dΘ ≠ Ω at {p:?}: {l} vs {}",
                    -r
                );
            }
        }
    }

    #[test]
    fn canonical_omega_abelian_block_form() {
        let pro = prolong(&models::abelian_lie_algebra(2)).unwrap();
        let omega = canonical_symplectic(&pro).unwrap();
        let m = omega.matrix_at(&[0.3, -0.7]).unwrap();
        let mut expect = Mat::zeros(4, 4);
        expect[(0, 2)] = 1.0;
        expect[(1, 3)] = 1.0;
        expect[(2, 0)] = -1.0;
        expect[(3, 1)] = -1.0;
        assert_eq!(m, expect);
    }

    #[test]
    fn canonical_omega_so3_structure_term() {
        // at y = (0,0,1): Ω(𝒳₁,𝒳₂) = C³₁₂ y₃ = 1
        let pro = prolong(&models::so3_lie_algebra()).unwrap();
        let omega = canonical_symplectic(&pro).unwrap();
        let m = omega.matrix_at(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(m[(0, 1)], 1.0);
        assert_eq!(m[(0, 3)], 1.0);
    }

    #[test]
    fn action_algebroid_omega_closed_form() {
        // Ω((ξ,β),(ξ′,β′)) = β′(ξ) − β(ξ′) + α·(ξ×ξ′) on the so(3) action case
        let pro = prolong(&models::action_so3_sphere()).unwrap();
        let omega = canonical_symplectic(&pro).unwrap();
        let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 11, 10);
        let pairs = crate::sample::sample_scalars(5, 120, -1.0, 1.0);
        for (k, p) in pts.iter().enumerate() {
            let alpha = &p[2..5];
            let xi: Vec<f64> = pairs[12 * k..12 * k + 3].to_vec();
            let beta: Vec<f64> = pairs[12 * k + 3..12 * k + 6].to_vec();
            let xi2: Vec<f64> = pairs[12 * k + 6..12 * k + 9].to_vec();
            let beta2: Vec<f64> = pairs[12 * k + 9..12 * k + 12].to_vec();
            let u: Vec<f64> = xi.iter().chain(&beta).copied().collect();
            let v: Vec<f64> = xi2.iter().chain(&beta2).copied().collect();
            let got = omega.omega.eval_on(p, &[&u, &v]).unwrap();
            let cross = [
                xi[1] * xi2[2] - xi[2] * xi2[1],
                xi[2] * xi2[0] - xi[0] * xi2[2],
                xi[0] * xi2[1] - xi[1] * xi2[0],
            ];
            let expect = linalg::dot(&beta2, &xi) - linalg::dot(&beta, &xi2)
                + alpha.iter().zip(&cross).map(|(a, c)| a * c).sum::<f64>();
            assert!((got - expect).abs() < 1e-12, "Ω closed form at {p:?}");
        }
    }

    use crate::linalg;

    #[test]
    fn canonical_omega_verifies_symplectic() {
        for parent in [models::so3_lie_algebra(), models::action_so3_sphere()] {
            let pro = prolong(&parent).unwrap();
            let mut omega = canonical_symplectic(&pro).unwrap();
            let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 13, 15);
            let rep = verify_symplectic(&mut omega, &pts, 1e-8).unwrap();
            assert!(rep.closed && rep.nondegenerate, "{rep:?}");
            assert!(rep.min_singular_value > 0.5);
        }
    }

    #[test]
    fn linear_poisson_closed_form_relations() {
        let parent = models::action_so3_sphere();
        let pro = prolong(&parent).unwrap();
        let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 17, 10);

        // pullbacks of base functions commute
        let f = base_function(
            &pro,
            Arc::new(|x: &[f64]| x[1].sin() + x[0].cos()),
            Some(Arc::new(|x: &[f64]| vec![-x[0].sin(), x[1].cos()])),
        );
        let g = base_function(
            &pro,
            Arc::new(|x: &[f64]| x[0].sin() * x[1]),
            Some(Arc::new(|x: &[f64]| vec![x[0].cos() * x[1], x[0].sin()])),
        );
        let fg = linear_poisson(&pro, &f, &g).unwrap();
        for p in &pts {
            assert!(fg.value(p).unwrap().abs() < 1e-12);
        }

        // {ŷ_α, ŷ_β} = −C^γ_αβ y_γ
        let y1 = dual_coordinate(&pro, 0);
        let y2 = dual_coordinate(&pro, 1);
        let y1y2 = linear_poisson(&pro, &y1, &y2).unwrap();
        for p in &pts {
            assert!((y1y2.value(p).unwrap() + p[4]).abs() < 1e-12); // −y₃
        }

        // {f∘τ, ŷ_α} = ρ(e_α)(f)∘τ
        let fy = linear_poisson(&pro, &f, &y1).unwrap();
        for p in &pts {
            let rho = parent.anchor_at(&p[..2]).unwrap();
            let grad = [-p[0].sin(), p[1].cos()];
            let expect: f64 = (0..2).map(|i| rho[(i, 0)] * grad[i]).sum();
            assert!((fy.value(p).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn minus_lie_poisson_on_so3_dual() {
        // {ŷ₁, ŷ₂} = −y₃ through the symplectic route as well
        let pro = prolong(&models::so3_lie_algebra()).unwrap();
        let omega = canonical_symplectic(&pro).unwrap();
        let y1 = dual_coordinate(&pro, 0);
        let y2 = dual_coordinate(&pro, 1);
        let pb = poisson_bracket(&omega, &y1, &y2).unwrap();
        let p = [0.3, -0.8, 0.55];
        assert!((pb.value(&p).unwrap() + p[2]).abs() < 1e-10);
        let lp = linear_poisson(&pro, &y1, &y2).unwrap();
        assert!((lp.value(&p).unwrap() - pb.value(&p).unwrap()).abs() < 1e-10);
    }
}
