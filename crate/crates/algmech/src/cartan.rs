//! Exterior calculus of a Lie algebroid: the differential d^A, interior
//! product, wedge product and pullback along morphisms.
//!
//! Convention: (α∧β)(u, v) = α(u)β(v) − α(v)β(u), no 1/2 factor. This is the
//! normalization that makes the canonical symplectic section of the
//! prolongation and the induced Poisson bracket agree simultaneously; the
//! consistency test lives in the prolongation module.

use std::sync::Arc;

use crate::chart::fd_step;
use crate::error::{structural, Result};
use crate::section::{
    component_from_stored, increasing_tuples, sort_with_sign, MorphismData, MultiSection, Section,
};

/// d^A μ via the alternating sum on frame sections:
/// dμ(X₀,…,X_k) = Σ (−1)^i ρ(X_i)(μ(…X̂_i…)) + Σ_{i<j} (−1)^{i+j} μ(⟦X_i,X_j⟧,…).
pub fn differential(mu: &MultiSection) -> Result<MultiSection> {
    let chart = mu.chart.clone();
    let n = chart.rank();
    let k = mu.degree;
    if k + 1 > n {
        return Err(structural(format!(
            "differential: degree {k} exceeds rank {n} − 1"
        )));
    }
    if k == 0 {
        // (d^A f)_α = ρ^i_α ∂_i f
        let f = mu.clone();
        let ch = chart.clone();
        let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
            let g = f.gradient_at(x).expect("gradient");
            let rho = ch.anchor_at(x).expect("anchor");
            (0..ch.rank())
                .map(|a| (0..ch.base_dim()).map(|i| rho[(i, a)] * g[i]).sum())
                .collect()
        });
        return Ok(MultiSection::new(chart, 1, comps));
    }

    let mu_cl = mu.clone();
    let ch = chart.clone();
    let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let m = ch.base_dim();
        let rho = ch.anchor_at(x).expect("anchor");
        let c = ch.structure_at(x).expect("structure");
        let stored = mu_cl.comps_at(x).expect("components");
        // ∂_j of every stored component by central differences
        let raw = mu_cl.raw();
        let mut dcomp: Vec<Vec<f64>> = Vec::with_capacity(m);
        for j in 0..m {
            let h = fd_step(x[j]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let cp = raw(&xp);
            let cm = raw(&xm);
            dcomp.push(
                cp.iter()
                    .zip(&cm)
                    .map(|(a, b)| (a - b) / (2.0 * h))
                    .collect(),
            );
        }
        let tuples_k = increasing_tuples(ch.rank(), k);
        let tuple_pos = |t: &[usize]| tuples_k.iter().position(|u| u[..] == t[..]).unwrap();
        increasing_tuples(ch.rank(), k + 1)
            .iter()
            .map(|t| {
                let mut total = 0.0;
                // ρ-transport terms
                for (i, &beta) in t.iter().enumerate() {
                    let rest: Vec<usize> = t
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != i)
                        .map(|(_, &b)| b)
                        .collect();
                    let pos = tuple_pos(&rest);
                    let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                    let mut transport = 0.0;
                    for jb in 0..m {
                        transport += rho[(jb, beta)] * dcomp[jb][pos];
                    }
                    total += sign * transport;
                }
                // bracket terms
                for i in 0..t.len() {
                    for j in (i + 1)..t.len() {
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        let rest: Vec<usize> = t
                            .iter()
                            .enumerate()
                            .filter(|&(l, _)| l != i && l != j)
                            .map(|(_, &b)| b)
                            .collect();
                        for g in 0..ch.rank() {
                            let cg = c.get(g, t[i], t[j]);
                            if cg == 0.0 {
                                continue;
                            }
                            let mut idx = Vec::with_capacity(k);
                            idx.push(g);
                            idx.extend_from_slice(&rest);
                            total += sign * cg * component_from_stored(&stored, ch.rank(), k, &idx);
                        }
                    }
                }
                total
            })
            .collect()
    });
    Ok(MultiSection::new(chart, k + 1, comps))
}

/// Interior product (i(X)μ)(Y₁,…,Y_{k−1}) = μ(X, Y₁,…).
pub fn contract(x_sec: &Section, mu: &MultiSection) -> Result<MultiSection> {
    if !x_sec.chart.same_chart(&mu.chart) {
        return Err(structural("contract: section and multisection charts differ"));
    }
    if mu.degree == 0 {
        return Err(structural("contract: cannot contract a degree-0 section"));
    }
    let chart = mu.chart.clone();
    let k = mu.degree;
    let n = chart.rank();
    let xs = x_sec.clone();
    let mc = mu.clone();
    let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let xv = xs.eval(x).expect("section eval");
        let stored = mc.comps_at(x).expect("components");
        increasing_tuples(n, k - 1)
            .iter()
            .map(|s| {
                let mut total = 0.0;
                for (a, &xa) in xv.iter().enumerate() {
                    if xa == 0.0 {
                        continue;
                    }
                    let mut idx = Vec::with_capacity(k);
                    idx.push(a);
                    idx.extend_from_slice(s);
                    total += xa * component_from_stored(&stored, n, k, &idx);
                }
                total
            })
            .collect()
    });
    Ok(MultiSection::new(chart, k - 1, comps))
}

/// Graded-commutative shuffle wedge.
pub fn wedge(mu: &MultiSection, nu: &MultiSection) -> Result<MultiSection> {
    if !mu.chart.same_chart(&nu.chart) {
        return Err(structural("wedge: charts differ"));
    }
    let chart = mu.chart.clone();
    let n = chart.rank();
    let (k1, k2) = (mu.degree, nu.degree);
    if k1 + k2 > n {
        return Err(structural(format!(
            "wedge: degree {} + {} exceeds rank {}",
            k1, k2, n
        )));
    }
    let (a, b) = (mu.clone(), nu.clone());
    let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let ca = a.comps_at(x).expect("components");
        let cb = b.comps_at(x).expect("components");
        let tuples_a = increasing_tuples(n, k1);
        let tuples_b = increasing_tuples(n, k2);
        increasing_tuples(n, k1 + k2)
            .iter()
            .map(|t| {
                let mut total = 0.0;
                for (ia, s) in tuples_a.iter().enumerate() {
                    if ca[ia] == 0.0 {
                        continue;
                    }
                    if !s.iter().all(|e| t.contains(e)) {
                        continue;
                    }
                    let comp: Vec<usize> =
                        t.iter().copied().filter(|e| !s.contains(e)).collect();
                    let ib = tuples_b.iter().position(|u| u[..] == comp[..]);
                    let Some(ib) = ib else { continue };
                    if cb[ib] == 0.0 {
                        continue;
                    }
                    let mut concat = s.clone();
                    concat.extend_from_slice(&comp);
                    let sign = sort_with_sign(&concat).map(|(_, s)| s).unwrap_or(0.0);
                    total += sign * ca[ia] * cb[ib];
                }
                total
            })
            .collect()
    });
    Ok(MultiSection::new(chart, k1 + k2, comps))
}

/// Pullback (F*μ)_x(a₁,…,a_k) = μ_{f(x)}(F a₁, …, F a_k).
pub fn pullback(fm: &MorphismData, mu: &MultiSection) -> Result<MultiSection> {
    if !fm.target.same_chart(&mu.chart) {
        return Err(structural("pullback: morphism target differs from section chart"));
    }
    let chart = fm.source.clone();
    let k = mu.degree;
    let f = fm.clone();
    let mc = mu.clone();
    if k == 0 {
        let f2 = fm.clone();
        let m2 = mu.clone();
        let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
            let y = f2.base_at(x).expect("base map");
            vec![m2.value(&y).expect("value")]
        });
        return Ok(MultiSection::new(chart, 0, comps));
    }
    let n_src = chart.rank();
    let comps = Arc::new(move |x: &[f64]| -> Vec<f64> {
        let y = f.base_at(x).expect("base map");
        let fm_mat = f.fiber_at(x).expect("fiber map");
        increasing_tuples(n_src, k)
            .iter()
            .map(|t| {
                let cols: Vec<Vec<f64>> = t.iter().map(|&a| fm_mat.col(a)).collect();
                let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
                mc.eval_on(&y, &refs).expect("eval_on")
            })
            .collect()
    });
    Ok(MultiSection::new(chart, k, comps))
}


#[cfg(test)]
mod functoriality_tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::models;
    use crate::sample::sample_box;
    use std::sync::Arc;

    /// Rotation by a fixed angle as an algebroid morphism of the so(3)
    /// action algebroid over the cylinder chart.
    fn rotation_morphism(chart: &std::sync::Arc<crate::chart::LieAlgebroidChart>, phi: f64) -> MorphismData {
        MorphismData::new(
            chart.clone(),
            chart.clone(),
            Arc::new(move |x: &[f64]| vec![x[0] + phi, x[1]]),
            Arc::new(move |_x: &[f64]| {
                let (s, c) = phi.sin_cos();
                Mat::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]])
            }),
        )
    }

    #[test]
    fn rotations_are_morphisms_and_pullback_is_functorial() {
        let chart = models::action_so3_sphere();
        let f = rotation_morphism(&chart, 0.7);
        let g = rotation_morphism(&chart, -0.4);
        let pts = sample_box(chart.box_hint.as_ref().unwrap(), 3, 10);
        let rep = crate::algebroid::is_morphism(&f, &pts, 1e-7).unwrap();
        assert!(rep.pass, "{rep:?}");

        let mu = MultiSection::new(
            chart.clone(),
            2,
            Arc::new(|p: &[f64]| vec![p[1], p[0].sin(), 1.0 + p[1] * p[1]]),
        );
        // (F∘G)* μ = G*(F* μ)
        let fg = MorphismData::compose(&f, &g).unwrap();
        let lhs = pullback(&fg, &mu).unwrap();
        let rhs = pullback(&g, &pullback(&f, &mu).unwrap()).unwrap();
        for p in &pts {
            let a = lhs.comps_at(p).unwrap();
            let b = rhs.comps_at(p).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12, "functoriality at {p:?}");
            }
        }
    }
}

#[cfg(test)]
mod contraction_oracle_tests {
    use super::*;
    use crate::models;
    use crate::prolongation::prolong;
    use crate::sample::sample_box;
    use std::sync::Arc;

    #[test]
    fn contract_frame_covector_wedge_is_dual_pairing() {
        // on the Lagrange-top prolongation: i(𝒳₁)(𝒳¹ ∧ 𝒫₁) = 𝒫₁-covector
        let pro = prolong(&models::action_so3_sphere()).unwrap();
        let n = pro.chart.rank(); // 6, frame (𝒳₁..𝒳₃, 𝒫¹..𝒫³)
        let x1_cov = MultiSection::new(
            pro.chart.clone(),
            1,
            Arc::new(move |_p: &[f64]| {
                let mut v = vec![0.0; n];
                v[0] = 1.0;
                v
            }),
        );
        let p1_cov = MultiSection::new(
            pro.chart.clone(),
            1,
            Arc::new(move |_p: &[f64]| {
                let mut v = vec![0.0; n];
                v[3] = 1.0;
                v
            }),
        );
        let w = wedge(&x1_cov, &p1_cov).unwrap();
        let e1 = Section::frame(pro.chart.clone(), 0);
        let contracted = contract(&e1, &w).unwrap();
        for p in sample_box(pro.chart.box_hint.as_ref().unwrap(), 23, 8) {
            let got = contracted.comps_at(&p).unwrap();
            let want = p1_cov.comps_at(&p).unwrap();
            // index bookkeeping oracle: the result is exactly the 𝒫₁ covector
            assert_eq!(got, want, "contraction bookkeeping at {p:?}");
        }
    }
}
