//! Core operations on a chart-level Lie algebroid: section brackets, axiom
//! verification by sampled residuals, anchor application and the morphism
//! test.

use std::sync::Arc;

use crate::chart::{fd_jacobian, LieAlgebroidChart};
use crate::error::{structural, Result};
use crate::linalg::{self, Mat};
use crate::section::{MorphismData, Section};

/// ⟦X, Y⟧ in coordinates:
/// [X,Y]^γ = C^γ_αβ X^α Y^β + ρ^i_α X^α ∂_i Y^γ − ρ^i_β Y^β ∂_i X^γ.
///
/// Derivatives of the coefficient functions come from analytic Jacobians
/// when both sections carry them, else central finite differences.
pub fn bracket(x_sec: &Section, y_sec: &Section) -> Result<Section> {
    if !x_sec.chart.same_chart(&y_sec.chart) {
        return Err(structural("bracket: sections on different charts"));
    }
    let chart = x_sec.chart.clone();
    let xs = x_sec.clone();
    let ys = y_sec.clone();
    let ch = chart.clone();
    let coeffs = Arc::new(move |p: &[f64]| -> Vec<f64> {
        bracket_value(&ch, &xs, &ys, p).expect("bracket evaluation")
    });
    Ok(Section::new(chart, coeffs))
}

/// The bracket coefficients at one point; the eager form used internally.
pub fn bracket_value(
    chart: &LieAlgebroidChart,
    x_sec: &Section,
    y_sec: &Section,
    p: &[f64],
) -> Result<Vec<f64>> {
    let xv = x_sec.eval(p)?;
    let yv = y_sec.eval(p)?;
    let c = chart.structure_at(p)?;
    let rho = chart.anchor_at(p)?;
    let jx = x_sec.jacobian_at(p)?;
    let jy = y_sec.jacobian_at(p)?;
    let n = chart.rank();
    let m = chart.base_dim();
    let mut out = c.contract(&xv, &yv);
    // ρ-transport of coefficients
    for g in 0..n {
        let mut acc = 0.0;
        for i in 0..m {
            let mut rho_x = 0.0;
            let mut rho_y = 0.0;
            for a in 0..n {
                rho_x += rho[(i, a)] * xv[a];
                rho_y += rho[(i, a)] * yv[a];
            }
            acc += rho_x * jy[(g, i)] - rho_y * jx[(g, i)];
        }
        out[g] += acc;
    }
    Ok(out)
}

/// ρ(x)·X(x): the tangent vector the section maps to under the anchor.
pub fn apply_anchor(x_sec: &Section, p: &[f64]) -> Result<Vec<f64>> {
    let chart = &x_sec.chart;
    let rho = chart.anchor_at(p)?;
    let v = x_sec.eval(p)?;
    Ok(rho.matvec(&v))
}

/// The anchor applied to a scalar function: (ρX)(f)(x).
pub fn anchor_derivative(
    x_sec: &Section,
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    p: &[f64],
) -> Result<f64> {
    let v = apply_anchor(x_sec, p)?;
    let g = grad(p);
    let _ = f;
    Ok(linalg::dot(&v, &g))
}

/// Residual report from `check_axioms`.
#[derive(Debug, Clone)]
pub struct AxiomReport {
    pub jacobi_residual: f64,
    pub anchor_residual: f64,
    pub leibniz_residual: f64,
    pub tol: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
}

impl AxiomReport {
    pub fn max_residual(&self) -> f64 {
        self.jacobi_residual
            .max(self.anchor_residual)
            .max(self.leibniz_residual)
    }
}

/// Verify the algebroid axioms by sampled residuals:
/// (a) Jacobi identity on all frame triples,
/// (b) the anchor is a bracket morphism on frame pairs,
/// (c) the Leibniz rule on randomized (X, f, Y).
pub fn check_axioms(
    chart: &Arc<LieAlgebroidChart>,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<AxiomReport> {
    if sample_points.is_empty() {
        return Err(structural("check_axioms: empty sample set"));
    }
    let n = chart.rank();
    let m = chart.base_dim();
    let mut jac_res = 0.0f64;
    let mut anc_res = 0.0f64;
    let mut worst = sample_points[0].clone();

    for p in sample_points {
        let c = chart.structure_at(p)?;
        let rho = chart.anchor_at(p)?;
        let dc = chart.structure_partials_at(p)?;
        let drho = chart.anchor_partials_at(p)?;

        // (a) Jacobi on frame triples:
        // Σ_cyc [ C^δ_μγ C^μ_αβ − ρ^i_γ ∂_i C^δ_αβ ] = 0
        for a in 0..n {
            for b in (a + 1)..n {
                for g in (b + 1)..n {
                    for d in 0..n {
                        let mut s = 0.0;
                        for &(x, y, z) in &[(a, b, g), (b, g, a), (g, a, b)] {
                            let mut cc = 0.0;
                            for mu in 0..n {
                                cc += c.get(d, mu, z) * c.get(mu, x, y);
                            }
                            let mut transport = 0.0;
                            for i in 0..m {
                                transport += rho[(i, z)] * dc[i].get(d, x, y);
                            }
                            s += cc - transport;
                        }
                        if s.abs() > jac_res {
                            jac_res = s.abs();
                            worst = p.clone();
                        }
                    }
                }
            }
        }

        // (b) anchor morphism: ρ^i_γ C^γ_αβ = Σ_j (ρ^j_α ∂_j ρ^i_β − ρ^j_β ∂_j ρ^i_α)
        for a in 0..n {
            for b in (a + 1)..n {
                for i in 0..m {
                    let mut lhs = 0.0;
                    for g in 0..n {
                        lhs += rho[(i, g)] * c.get(g, a, b);
                    }
                    let mut rhs = 0.0;
                    for j in 0..m {
                        rhs += rho[(j, a)] * drho[j][(i, b)] - rho[(j, b)] * drho[j][(i, a)];
                    }
                    let r = (lhs - rhs).abs();
                    if r > anc_res {
                        anc_res = r;
                        worst = p.clone();
                    }
                }
            }
        }
    }

    // (c) Leibniz on randomized (X, f, Y): FD-based, checked on a few points.
    let mut lei_res = 0.0f64;
    let coeffs_x = crate::sample::sample_scalars(11, n, -1.0, 1.0);
    let coeffs_y = crate::sample::sample_scalars(13, n, -1.0, 1.0);
    let waves = crate::sample::sample_scalars(17, m, 0.3, 1.2);
    let x_sec = Section::constant(chart.clone(), coeffs_x);
    let waves_f = waves.clone();
    let f = move |p: &[f64]| -> f64 {
        1.0 + p
            .iter()
            .zip(&waves_f)
            .map(|(xi, wi)| (wi * xi).sin())
            .sum::<f64>()
    };
    let waves_g = waves.clone();
    let grad = move |p: &[f64]| -> Vec<f64> {
        p.iter()
            .zip(&waves_g)
            .map(|(xi, wi)| wi * (wi * xi).cos())
            .collect()
    };
    let y_sec = Section::constant(chart.clone(), coeffs_y);
    let f_arc = Arc::new(f);
    let y_raw = y_sec.raw();
    let f_for_fy = f_arc.clone();
    let fy = Section::new(
        chart.clone(),
        Arc::new(move |p: &[f64]| {
            let s = f_for_fy(p);
            y_raw(p).iter().map(|v| s * v).collect()
        }),
    );
    for p in sample_points.iter().take(8) {
        let lhs = bracket_value(chart, &x_sec, &fy, p)?;
        let b_xy = bracket_value(chart, &x_sec, &y_sec, p)?;
        let fv = f_arc(p);
        let rx_f = anchor_derivative(&x_sec, f_arc.as_ref(), &grad, p)?;
        let yv = y_sec.eval(p)?;
        for g in 0..n {
            let r = (lhs[g] - fv * b_xy[g] - rx_f * yv[g]).abs();
            lei_res = lei_res.max(r);
        }
    }

    let pass = jac_res <= tol && anc_res <= tol && lei_res <= (10.0 * tol).max(1e-4);
    Ok(AxiomReport {
        jacobi_residual: jac_res,
        anchor_residual: anc_res,
        leibniz_residual: lei_res,
        tol,
        pass,
        worst_point: worst,
    })
}

/// Residual report from `is_morphism`.
#[derive(Debug, Clone)]
pub struct MorphismReport {
    /// max residual of d^A(g'∘f) = F*(d^{A'}g') on target coordinates
    pub function_residual: f64,
    /// max residual of d^A(F*α') = F*(d^{A'}α') on target frame covectors
    pub covector_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Test the Lie algebroid morphism conditions on frame 1-sections and
/// coordinate functions of the target.
pub fn is_morphism(
    fm: &MorphismData,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<MorphismReport> {
    let src = &fm.source;
    let tgt = &fm.target;
    let n_src = src.rank();
    let n_tgt = tgt.rank();
    let m_tgt = tgt.base_dim();
    let mut fun_res = 0.0f64;
    let mut cov_res = 0.0f64;

    for p in sample_points {
        let y = fm.base_at(p)?;
        let fmat = fm.fiber_at(p)?;
        let rho_src = src.anchor_at(p)?;
        let rho_tgt = tgt.anchor_at(&y)?;
        let c_src = src.structure_at(p)?;
        let c_tgt = tgt.structure_at(&y)?;
        let bm = fm.base_map.clone();
        let jac_f = fd_jacobian(&move |q: &[f64]| bm(q), p, m_tgt);

        // anchor compatibility: Tf ∘ ρ = ρ' ∘ F.
        let lhs = jac_f.matmul(&rho_src);
        let rhs = rho_tgt.matmul(&fmat);
        fun_res = fun_res.max(lhs.sub(&rhs).max_abs());

        // bracket compatibility through d on frame covectors:
        // ρ^i_α ∂_i F^γ_β − ρ^i_β ∂_i F^γ_α − C^μ_αβ F^γ_μ + Σ_{ab} F^a_α F^b_β C'^γ_ab = 0
        let fiber = fm.fiber_map.clone();
        let dfib: Vec<Mat> = {
            let mut v = Vec::with_capacity(src.base_dim());
            for j in 0..src.base_dim() {
                let h = crate::chart::fd_step(p[j]);
                let mut pp = p.to_vec();
                let mut pm = p.to_vec();
                pp[j] += h;
                pm[j] -= h;
                v.push(fiber(&pp).sub(&fiber(&pm)).scale(1.0 / (2.0 * h)));
            }
            v
        };
        for a in 0..n_src {
            for b in (a + 1)..n_src {
                for g in 0..n_tgt {
                    let mut r = 0.0;
                    for i in 0..src.base_dim() {
                        r += rho_src[(i, a)] * dfib[i][(g, b)] - rho_src[(i, b)] * dfib[i][(g, a)];
                    }
                    for mu in 0..n_src {
                        r -= c_src.get(mu, a, b) * fmat[(g, mu)];
                    }
                    for ta in 0..n_tgt {
                        for tb in 0..n_tgt {
                            if ta == tb {
                                continue;
                            }
                            r += 0.5 * fmat[(ta, a)] * fmat[(tb, b)] * c_tgt.get(g, ta, tb)
                                - 0.5 * fmat[(ta, b)] * fmat[(tb, a)] * c_tgt.get(g, ta, tb);
                        }
                    }
                    cov_res = cov_res.max(r.abs());
                }
            }
        }
    }
    Ok(MorphismReport {
        function_residual: fun_res,
        covector_residual: cov_res,
        tol,
        pass: fun_res <= tol && cov_res <= tol,
    })
}
