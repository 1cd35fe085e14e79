//! Symplectic and presymplectic 2-sections: flat/sharp maps, Hamiltonian
//! sections, the induced Poisson bracket, and the finite-dimensional
//! symplectic Lie algebra reducer.

use std::sync::Arc;

use crate::cartan::differential;
use crate::chart::{LieAlgebroidChart, StructureArray};
use crate::error::{structural, AlgError, Result};
use crate::linalg::{self, lstsq, nullspace_with_floor, solve_checked, Mat, RANK_REL_TOL};
use crate::section::{MultiSection, Section};

/// A 2-section with cached flat-map matrices and verification verdicts.
#[derive(Clone)]
pub struct SymplecticSection {
    pub chart: Arc<LieAlgebroidChart>,
    pub omega: MultiSection,
    pub closed_verified: bool,
    pub nondegenerate_verified: bool,
}

impl SymplecticSection {
    pub fn new(omega: MultiSection) -> Result<Self> {
        if omega.degree != 2 {
            return Err(structural("symplectic section must have degree 2"));
        }
        Ok(SymplecticSection {
            chart: omega.chart.clone(),
            omega,
            closed_verified: false,
            nondegenerate_verified: false,
        })
    }

    /// Ω_αβ(x) as an exactly skew matrix (rows: first slot).
    pub fn matrix_at(&self, x: &[f64]) -> Result<Mat> {
        let comps = self.omega.comps_at(x)?;
        let n = self.chart.rank();
        let mut m = Mat::zeros(n, n);
        let mut idx = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                m[(a, b)] = comps[idx];
                m[(b, a)] = -comps[idx];
                idx += 1;
            }
        }
        Ok(m)
    }
}

/// ♭(X) = i(X)Ω as a 1-section: (♭X)_β = Ω(X, e_β).
pub fn flat(omega: &SymplecticSection, x_sec: &Section) -> Result<MultiSection> {
    if !omega.chart.same_chart(&x_sec.chart) {
        return Err(structural("flat: chart mismatch"));
    }
    let om = omega.clone();
    let xs = x_sec.clone();
    let chart = omega.chart.clone();
    let comps = Arc::new(move |p: &[f64]| -> Vec<f64> {
        let m = om.matrix_at(p).expect("omega matrix");
        let v = xs.eval(p).expect("section");
        m.transpose().matvec(&v)
    });
    Ok(MultiSection::new(chart, 1, comps))
}

/// ♯(α) = ♭⁻¹(α), a dense solve per point. Degenerate points raise an error
/// carrying the point and a condition estimate.
pub fn sharp(omega: &SymplecticSection, alpha: &MultiSection) -> Result<Section> {
    if !omega.chart.same_chart(&alpha.chart) {
        return Err(structural("sharp: chart mismatch"));
    }
    if alpha.degree != 1 {
        return Err(structural("sharp expects a 1-section"));
    }
    let om = omega.clone();
    let al = alpha.clone();
    let chart = omega.chart.clone();
    Ok(Section::new(
        chart,
        Arc::new(move |p: &[f64]| -> Vec<f64> {
            sharp_value(&om, &al.comps_at(p).expect("covector"), p).expect("sharp solve")
        }),
    ))
}

/// Pointwise sharp on an explicit covector.
pub fn sharp_value(omega: &SymplecticSection, covector: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let m = omega.matrix_at(p)?;
    solve_checked(&m.transpose(), covector, p, "sharp")
}

/// The Hamiltonian section ℋ_f with i(ℋ_f)Ω = d^A f.
pub fn hamiltonian_section(omega: &SymplecticSection, f: &MultiSection) -> Result<Section> {
    if f.degree != 0 {
        return Err(structural("hamiltonian_section expects a scalar"));
    }
    let df = differential(f)?;
    sharp(omega, &df)
}

/// Induced Poisson bracket {f, g} = Ω(ℋ_f, ℋ_g).
pub fn poisson_bracket(
    omega: &SymplecticSection,
    f: &MultiSection,
    g: &MultiSection,
) -> Result<MultiSection> {
    let hf = hamiltonian_section(omega, f)?;
    let hg = hamiltonian_section(omega, g)?;
    let om = omega.clone();
    let chart = omega.chart.clone();
    Ok(MultiSection::scalar(
        chart,
        Arc::new(move |p: &[f64]| -> f64 {
            let m = om.matrix_at(p).expect("omega matrix");
            let u = hf.eval(p).expect("H_f");
            let v = hg.eval(p).expect("H_g");
            linalg::dot(&u, &m.matvec(&v))
        }),
    ))
}

/// Report from `verify_symplectic`.
#[derive(Debug, Clone)]
pub struct SymplecticReport {
    pub closedness_residual: f64,
    pub min_singular_value: f64,
    pub max_singular_value: f64,
    pub kernel_dim: usize,
    pub closed: bool,
    pub nondegenerate: bool,
}

/// Closedness (via d^A) and nondegeneracy (via singular values) across the
/// sample set; sets the section's verdict flags.
pub fn verify_symplectic(
    omega: &mut SymplecticSection,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<SymplecticReport> {
    let d_omega = if omega.chart.rank() >= 3 {
        Some(differential(&omega.omega)?)
    } else {
        None // a 2-section on a rank-2 algebroid is closed for degree reasons
    };
    let mut closed_res = 0.0f64;
    let mut min_sv = f64::INFINITY;
    let mut max_sv = 0.0f64;
    let mut kernel_dim = 0usize;
    for p in sample_points {
        if let Some(d) = &d_omega {
            for v in d.comps_at(p)? {
                closed_res = closed_res.max(v.abs());
            }
        }
        let m = omega.matrix_at(p)?;
        let svd = linalg::svd(&m);
        let smax = svd.sigma.first().copied().unwrap_or(0.0);
        let smin = svd.sigma.last().copied().unwrap_or(0.0);
        max_sv = max_sv.max(smax);
        min_sv = min_sv.min(smin);
        kernel_dim = kernel_dim.max(omega.chart.rank() - svd.rank(RANK_REL_TOL));
    }
    let closed = closed_res <= tol;
    let nondegenerate = kernel_dim == 0;
    omega.closed_verified = closed;
    omega.nondegenerate_verified = nondegenerate;
    Ok(SymplecticReport {
        closedness_residual: closed_res,
        min_singular_value: min_sv,
        max_singular_value: max_sv,
        kernel_dim,
        closed,
        nondegenerate,
    })
}

/// A finite-dimensional Lie algebra with a skew bilinear form.
#[derive(Debug, Clone)]
pub struct SymplecticLieAlgebra {
    pub constants: StructureArray,
    pub omega: Mat,
}

impl SymplecticLieAlgebra {
    pub fn new(constants: StructureArray, omega: Mat) -> Result<Self> {
        let n = constants.rank();
        if omega.rows() != n || omega.cols() != n {
            return Err(structural("omega dimension mismatch"));
        }
        let res = jacobi_residual(&constants);
        if res > 1e-12 {
            return Err(structural(format!(
                "structure constants violate the Jacobi identity (residual {res:e})"
            )));
        }
        Ok(SymplecticLieAlgebra { constants, omega })
    }

    pub fn dim(&self) -> usize {
        self.constants.rank()
    }

    pub fn bracket(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        self.constants.contract(u, v)
    }
}

/// Max |Σ_cyc c^δ_μγ c^μ_αβ| over all index choices.
pub fn jacobi_residual(c: &StructureArray) -> f64 {
    let n = c.rank();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in (a + 1)..n {
            for g in (b + 1)..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for &(x, y, z) in &[(a, b, g), (b, g, a), (g, a, b)] {
                        for mu in 0..n {
                            s += c.get(d, mu, z) * c.get(mu, x, y);
                        }
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Result of a symplectic Lie algebra reduction 𝔥/ker Ω_𝔥.
#[derive(Debug, Clone)]
pub struct ReducedLieAlgebra {
    pub algebra: SymplecticLieAlgebra,
    /// Orthonormal kernel basis of Ω_𝔥 inside 𝔥 (columns, ambient coords).
    pub kernel: Mat,
    /// Orthonormal complement basis (columns, ambient coords); the reduced
    /// frame maps to these representatives.
    pub complement: Mat,
}

/// Reduce a symplectic Lie algebra by a subalgebra: quotient 𝔥/ker Ω_𝔥 with
/// the inherited bracket and form. Errors when `h_basis` is not a subalgebra
/// or when the kernel fails to be an ideal of 𝔥.
pub fn reduce_symplectic_lie_algebra(
    g: &SymplecticLieAlgebra,
    h_basis: &[Vec<f64>],
) -> Result<ReducedLieAlgebra> {
    let n = g.dim();
    let k = h_basis.len();
    if k == 0 || h_basis.iter().any(|v| v.len() != n) {
        return Err(structural("subalgebra basis dimension mismatch"));
    }
    let h_mat = Mat::from_cols(h_basis);

    // subalgebra precondition: brackets re-expand over the basis
    let mut span_res = 0.0f64;
    for i in 0..k {
        for j in (i + 1)..k {
            let br = g.bracket(&h_basis[i], &h_basis[j]);
            let (_, r) = lstsq(&h_mat, &br);
            span_res = span_res.max(r);
        }
    }
    if span_res > 1e-10 {
        return Err(AlgError::NotASubalgebra { residual: span_res });
    }

    // Ω restricted to 𝔥 and its kernel (in 𝔥-coordinates, then ambient)
    let omega_h = Mat::from_fn(k, k, |i, j| {
        linalg::dot(&h_basis[i], &g.omega.matvec(&h_basis[j]))
    });
    // absolute floor: a restriction whose entries are pure roundoff of an
    // O(scale) ambient form is fully degenerate, not full-rank
    let h_scale = h_basis
        .iter()
        .map(|v| linalg::dot(v, v))
        .fold(0.0f64, f64::max)
        .max(1.0);
    let floor = 1e-12 * g.omega.max_abs().max(1.0) * h_scale;
    let ker_h = nullspace_with_floor(&omega_h, RANK_REL_TOL, floor);
    let p = ker_h.cols();
    let kernel = if p == 0 {
        Mat::zeros(n, 0)
    } else {
        // orthonormalized in ambient coordinates
        orthonormal_columns(&h_mat.matmul(&ker_h))
    };

    // ideal condition: [𝔥, ker] ⊆ ker
    if p > 0 {
        let mut ideal_res = 0.0f64;
        for i in 0..k {
            for z in 0..kernel.cols() {
                let br = g.bracket(&h_basis[i], &kernel.col(z));
                let (_, r) = lstsq(&kernel, &br);
                ideal_res = ideal_res.max(r);
            }
        }
        if ideal_res > 1e-9 {
            return Err(AlgError::IdealViolation { residual: ideal_res });
        }
    }

    // complement of the kernel inside 𝔥 under the ambient Euclidean product
    let proj_h = if p == 0 {
        h_mat.clone()
    } else {
        let kt = kernel.transpose();
        let coef = kt.matmul(&h_mat);
        h_mat.sub(&kernel.matmul(&coef))
    };
    let q_dim = k - p;
    let complement = leading_orthonormal(&proj_h, q_dim);

    // reduced structure constants and reduced form on the complement frame
    let stacked = {
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..complement.cols() {
            cols.push(complement.col(j));
        }
        for j in 0..kernel.cols() {
            cols.push(kernel.col(j));
        }
        Mat::from_cols(&cols)
    };
    let mut constants = StructureArray::zeros(q_dim);
    {
        for a in 0..q_dim {
            for b in (a + 1)..q_dim {
                let br = g.bracket(&complement.col(a), &complement.col(b));
                let (x, r) = lstsq(&stacked, &br);
                if r > 1e-9 {
                    return Err(structural(format!(
                        "reduced bracket left the subalgebra span (residual {r:e})"
                    )));
                }
                for c in 0..q_dim {
                    constants.set(c, a, b, x[c]);
                }
            }
        }
    }
    let omega_red = Mat::from_fn(q_dim, q_dim, |i, j| {
        linalg::dot(&complement.col(i), &g.omega.matvec(&complement.col(j)))
    });
    let algebra = SymplecticLieAlgebra::new(constants, omega_red)?;
    Ok(ReducedLieAlgebra {
        algebra,
        kernel,
        complement,
    })
}

/// Orthonormal basis of the column span (drops dependent columns).
fn orthonormal_columns(m: &Mat) -> Mat {
    let s = linalg::svd(m);
    let r = s.rank(RANK_REL_TOL);
    let cols: Vec<Vec<f64>> = (0..r).map(|j| s.u.col(j)).collect();
    let mut u = Mat::from_cols(&cols);
    fix_column_signs(&mut u);
    u
}

/// The leading `count` orthonormal directions of the column span.
fn leading_orthonormal(m: &Mat, count: usize) -> Mat {
    let s = linalg::svd(m);
    let cols: Vec<Vec<f64>> = (0..count).map(|j| s.u.col(j)).collect();
    let mut u = Mat::from_cols(&cols);
    fix_column_signs(&mut u);
    u
}

/// Deterministic sign convention: largest-|entry| component positive.
fn fix_column_signs(m: &mut Mat) {
    for j in 0..m.cols() {
        let col = m.col(j);
        let mut imax = 0;
        for i in 0..col.len() {
            if col[i].abs() > col[imax].abs() {
                imax = i;
            }
        }
        if col[imax] < 0.0 {
            for i in 0..col.len() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}
