//! Small dense matrices: LU solves, one-sided Jacobi SVD, least squares and
//! nullspaces for the fiber dimensions that occur here (n ≤ 12 or so).

use crate::error::{AlgError, Result};

/// Relative singular-value threshold below which a direction counts as null.
pub const RANK_REL_TOL: f64 = 1e-9;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        Mat::from_fn(r, c, |i, j| rows[i][j])
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<f64>]) -> Self {
        let c = cols.len();
        let r = if c == 0 { 0 } else { cols[0].len() };
        Mat::from_fn(r, c, |i, j| cols[j][i])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Solve a square system by LU with partial pivoting.
pub fn solve(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(a.rows(), a.cols(), "solve expects a square matrix");
    assert_eq!(a.rows(), b.len());
    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.to_vec();
    let scale = lu.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let mut p = k;
        for i in k + 1..n {
            if lu[(i, k)].abs() > lu[(p, k)].abs() {
                p = i;
            }
        }
        if lu[(p, k)].abs() <= 1e-13 * scale {
            return Err(AlgError::Degenerate {
                point: Vec::new(),
                condition: lu[(p, k)].abs() / scale,
                context: "lu solve",
            });
        }
        if p != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(p, j)];
                lu[(p, j)] = t;
            }
            x.swap(k, p);
        }
        for i in k + 1..n {
            let f = lu[(i, k)] / lu[(k, k)];
            lu[(i, k)] = f;
            for j in k + 1..n {
                lu[(i, j)] -= f * lu[(k, j)];
            }
            x[i] -= f * x[k];
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            x[i] -= lu[(i, j)] * x[j];
        }
        x[i] /= lu[(i, i)];
    }
    Ok(x)
}

/// Thin SVD `A = U Σ Vᵀ` with Σ sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// rows(A) × k, orthonormal columns (k = min(rows, cols)).
    pub u: Mat,
    pub sigma: Vec<f64>,
    /// cols(A) × k, orthonormal columns.
    pub v: Mat,
}

impl Svd {
    pub fn rank(&self, rel_tol: f64) -> usize {
        self.rank_with_floor(rel_tol, 0.0)
    }

    /// Rank with a relative threshold plus an absolute floor; the floor keeps
    /// matrices whose entries are pure roundoff from looking full-rank.
    pub fn rank_with_floor(&self, rel_tol: f64, floor: f64) -> usize {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        let cut = (rel_tol * smax).max(floor);
        self.sigma.iter().filter(|&&s| s > cut).count()
    }

    pub fn condition(&self) -> f64 {
        let smax = self.sigma.first().copied().unwrap_or(0.0);
        let smin = self.sigma.last().copied().unwrap_or(0.0);
        if smin == 0.0 {
            f64::INFINITY
        } else {
            smax / smin
        }
    }
}

/// One-sided Jacobi SVD. Deterministic: fixed sweep order and a sign
/// convention that makes the largest-magnitude entry of each V column
/// positive.
pub fn svd(a: &Mat) -> Svd {
    if a.rows() < a.cols() {
        let s = svd(&a.transpose());
        return Svd {
            u: s.v,
            sigma: s.sigma,
            v: s.u,
        };
    }
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone(); // columns get rotated in place
    let mut v = Mat::identity(n);
    let eps = f64::EPSILON;
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let mut apq = 0.0;
                let mut app = 0.0;
                let mut aqq = 0.0;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    apq += x * y;
                    app += x * x;
                    aqq += y * y;
                }
                off = off.max(apq.abs() / (app * aqq).sqrt().max(f64::MIN_POSITIVE));
                if apq.abs() <= 0.5 * eps * (app * aqq).sqrt() {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let x = w[(i, p)];
                    let y = w[(i, q)];
                    w[(i, p)] = c * x - s * y;
                    w[(i, q)] = s * x + c * y;
                }
                for i in 0..n {
                    let x = v[(i, p)];
                    let y = v[(i, q)];
                    v[(i, p)] = c * x - s * y;
                    v[(i, q)] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sigma: Vec<f64> = (0..n).map(|j| norm(&w.col(j))).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].partial_cmp(&sigma[i]).unwrap());
    let mut u = Mat::zeros(m, n);
    let mut vs = Mat::zeros(n, n);
    let sig = sigma.clone();
    for (newj, &oldj) in order.iter().enumerate() {
        sigma[newj] = sig[oldj];
        // sign fix: largest-|entry| component of the V column positive
        let vcol = v.col(oldj);
        let mut imax = 0;
        for i in 0..n {
            if vcol[i].abs() > vcol[imax].abs() {
                imax = i;
            }
        }
        let flip = if vcol[imax] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vs[(i, newj)] = flip * vcol[i];
        }
        let s = sig[oldj];
        if s > 0.0 {
            for i in 0..m {
                u[(i, newj)] = flip * w[(i, oldj)] / s;
            }
        }
    }
    Svd { u, sigma, v: vs }
}

/// Least-squares solve min ‖Ax − b‖ through the SVD pseudo-inverse.
/// Returns the solution and the residual norm.
pub fn lstsq(a: &Mat, b: &[f64]) -> (Vec<f64>, f64) {
    assert_eq!(a.rows(), b.len());
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let mut x = vec![0.0; a.cols()];
    for k in 0..s.sigma.len() {
        if smax == 0.0 || s.sigma[k] <= RANK_REL_TOL * smax {
            continue;
        }
        let coef = dot(&s.u.col(k), b) / s.sigma[k];
        axpy(&mut x, coef, &s.v.col(k));
    }
    let r = sub_vec(&a.matvec(&x), b);
    (x, norm(&r))
}

/// Orthonormal basis (as columns) of the nullspace of `a`, using the
/// relative singular-value threshold `rel_tol`.
pub fn nullspace(a: &Mat, rel_tol: f64) -> Mat {
    nullspace_with_floor(a, rel_tol, 0.0)
}

/// Nullspace with the same absolute floor semantics as `rank_with_floor`.
pub fn nullspace_with_floor(a: &Mat, rel_tol: f64, floor: f64) -> Mat {
    if a.cols() == 0 {
        return Mat::zeros(0, 0);
    }
    if a.rows() == 0 {
        return Mat::identity(a.cols());
    }
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let cut = (rel_tol * smax).max(floor);
    let null_cols: Vec<Vec<f64>> = (0..s.sigma.len())
        .filter(|&k| s.sigma[k] <= cut)
        .map(|k| s.v.col(k))
        .collect();
    // For a wide matrix the thin SVD misses cols(A) − rows(A) null directions;
    // callers here only pass square or tall matrices.
    debug_assert!(a.rows() >= a.cols());
    if null_cols.is_empty() {
        return Mat::zeros(a.cols(), 0);
    }
    Mat::from_cols(&null_cols)
}

/// Solve Ax = b where A may be rectangular/singular, but report degeneracy
/// when the system is square and rank-deficient (used by sharp maps).
pub fn solve_checked(a: &Mat, b: &[f64], point: &[f64], context: &'static str) -> Result<Vec<f64>> {
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let smin = s.sigma.last().copied().unwrap_or(0.0);
    if smax == 0.0 || smin <= RANK_REL_TOL * smax {
        return Err(AlgError::Degenerate {
            point: point.to_vec(),
            condition: if smin == 0.0 { f64::INFINITY } else { smax / smin },
            context,
        });
    }
    let mut x = vec![0.0; a.cols()];
    for k in 0..s.sigma.len() {
        let coef = dot(&s.u.col(k), b) / s.sigma[k];
        axpy(&mut x, coef, &s.v.col(k));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn svd_reconstructs() {
        let a = Mat::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![-0.3, 0.7, 1.1],
            vec![0.0, 4.0, -2.0],
            vec![2.2, -1.0, 0.1],
        ]);
        let s = svd(&a);
        let mut sig = Mat::zeros(3, 3);
        for k in 0..3 {
            sig[(k, k)] = s.sigma[k];
        }
        let rec = s.u.matmul(&sig).matmul(&s.v.transpose());
        assert!(rec.sub(&a).max_abs() < 1e-12);
        // orthonormal V
        let vtv = s.v.transpose().matmul(&s.v);
        assert!(vtv.sub(&Mat::identity(3)).max_abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        let ns = nullspace(&a, RANK_REL_TOL);
        assert_eq!(ns.cols(), 1);
        let v = ns.col(0);
        assert!(norm(&a.matvec(&v)) < 1e-12);
    }

    #[test]
    fn lstsq_consistent_and_inconsistent() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let (x, r) = lstsq(&a, &[1.0, 2.0, 3.0]);
        assert!(r < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        let (_, r2) = lstsq(&a, &[1.0, 2.0, 0.0]);
        assert!(r2 > 1.0);
    }

    #[test]
    fn svd_deterministic_bitwise() {
        let a = Mat::from_rows(&[vec![0.3, -1.2, 0.8], vec![1.5, 0.2, -0.4], vec![0.0, 0.9, 2.0]]);
        let s1 = svd(&a);
        let s2 = svd(&a);
        assert_eq!(s1.sigma, s2.sigma);
        assert_eq!(s1.v, s2.v);
    }
}
