//! Chart-level representation of a Lie algebroid: anchor and structure
//! functions over a single coordinate chart, with optional analytic partials.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use crate::error::{structural, AlgError, Result};
use crate::linalg::Mat;
use crate::sample::ChartBox;

static CHART_IDS: AtomicU64 = AtomicU64::new(1);

/// A point of the base chart (coordinates x^i, length = base dimension).
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        ChartPoint { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

impl From<Vec<f64>> for ChartPoint {
    fn from(coords: Vec<f64>) -> Self {
        ChartPoint::new(coords)
    }
}

/// Antisymmetric structure field C^γ_αβ(x), stored only on strictly
/// increasing pairs (α < β) so antisymmetry holds by construction.
///
/// Layout: `data[pair_index(α,β) * n + γ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureArray {
    n: usize,
    data: Vec<f64>,
}

impl StructureArray {
    pub fn zeros(n: usize) -> Self {
        let pairs = if n < 2 { 0 } else { n * (n - 1) / 2 };
        StructureArray {
            n,
            data: vec![0.0; pairs * n],
        }
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn pair_count(n: usize) -> usize {
        if n < 2 {
            0
        } else {
            n * (n - 1) / 2
        }
    }

    /// Index of the (α, β) pair with α < β in lexicographic order.
    pub fn pair_index(n: usize, alpha: usize, beta: usize) -> usize {
        debug_assert!(alpha < beta && beta < n);
        alpha * n - alpha * (alpha + 1) / 2 + (beta - alpha - 1)
    }

    /// Set C^γ_αβ for α < β (the (β, α) value is implied by antisymmetry).
    pub fn set(&mut self, gamma: usize, alpha: usize, beta: usize, value: f64) {
        assert!(alpha < beta, "store only strictly increasing pairs");
        let p = Self::pair_index(self.n, alpha, beta);
        self.data[p * self.n + gamma] = value;
    }

    /// C^γ_αβ with antisymmetry applied for any index order.
    pub fn get(&self, gamma: usize, alpha: usize, beta: usize) -> f64 {
        if alpha == beta {
            return 0.0;
        }
        let (a, b, sign) = if alpha < beta {
            (alpha, beta, 1.0)
        } else {
            (beta, alpha, -1.0)
        };
        let p = Self::pair_index(self.n, a, b);
        sign * self.data[p * self.n + gamma]
    }

    /// The bracket coefficients ⟦e_α, e_β⟧^γ as a vector over γ.
    pub fn bracket_of_frames(&self, alpha: usize, beta: usize) -> Vec<f64> {
        (0..self.n).map(|g| self.get(g, alpha, beta)).collect()
    }

    /// Contraction C^γ_αβ u^α v^β over all α, β.
    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for a in 0..n {
            for b in (a + 1)..n {
                let w = u[a] * v[b] - u[b] * v[a];
                if w == 0.0 {
                    continue;
                }
                let p = Self::pair_index(n, a, b);
                for g in 0..n {
                    out[g] += w * self.data[p * n + g];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub type AnchorFn = dyn Fn(&[f64]) -> Mat + Send + Sync;
pub type StructureFn = dyn Fn(&[f64]) -> StructureArray + Send + Sync;
/// Partial derivatives with respect to each base coordinate, in order.
pub type AnchorPartialsFn = dyn Fn(&[f64]) -> Vec<Mat> + Send + Sync;
pub type StructurePartialsFn = dyn Fn(&[f64]) -> Vec<StructureArray> + Send + Sync;

/// A rank-n Lie algebroid over an m-dimensional chart.
///
/// `anchor(x)` is the m×n matrix ρ^i_α (row = base index i, column = frame
/// index α); `structure(x)` holds C^γ_αβ. Both must evaluate
/// deterministically. Analytic partials, when supplied, make axiom residuals
/// tight; otherwise central finite differences are used.
pub struct LieAlgebroidChart {
    id: u64,
    pub name: String,
    base_dim: usize,
    rank: usize,
    pub coord_labels: Vec<String>,
    pub frame_labels: Vec<String>,
    /// Coordinates that are angles, wrapped to [0, 2π) on output only.
    pub angle_coords: Vec<usize>,
    pub box_hint: Option<ChartBox>,
    anchor: Arc<AnchorFn>,
    structure: Arc<StructureFn>,
    anchor_partials: Option<Arc<AnchorPartialsFn>>,
    structure_partials: Option<Arc<StructurePartialsFn>>,
}

impl std::fmt::Debug for LieAlgebroidChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LieAlgebroidChart")
            .field("name", &self.name)
            .field("base_dim", &self.base_dim)
            .field("rank", &self.rank)
            .finish()
    }
}

impl LieAlgebroidChart {
    pub fn new(
        name: impl Into<String>,
        base_dim: usize,
        rank: usize,
        anchor: Arc<AnchorFn>,
        structure: Arc<StructureFn>,
    ) -> Self {
        assert!(rank >= 1, "rank must be at least 1");
        LieAlgebroidChart {
            id: CHART_IDS.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            base_dim,
            rank,
            coord_labels: (0..base_dim).map(|i| format!("x{}", i + 1)).collect(),
            frame_labels: (0..rank).map(|a| format!("e{}", a + 1)).collect(),
            angle_coords: Vec::new(),
            box_hint: None,
            anchor,
            structure,
            anchor_partials: None,
            structure_partials: None,
        }
    }

    pub fn with_labels(mut self, coords: Vec<String>, frames: Vec<String>) -> Self {
        assert_eq!(coords.len(), self.base_dim);
        assert_eq!(frames.len(), self.rank);
        self.coord_labels = coords;
        self.frame_labels = frames;
        self
    }

    pub fn with_angles(mut self, angle_coords: Vec<usize>) -> Self {
        self.angle_coords = angle_coords;
        self
    }

    pub fn with_box(mut self, bx: ChartBox) -> Self {
        assert_eq!(bx.dim(), self.base_dim);
        self.box_hint = Some(bx);
        self
    }

    pub fn with_partials(
        mut self,
        anchor_partials: Arc<AnchorPartialsFn>,
        structure_partials: Arc<StructurePartialsFn>,
    ) -> Self {
        self.anchor_partials = Some(anchor_partials);
        self.structure_partials = Some(structure_partials);
        self
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.anchor_partials.is_some() && self.structure_partials.is_some()
    }

    pub fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.base_dim {
            return Err(structural(format!(
                "point dimension {} does not match base dimension {} of chart '{}'",
                x.len(),
                self.base_dim,
                self.name
            )));
        }
        Ok(())
    }

    /// ρ(x) as an m×n matrix.
    pub fn anchor_at(&self, x: &[f64]) -> Result<Mat> {
        self.check_point(x)?;
        let m = (self.anchor)(x);
        assert_eq!((m.rows(), m.cols()), (self.base_dim, self.rank));
        if !m.is_finite() {
            return Err(AlgError::NonFinite {
                op: "anchor",
                point: x.to_vec(),
            });
        }
        Ok(m)
    }

    /// C(x).
    pub fn structure_at(&self, x: &[f64]) -> Result<StructureArray> {
        self.check_point(x)?;
        let c = (self.structure)(x);
        assert_eq!(c.rank(), self.rank);
        if !c.is_finite() {
            return Err(AlgError::NonFinite {
                op: "structure",
                point: x.to_vec(),
            });
        }
        Ok(c)
    }

    /// ∂ρ/∂x^j for every j, analytic when available, else central FD.
    pub fn anchor_partials_at(&self, x: &[f64]) -> Result<Vec<Mat>> {
        self.check_point(x)?;
        if let Some(p) = &self.anchor_partials {
            return Ok(p(x));
        }
        let mut out = Vec::with_capacity(self.base_dim);
        for j in 0..self.base_dim {
            let h = fd_step(x[j]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let mp = (self.anchor)(&xp);
            let mm = (self.anchor)(&xm);
            out.push(mp.sub(&mm).scale(1.0 / (2.0 * h)));
        }
        Ok(out)
    }

    /// ∂C/∂x^j for every j.
    pub fn structure_partials_at(&self, x: &[f64]) -> Result<Vec<StructureArray>> {
        self.check_point(x)?;
        if let Some(p) = &self.structure_partials {
            return Ok(p(x));
        }
        let n = self.rank;
        let mut out = Vec::with_capacity(self.base_dim);
        for j in 0..self.base_dim {
            let h = fd_step(x[j]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            let cp = (self.structure)(&xp);
            let cm = (self.structure)(&xm);
            let mut d = StructureArray::zeros(n);
            for a in 0..n {
                for b in (a + 1)..n {
                    for g in 0..n {
                        d.set(g, a, b, (cp.get(g, a, b) - cm.get(g, a, b)) / (2.0 * h));
                    }
                }
            }
            out.push(d);
        }
        Ok(out)
    }

    pub fn same_chart(&self, other: &LieAlgebroidChart) -> bool {
        self.id == other.id
    }

    /// A copy with new labels but the same chart identity (sections built on
    /// either copy interoperate).
    pub fn relabel(&self, coords: Vec<String>, frames: Vec<String>) -> LieAlgebroidChart {
        assert_eq!(coords.len(), self.base_dim);
        assert_eq!(frames.len(), self.rank);
        LieAlgebroidChart {
            id: self.id,
            name: self.name.clone(),
            base_dim: self.base_dim,
            rank: self.rank,
            coord_labels: coords,
            frame_labels: frames,
            angle_coords: self.angle_coords.clone(),
            box_hint: self.box_hint.clone(),
            anchor: self.anchor.clone(),
            structure: self.structure.clone(),
            anchor_partials: self.anchor_partials.clone(),
            structure_partials: self.structure_partials.clone(),
        }
    }

    /// Default axiom tolerance: tight when analytic partials are present,
    /// loose enough to absorb FD truncation otherwise.
    pub fn default_tol(&self) -> f64 {
        if self.has_analytic_partials() {
            1e-8
        } else {
            1e-5
        }
    }
}

/// Central-difference step h = ε^(1/3)·max(1, |x|).
pub fn fd_step(x: f64) -> f64 {
    f64::EPSILON.powf(1.0 / 3.0) * x.abs().max(1.0)
}

/// Gradient of a scalar function of the chart coordinates by central FD.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let h = fd_step(x[j]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[j] += h;
            xm[j] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

/// Jacobian (rows = output components, cols = input coords) by central FD.
pub fn fd_jacobian(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], out_dim: usize) -> Mat {
    let mut jac = Mat::zeros(out_dim, x.len());
    for j in 0..x.len() {
        let h = fd_step(x[j]);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let fp = f(&xp);
        let fm = f(&xm);
        for i in 0..out_dim {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_array_antisymmetry_by_storage() {
        let mut c = StructureArray::zeros(3);
        c.set(2, 0, 1, 1.0); // C^3_12 = 1
        assert_eq!(c.get(2, 0, 1), 1.0);
        assert_eq!(c.get(2, 1, 0), -1.0);
        assert_eq!(c.get(2, 1, 1), 0.0);
        let v = c.contract(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]);
        assert_eq!(v, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn fd_gradient_matches_analytic() {
        let f = |x: &[f64]| x[0] * x[0] * x[1] + x[1].sin();
        let g = fd_gradient(&f, &[1.2, 0.7]);
        assert!((g[0] - 2.0 * 1.2 * 0.7).abs() < 1e-9);
        assert!((g[1] - (1.2f64 * 1.2 + 0.7f64.cos())).abs() < 1e-9);
    }
}
