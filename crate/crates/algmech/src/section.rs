//! Sections of an algebroid and skew multi-sections of its dual, plus
//! vector-bundle morphism data between two charts.

use std::sync::Arc;

use crate::chart::{fd_jacobian, fd_step, LieAlgebroidChart};
use crate::error::{structural, AlgError, Result};
use crate::linalg::Mat;

pub type CoeffFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type JacobianFn = dyn Fn(&[f64]) -> Mat + Send + Sync;
pub type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
pub type MapFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A section X ∈ Γ(A): coefficient functions X^α(x) in the chart frame.
#[derive(Clone)]
pub struct Section {
    pub chart: Arc<LieAlgebroidChart>,
    coeffs: Arc<CoeffFn>,
    /// Analytic ∂X^α/∂x^i (rows = α, cols = i) when available.
    jacobian: Option<Arc<JacobianFn>>,
}

impl Section {
    pub fn new(chart: Arc<LieAlgebroidChart>, coeffs: Arc<CoeffFn>) -> Self {
        Section {
            chart,
            coeffs,
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, jac: Arc<JacobianFn>) -> Self {
        self.jacobian = Some(jac);
        self
    }

    /// Constant-coefficient section (frame combinations, Lie algebra elements).
    pub fn constant(chart: Arc<LieAlgebroidChart>, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), chart.rank());
        let m = chart.base_dim();
        let n = chart.rank();
        let c2 = coeffs.clone();
        Section {
            chart,
            coeffs: Arc::new(move |_x: &[f64]| coeffs.clone()),
            jacobian: Some(Arc::new(move |_x: &[f64]| {
                let _ = &c2;
                Mat::zeros(n, m)
            })),
        }
    }

    /// The frame section e_α.
    pub fn frame(chart: Arc<LieAlgebroidChart>, alpha: usize) -> Self {
        let n = chart.rank();
        let mut c = vec![0.0; n];
        c[alpha] = 1.0;
        Section::constant(chart, c)
    }

    pub fn zero(chart: Arc<LieAlgebroidChart>) -> Self {
        let n = chart.rank();
        Section::constant(chart, vec![0.0; n])
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_point(x)?;
        let v = (self.coeffs)(x);
        assert_eq!(v.len(), self.chart.rank());
        if v.iter().any(|c| !c.is_finite()) {
            return Err(AlgError::NonFinite {
                op: "section",
                point: x.to_vec(),
            });
        }
        Ok(v)
    }

    pub fn raw(&self) -> Arc<CoeffFn> {
        self.coeffs.clone()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// ∂X^α/∂x^i, analytic when available, else central FD.
    pub fn jacobian_at(&self, x: &[f64]) -> Result<Mat> {
        self.chart.check_point(x)?;
        if let Some(j) = &self.jacobian {
            return Ok(j(x));
        }
        let f = self.coeffs.clone();
        Ok(fd_jacobian(&move |p: &[f64]| f(p), x, self.chart.rank()))
    }

    /// Pointwise linear combination a·X + b·Y.
    pub fn linear_combination(a: f64, x: &Section, b: f64, y: &Section) -> Result<Section> {
        if !x.chart.same_chart(&y.chart) {
            return Err(structural("sections live on different charts"));
        }
        let (fx, fy) = (x.coeffs.clone(), y.coeffs.clone());
        let jac = match (&x.jacobian, &y.jacobian) {
            (Some(jx), Some(jy)) => {
                let (jx, jy) = (jx.clone(), jy.clone());
                Some(Arc::new(move |p: &[f64]| {
                    let m1 = jx(p).scale(a);
                    let m2 = jy(p).scale(-b);
                    m1.sub(&m2)
                }) as Arc<JacobianFn>)
            }
            _ => None,
        };
        let mut s = Section::new(
            x.chart.clone(),
            Arc::new(move |p: &[f64]| {
                let u = fx(p);
                let v = fy(p);
                u.iter().zip(&v).map(|(ui, vi)| a * ui + b * vi).collect()
            }),
        );
        s.jacobian = jac;
        Ok(s)
    }
}

/// Strictly increasing k-tuples over 0..n in lexicographic order.
pub fn increasing_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if k > n {
        return vec![];
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Sign and position of a sorted index tuple; None when indices repeat.
pub fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = indices.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

/// A totally antisymmetric k-section of A*, stored by its components on
/// strictly increasing index tuples. Degree 0 is a scalar function on the
/// chart (with an optional analytic gradient, used for tight d^A residuals).
#[derive(Clone)]
pub struct MultiSection {
    pub chart: Arc<LieAlgebroidChart>,
    pub degree: usize,
    comps: Arc<CoeffFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl MultiSection {
    pub fn new(chart: Arc<LieAlgebroidChart>, degree: usize, comps: Arc<CoeffFn>) -> Self {
        MultiSection {
            chart,
            degree,
            comps,
            gradient: None,
        }
    }

    /// Scalar field (degree 0).
    pub fn scalar(chart: Arc<LieAlgebroidChart>, f: Arc<ScalarFn>) -> Self {
        MultiSection {
            chart,
            degree: 0,
            comps: Arc::new(move |x: &[f64]| vec![f(x)]),
            gradient: None,
        }
    }

    pub fn with_gradient(mut self, grad: Arc<GradientFn>) -> Self {
        assert_eq!(self.degree, 0, "analytic gradients apply to scalars");
        self.gradient = Some(grad);
        self
    }

    pub fn constant_scalar(chart: Arc<LieAlgebroidChart>, value: f64) -> Self {
        let m = chart.base_dim();
        MultiSection::scalar(chart, Arc::new(move |_x: &[f64]| value))
            .with_gradient(Arc::new(move |_x: &[f64]| vec![0.0; m]))
    }

    pub fn zero(chart: Arc<LieAlgebroidChart>, degree: usize) -> Self {
        let len = increasing_tuples(chart.rank(), degree).len();
        MultiSection::new(chart, degree, Arc::new(move |_x: &[f64]| vec![0.0; len]))
    }

    pub fn comp_count(&self) -> usize {
        increasing_tuples(self.chart.rank(), self.degree).len()
    }

    /// Components on increasing tuples, in lexicographic tuple order.
    pub fn comps_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.chart.check_point(x)?;
        let v = (self.comps)(x);
        assert_eq!(v.len(), self.comp_count(), "component count mismatch");
        if v.iter().any(|c| !c.is_finite()) {
            return Err(AlgError::NonFinite {
                op: "multisection",
                point: x.to_vec(),
            });
        }
        Ok(v)
    }

    pub fn raw(&self) -> Arc<CoeffFn> {
        self.comps.clone()
    }

    /// Scalar value (degree 0 only).
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        assert_eq!(self.degree, 0);
        Ok(self.comps_at(x)?[0])
    }

    /// Gradient of a degree-0 section, analytic when supplied.
    pub fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(self.degree, 0);
        self.chart.check_point(x)?;
        if let Some(g) = &self.gradient {
            return Ok(g(x));
        }
        let f = self.comps.clone();
        Ok((0..x.len())
            .map(|j| {
                let h = fd_step(x[j]);
                let mut xp = x.to_vec();
                let mut xm = x.to_vec();
                xp[j] += h;
                xm[j] -= h;
                (f(&xp)[0] - f(&xm)[0]) / (2.0 * h)
            })
            .collect())
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    /// Full antisymmetric evaluation μ(e_{i₁}, …, e_{i_k}) for arbitrary
    /// index order.
    pub fn component(&self, x: &[f64], indices: &[usize]) -> Result<f64> {
        assert_eq!(indices.len(), self.degree);
        let comps = self.comps_at(x)?;
        Ok(component_from_stored(
            &comps,
            self.chart.rank(),
            self.degree,
            indices,
        ))
    }

    /// Evaluate μ(v₁, …, v_k) on fiber vectors given by coefficient vectors.
    pub fn eval_on(&self, x: &[f64], vectors: &[&[f64]]) -> Result<f64> {
        assert_eq!(vectors.len(), self.degree);
        let comps = self.comps_at(x)?;
        let n = self.chart.rank();
        let tuples = increasing_tuples(n, self.degree);
        let k = self.degree;
        let mut total = 0.0;
        // μ(v₁,…,v_k) = Σ_{T increasing} μ_T det(v rows picked by T)
        for (t_idx, t) in tuples.iter().enumerate() {
            let c = comps[t_idx];
            if c == 0.0 {
                continue;
            }
            let sub = Mat::from_fn(k, k, |r, s| vectors[r][t[s]]);
            total += c * det_small(&sub);
        }
        Ok(total)
    }
}

/// Look up the antisymmetric component for an arbitrary index tuple from the
/// stored increasing-tuple components.
pub fn component_from_stored(comps: &[f64], n: usize, k: usize, indices: &[usize]) -> f64 {
    match sort_with_sign(indices) {
        None => 0.0,
        Some((sorted, sign)) => {
            let tuples = increasing_tuples(n, k);
            let pos = tuples
                .iter()
                .position(|t| t[..] == sorted[..])
                .expect("tuple in range");
            sign * comps[pos]
        }
    }
}

fn det_small(m: &Mat) -> f64 {
    let n = m.rows();
    match n {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => {
            // expansion along the first row; degrees stay tiny here
            let mut acc = 0.0;
            for j in 0..n {
                let c = m[(0, j)];
                if c == 0.0 {
                    continue;
                }
                let minor = Mat::from_fn(n - 1, n - 1, |r, s| {
                    m[(r + 1, if s < j { s } else { s + 1 })]
                });
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * c * det_small(&minor);
            }
            acc
        }
    }
}

/// Vector-bundle morphism data F: A → A′ over a base map f.
#[derive(Clone)]
pub struct MorphismData {
    pub source: Arc<LieAlgebroidChart>,
    pub target: Arc<LieAlgebroidChart>,
    pub base_map: Arc<MapFn>,
    /// target-rank × source-rank matrix F(x) at a source point.
    pub fiber_map: Arc<JacobianFn>,
}

impl MorphismData {
    pub fn new(
        source: Arc<LieAlgebroidChart>,
        target: Arc<LieAlgebroidChart>,
        base_map: Arc<MapFn>,
        fiber_map: Arc<JacobianFn>,
    ) -> Self {
        MorphismData {
            source,
            target,
            base_map,
            fiber_map,
        }
    }

    pub fn identity(chart: Arc<LieAlgebroidChart>) -> Self {
        let n = chart.rank();
        MorphismData {
            source: chart.clone(),
            target: chart,
            base_map: Arc::new(|x: &[f64]| x.to_vec()),
            fiber_map: Arc::new(move |_x: &[f64]| Mat::identity(n)),
        }
    }

    pub fn base_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.source.check_point(x)?;
        let y = (self.base_map)(x);
        self.target.check_point(&y)?;
        Ok(y)
    }

    pub fn fiber_at(&self, x: &[f64]) -> Result<Mat> {
        self.source.check_point(x)?;
        let f = (self.fiber_map)(x);
        assert_eq!(
            (f.rows(), f.cols()),
            (self.target.rank(), self.source.rank()),
            "fiber map dimensions inconsistent with charts"
        );
        Ok(f)
    }

    /// Composition F ∘ G (apply G first).
    pub fn compose(f: &MorphismData, g: &MorphismData) -> Result<MorphismData> {
        if !g.target.same_chart(&f.source) {
            return Err(structural("morphism composition chart mismatch"));
        }
        let (gb, fb) = (g.base_map.clone(), f.base_map.clone());
        let (gf, ff) = (g.fiber_map.clone(), f.fiber_map.clone());
        let gb2 = g.base_map.clone();
        Ok(MorphismData {
            source: g.source.clone(),
            target: f.target.clone(),
            base_map: Arc::new(move |x: &[f64]| fb(&gb(x))),
            fiber_map: Arc::new(move |x: &[f64]| {
                let mid = gb2(x);
                ff(&mid).matmul(&gf(x))
            }),
        })
    }
}
