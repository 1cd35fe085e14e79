//! Reduction of a symplectic Lie algebroid by a Lie subalgebroid and a
//! symmetry Lie group: restriction, kernel identification, hypothesis
//! verification, construction of the reduced algebroid, and projection of
//! the Hamiltonian dynamics.

use std::sync::Arc;

use crate::algebroid::{bracket_value, check_axioms};
use crate::cartan::{differential, pullback};
use crate::chart::{fd_jacobian, LieAlgebroidChart, StructureArray};
use crate::dynamics::{integrate, integrate_rhs, symplectic_rhs, HamiltonianSystem, Trajectory};
use crate::error::{structural, AlgError, Result};
use crate::linalg::{self, lstsq, Mat, RANK_REL_TOL};
use crate::sample::ChartBox;
use crate::section::{MorphismData, MultiSection, Section};
use crate::symplectic::{hamiltonian_section, sharp_value, SymplecticSection};

/// A Lie subalgebroid B over N inside an ambient algebroid A over M.
#[derive(Clone)]
pub struct SubalgebroidData {
    pub ambient: Arc<LieAlgebroidChart>,
    pub sub: Arc<LieAlgebroidChart>,
    /// i_B over i_N; the fiber map has full column rank at samples.
    pub inclusion: MorphismData,
}

/// Chart-level data of a proper free action of G on B over N, together with
/// the quotient projection and a slice of it.
#[derive(Clone)]
pub struct GroupActionData {
    pub group_dim: usize,
    /// Finite certification set of group elements (coordinates).
    pub sample_elements: Vec<Vec<f64>>,
    pub base_action: Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>,
    /// (g, x) ↦ rank×rank matrix of Ψ_g on the fiber over x.
    pub fiber_action: Arc<dyn Fn(&[f64], &[f64]) -> Mat + Send + Sync>,
    /// π_N: N → Ñ.
    pub projection: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    /// σ: Ñ → N with π_N ∘ σ = id.
    pub slice: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl GroupActionData {
    pub fn trivial(rank: usize) -> Self {
        GroupActionData {
            group_dim: 0,
            sample_elements: vec![vec![]],
            base_action: Arc::new(|_g, x| x.to_vec()),
            fiber_action: Arc::new(move |_g: &[f64], _x: &[f64]| Mat::identity(rank)),
            projection: Arc::new(|x| x.to_vec()),
            slice: Arc::new(|x| x.to_vec()),
        }
    }
}

/// Everything the reduction pipeline consumes.
#[derive(Clone)]
pub struct ReductionSetup {
    pub name: String,
    pub sub: SubalgebroidData,
    pub action: GroupActionData,
    pub omega_ambient: SymplecticSection,
    pub kernel_frame: Vec<Section>,
    pub projectable_frame: Vec<Section>,
    /// H_M on the ambient base chart.
    pub hamiltonian: MultiSection,
    pub sub_box: ChartBox,
    pub reduced_box: ChartBox,
    pub reduced_coord_labels: Vec<String>,
    /// Full dynamics on the ambient chart (present when A is a prolongation).
    pub ambient_system: Option<HamiltonianSystem>,
    /// Full state → (N-chart point, constraint residuals).
    pub state_to_sub: Option<Arc<dyn Fn(&[f64]) -> (Vec<f64>, Vec<f64>) + Send + Sync>>,
}

/// Ω_B = i_B^*Ω_A with its kernel dimension certified constant.
#[derive(Clone)]
pub struct PresymplecticRestriction {
    pub omega: SymplecticSection,
    pub kernel_dim: usize,
    pub closedness_residual: f64,
}

/// One named verification outcome; `name` identifies the hypothesis checked.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
    pub offending: Vec<Vec<f64>>,
}

impl CheckResult {
    pub fn new(name: &str, residual: f64, tol: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            max_residual: residual,
            tolerance: tol,
            pass: residual <= tol,
            detail: detail.into(),
            offending: Vec::new(),
        }
    }

    pub fn with_offending(mut self, pts: Vec<Vec<f64>>) -> Self {
        if !self.pass {
            self.offending = pts;
        }
        self
    }
}

/// The reduced symplectic Lie algebroid with its projection morphism.
#[derive(Clone)]
pub struct ReducedModel {
    pub chart: Arc<LieAlgebroidChart>,
    pub omega: SymplecticSection,
    /// π̃_B: B → B̃ over π_N.
    pub projection: MorphismData,
    pub reduced_h: Option<MultiSection>,
}

fn fiber_value(frame: &[Section], x: &[f64]) -> Result<Mat> {
    let cols: Vec<Vec<f64>> = frame
        .iter()
        .map(|s| s.eval(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(Mat::from_cols(&cols))
}

/// Restrict Ω_A to the subalgebroid: Ω_B = i_B^*Ω_A, report the d^B residual
/// and certify that dim ker Ω_B is constant across the samples.
pub fn restrict(
    sub: &SubalgebroidData,
    omega_ambient: &SymplecticSection,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<PresymplecticRestriction> {
    if sample_points.is_empty() {
        return Err(structural("restrict: empty sample set"));
    }
    let pulled = pullback(&sub.inclusion, &omega_ambient.omega)?;
    let omega = SymplecticSection::new(pulled)?;
    let mut closed_res = 0.0f64;
    let d_omega = if sub.sub.rank() >= 3 {
        Some(differential(&omega.omega)?)
    } else {
        None
    };
    let mut svds = Vec::with_capacity(sample_points.len());
    let mut global_smax = 0.0f64;
    for p in sample_points {
        if let Some(d) = &d_omega {
            for v in d.comps_at(p)? {
                closed_res = closed_res.max(v.abs());
            }
        }
        let m = omega.matrix_at(p)?;
        let s = linalg::svd(&m);
        global_smax = global_smax.max(s.sigma.first().copied().unwrap_or(0.0));
        svds.push(s);
    }
    // rank decisions use the sweep-wide scale, with an absolute floor so a
    // restriction that vanishes identically reads as fully degenerate
    let cut = (RANK_REL_TOL * global_smax).max(1e-12);
    let mut dims: Vec<usize> = Vec::new();
    let mut offending: Vec<Vec<f64>> = Vec::new();
    for (s, p) in svds.iter().zip(sample_points) {
        let rank = s.sigma.iter().filter(|&&v| v > cut).count();
        let kdim = sub.sub.rank() - rank;
        if !dims.contains(&kdim) {
            dims.push(kdim);
            offending.push(p.clone());
        }
    }
    if dims.len() != 1 {
        return Err(AlgError::NonConstantKernel {
            dims_seen: dims,
            offending,
        });
    }
    if closed_res > tol {
        return Err(structural(format!(
            "restricted section is not closed (d^B residual {closed_res:e})"
        )));
    }
    Ok(PresymplecticRestriction {
        omega,
        kernel_dim: dims[0],
        closedness_residual: closed_res,
    })
}

/// Certify the supplied kernel frame: pointwise membership in ker Ω_B, a
/// count matching the certified kernel dimension, and involutivity
/// (⟦ker, ker⟧ ⊆ ker, the subalgebroid lemma).
pub fn verify_kernel_frame(
    setup: &ReductionSetup,
    restriction: &PresymplecticRestriction,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let kf = &setup.kernel_frame;
    if kf.len() != restriction.kernel_dim {
        return Ok(CheckResult::new(
            "kernel_frame",
            f64::INFINITY,
            tol,
            format!(
                "kernel frame count {} does not match certified kernel dimension {}",
                kf.len(),
                restriction.kernel_dim
            ),
        ));
    }
    let mut worst = 0.0f64;
    let mut offending = Vec::new();
    for p in sample_points {
        let m = restriction.omega.matrix_at(p)?;
        let kmat = fiber_value(kf, p)?;
        // span: flat of every kernel vector vanishes
        for j in 0..kf.len() {
            let fl = m.transpose().matvec(&kmat.col(j));
            let r = linalg::norm(&fl);
            if r > worst {
                worst = r;
                offending = vec![p.clone()];
            }
        }
        // pointwise independence inside the frame
        if kf.len() > 1 {
            let s = linalg::svd(&kmat);
            if s.rank(RANK_REL_TOL) < kf.len() {
                return Ok(CheckResult::new(
                    "kernel_frame",
                    f64::INFINITY,
                    tol,
                    "kernel frame is pointwise linearly dependent",
                )
                .with_offending(vec![p.clone()]));
            }
        }
        // involutivity: brackets of kernel sections re-expand in the frame
        for i in 0..kf.len() {
            for j in (i + 1)..kf.len() {
                let br = bracket_value(&setup.sub.sub, &kf[i], &kf[j], p)?;
                let (_, r) = lstsq(&kmat, &br);
                if r > worst {
                    worst = r;
                    offending = vec![p.clone()];
                }
            }
        }
    }
    Ok(
        CheckResult::new("kernel_frame", worst, tol, "ker Ω_B frame span and involutivity")
            .with_offending(offending),
    )
}

/// Ψ_g^*Ω_B = Ω_B across the sampled group elements and points.
pub fn verify_presymplectic_action(
    setup: &ReductionSetup,
    restriction: &PresymplecticRestriction,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut offending = Vec::new();
    for g in &setup.action.sample_elements {
        for p in sample_points {
            let moved = (setup.action.base_action)(g, p);
            let f = (setup.action.fiber_action)(g, p);
            let m_here = restriction.omega.matrix_at(p)?;
            let m_moved = restriction.omega.matrix_at(&moved)?;
            let pulled = f.transpose().matmul(&m_moved).matmul(&f);
            let r = pulled.sub(&m_here).max_abs();
            if r > worst {
                worst = r;
                offending = vec![p.clone()];
            }
        }
    }
    Ok(CheckResult::new(
        "presymplectic_action",
        worst,
        tol,
        "Ψ_g*Ω_B = Ω_B (presymplectic action)",
    )
    .with_offending(offending))
}

/// Each projectable-frame element satisfies Ψ_g∘X = (X + Y_g)∘ψ_g with Y_g
/// solved pointwise in the kernel frame by least squares.
pub fn verify_projectable_frame(
    setup: &ReductionSetup,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<CheckResult> {
    let mut worst = 0.0f64;
    let mut offending = Vec::new();
    for g in &setup.action.sample_elements {
        for p in sample_points {
            let moved = (setup.action.base_action)(g, p);
            let f = (setup.action.fiber_action)(g, p);
            let kmat = fiber_value(&setup.kernel_frame, &moved)?;
            for x_sec in &setup.projectable_frame {
                let here = x_sec.eval(p)?;
                let there = x_sec.eval(&moved)?;
                let defect = linalg::sub_vec(&f.matvec(&here), &there);
                let r = if kmat.cols() == 0 {
                    linalg::norm(&defect)
                } else {
                    lstsq(&kmat, &defect).1
                };
                if r > worst {
                    worst = r;
                    offending = vec![p.clone()];
                }
            }
        }
    }
    Ok(CheckResult::new(
        "projectable_frame",
        worst,
        tol,
        "Ψ_g∘X = (X + Y_g)∘ψ_g for the projectable frame",
    )
    .with_offending(offending))
}

/// The two algebraic reduction conditions: (i) brackets of projectable-frame pairs re-expand
/// over projectable ∪ kernel frames; (ii) brackets against the kernel land
/// in the kernel span (Γ(ker Ω_B) is an ideal).
pub fn verify_algebra_conditions(
    setup: &ReductionSetup,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<(CheckResult, CheckResult)> {
    let mut res_i = 0.0f64;
    let mut res_ii = 0.0f64;
    let mut off_i = Vec::new();
    let mut off_ii = Vec::new();
    for p in sample_points {
        let pmat = fiber_value(&setup.projectable_frame, p)?;
        let kmat = fiber_value(&setup.kernel_frame, p)?;
        let mut stacked_cols = Vec::new();
        for j in 0..pmat.cols() {
            stacked_cols.push(pmat.col(j));
        }
        for j in 0..kmat.cols() {
            stacked_cols.push(kmat.col(j));
        }
        let stacked = Mat::from_cols(&stacked_cols);
        // condition i: projectable × projectable
        for i in 0..setup.projectable_frame.len() {
            for j in (i + 1)..setup.projectable_frame.len() {
                let br = bracket_value(
                    &setup.sub.sub,
                    &setup.projectable_frame[i],
                    &setup.projectable_frame[j],
                    p,
                )?;
                let (_, r) = lstsq(&stacked, &br);
                if r > res_i {
                    res_i = r;
                    off_i = vec![p.clone()];
                }
            }
        }
        // condition ii: projectable × kernel and kernel × kernel
        for x_sec in setup
            .projectable_frame
            .iter()
            .chain(setup.kernel_frame.iter())
        {
            for k_sec in &setup.kernel_frame {
                let br = bracket_value(&setup.sub.sub, x_sec, k_sec, p)?;
                let r = if kmat.cols() == 0 {
                    linalg::norm(&br)
                } else {
                    lstsq(&kmat, &br).1
                };
                if r > res_ii {
                    res_ii = r;
                    off_ii = vec![p.clone()];
                }
            }
        }
    }
    Ok((
        CheckResult::new(
            "projectable_closed",
            res_i,
            tol,
            "condition i: Γ(B)^p is closed under the bracket",
        )
        .with_offending(off_i),
        CheckResult::new(
            "kernel_ideal",
            res_ii,
            tol,
            "condition ii: Γ(ker Ω_B) is an ideal",
        )
        .with_offending(off_ii),
    ))
}

/// Re-expansion coefficients of a fiber vector over [projectable | kernel].
fn expand_over_frames(
    setup: &ReductionSetup,
    x: &[f64],
    vector: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let pmat = fiber_value(&setup.projectable_frame, x)?;
    let kmat = fiber_value(&setup.kernel_frame, x)?;
    let mut cols = Vec::new();
    for j in 0..pmat.cols() {
        cols.push(pmat.col(j));
    }
    for j in 0..kmat.cols() {
        cols.push(kmat.col(j));
    }
    let stacked = Mat::from_cols(&cols);
    let (coef, r) = lstsq(&stacked, vector);
    Ok((coef, r))
}

/// Build the reduced symplectic Lie algebroid over Ñ. Refuses unless the
/// four verification reports pass at the given tolerance.
pub fn build_reduced(
    setup: &ReductionSetup,
    restriction: &PresymplecticRestriction,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<ReducedModel> {
    let checks = vec![
        verify_kernel_frame(setup, restriction, sample_points, tol)?,
        verify_presymplectic_action(setup, restriction, sample_points, tol)?,
        verify_projectable_frame(setup, sample_points, tol)?,
    ];
    for c in checks {
        if !c.pass {
            return Err(AlgError::Hypothesis {
                hypothesis: c.name,
                detail: c.detail,
            });
        }
    }
    let (ci, cii) = verify_algebra_conditions(setup, sample_points, tol)?;
    for c in [ci, cii] {
        if !c.pass {
            return Err(AlgError::Hypothesis {
                hypothesis: c.name,
                detail: c.detail,
            });
        }
    }
    build_reduced_unchecked(setup, restriction)
}

/// The construction itself (hypotheses assumed verified).
pub fn build_reduced_unchecked(
    setup: &ReductionSetup,
    restriction: &PresymplecticRestriction,
) -> Result<ReducedModel> {
    let r = setup.projectable_frame.len();
    let n_dim = setup.sub.sub.base_dim();
    let red_dim = n_dim - setup.action.group_dim;
    if setup.reduced_box.dim() != red_dim {
        return Err(structural("reduced box dimension mismatch"));
    }

    // structure functions: bracket re-expansion along the slice, kernel
    // components discarded
    let setup_c = setup.clone();
    let structure = Arc::new(move |nt: &[f64]| -> StructureArray {
        let x = (setup_c.action.slice)(nt);
        let mut c = StructureArray::zeros(r);
        for a in 0..r {
            for b in (a + 1)..r {
                let br = bracket_value(
                    &setup_c.sub.sub,
                    &setup_c.projectable_frame[a],
                    &setup_c.projectable_frame[b],
                    &x,
                )
                .expect("bracket");
                let (coef, _) = expand_over_frames(&setup_c, &x, &br).expect("expansion");
                for g in 0..r {
                    c.set(g, a, b, coef[g]);
                }
            }
        }
        c
    });

    // anchor: push ρ_B of the representatives through Tπ_N along the slice
    let setup_a = setup.clone();
    let anchor = Arc::new(move |nt: &[f64]| -> Mat {
        let x = (setup_a.action.slice)(nt);
        let proj = setup_a.action.projection.clone();
        let dproj = fd_jacobian(&move |q: &[f64]| proj(q), &x, nt.len());
        let rho = setup_a.sub.sub.anchor_at(&x).expect("anchor");
        let mut out = Mat::zeros(nt.len(), r);
        for a in 0..r {
            let v = setup_a.projectable_frame[a].eval(&x).expect("frame");
            let pushed = dproj.matvec(&rho.matvec(&v));
            for i in 0..nt.len() {
                out[(i, a)] = pushed[i];
            }
        }
        out
    });

    let mut chart = LieAlgebroidChart::new(
        format!("reduced({})", setup.name),
        red_dim,
        r,
        anchor,
        structure,
    )
    .with_box(setup.reduced_box.clone());
    if !setup.reduced_coord_labels.is_empty() {
        chart = chart.with_labels(
            setup.reduced_coord_labels.clone(),
            (0..r).map(|a| format!("e{}", a + 1)).collect(),
        );
    }
    let chart = Arc::new(chart);

    // Ω̃(π̃X, π̃Y) = Ω_B(X, Y) along the slice
    let setup_o = setup.clone();
    let omega_b = restriction.omega.clone();
    let comps = Arc::new(move |nt: &[f64]| -> Vec<f64> {
        let x = (setup_o.action.slice)(nt);
        let m = omega_b.matrix_at(&x).expect("omega_B");
        let pmat = fiber_value(&setup_o.projectable_frame, &x).expect("frame");
        let full = pmat.transpose().matmul(&m).matmul(&pmat);
        let mut out = Vec::with_capacity(r * (r - 1) / 2);
        for a in 0..r {
            for b in (a + 1)..r {
                out.push(full[(a, b)]);
            }
        }
        out
    });
    let omega = SymplecticSection::new(MultiSection::new(chart.clone(), 2, comps))?;

    // π̃_B: expansion over [P | K], keep the projectable part
    let setup_p = setup.clone();
    let nb = setup.sub.sub.rank();
    let fiber_map = Arc::new(move |x: &[f64]| -> Mat {
        let mut t = Mat::zeros(r, nb);
        for j in 0..nb {
            let mut e = vec![0.0; nb];
            e[j] = 1.0;
            let (coef, _) = expand_over_frames(&setup_p, x, &e).expect("expansion");
            for a in 0..r {
                t[(a, j)] = coef[a];
            }
        }
        t
    });
    let projection = MorphismData::new(
        setup.sub.sub.clone(),
        chart.clone(),
        Arc::new({
            let proj = setup.action.projection.clone();
            move |x: &[f64]| proj(x)
        }),
        fiber_map,
    );

    Ok(ReducedModel {
        chart,
        omega,
        projection,
        reduced_h: None,
    })
}

/// Reduce the Hamiltonian dynamics: checks G-invariance of H_N and tangency
/// of the ambient Hamiltonian section to B, then returns H_Ñ = H_N ∘ σ and
/// the residual of π̃_B(ℋ_{H_M}) = ℋ_{H_Ñ} ∘ π_N at the samples.
pub fn reduce_dynamics(
    setup: &ReductionSetup,
    reduced: &ReducedModel,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<(MultiSection, Vec<CheckResult>)> {
    // H_N = H_M ∘ i_N
    let incl = setup.sub.inclusion.clone();
    let h_m = setup.hamiltonian.clone();

    // hypothesis i): G-invariance of H_N
    let mut inv_res = 0.0f64;
    let mut inv_off = Vec::new();
    for g in &setup.action.sample_elements {
        for p in sample_points {
            let here = h_m.value(&incl.base_at(p)?)?;
            let moved = (setup.action.base_action)(g, p);
            let there = h_m.value(&incl.base_at(&moved)?)?;
            let r = (here - there).abs();
            if r > inv_res {
                inv_res = r;
                inv_off = vec![p.clone()];
            }
        }
    }
    let inv_check = CheckResult::new(
        "hamiltonian_invariance",
        inv_res,
        tol,
        "H_N is G-invariant",
    )
    .with_offending(inv_off);
    if !inv_check.pass {
        return Err(AlgError::Hypothesis {
            hypothesis: inv_check.name,
            detail: "H_N is not G-invariant".into(),
        });
    }

    // hypothesis ii): ℋ_{H_M}(N) ⊆ B
    let ham_sec = hamiltonian_section(&setup.omega_ambient, &setup.hamiltonian)?;
    let mut tan_res = 0.0f64;
    let mut tan_off = Vec::new();
    for p in sample_points {
        let ax = incl.base_at(p)?;
        let v = ham_sec.eval(&ax)?;
        let fmat = incl.fiber_at(p)?;
        let (_, r) = lstsq(&fmat, &v);
        if r > tan_res {
            tan_res = r;
            tan_off = vec![p.clone()];
        }
    }
    let tan_check = CheckResult::new(
        "hamiltonian_tangency",
        tan_res,
        tol,
        "ℋ_{H_M}(N) ⊆ B",
    )
    .with_offending(tan_off);
    if !tan_check.pass {
        return Err(AlgError::Hypothesis {
            hypothesis: tan_check.name,
            detail: "the Hamiltonian section of H_M is not tangent to B along N".into(),
        });
    }

    // H_Ñ = H_N ∘ σ
    let slice = setup.action.slice.clone();
    let incl2 = setup.sub.inclusion.clone();
    let h_m2 = setup.hamiltonian.clone();
    let h_red = MultiSection::scalar(
        reduced.chart.clone(),
        Arc::new(move |nt: &[f64]| -> f64 {
            let x = slice(nt);
            let ax = incl2.base_at(&x).expect("inclusion");
            h_m2.value(&ax).expect("H_M")
        }),
    );

    // projection identity: π̃_B(ℋ_{H_M}(x)) = ℋ_{H_Ñ}(π_N(x))
    let mut proj_res = 0.0f64;
    let mut proj_off = Vec::new();
    for p in sample_points {
        let ax = incl.base_at(p)?;
        let v = ham_sec.eval(&ax)?;
        let fmat = incl.fiber_at(p)?;
        let (b_coords, _) = lstsq(&fmat, &v);
        let t = reduced.projection.fiber_at(p)?;
        let lhs = t.matvec(&b_coords);
        let nt = (setup.action.projection)(p);
        let grad = h_red.gradient_at(&nt)?;
        let rho = reduced.chart.anchor_at(&nt)?;
        let dh: Vec<f64> = (0..reduced.chart.rank())
            .map(|a| (0..nt.len()).map(|i| rho[(i, a)] * grad[i]).sum())
            .collect();
        let rhs = sharp_value(&reduced.omega, &dh, &nt)?;
        let r = linalg::max_abs_diff(&lhs, &rhs);
        if r > proj_res {
            proj_res = r;
            proj_off = vec![p.clone()];
        }
    }
    let proj_check = CheckResult::new(
        "hamiltonian_projection",
        proj_res,
        tol,
        "π̃_B(ℋ_{H_M}) = ℋ_{H_Ñ} ∘ π_N",
    )
    .with_offending(proj_off);

    Ok((h_red, vec![inv_check, tan_check, proj_check]))
}

/// Commutation of reduction and flow.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub max_deviation: f64,
    pub constraint_drift: f64,
    pub full: Trajectory,
    pub reduced: Trajectory,
}

/// Integrate the full system from `init`, project every state by π_N, and
/// compare with the reduced-system trajectory started at π_N(init).
pub fn verify_commutation(
    setup: &ReductionSetup,
    reduced: &ReducedModel,
    h_red: &MultiSection,
    init: &[f64],
    t_end: f64,
    h: f64,
) -> Result<CommutationReport> {
    let sys = setup
        .ambient_system
        .as_ref()
        .ok_or_else(|| structural("setup carries no ambient dynamics"))?;
    let to_sub = setup
        .state_to_sub
        .as_ref()
        .ok_or_else(|| structural("setup carries no state projection"))?;
    let (n0, c0) = to_sub(init);
    if linalg::norm(&c0) > 1e-10 {
        return Err(structural(format!(
            "initial state violates the N-defining constraints by {:e}",
            linalg::norm(&c0)
        )));
    }
    let full = integrate(sys, init, t_end, h).map_err(|(e, _)| e)?;
    let chart = reduced.chart.clone();
    let omega = reduced.omega.clone();
    let hr = h_red.clone();
    let red_init = (setup.action.projection)(&n0);
    let red_traj = integrate_rhs(
        &|s: &[f64]| symplectic_rhs(&chart, &omega, &hr, s),
        &|s: &[f64]| hr.value(s),
        &red_init,
        t_end,
        h,
        1e6,
    )
    .map_err(|(e, _)| e)?;

    let mut deviation = 0.0f64;
    let mut drift = 0.0f64;
    for (k, state) in full.states.iter().enumerate() {
        let (n_pt, constraints) = to_sub(state.coords());
        drift = drift.max(linalg::norm(&constraints));
        let projected = (setup.action.projection)(&n_pt);
        deviation = deviation.max(linalg::max_abs_diff(&projected, red_traj.state(k)));
    }
    Ok(CommutationReport {
        max_deviation: deviation,
        constraint_drift: drift,
        full,
        reduced: red_traj,
    })
}

/// Quotient of a Lie algebroid by a free action along an invariant frame:
/// the A/G construction (zero-kernel special case of the reduction).
pub fn quotient_algebroid(
    ambient: &Arc<LieAlgebroidChart>,
    action: &GroupActionData,
    invariant_frame: &[Section],
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<Arc<LieAlgebroidChart>> {
    // invariance: Ψ_g∘X = X∘ψ_g exactly (Y_g ≡ 0)
    let mut worst = 0.0f64;
    for g in &action.sample_elements {
        for p in sample_points {
            let moved = (action.base_action)(g, p);
            let f = (action.fiber_action)(g, p);
            for x_sec in invariant_frame {
                let lhs = f.matvec(&x_sec.eval(p)?);
                let rhs = x_sec.eval(&moved)?;
                worst = worst.max(linalg::max_abs_diff(&lhs, &rhs));
            }
        }
    }
    if worst > tol {
        return Err(AlgError::Hypothesis {
            hypothesis: "invariant_frame".into(),
            detail: format!("frame is not G-invariant (residual {worst:e})"),
        });
    }

    let r = invariant_frame.len();
    let red_dim = ambient.base_dim() - action.group_dim;
    let amb = ambient.clone();
    let frame: Vec<Section> = invariant_frame.to_vec();
    let slice = action.slice.clone();
    let frame_s = frame.clone();
    let amb_s = amb.clone();
    let slice_s = slice.clone();
    let structure = Arc::new(move |nt: &[f64]| -> StructureArray {
        let x = slice_s(nt);
        let fmat = fiber_value(&frame_s, &x).expect("frame");
        let mut c = StructureArray::zeros(r);
        for a in 0..r {
            for b in (a + 1)..r {
                let br =
                    bracket_value(&amb_s, &frame_s[a], &frame_s[b], &x).expect("bracket");
                let (coef, res) = lstsq(&fmat, &br);
                assert!(
                    res < 1e-7,
                    "invariant-frame bracket left the frame span (residual {res:e})"
                );
                for g in 0..r {
                    c.set(g, a, b, coef[g]);
                }
            }
        }
        c
    });
    let proj = action.projection.clone();
    let frame_a = frame.clone();
    let anchor = Arc::new(move |nt: &[f64]| -> Mat {
        let x = slice(nt);
        let pr = proj.clone();
        let dproj = fd_jacobian(&move |q: &[f64]| pr(q), &x, nt.len());
        let rho = amb.anchor_at(&x).expect("anchor");
        let mut out = Mat::zeros(nt.len(), r);
        for a in 0..r {
            let v = frame_a[a].eval(&x).expect("frame");
            let pushed = dproj.matvec(&rho.matvec(&v));
            for i in 0..nt.len() {
                out[(i, a)] = pushed[i];
            }
        }
        out
    });
    Ok(Arc::new(LieAlgebroidChart::new(
        format!("quotient({})", ambient.name),
        red_dim,
        r,
        anchor,
        structure,
    )))
}

/// Diagnostic only: pointwise numerical kernel frames of Ω_B along a point
/// sequence, with each sample's basis aligned to the previous one (columns
/// reordered and sign-flipped to maximize overlap). Smooth global frames
/// cannot be robustly synthesized this way, so the pipeline never consumes
/// this output; it exists to help users write an explicit kernel frame.
pub fn kernel_discovery_diagnostic(
    restriction: &PresymplecticRestriction,
    sample_points: &[Vec<f64>],
) -> Result<Vec<Mat>> {
    let mut out: Vec<Mat> = Vec::with_capacity(sample_points.len());
    for p in sample_points {
        let m = restriction.omega.matrix_at(p)?;
        let ns = linalg::nullspace_with_floor(&m, RANK_REL_TOL, 1e-12);
        let aligned = match out.last() {
            None => ns,
            Some(prev) if prev.cols() == ns.cols() => {
                let k = ns.cols();
                let mut used = vec![false; k];
                let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
                for j in 0..k {
                    let target = prev.col(j);
                    let mut best = (0usize, 0.0f64);
                    for c in 0..k {
                        if used[c] {
                            continue;
                        }
                        let d = linalg::dot(&target, &ns.col(c));
                        if d.abs() >= best.1.abs() {
                            best = (c, d);
                        }
                    }
                    used[best.0] = true;
                    let sign = if best.1 < 0.0 { -1.0 } else { 1.0 };
                    cols.push(ns.col(best.0).iter().map(|v| sign * v).collect());
                }
                Mat::from_cols(&cols)
            }
            Some(_) => ns,
        };
        out.push(aligned);
    }
    Ok(out)
}

/// Run the full pipeline, collecting every per-check result; the model is
/// present only when all hypothesis checks pass.
pub struct ReductionOutcome {
    pub checks: Vec<CheckResult>,
    pub restriction: Option<PresymplecticRestriction>,
    pub model: Option<ReducedModel>,
    pub reduced_h: Option<MultiSection>,
    pub failure: Option<String>,
}

pub fn run_pipeline(
    setup: &ReductionSetup,
    sample_points: &[Vec<f64>],
    tol: f64,
) -> Result<ReductionOutcome> {
    let mut checks = Vec::new();
    let restriction = match restrict(&setup.sub, &setup.omega_ambient, sample_points, tol) {
        Ok(r) => r,
        Err(e) => {
            return Ok(ReductionOutcome {
                checks,
                restriction: None,
                model: None,
                reduced_h: None,
                failure: Some(e.to_string()),
            })
        }
    };
    checks.push(CheckResult::new(
        "restriction_closed",
        restriction.closedness_residual,
        tol,
        format!(
            "d^B Ω_B = 0; kernel dimension {} constant across samples",
            restriction.kernel_dim
        ),
    ));
    checks.push(verify_kernel_frame(setup, &restriction, sample_points, tol)?);
    checks.push(verify_presymplectic_action(
        setup,
        &restriction,
        sample_points,
        tol,
    )?);
    checks.push(verify_projectable_frame(setup, sample_points, tol)?);
    let (ci, cii) = verify_algebra_conditions(setup, sample_points, tol)?;
    checks.push(ci);
    checks.push(cii);

    if let Some(first_fail) = checks.iter().find(|c| !c.pass) {
        let failure = format!("{}: {}", first_fail.name, first_fail.detail);
        return Ok(ReductionOutcome {
            checks,
            restriction: Some(restriction),
            model: None,
            reduced_h: None,
            failure: Some(failure),
        });
    }

    let model = build_reduced_unchecked(setup, &restriction)?;
    // sanity of the construction: axioms and symplecticity of the output
    let red_pts = crate::sample::sample_box(&setup.reduced_box, 2024, sample_points.len().min(25));
    let axioms = check_axioms(&model.chart, &red_pts, 1e-5)?;
    checks.push(CheckResult::new(
        "reduced_axioms",
        axioms.max_residual(),
        1e-5,
        "reduced chart satisfies the Lie algebroid axioms",
    ));
    let mut omega = model.omega.clone();
    let sym = crate::symplectic::verify_symplectic(&mut omega, &red_pts, 1e-5)?;
    checks.push(CheckResult::new(
        "reduced_symplectic",
        sym.closedness_residual,
        1e-5,
        format!(
            "Ω̃ closed; min singular value {:.3e}",
            sym.min_singular_value
        ),
    ));
    if !sym.nondegenerate {
        checks.last_mut().unwrap().pass = false;
        checks.last_mut().unwrap().detail = "Ω̃ is degenerate".into();
    }

    match reduce_dynamics(setup, &model, sample_points, tol) {
        Ok((h_red, dyn_checks)) => {
            checks.extend(dyn_checks);
            if let Some(first_fail) = checks.iter().find(|c| !c.pass) {
                let failure = format!("{}: {}", first_fail.name, first_fail.detail);
                return Ok(ReductionOutcome {
                    checks,
                    restriction: Some(restriction),
                    model: Some(model),
                    reduced_h: None,
                    failure: Some(failure),
                });
            }
            let mut model = model;
            model.reduced_h = Some(h_red.clone());
            Ok(ReductionOutcome {
                checks,
                restriction: Some(restriction),
                model: Some(model),
                reduced_h: Some(h_red),
                failure: None,
            })
        }
        Err(AlgError::Hypothesis { hypothesis, detail }) => {
            checks.push(CheckResult::new(
                &hypothesis,
                f64::INFINITY,
                tol,
                detail.clone(),
            ));
            Ok(ReductionOutcome {
                checks,
                restriction: Some(restriction),
                model: Some(model),
                reduced_h: None,
                failure: Some(format!("{hypothesis}: {detail}")),
            })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebroid::is_morphism;
    use crate::models::{
        self, lagrange_top_reduced, lagrange_top_reduction, LagrangeTopMutation,
        LagrangeTopParams,
    };
    use crate::sample::sample_box;

    fn top_setup() -> ReductionSetup {
        lagrange_top_reduction(&LagrangeTopParams::default(), LagrangeTopMutation::None, 5)
    }

    fn top_points(setup: &ReductionSetup, n: usize) -> Vec<Vec<f64>> {
        sample_box(&setup.sub_box, 41, n)
    }

    #[test]
    fn lagrange_top_kernel_dimension_is_one() {
        let setup = top_setup();
        let pts = top_points(&setup, 40);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        assert_eq!(restriction.kernel_dim, 1);
        assert!(restriction.closedness_residual <= 1e-8);
    }

    #[test]
    fn nondegenerate_restriction_has_zero_kernel() {
        let setup = models::trivial_reduction();
        let pts = sample_box(&setup.sub_box, 3, 10);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        assert_eq!(restriction.kernel_dim, 0);
    }

    #[test]
    fn cartan_kernel_is_vertical_with_group_dimension() {
        let setup = models::cartan_reduction(7);
        let pts = sample_box(&setup.sub_box, 3, 20);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        assert_eq!(restriction.kernel_dim, setup.action.group_dim);
        let rep = verify_kernel_frame(&setup, &restriction, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn lagrange_top_kernel_frame_verifies_and_mutant_fails() {
        let setup = top_setup();
        let pts = top_points(&setup, 25);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let rep = verify_kernel_frame(&setup, &restriction, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");

        // s perturbed by +0.1 f̄₁ leaves the pointwise nullspace
        let mut bad = setup.clone();
        bad.kernel_frame = vec![Section::new(
            bad.sub.sub.clone(),
            Arc::new(|x: &[f64]| vec![0.0, 0.0, 1.0, x[3] + 0.1, -x[2]]),
        )];
        let rep2 = verify_kernel_frame(&bad, &restriction, &pts, 1e-9).unwrap();
        assert!(!rep2.pass);
        assert!(rep2.max_residual > 1e-3);
    }

    #[test]
    fn sharp_on_kernel_covector_is_degenerate() {
        let setup = top_setup();
        let pts = top_points(&setup, 5);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let p = &pts[0];
        // any covector with a component on the kernel direction is unreachable
        match sharp_value(&restriction.omega, &[0.0, 0.0, 1.0, 0.0, 0.0], p) {
            Err(AlgError::Degenerate { condition, .. }) => assert!(condition > 1e8),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }

    #[test]
    fn lagrange_top_presymplectic_action_and_scaled_mutant() {
        let setup = top_setup();
        let pts = top_points(&setup, 20);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let rep = verify_presymplectic_action(&setup, &restriction, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");

        let bad = lagrange_top_reduction(
            &LagrangeTopParams::default(),
            LagrangeTopMutation::NonPresymplecticAction,
            5,
        );
        let rep2 = verify_presymplectic_action(&bad, &restriction, &pts, 1e-9).unwrap();
        assert!(!rep2.pass);
    }

    #[test]
    fn lagrange_top_projectable_frame_and_nonprojectable_mutant() {
        let setup = top_setup();
        let pts = top_points(&setup, 20);
        let rep = verify_projectable_frame(&setup, &pts, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");

        let bad = lagrange_top_reduction(
            &LagrangeTopParams::default(),
            LagrangeTopMutation::NonProjectableFrame,
            5,
        );
        let rep2 = verify_projectable_frame(&bad, &pts, 1e-9).unwrap();
        assert!(!rep2.pass);
        assert!(rep2.max_residual > 0.1);
    }

    #[test]
    fn invariant_sections_are_projectable_with_zero_correction() {
        // G-invariant sections satisfy the projectability identity with Y_g = 0
        let setup = models::cartan_reduction(3);
        let pts = sample_box(&setup.sub_box, 9, 10);
        let rep = verify_projectable_frame(&setup, &pts, 1e-12).unwrap();
        assert!(rep.pass);
        assert!(rep.max_residual < 1e-13);
    }

    #[test]
    fn lagrange_top_algebra_conditions_and_bracket_expansion() {
        let setup = top_setup();
        let pts = top_points(&setup, 20);
        let (ci, cii) = verify_algebra_conditions(&setup, &pts, 1e-7).unwrap();
        assert!(ci.pass, "{ci:?}");
        assert!(cii.pass, "{cii:?}");

        // ⟦X₁, X₂⟧ expands as sinh t·X₁ − s − ν̂₂·X₃ + ν̂₁·X₄
        for p in pts.iter().take(8) {
            let br = bracket_value(
                &setup.sub.sub,
                &setup.projectable_frame[0],
                &setup.projectable_frame[1],
                p,
            )
            .unwrap();
            let (coef, res) = expand_over_frames(&setup, p, &br).unwrap();
            assert!(res < 1e-9);
            let (theta, t, p1, p2) = (p[0], p[1], p[2], p[3]);
            let nu1 = theta.cos() * p1 + theta.sin() * p2;
            let nu2 = theta.sin() * p1 - theta.cos() * p2;
            let expect = [t.sinh(), 0.0, -nu2, nu1, -1.0];
            for k in 0..5 {
                assert!(
                    (coef[k] - expect[k]).abs() < 1e-7,
                    "coefficient {k} at {p:?}: {} vs {}",
                    coef[k],
                    expect[k]
                );
            }
        }
    }

    #[test]
    fn kernel_not_ideal_fails_condition_ii_only() {
        let setup = models::kernel_not_ideal_reduction();
        let pts = vec![vec![]; 3];
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-10).unwrap();
        assert_eq!(restriction.kernel_dim, 1);
        let kr = verify_kernel_frame(&setup, &restriction, &pts, 1e-10).unwrap();
        assert!(kr.pass, "{kr:?}");
        let (ci, cii) = verify_algebra_conditions(&setup, &pts, 1e-9).unwrap();
        assert!(ci.pass);
        assert!(!cii.pass);
        assert!((cii.max_residual - 1.0).abs() < 1e-9);
        match build_reduced(&setup, &restriction, &pts, 1e-9) {
            Err(AlgError::Hypothesis { hypothesis, .. }) => {
                assert_eq!(hypothesis, "kernel_ideal")
            }
            other => panic!("expected gate refusal, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn lagrange_top_reduction_reproduces_closed_forms() {
        let params = LagrangeTopParams::default();
        let setup = lagrange_top_reduction(&params, LagrangeTopMutation::None, 5);
        let pts = top_points(&setup, 30);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();
        let explicit = lagrange_top_reduced(&params);

        assert_eq!(model.chart.base_dim(), 3);
        assert_eq!(model.chart.rank(), 4);
        let slice_pts = sample_box(&setup.reduced_box, 99, 50);
        for nt in &slice_pts {
            let c_got = model.chart.structure_at(nt).unwrap();
            let c_want = explicit.chart.structure_at(nt).unwrap();
            for a in 0..4 {
                for b in (a + 1)..4 {
                    for g in 0..4 {
                        assert!(
                            (c_got.get(g, a, b) - c_want.get(g, a, b)).abs() < 1e-7,
                            "C^{g}_{a}{b} at {nt:?}: {} vs {}",
                            c_got.get(g, a, b),
                            c_want.get(g, a, b)
                        );
                    }
                }
            }
            let rho_got = model.chart.anchor_at(nt).unwrap();
            let rho_want = explicit.chart.anchor_at(nt).unwrap();
            assert!(rho_got.sub(&rho_want).max_abs() < 1e-7, "anchor at {nt:?}");
            let om_got = model.omega.matrix_at(nt).unwrap();
            let om_want = explicit.omega.matrix_at(nt).unwrap();
            assert!(om_got.sub(&om_want).max_abs() < 1e-7, "omega at {nt:?}");
        }
    }

    #[test]
    fn lagrange_top_projection_is_morphism_and_pullback_identity() {
        let setup = top_setup();
        let pts = top_points(&setup, 25);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();

        let rep = is_morphism(&model.projection, &pts, 1e-7).unwrap();
        assert!(rep.pass, "{rep:?}");

        // π̃_B^* Ω̃ = Ω_B pointwise
        let pulled = pullback(&model.projection, &model.omega.omega).unwrap();
        for p in &pts {
            let got = pulled.comps_at(p).unwrap();
            let want = restriction.omega.omega.comps_at(p).unwrap();
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-8, "pullback identity at {p:?}");
            }
        }

        // rank arithmetic: rank(B̃) = rank(B) − kernel_dim, even, Ω̃ nondegenerate
        assert_eq!(
            model.chart.rank(),
            setup.sub.sub.rank() - restriction.kernel_dim
        );
        assert_eq!(model.chart.rank() % 2, 0);
        assert_eq!(
            model.chart.base_dim(),
            setup.sub.sub.base_dim() - setup.action.group_dim
        );
    }

    #[test]
    fn lagrange_top_dynamics_reduce_and_match_explicit_hamiltonian() {
        let params = LagrangeTopParams {
            inertia_i: 1.0,
            inertia_j: 2.0,
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
        };
        let setup = lagrange_top_reduction(&params, LagrangeTopMutation::None, 5);
        let pts = top_points(&setup, 25);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();
        let (h_red, checks) = reduce_dynamics(&setup, &model, &pts, 1e-7).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        // H̃(t, ν) = ½(ν₁² + ν₂²)/I + mgl tanh t
        for nt in sample_box(&setup.reduced_box, 17, 20) {
            let got = h_red.value(&nt).unwrap();
            let want = 0.5 * (nt[1] * nt[1] + nt[2] * nt[2]) / params.inertia_i
                + params.mgl() * nt[0].tanh();
            assert!((got - want).abs() < 1e-12, "H̃ at {nt:?}");
        }
    }

    #[test]
    fn theta_dependent_potential_fails_invariance() {
        let setup = lagrange_top_reduction(
            &LagrangeTopParams::default(),
            LagrangeTopMutation::NonInvariantHamiltonian,
            5,
        );
        let pts = top_points(&setup, 15);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();
        match reduce_dynamics(&setup, &model, &pts, 1e-7) {
            Err(AlgError::Hypothesis { hypothesis, detail }) => {
                assert_eq!(hypothesis, "hamiltonian_invariance");
                assert!(detail.contains("not G-invariant"));
            }
            other => panic!("expected invariance failure, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn constant_hamiltonian_gives_zero_deviation() {
        let mut setup = models::cartan_reduction(3);
        setup.hamiltonian = MultiSection::constant_scalar(setup.sub.ambient.clone(), 2.5);
        let mut sys = setup.ambient_system.take().unwrap();
        sys.hamiltonian = setup.hamiltonian.clone();
        setup.ambient_system = Some(sys);
        let pts = sample_box(&setup.sub_box, 3, 15);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();
        let (h_red, _) = reduce_dynamics(&setup, &model, &pts, 1e-7).unwrap();
        let rep = verify_commutation(&setup, &model, &h_red, &[0.4, 0.7, -0.2, 0.0], 1.0, 0.01)
            .unwrap();
        assert_eq!(rep.max_deviation, 0.0);
        assert_eq!(rep.constraint_drift, 0.0);
    }

    #[test]
    fn lagrange_top_commutation_within_integrator_error() {
        let params = LagrangeTopParams {
            inertia_i: 1.0,
            inertia_j: 2.0,
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
        };
        let setup = lagrange_top_reduction(&params, LagrangeTopMutation::None, 5);
        let pts = top_points(&setup, 20);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-7).unwrap();
        let (h_red, _) = reduce_dynamics(&setup, &model, &pts, 1e-7).unwrap();
        let init = [0.0, 0.3, 0.2, -0.1, 0.0];
        let rep = verify_commutation(&setup, &model, &h_red, &init, 2.0, 1e-3).unwrap();
        assert!(rep.max_deviation <= 1e-6, "deviation {}", rep.max_deviation);
        assert!(rep.constraint_drift <= 1e-8, "drift {}", rep.constraint_drift);

        // init off N is rejected
        let err = verify_commutation(&setup, &model, &h_red, &[0.0, 0.3, 0.2, -0.1, 0.05], 1.0, 1e-2);
        assert!(err.is_err());
    }

    #[test]
    fn trivial_group_reduction_is_identity_up_to_relabeling() {
        let setup = models::trivial_reduction();
        let pts = sample_box(&setup.sub_box, 3, 10);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        assert_eq!(restriction.kernel_dim, 0);
        let model = build_reduced(&setup, &restriction, &pts, 1e-8).unwrap();
        assert_eq!(model.chart.rank(), 2);
        assert_eq!(model.chart.base_dim(), 1);
        for p in &pts {
            let want = setup.sub.sub.structure_at(p).unwrap();
            let got = model.chart.structure_at(p).unwrap();
            for a in 0..2 {
                for b in (a + 1)..2 {
                    for g in 0..2 {
                        assert!((got.get(g, a, b) - want.get(g, a, b)).abs() < 1e-10);
                    }
                }
            }
            let m_got = model.omega.matrix_at(p).unwrap();
            let m_want = restriction.omega.matrix_at(p).unwrap();
            assert!(m_got.sub(&m_want).max_abs() < 1e-10);
        }
    }

    #[test]
    fn cartan_reduction_yields_pendulum() {
        let setup = models::cartan_reduction(11);
        let pts = sample_box(&setup.sub_box, 3, 20);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let model = build_reduced(&setup, &restriction, &pts, 1e-8).unwrap();
        let (h_red, checks) = reduce_dynamics(&setup, &model, &pts, 1e-7).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        for nt in sample_box(&setup.reduced_box, 5, 10) {
            // abelian reduced structure, identity anchor, canonical Ω̃
            assert_eq!(model.chart.structure_at(&nt).unwrap().max_abs(), 0.0);
            let rho = model.chart.anchor_at(&nt).unwrap();
            assert!(rho.sub(&Mat::identity(2)).max_abs() < 1e-9);
            let om = model.omega.matrix_at(&nt).unwrap();
            assert!((om[(0, 1)] - 1.0).abs() < 1e-12);
            let want = 0.5 * nt[1] * nt[1] + nt[0].cos();
            assert!((h_red.value(&nt).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn so3_quotient_by_s1_is_rank3_over_the_line() {
        let (chart, action, frame) = models::so3_s1_base_quotient();
        let pts = sample_box(chart.box_hint.as_ref().unwrap(), 13, 15);
        let quotient = quotient_algebroid(&chart, &action, &frame, &pts, 1e-9).unwrap();
        assert_eq!(quotient.base_dim(), 1);
        assert_eq!(quotient.rank(), 3);
        // t-dependent structure: ⟦ũ₁,ũ₂⟧ = −sinh t ũ₁ + ũ₃, others 0
        for t in [-0.8, 0.0, 0.6] {
            let c = quotient.structure_at(&[t]).unwrap();
            assert!((c.get(0, 0, 1) + t.sinh()).abs() < 1e-9);
            assert!((c.get(2, 0, 1) - 1.0).abs() < 1e-9);
            assert!(c.get(1, 0, 1).abs() < 1e-9);
            for g in 0..3 {
                assert!(c.get(g, 0, 2).abs() < 1e-9);
                assert!(c.get(g, 1, 2).abs() < 1e-9);
            }
            let rho = quotient.anchor_at(&[t]).unwrap();
            assert!(rho[(0, 0)].abs() < 1e-9);
            assert!((rho[(0, 1)] - t.cosh()).abs() < 1e-9);
            assert!(rho[(0, 2)].abs() < 1e-9);
        }
        let qpts = sample_box(&crate::sample::ChartBox::new(vec![-1.0], vec![1.0]), 5, 10);
        let rep = check_axioms(&quotient, &qpts, 1e-5).unwrap();
        assert!(rep.pass, "{rep:?}");

        // a non-invariant frame is rejected
        let bad: Vec<Section> = (0..3).map(|a| Section::frame(chart.clone(), a)).collect();
        match quotient_algebroid(&chart, &action, &bad, &pts, 1e-9) {
            Err(AlgError::Hypothesis { hypothesis, .. }) => {
                assert_eq!(hypothesis, "invariant_frame")
            }
            other => panic!("expected invariance failure, got {:?}", other.is_ok()),
        }
    }

    #[test]
    fn prolongation_quotient_matches_quotient_prolongation() {
        // structure functions of 𝒯^A A*/G and 𝒯^{A/G}(A*/G) agree frame-wise
        let (base_chart, base_action, base_frame) = models::so3_s1_base_quotient();
        let base_pts = sample_box(base_chart.box_hint.as_ref().unwrap(), 13, 10);
        let a_mod_g =
            quotient_algebroid(&base_chart, &base_action, &base_frame, &base_pts, 1e-9).unwrap();
        let route2 = crate::prolongation::prolong(&a_mod_g).unwrap();

        let (pro, action, frame) = models::so3_s1_prolongation_quotient();
        let pts = sample_box(pro.chart.box_hint.as_ref().unwrap(), 13, 10);
        let route1 = quotient_algebroid(&pro.chart, &action, &frame, &pts, 1e-9).unwrap();

        assert_eq!(route1.rank(), route2.chart.rank());
        assert_eq!(route1.base_dim(), route2.chart.base_dim());
        let nu_box = crate::sample::ChartBox::new(vec![-1.0; 4], vec![1.0; 4]);
        for nt in sample_box(&nu_box, 7, 12) {
            let c1 = route1.structure_at(&nt).unwrap();
            let c2 = route2.chart.structure_at(&nt).unwrap();
            for a in 0..6 {
                for b in (a + 1)..6 {
                    for g in 0..6 {
                        assert!(
                            (c1.get(g, a, b) - c2.get(g, a, b)).abs() < 1e-8,
                            "C^{g}_{a}{b} at {nt:?}: {} vs {}",
                            c1.get(g, a, b),
                            c2.get(g, a, b)
                        );
                    }
                }
            }
            let r1 = route1.anchor_at(&nt).unwrap();
            let r2 = route2.chart.anchor_at(&nt).unwrap();
            assert!(r1.sub(&r2).max_abs() < 1e-8, "anchors differ at {nt:?}");
        }
    }

    #[test]
    fn pipeline_collects_reports_and_gates() {
        let setup = top_setup();
        let pts = top_points(&setup, 20);
        let outcome = run_pipeline(&setup, &pts, 1e-7).unwrap();
        assert!(outcome.failure.is_none(), "{:?}", outcome.failure);
        assert!(outcome.model.is_some());
        assert!(outcome.checks.iter().all(|c| c.pass));

        let bad = lagrange_top_reduction(
            &LagrangeTopParams::default(),
            LagrangeTopMutation::NonPresymplecticAction,
            5,
        );
        let outcome2 = run_pipeline(&bad, &pts, 1e-7).unwrap();
        let failure = outcome2.failure.expect("should fail");
        assert!(failure.contains("presymplectic_action"), "{failure}");
        assert!(outcome2.model.is_none());
    }
}

#[cfg(test)]
mod diagnostic_tests {
    use super::*;
    use crate::models::{lagrange_top_reduction, LagrangeTopMutation, LagrangeTopParams};
    use crate::sample::sample_box;

    #[test]
    fn kernel_discovery_tracks_the_explicit_frame() {
        let setup =
            lagrange_top_reduction(&LagrangeTopParams::default(), LagrangeTopMutation::None, 5);
        // a short path in N along which the kernel rotates smoothly
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|k| {
                let s = k as f64 / 29.0;
                vec![1.5 * s, 0.4 * s - 0.2, 0.3 + 0.2 * s, -0.5 + s]
            })
            .collect();
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let frames = kernel_discovery_diagnostic(&restriction, &pts).unwrap();
        assert_eq!(frames.len(), pts.len());
        let mut prev_sign = 0.0;
        for (frame, p) in frames.iter().zip(&pts) {
            assert_eq!(frame.cols(), 1);
            // spans the same line as s = ē₃ + π₂f̄₁ − π₁f̄₂
            let s_vec = setup.kernel_frame[0].eval(p).unwrap();
            let discovered = frame.col(0);
            let overlap = linalg::dot(&s_vec, &discovered)
                / (linalg::norm(&s_vec) * linalg::norm(&discovered));
            assert!(
                (overlap.abs() - 1.0).abs() < 1e-9,
                "kernel direction mismatch at {p:?}"
            );
            // continuity alignment keeps the orientation from flipping
            if prev_sign != 0.0 {
                assert_eq!(overlap.signum(), prev_sign);
            }
            prev_sign = overlap.signum();
        }
    }

    #[test]
    fn omega_b_verifies_closed_but_degenerate() {
        let setup =
            lagrange_top_reduction(&LagrangeTopParams::default(), LagrangeTopMutation::None, 5);
        let pts = sample_box(&setup.sub_box, 41, 20);
        let restriction = restrict(&setup.sub, &setup.omega_ambient, &pts, 1e-8).unwrap();
        let mut omega = restriction.omega.clone();
        let rep = crate::symplectic::verify_symplectic(&mut omega, &pts, 1e-8).unwrap();
        assert!(rep.closed);
        assert!(!rep.nondegenerate);
        assert_eq!(rep.kernel_dim, 1);
        assert!(rep.min_singular_value < 1e-9);
        assert!(!omega.nondegenerate_verified);
        assert!(omega.closed_verified);
    }
}
