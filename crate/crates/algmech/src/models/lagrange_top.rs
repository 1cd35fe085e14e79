//! The Lagrange top: a symmetric rigid body with a fixed point in a
//! gravitational field, formulated on the so(3) action algebroid over the
//! punctured sphere, with its full reduction setup (N: π₃ = 0, B: α₃ = 0,
//! the S¹ rotation action, explicit kernel and projectable frames) and the
//! explicit reduced model used for cross-validation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::{LieAlgebroidChart, StructureArray};
use crate::dynamics::HamiltonianSystem;
use crate::error::Result;
use crate::linalg::Mat;
use crate::prolongation::{canonical_symplectic, prolong};
use crate::reduction::{GroupActionData, ReductionSetup, SubalgebroidData};
use crate::sample::{sample_scalars, ChartBox};
use crate::section::{MorphismData, MultiSection, Section};
use crate::symplectic::SymplecticSection;

use super::{action_so3_sphere, so3_lie_algebra, so3_structure};

/// Physical parameters: inertia eigenvalues (I, I, J), mass, gravity and
/// the distance from the fixed point to the centre of mass.
#[derive(Debug, Clone, Copy)]
pub struct LagrangeTopParams {
    pub inertia_i: f64,
    pub inertia_j: f64,
    pub mass: f64,
    pub gravity: f64,
    pub length: f64,
}

impl Default for LagrangeTopParams {
    fn default() -> Self {
        LagrangeTopParams {
            inertia_i: 1.0,
            inertia_j: 1.0,
            mass: 1.0,
            gravity: 1.0,
            length: 1.0,
        }
    }
}

impl LagrangeTopParams {
    pub fn mgl(&self) -> f64 {
        self.mass * self.gravity * self.length
    }

    pub fn validate(&self) -> Result<()> {
        if self.inertia_i <= 0.0 || self.inertia_j <= 0.0 {
            return Err(crate::error::AlgError::Model(
                "inertia eigenvalues must be positive".into(),
            ));
        }
        if self.mgl() < 0.0 {
            return Err(crate::error::AlgError::Model(
                "m·g·l must be nonnegative".into(),
            ));
        }
        Ok(())
    }

    pub fn to_map(&self) -> BTreeMap<String, f64> {
        BTreeMap::from([
            ("I".to_string(), self.inertia_i),
            ("J".to_string(), self.inertia_j),
            ("m".to_string(), self.mass),
            ("g".to_string(), self.gravity),
            ("l".to_string(), self.length),
        ])
    }
}

/// H(([θ], t), π) = ½(π₁²/I + π₂²/I + π₃²/J) + mgl·tanh t on the chart of A*.
fn hamiltonian_on_prolongation(
    chart: Arc<LieAlgebroidChart>,
    p: LagrangeTopParams,
    theta_perturbation: f64,
) -> MultiSection {
    let (i1, i3, mgl) = (p.inertia_i, p.inertia_j, p.mgl());
    let eps = theta_perturbation;
    MultiSection::scalar(
        chart,
        Arc::new(move |s: &[f64]| {
            0.5 * (s[2] * s[2] / i1 + s[3] * s[3] / i1 + s[4] * s[4] / i3)
                + mgl * s[1].tanh()
                + eps * s[0].sin()
        }),
    )
    .with_gradient(Arc::new(move |s: &[f64]| {
        let sech = 1.0 / s[1].cosh();
        vec![
            eps * s[0].cos(),
            mgl * sech * sech,
            s[2] / i1,
            s[3] / i1,
            s[4] / i3,
        ]
    }))
}

/// The full Lagrange-top Hamiltonian system on 𝒯^A A*.
pub fn lagrange_top_full(p: &LagrangeTopParams) -> HamiltonianSystem {
    let mut pro = prolong(&action_so3_sphere()).expect("prolongation");
    pro.chart = Arc::new(pro.chart.relabel(
        ["theta", "t", "pi1", "pi2", "pi3"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        pro.chart.frame_labels.clone(),
    ));
    let h = hamiltonian_on_prolongation(pro.chart.clone(), *p, 0.0);
    HamiltonianSystem::new(pro, h)
        .expect("system")
        .with_params(p.to_map())
}

/// Free rigid body: minus Lie–Poisson dynamics on so(3)*.
pub fn free_rigid_body(inertia_i: f64, inertia_j: f64) -> HamiltonianSystem {
    let mut pro = prolong(&so3_lie_algebra()).expect("prolongation");
    pro.chart = Arc::new(pro.chart.relabel(
        ["y1", "y2", "y3"].iter().map(|s| s.to_string()).collect(),
        pro.chart.frame_labels.clone(),
    ));
    let (i1, i3) = (inertia_i, inertia_j);
    let h = MultiSection::scalar(
        pro.chart.clone(),
        Arc::new(move |y: &[f64]| {
            0.5 * (y[0] * y[0] / i1 + y[1] * y[1] / i1 + y[2] * y[2] / i3)
        }),
    )
    .with_gradient(Arc::new(move |y: &[f64]| {
        vec![y[0] / i1, y[1] / i1, y[2] / i3]
    }));
    HamiltonianSystem::new(pro, h)
        .expect("system")
        .with_params(BTreeMap::from([
            ("I".to_string(), inertia_i),
            ("J".to_string(), inertia_j),
        ]))
}

/// Which single reduction hypothesis to break, for gating tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LagrangeTopMutation {
    #[default]
    None,
    /// Scale the fiber action by 1.01: Ψ_g*Ω_B ≠ Ω_B.
    NonPresymplecticAction,
    /// Replace X₁ by ē₁|N, which is not projectable under the rotation.
    NonProjectableFrame,
    /// Add a θ-dependent potential: H_N loses its G-invariance.
    NonInvariantHamiltonian,
}

/// 2×2 rotation block.
fn rot2(phi: f64) -> [[f64; 2]; 2] {
    let (s, c) = phi.sin_cos();
    [[c, -s], [s, c]]
}

/// The rotation A_φ about the z-axis as a 3×3 matrix.
fn rot3(phi: f64) -> Mat {
    let (s, c) = phi.sin_cos();
    Mat::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]])
}

/// The subalgebroid B over N = {π₃ = 0}: chart (θ, t, π₁, π₂), frame
/// (ē₁, ē₂, ē₃, f̄₁, f̄₂) — the f̄₃ direction (α₃) is removed.
fn lagrange_top_sub_chart() -> Arc<LieAlgebroidChart> {
    let parent = action_so3_sphere();
    let base = parent.clone();
    let anchor = Arc::new(move |x: &[f64]| -> Mat {
        let rho = base.anchor_at(&x[..2]).expect("parent anchor");
        let mut out = Mat::zeros(4, 5);
        for i in 0..2 {
            for a in 0..3 {
                out[(i, a)] = rho[(i, a)];
            }
        }
        out[(2, 3)] = 1.0; // f̄₁ ↦ ∂π₁
        out[(3, 4)] = 1.0; // f̄₂ ↦ ∂π₂
        out
    });
    let structure = Arc::new(move |_x: &[f64]| -> StructureArray {
        let so3 = so3_structure();
        let mut c = StructureArray::zeros(5);
        for a in 0..3 {
            for b in (a + 1)..3 {
                for g in 0..3 {
                    c.set(g, a, b, so3.get(g, a, b));
                }
            }
        }
        c
    });
    let base2 = parent.clone();
    let anchor_partials = Arc::new(move |x: &[f64]| -> Vec<Mat> {
        let dp = base2.anchor_partials_at(&x[..2]).expect("parent partials");
        let mut out = Vec::with_capacity(4);
        for i in 0..2 {
            let mut d = Mat::zeros(4, 5);
            for r in 0..2 {
                for a in 0..3 {
                    d[(r, a)] = dp[i][(r, a)];
                }
            }
            out.push(d);
        }
        out.push(Mat::zeros(4, 5));
        out.push(Mat::zeros(4, 5));
        out
    });
    let structure_partials =
        Arc::new(move |_x: &[f64]| -> Vec<StructureArray> { vec![StructureArray::zeros(5); 4] });
    Arc::new(
        LieAlgebroidChart::new("lagrange-top-B", 4, 5, anchor, structure)
            .with_labels(
                vec!["theta".into(), "t".into(), "pi1".into(), "pi2".into()],
                vec![
                    "e1b".into(),
                    "e2b".into(),
                    "e3b".into(),
                    "f1b".into(),
                    "f2b".into(),
                ],
            )
            .with_angles(vec![0])
            .with_partials(anchor_partials, structure_partials)
            .with_box(ChartBox::new(
                vec![0.0, -1.2, -1.0, -1.0],
                vec![std::f64::consts::TAU, 1.2, 1.0, 1.0],
            )),
    )
}

/// Full reduction setup of the Lagrange top, optionally with one broken
/// hypothesis. `seed` controls the randomized group-element samples.
pub fn lagrange_top_reduction(
    p: &LagrangeTopParams,
    mutation: LagrangeTopMutation,
    seed: u64,
) -> ReductionSetup {
    let full = lagrange_top_full(p);
    let ambient = full.prolong.chart.clone();
    let omega_ambient = canonical_symplectic(&full.prolong).expect("canonical symplectic");
    let sub_chart = lagrange_top_sub_chart();

    // i_B: frame slots (ē₁, ē₂, ē₃, f̄₁, f̄₂) ⊂ (𝒳₁..₃, 𝒫¹..³), over π₃ = 0
    let inclusion = MorphismData::new(
        sub_chart.clone(),
        ambient.clone(),
        Arc::new(|x: &[f64]| vec![x[0], x[1], x[2], x[3], 0.0]),
        Arc::new(|_x: &[f64]| {
            let mut f = Mat::zeros(6, 5);
            for j in 0..5 {
                f[(j, j)] = 1.0;
            }
            f
        }),
    );

    // kernel frame: s = ē₃ + π₂ f̄₁ − π₁ f̄₂
    let kernel = Section::new(
        sub_chart.clone(),
        Arc::new(|x: &[f64]| vec![0.0, 0.0, 1.0, x[3], -x[2]]),
    )
    .with_jacobian(Arc::new(|_x: &[f64]| {
        let mut j = Mat::zeros(5, 4);
        j[(3, 3)] = 1.0;
        j[(4, 2)] = -1.0;
        j
    }));

    // projectable frame {e₁′, −e₂′, f₁′, −f₂′}: the sign choice on the second
    // and fourth elements together with the (t, ν₁, −ν₂) quotient chart is
    // what reproduces the reduced closed forms exactly
    let frames: Vec<Section> = {
        let mk = |which: usize| -> Section {
            Section::new(
                sub_chart.clone(),
                Arc::new(move |x: &[f64]| {
                    let (s, c) = x[0].sin_cos();
                    match which {
                        0 => vec![c, s, 0.0, 0.0, 0.0],
                        1 => vec![s, -c, 0.0, 0.0, 0.0],
                        2 => vec![0.0, 0.0, 0.0, c, s],
                        _ => vec![0.0, 0.0, 0.0, s, -c],
                    }
                }),
            )
            .with_jacobian(Arc::new(move |x: &[f64]| {
                let (s, c) = x[0].sin_cos();
                let mut j = Mat::zeros(5, 4);
                match which {
                    0 => {
                        j[(0, 0)] = -s;
                        j[(1, 0)] = c;
                    }
                    1 => {
                        j[(0, 0)] = c;
                        j[(1, 0)] = s;
                    }
                    2 => {
                        j[(3, 0)] = -s;
                        j[(4, 0)] = c;
                    }
                    _ => {
                        j[(3, 0)] = c;
                        j[(4, 0)] = s;
                    }
                }
                j
            }))
        };
        let mut v = vec![mk(0), mk(1), mk(2), mk(3)];
        if mutation == LagrangeTopMutation::NonProjectableFrame {
            v[0] = Section::constant(sub_chart.clone(), vec![1.0, 0.0, 0.0, 0.0, 0.0]);
        }
        v
    };

    // S¹ action: ([θ′], (([θ], t), π)) ↦ (([θ+θ′], t), A_θ′ π) on the base,
    // diag(A_θ′, A_θ′) on the (ξ, α) fiber slots
    let fiber_scale = if mutation == LagrangeTopMutation::NonPresymplecticAction {
        1.01
    } else {
        1.0
    };
    let base_action = Arc::new(|g: &[f64], x: &[f64]| -> Vec<f64> {
        let r = rot2(g[0]);
        vec![
            x[0] + g[0],
            x[1],
            r[0][0] * x[2] + r[0][1] * x[3],
            r[1][0] * x[2] + r[1][1] * x[3],
        ]
    });
    let fiber_action = Arc::new(move |g: &[f64], _x: &[f64]| -> Mat {
        let r3 = rot3(g[0]);
        let mut f = Mat::zeros(5, 5);
        for i in 0..3 {
            for j in 0..3 {
                f[(i, j)] = fiber_scale * r3[(i, j)];
            }
        }
        let r = rot2(g[0]);
        for i in 0..2 {
            for j in 0..2 {
                f[(3 + i, 3 + j)] = fiber_scale * r[i][j];
            }
        }
        f
    });
    // π_N(θ, t, π) = (t, cosθ·π₁ + sinθ·π₂, sinθ·π₁ − cosθ·π₂)
    let projection = Arc::new(|x: &[f64]| -> Vec<f64> {
        let (s, c) = x[0].sin_cos();
        vec![x[1], c * x[2] + s * x[3], s * x[2] - c * x[3]]
    });
    // σ(t, ν) = (0, t, ν₁, −ν₂)
    let slice = Arc::new(|nt: &[f64]| -> Vec<f64> { vec![0.0, nt[0], nt[1], -nt[2]] });

    // 8 equally spaced angles plus 3 seeded random ones
    let mut angles: Vec<Vec<f64>> = (0..8)
        .map(|k| vec![k as f64 * std::f64::consts::TAU / 8.0])
        .collect();
    for a in sample_scalars(seed, 3, 0.0, std::f64::consts::TAU) {
        angles.push(vec![a]);
    }

    let h_eps = if mutation == LagrangeTopMutation::NonInvariantHamiltonian {
        0.1
    } else {
        0.0
    };
    let hamiltonian = hamiltonian_on_prolongation(ambient.clone(), *p, h_eps);
    let ambient_system = HamiltonianSystem::new(full.prolong.clone(), hamiltonian.clone())
        .expect("system")
        .with_params(p.to_map());

    ReductionSetup {
        name: "lagrange-top".into(),
        sub: SubalgebroidData {
            ambient,
            sub: sub_chart.clone(),
            inclusion,
        },
        action: GroupActionData {
            group_dim: 1,
            sample_elements: angles,
            base_action,
            fiber_action,
            projection,
            slice,
        },
        omega_ambient,
        kernel_frame: vec![kernel],
        projectable_frame: frames,
        hamiltonian,
        sub_box: sub_chart.box_hint.clone().unwrap(),
        reduced_box: ChartBox::new(vec![-1.2, -1.0, -1.0], vec![1.2, 1.0, 1.0]),
        reduced_coord_labels: vec!["t".into(), "nu1".into(), "nu2".into()],
        ambient_system: Some(ambient_system),
        state_to_sub: Some(Arc::new(|s: &[f64]| {
            (vec![s[0], s[1], s[2], s[3]], vec![s[4]])
        })),
    }
}

/// The explicit reduced Lagrange top over Ñ ≅ ℝ³ (coordinates t, ν₁, ν₂),
/// rank 4:
///   ⟦e₁,e₂⟧ = (sinh t)e₁ − ν₂e₃ + ν₁e₄,
///   ⟦e₁,e₃⟧ = −(sinh t)e₄,  ⟦e₁,e₄⟧ = (sinh t)e₃,
///   ρ((t,ν),(η,β)) = −η₂ cosh t ∂t + (β₁ − η₁ν₂ sinh t)∂ν₁
///                    + (β₂ + η₁ν₁ sinh t)∂ν₂,
///   Ω̃((η,β),(η′,β′)) = β′(η) − β(η′),
///   H̃(t,ν) = ½(ν₁² + ν₂²)/I + mgl tanh t.
pub struct ExplicitReducedTop {
    pub chart: Arc<LieAlgebroidChart>,
    pub omega: SymplecticSection,
    pub hamiltonian: MultiSection,
}

pub fn lagrange_top_reduced(p: &LagrangeTopParams) -> ExplicitReducedTop {
    let anchor = Arc::new(|x: &[f64]| -> Mat {
        let (t, n1, n2) = (x[0], x[1], x[2]);
        let (sh, ch) = (t.sinh(), t.cosh());
        Mat::from_rows(&[
            vec![0.0, -ch, 0.0, 0.0],
            vec![-n2 * sh, 0.0, 1.0, 0.0],
            vec![n1 * sh, 0.0, 0.0, 1.0],
        ])
    });
    let structure = Arc::new(|x: &[f64]| -> StructureArray {
        let (t, n1, n2) = (x[0], x[1], x[2]);
        let sh = t.sinh();
        let mut c = StructureArray::zeros(4);
        c.set(0, 0, 1, sh); // ⟦e1,e2⟧ = sinh t · e1 …
        c.set(2, 0, 1, -n2); //             − ν₂ e3
        c.set(3, 0, 1, n1); //              + ν₁ e4
        c.set(3, 0, 2, -sh); // ⟦e1,e3⟧ = −sinh t · e4
        c.set(2, 0, 3, sh); // ⟦e1,e4⟧ = sinh t · e3
        c
    });
    let anchor_partials = Arc::new(|x: &[f64]| -> Vec<Mat> {
        let (t, n1, n2) = (x[0], x[1], x[2]);
        let (sh, ch) = (t.sinh(), t.cosh());
        vec![
            Mat::from_rows(&[
                vec![0.0, -sh, 0.0, 0.0],
                vec![-n2 * ch, 0.0, 0.0, 0.0],
                vec![n1 * ch, 0.0, 0.0, 0.0],
            ]),
            Mat::from_rows(&[
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
                vec![sh, 0.0, 0.0, 0.0],
            ]),
            Mat::from_rows(&[
                vec![0.0, 0.0, 0.0, 0.0],
                vec![-sh, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0],
            ]),
        ]
    });
    let structure_partials = Arc::new(|x: &[f64]| -> Vec<StructureArray> {
        let ch = x[0].cosh();
        let mut dt = StructureArray::zeros(4);
        dt.set(0, 0, 1, ch);
        dt.set(3, 0, 2, -ch);
        dt.set(2, 0, 3, ch);
        let mut dn1 = StructureArray::zeros(4);
        dn1.set(3, 0, 1, 1.0);
        let mut dn2 = StructureArray::zeros(4);
        dn2.set(2, 0, 1, -1.0);
        vec![dt, dn1, dn2]
    });
    let chart = Arc::new(
        LieAlgebroidChart::new("lagrange-top-reduced", 3, 4, anchor, structure)
            .with_labels(
                vec!["t".into(), "nu1".into(), "nu2".into()],
                vec!["e1".into(), "e2".into(), "e3".into(), "e4".into()],
            )
            .with_partials(anchor_partials, structure_partials)
            .with_box(ChartBox::new(vec![-1.2, -1.0, -1.0], vec![1.2, 1.0, 1.0])),
    );
    // Ω̃ = β′(η) − β(η′): constant pairing of the (η, β) blocks
    let comps = Arc::new(|_x: &[f64]| -> Vec<f64> {
        // increasing pairs of 4: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0]
    });
    let mut omega = SymplecticSection::new(MultiSection::new(chart.clone(), 2, comps)).unwrap();
    omega.nondegenerate_verified = true;
    let (i1, mgl) = (p.inertia_i, p.mgl());
    let hamiltonian = MultiSection::scalar(
        chart.clone(),
        Arc::new(move |x: &[f64]| 0.5 * (x[1] * x[1] + x[2] * x[2]) / i1 + mgl * x[0].tanh()),
    )
    .with_gradient(Arc::new(move |x: &[f64]| {
        let sech = 1.0 / x[0].cosh();
        vec![mgl * sech * sech, x[1] / i1, x[2] / i1]
    }));
    ExplicitReducedTop {
        chart,
        omega,
        hamiltonian,
    }
}
