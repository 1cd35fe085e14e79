//! Name-keyed registry of the built-in models, plus the remaining reduction
//! instances (Cartan, trivial group, kernel-not-ideal) and the so(3)/S¹
//! quotient data.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::chart::{LieAlgebroidChart, StructureArray};
use crate::dynamics::HamiltonianSystem;
use crate::error::{AlgError, Result};
use crate::linalg::Mat;
use crate::prolongation::{canonical_symplectic, prolong, ProlongationChart};
use crate::reduction::{GroupActionData, ReductionSetup, SubalgebroidData};
use crate::sample::{sample_scalars, ChartBox};
use crate::section::{MorphismData, MultiSection, Section};
use crate::symplectic::SymplecticSection;

use super::lagrange_top::LagrangeTopMutation;
use super::*;

/// A chart carrying an explicit symplectic section (and possibly a
/// Hamiltonian), for models that are not prolongations.
#[derive(Clone)]
pub struct SymplecticModel {
    pub chart: Arc<LieAlgebroidChart>,
    pub omega: SymplecticSection,
    pub hamiltonian: Option<MultiSection>,
}

/// What a registry entry builds.
#[allow(clippy::large_enum_variant)]
pub enum BuiltModel {
    Chart(Arc<LieAlgebroidChart>),
    System(HamiltonianSystem),
    Symplectic(SymplecticModel),
    Reduction(ReductionSetup),
}

impl BuiltModel {
    pub fn kind(&self) -> &'static str {
        match self {
            BuiltModel::Chart(_) => "chart",
            BuiltModel::System(_) => "system",
            BuiltModel::Symplectic(_) => "symplectic",
            BuiltModel::Reduction(_) => "reduction",
        }
    }
}

/// One-line description per model, in `model_names` order.
pub fn model_descriptions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("abelian-2", "abelian Lie algebra R^n (param n)"),
        ("lie-algebra", "so(3); broken=1 corrupts the constants"),
        ("tangent-bundle", "TM over R^m (param dim)"),
        ("action-so3-sphere", "so(3) acting on the punctured sphere, cylinder chart"),
        ("lagrange-top-chart", "alias of action-so3-sphere"),
        ("atiyah-local", "gauge-algebroid local model: so(3), constant connection (d1..d3)"),
        ("free-rigid-body", "minus Lie-Poisson Euler top on so(3)* (params I, J)"),
        ("lagrange-top-full", "heavy symmetric top on the prolongation (params I, J, m, g, l)"),
        ("lagrange-top", "full reduction setup; mutate_action/_frame/_potential break one hypothesis"),
        ("lagrange-top-reduced", "explicit reduced top over (t, nu1, nu2)"),
        ("cartan-r4", "coisotropic p2 = 0 in T*R^2 with a translation symmetry"),
        ("trivial-reduction", "B = A, trivial group: identity reduction"),
        ("kernel-not-ideal", "heisenberg instance whose kernel is not an ideal"),
    ]
}

pub fn model_names() -> Vec<&'static str> {
    vec![
        "abelian-2",
        "lie-algebra",
        "tangent-bundle",
        "action-so3-sphere",
        "lagrange-top-chart",
        "atiyah-local",
        "free-rigid-body",
        "lagrange-top-full",
        "lagrange-top",
        "lagrange-top-reduced",
        "cartan-r4",
        "trivial-reduction",
        "kernel-not-ideal",
    ]
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn check_keys(params: &BTreeMap<String, f64>, allowed: &[&str]) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(AlgError::Model(format!(
                "unknown parameter '{k}' (allowed: {})",
                allowed.join(", ")
            )));
        }
    }
    Ok(())
}

fn top_params(params: &BTreeMap<String, f64>) -> Result<LagrangeTopParams> {
    let p = LagrangeTopParams {
        inertia_i: param(params, "I", 1.0),
        inertia_j: param(params, "J", 1.0),
        mass: param(params, "m", 1.0),
        gravity: param(params, "g", 1.0),
        length: param(params, "l", 1.0),
    };
    p.validate()?;
    Ok(p)
}

/// Build a registered model. `seed` drives the randomized group samples of
/// reduction setups so that reports are reproducible per seed.
pub fn build_model(name: &str, params: &BTreeMap<String, f64>, seed: u64) -> Result<BuiltModel> {
    match name {
        "abelian-2" => {
            check_keys(params, &["n"])?;
            let n = param(params, "n", 2.0) as usize;
            Ok(BuiltModel::Chart(abelian_lie_algebra(n.max(1))))
        }
        "lie-algebra" => {
            check_keys(params, &["broken"])?;
            if param(params, "broken", 0.0) != 0.0 {
                Ok(BuiltModel::Chart(so3_broken_jacobi()))
            } else {
                Ok(BuiltModel::Chart(so3_lie_algebra()))
            }
        }
        "tangent-bundle" => {
            check_keys(params, &["dim"])?;
            let m = param(params, "dim", 1.0) as usize;
            Ok(BuiltModel::Chart(tangent_bundle(m.max(1))))
        }
        "action-so3-sphere" | "lagrange-top-chart" => {
            check_keys(params, &[])?;
            Ok(BuiltModel::Chart(action_so3_sphere()))
        }
        "atiyah-local" => {
            check_keys(params, &["d1", "d2", "d3"])?;
            let d = [
                param(params, "d1", 0.3),
                param(params, "d2", -0.2),
                param(params, "d3", 0.5),
            ];
            Ok(BuiltModel::Chart(atiyah_chart(&atiyah_so3_flat(d))))
        }
        "free-rigid-body" => {
            check_keys(params, &["I", "J"])?;
            let i1 = param(params, "I", 1.0);
            let i3 = param(params, "J", 2.0);
            if i1 <= 0.0 || i3 <= 0.0 {
                return Err(AlgError::Model("inertia must be positive".into()));
            }
            Ok(BuiltModel::System(free_rigid_body(i1, i3)))
        }
        "lagrange-top-full" => {
            check_keys(params, &["I", "J", "m", "g", "l"])?;
            Ok(BuiltModel::System(lagrange_top_full(&top_params(params)?)))
        }
        "lagrange-top" | "lagrange-top-reduction" => {
            check_keys(
                params,
                &[
                    "I",
                    "J",
                    "m",
                    "g",
                    "l",
                    "mutate_action",
                    "mutate_frame",
                    "mutate_potential",
                ],
            )?;
            let mutation = if param(params, "mutate_action", 0.0) != 0.0 {
                LagrangeTopMutation::NonPresymplecticAction
            } else if param(params, "mutate_frame", 0.0) != 0.0 {
                LagrangeTopMutation::NonProjectableFrame
            } else if param(params, "mutate_potential", 0.0) != 0.0 {
                LagrangeTopMutation::NonInvariantHamiltonian
            } else {
                LagrangeTopMutation::None
            };
            Ok(BuiltModel::Reduction(lagrange_top_reduction(
                &top_params(params)?,
                mutation,
                seed,
            )))
        }
        "lagrange-top-reduced" => {
            check_keys(params, &["I", "J", "m", "g", "l"])?;
            let red = lagrange_top_reduced(&top_params(params)?);
            Ok(BuiltModel::Symplectic(SymplecticModel {
                chart: red.chart,
                omega: red.omega,
                hamiltonian: Some(red.hamiltonian),
            }))
        }
        "cartan-r4" => {
            check_keys(params, &[])?;
            Ok(BuiltModel::Reduction(cartan_reduction(seed)))
        }
        "trivial-reduction" => {
            check_keys(params, &[])?;
            Ok(BuiltModel::Reduction(trivial_reduction()))
        }
        "kernel-not-ideal" => {
            check_keys(params, &[])?;
            Ok(BuiltModel::Reduction(kernel_not_ideal_reduction()))
        }
        other => Err(AlgError::Model(format!(
            "unknown model '{other}' (known: {})",
            model_names().join(", ")
        ))),
    }
}

/// Cartan symplectic reduction instance: M = T*ℝ² with its canonical
/// structure, N = {p₂ = 0} coisotropic, G = ℝ translating q₂. The kernel of
/// Ω_TN is the vertical bundle of π_N, one dimension per group dimension.
pub fn cartan_reduction(seed: u64) -> ReductionSetup {
    let parent = tangent_bundle(2);
    let pro = prolong(&parent).expect("prolongation");
    let ambient = pro.chart.clone();
    let omega_ambient = canonical_symplectic(&pro).expect("canonical");

    // B = TN over N: chart (q₁, q₂, p₁), frame (𝒳₁, 𝒳₂, 𝒫¹)
    let anchor = Arc::new(|_x: &[f64]| Mat::identity(3));
    let structure = Arc::new(|_x: &[f64]| StructureArray::zeros(3));
    let sub_chart = Arc::new(
        LieAlgebroidChart::new("cartan-TN", 3, 3, anchor, structure)
            .with_labels(
                vec!["q1".into(), "q2".into(), "p1".into()],
                vec!["X1".into(), "X2".into(), "P1".into()],
            )
            .with_partials(
                Arc::new(|_x: &[f64]| vec![Mat::zeros(3, 3); 3]),
                Arc::new(|_x: &[f64]| vec![StructureArray::zeros(3); 3]),
            )
            .with_box(ChartBox::new(vec![-1.5; 3], vec![1.5; 3])),
    );
    let inclusion = MorphismData::new(
        sub_chart.clone(),
        ambient.clone(),
        Arc::new(|x: &[f64]| vec![x[0], x[1], x[2], 0.0]),
        Arc::new(|_x: &[f64]| {
            let mut f = Mat::zeros(4, 3);
            f[(0, 0)] = 1.0;
            f[(1, 1)] = 1.0;
            f[(2, 2)] = 1.0;
            f
        }),
    );
    let kernel = Section::constant(sub_chart.clone(), vec![0.0, 1.0, 0.0]);
    let projectable = vec![
        Section::constant(sub_chart.clone(), vec![1.0, 0.0, 0.0]),
        Section::constant(sub_chart.clone(), vec![0.0, 0.0, 1.0]),
    ];
    let mut shifts: Vec<Vec<f64>> = vec![vec![0.5], vec![-0.3], vec![1.1]];
    for s in sample_scalars(seed, 2, -1.0, 1.0) {
        shifts.push(vec![s]);
    }
    // H = ½(p₁² + p₂²) + cos q₁ reduces to the pendulum on (q₁, p₁)
    let hamiltonian = MultiSection::scalar(
        ambient.clone(),
        Arc::new(|s: &[f64]| 0.5 * (s[2] * s[2] + s[3] * s[3]) + s[0].cos()),
    )
    .with_gradient(Arc::new(|s: &[f64]| {
        vec![-s[0].sin(), 0.0, s[2], s[3]]
    }));
    let ambient_system = HamiltonianSystem::new(pro, hamiltonian.clone()).expect("system");

    ReductionSetup {
        name: "cartan-r4".into(),
        sub: SubalgebroidData {
            ambient,
            sub: sub_chart.clone(),
            inclusion,
        },
        action: GroupActionData {
            group_dim: 1,
            sample_elements: shifts,
            base_action: Arc::new(|g: &[f64], x: &[f64]| vec![x[0], x[1] + g[0], x[2]]),
            fiber_action: Arc::new(|_g: &[f64], _x: &[f64]| Mat::identity(3)),
            projection: Arc::new(|x: &[f64]| vec![x[0], x[2]]),
            slice: Arc::new(|nt: &[f64]| vec![nt[0], 0.0, nt[1]]),
        },
        omega_ambient,
        kernel_frame: vec![kernel],
        projectable_frame: projectable,
        hamiltonian,
        sub_box: sub_chart.box_hint.clone().unwrap(),
        reduced_box: ChartBox::new(vec![-1.5, -1.5], vec![1.5, 1.5]),
        reduced_coord_labels: vec!["q1".into(), "p1".into()],
        ambient_system: Some(ambient_system),
        state_to_sub: Some(Arc::new(|s: &[f64]| {
            (vec![s[0], s[1], s[2]], vec![s[3]])
        })),
    }
}

/// Trivial-group, nondegenerate instance: B = A (the prolongation of the
/// abelian rank-1 algebra); the reduction is the identity up to relabeling.
pub fn trivial_reduction() -> ReductionSetup {
    let parent = abelian_lie_algebra(1);
    let pro = prolong(&parent).expect("prolongation");
    let ambient = pro.chart.clone();
    let omega_ambient = canonical_symplectic(&pro).expect("canonical");
    let inclusion = MorphismData::identity(ambient.clone());
    let projectable = vec![
        Section::frame(ambient.clone(), 0),
        Section::frame(ambient.clone(), 1),
    ];
    let hamiltonian = MultiSection::scalar(ambient.clone(), Arc::new(|s: &[f64]| 0.5 * s[0] * s[0]))
        .with_gradient(Arc::new(|s: &[f64]| vec![s[0]]));
    let ambient_system = HamiltonianSystem::new(pro, hamiltonian.clone()).expect("system");
    ReductionSetup {
        name: "trivial-reduction".into(),
        sub: SubalgebroidData {
            ambient: ambient.clone(),
            sub: ambient.clone(),
            inclusion,
        },
        action: GroupActionData::trivial(2),
        omega_ambient,
        kernel_frame: vec![],
        projectable_frame: projectable,
        hamiltonian,
        sub_box: ambient.box_hint.clone().unwrap(),
        reduced_box: ChartBox::new(vec![-1.0], vec![1.0]),
        reduced_coord_labels: vec!["y1".into()],
        ambient_system: Some(ambient_system),
        state_to_sub: Some(Arc::new(|s: &[f64]| (s.to_vec(), vec![]))),
    }
}

/// Shared counterexample: 𝔤 = h₃ ⊕ ℝ with Ω = e²∧e³ + e¹∧e⁴ (closed and
/// nondegenerate), B = h₃. ker Ω_B = span(e₁) and ⟦e₂, e₁⟧ = −e₃ escapes the
/// kernel, so the kernel-ideal reduction condition fails.
pub fn kernel_not_ideal_reduction() -> ReductionSetup {
    let mut c4 = StructureArray::zeros(4);
    c4.set(2, 0, 1, 1.0);
    let ambient = lie_algebra_chart(
        "heisenberg-r",
        c4,
        vec!["e1".into(), "e2".into(), "e3".into(), "e4".into()],
    );
    let omega_comps = Arc::new(|_x: &[f64]| -> Vec<f64> {
        // pairs of 4: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0]
    });
    let omega_ambient =
        SymplecticSection::new(MultiSection::new(ambient.clone(), 2, omega_comps)).unwrap();

    let mut c3 = StructureArray::zeros(3);
    c3.set(2, 0, 1, 1.0);
    let sub_chart = lie_algebra_chart(
        "heisenberg",
        c3,
        vec!["e1".into(), "e2".into(), "e3".into()],
    );
    let inclusion = MorphismData::new(
        sub_chart.clone(),
        ambient.clone(),
        Arc::new(|_x: &[f64]| vec![]),
        Arc::new(|_x: &[f64]| {
            let mut f = Mat::zeros(4, 3);
            f[(0, 0)] = 1.0;
            f[(1, 1)] = 1.0;
            f[(2, 2)] = 1.0;
            f
        }),
    );
    let kernel = Section::constant(sub_chart.clone(), vec![1.0, 0.0, 0.0]);
    let projectable = vec![
        Section::constant(sub_chart.clone(), vec![0.0, 1.0, 0.0]),
        Section::constant(sub_chart.clone(), vec![0.0, 0.0, 1.0]),
    ];
    let hamiltonian = MultiSection::constant_scalar(ambient.clone(), 0.0);
    ReductionSetup {
        name: "kernel-not-ideal".into(),
        sub: SubalgebroidData {
            ambient,
            sub: sub_chart,
            inclusion,
        },
        action: GroupActionData::trivial(3),
        omega_ambient,
        kernel_frame: vec![kernel],
        projectable_frame: projectable,
        hamiltonian,
        sub_box: ChartBox::new(vec![], vec![]),
        reduced_box: ChartBox::new(vec![], vec![]),
        reduced_coord_labels: vec![],
        ambient_system: None,
        state_to_sub: None,
    }
}

/// S¹ action data on the so(3) action algebroid over the cylinder chart
/// (quotient over the t-line), with its invariant frame.
pub fn so3_s1_base_quotient() -> (Arc<LieAlgebroidChart>, GroupActionData, Vec<Section>) {
    let chart = action_so3_sphere();
    let action = GroupActionData {
        group_dim: 1,
        sample_elements: (0..8)
            .map(|k| vec![k as f64 * std::f64::consts::TAU / 8.0])
            .collect(),
        base_action: Arc::new(|g: &[f64], x: &[f64]| vec![x[0] + g[0], x[1]]),
        fiber_action: Arc::new(|g: &[f64], _x: &[f64]| rot3_mat(g[0])),
        projection: Arc::new(|x: &[f64]| vec![x[1]]),
        slice: Arc::new(|nt: &[f64]| vec![0.0, nt[0]]),
    };
    let frame = (0..3)
        .map(|which| invariant_rotation_section(chart.clone(), which, 0))
        .collect();
    (chart, action, frame)
}

/// S¹ action data on the prolongation 𝒯^A A* (quotient over (t, ν)), with
/// the invariant frame matched to the natural isomorphism
/// 𝒯^A A*/G ≅ 𝒯^{A/G}(A*/G).
pub fn so3_s1_prolongation_quotient() -> (ProlongationChart, GroupActionData, Vec<Section>) {
    let pro = prolong(&action_so3_sphere()).expect("prolongation");
    let chart = pro.chart.clone();
    let action = GroupActionData {
        group_dim: 1,
        sample_elements: (0..8)
            .map(|k| vec![k as f64 * std::f64::consts::TAU / 8.0])
            .collect(),
        base_action: Arc::new(|g: &[f64], x: &[f64]| {
            let r = rot3_mat(g[0]);
            let pi = r.matvec(&x[2..5]);
            vec![x[0] + g[0], x[1], pi[0], pi[1], pi[2]]
        }),
        fiber_action: Arc::new(|g: &[f64], _x: &[f64]| {
            let r = rot3_mat(g[0]);
            let mut f = Mat::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    f[(i, j)] = r[(i, j)];
                    f[(3 + i, 3 + j)] = r[(i, j)];
                }
            }
            f
        }),
        // (θ, t, π) ↦ (t, A_{−θ} π)
        projection: Arc::new(|x: &[f64]| {
            let r = rot3_mat(-x[0]);
            let nu = r.matvec(&x[2..5]);
            vec![x[1], nu[0], nu[1], nu[2]]
        }),
        slice: Arc::new(|nt: &[f64]| vec![0.0, nt[0], nt[1], nt[2], nt[3]]),
    };
    // w₁ = u₁ − sinh t·π₂ 𝒫¹ + sinh t·π₁ 𝒫², w₂ = u₂,
    // w₃ = u₃ + π₂ 𝒫¹ − π₁ 𝒫², v_i = rotated 𝒫-frames
    let mut frame = Vec::with_capacity(6);
    frame.push(
        Section::new(
            chart.clone(),
            Arc::new(|x: &[f64]| {
                let (s, c) = x[0].sin_cos();
                let sh = x[1].sinh();
                vec![c, s, 0.0, -sh * x[3], sh * x[2], 0.0]
            }),
        ),
    );
    frame.push(invariant_rotation_section(chart.clone(), 1, 0));
    frame.push(Section::new(
        chart.clone(),
        Arc::new(|x: &[f64]| vec![0.0, 0.0, 1.0, x[3], -x[2], 0.0]),
    ));
    for which in 0..3 {
        frame.push(invariant_rotation_section(chart.clone(), which, 3));
    }
    (pro, action, frame)
}

fn rot3_mat(phi: f64) -> Mat {
    let (s, c) = phi.sin_cos();
    Mat::from_rows(&[vec![c, -s, 0.0], vec![s, c, 0.0], vec![0.0, 0.0, 1.0]])
}

/// Column `which` of A_θ placed into the frame slots starting at `offset`.
fn invariant_rotation_section(
    chart: Arc<LieAlgebroidChart>,
    which: usize,
    offset: usize,
) -> Section {
    let n = chart.rank();
    Section::new(
        chart,
        Arc::new(move |x: &[f64]| {
            let (s, c) = x[0].sin_cos();
            let mut v = vec![0.0; n];
            match which {
                0 => {
                    v[offset] = c;
                    v[offset + 1] = s;
                }
                1 => {
                    v[offset] = -s;
                    v[offset + 1] = c;
                }
                _ => v[offset + 2] = 1.0,
            }
            v
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_model_and_bad_params_are_rejected() {
        let empty = BTreeMap::new();
        assert!(build_model("no-such-thing", &empty, 1).is_err());
        let bad = BTreeMap::from([("I".to_string(), -1.0)]);
        assert!(build_model("lagrange-top-full", &bad, 1).is_err());
        let unknown = BTreeMap::from([("wat".to_string(), 1.0)]);
        assert!(build_model("abelian-2", &unknown, 1).is_err());
    }

    #[test]
    fn every_name_builds_with_defaults() {
        let empty = BTreeMap::new();
        for name in model_names() {
            let built = build_model(name, &empty, 1).unwrap();
            let _ = built.kind();
        }
    }

    #[test]
    fn mutation_params_change_the_setup() {
        let on = BTreeMap::from([("mutate_potential".to_string(), 1.0)]);
        match build_model("lagrange-top", &on, 1).unwrap() {
            BuiltModel::Reduction(setup) => {
                // the mutated Hamiltonian depends on θ
                let a = setup.hamiltonian.value(&[0.0, 0.2, 0.1, 0.1, 0.0]).unwrap();
                let b = setup.hamiltonian.value(&[1.0, 0.2, 0.1, 0.1, 0.0]).unwrap();
                assert!((a - b).abs() > 1e-3);
            }
            _ => panic!("expected a reduction setup"),
        }
    }
}
