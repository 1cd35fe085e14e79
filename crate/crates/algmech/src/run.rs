//! Command implementations behind the `algmech` binary: verify, simulate,
//! reduce and compare. Exit-code contract: 0 = all checks pass,
//! 1 = mathematical failure, 2 = usage or configuration error.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebroid::check_axioms;
use crate::chart::LieAlgebroidChart;
use crate::config::RunConfig;
use crate::dynamics::{integrate, integrate_rhs, symplectic_rhs, trajectory_csv, HamiltonianSystem};
use crate::error::AlgError;
use crate::expr::parse_expression;
use crate::models::{build_model, BuiltModel};
use crate::reduction::{run_pipeline, verify_commutation, CheckResult, ReductionSetup};
use crate::report::{check_to_json, render_table, vec_to_json, Json};
use crate::sample::{sample_box, ChartBox};
use crate::section::MultiSection;
use crate::symplectic::{verify_symplectic, SymplecticSection};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MATH_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Output of one command run.
pub struct RunOutput {
    pub stdout: String,
    pub stderr: String,
    pub exit_code: i32,
    /// File to write when `--out` was given: (path, contents).
    pub file: Option<(String, String)>,
}

impl RunOutput {
    fn usage_error(msg: impl Into<String>) -> RunOutput {
        RunOutput {
            stdout: String::new(),
            stderr: format!("error: {}\n", msg.into()),
            exit_code: EXIT_USAGE,
            file: None,
        }
    }
}

fn model_of(cfg: &RunConfig) -> Result<(String, BuiltModel), RunOutput> {
    let Some(name) = cfg.model.clone() else {
        return Err(RunOutput::usage_error("--model is required"));
    };
    match build_model(&name, &cfg.params, cfg.seed) {
        Ok(m) => Ok((name, m)),
        Err(e) => Err(RunOutput::usage_error(e.to_string())),
    }
}

fn chart_points(chart: &LieAlgebroidChart, cfg: &RunConfig) -> Vec<Vec<f64>> {
    let bx = chart
        .box_hint
        .clone()
        .unwrap_or_else(|| ChartBox::new(vec![-1.0; chart.base_dim()], vec![1.0; chart.base_dim()]));
    sample_box(&bx, cfg.seed, cfg.samples.max(1))
}

fn axiom_checks(chart: &Arc<LieAlgebroidChart>, cfg: &RunConfig, tol: f64) -> Vec<CheckResult> {
    let pts = chart_points(chart, cfg);
    match check_axioms(chart, &pts, tol) {
        Ok(rep) => vec![
            CheckResult::new(
                &format!("jacobi_identity[{}]", chart.name),
                rep.jacobi_residual,
                tol,
                "Jacobi identity on frame triples",
            ),
            CheckResult::new(
                &format!("anchor_morphism[{}]", chart.name),
                rep.anchor_residual,
                tol,
                "anchor is a bracket homomorphism",
            ),
            CheckResult::new(
                &format!("leibniz_rule[{}]", chart.name),
                rep.leibniz_residual,
                (10.0 * tol).max(1e-4),
                "Leibniz rule on randomized (X, f, Y)",
            ),
        ],
        Err(e) => vec![CheckResult::new(
            &format!("axioms[{}]", chart.name),
            f64::INFINITY,
            tol,
            e.to_string(),
        )],
    }
}

fn symplectic_checks(
    omega: &SymplecticSection,
    chart: &Arc<LieAlgebroidChart>,
    cfg: &RunConfig,
    tol: f64,
    expect_nondegenerate: bool,
) -> Vec<CheckResult> {
    let pts = chart_points(chart, cfg);
    let mut om = omega.clone();
    match verify_symplectic(&mut om, &pts, tol) {
        Ok(rep) => {
            let mut checks = vec![CheckResult::new(
                &format!("symplectic_closed[{}]", chart.name),
                rep.closedness_residual,
                tol,
                "d^A Ω = 0",
            )];
            if expect_nondegenerate {
                let mut c = CheckResult::new(
                    &format!("symplectic_nondegenerate[{}]", chart.name),
                    0.0,
                    tol,
                    format!(
                        "min singular value {:.3e}, kernel dimension {}",
                        rep.min_singular_value, rep.kernel_dim
                    ),
                );
                c.pass = rep.nondegenerate;
                if !c.pass {
                    c.max_residual = f64::INFINITY;
                }
                checks.push(c);
            }
            checks
        }
        Err(e) => vec![CheckResult::new(
            &format!("symplectic[{}]", chart.name),
            f64::INFINITY,
            tol,
            e.to_string(),
        )],
    }
}

fn report_json(command: &str, model: &str, cfg: &RunConfig, tol: f64, checks: &[CheckResult]) -> Json {
    let mut root = Json::obj();
    root.push("command", Json::Str(command.into()));
    root.push("model", Json::Str(model.into()));
    root.push("seed", Json::Int(cfg.seed as i64));
    root.push("samples", Json::Int(cfg.samples as i64));
    root.push("tol", Json::Num(tol));
    if !cfg.params.is_empty() {
        let mut p = Json::obj();
        for (k, v) in &cfg.params {
            p.push(k, Json::Num(*v));
        }
        root.push("params", p);
    }
    root.push("checks", Json::Arr(checks.iter().map(check_to_json).collect()));
    root.push("pass", Json::Bool(checks.iter().all(|c| c.pass)));
    root
}

fn finish_report(
    command: &str,
    model: &str,
    cfg: &RunConfig,
    tol: f64,
    checks: Vec<CheckResult>,
    extra: Option<(&str, Json)>,
) -> RunOutput {
    let mut json = report_json(command, model, cfg, tol, &checks);
    if let Some((key, value)) = extra {
        json.push(key, value);
    }
    let pass = checks.iter().all(|c| c.pass);
    let rendered = json.render() + "\n";
    let (stdout, file) = match &cfg.out {
        Some(path) => (
            render_table(&checks),
            Some((path.clone(), rendered)),
        ),
        None => (rendered, None),
    };
    RunOutput {
        stdout,
        stderr: String::new(),
        exit_code: if pass { EXIT_OK } else { EXIT_MATH_FAILURE },
        file,
    }
}

/// `algmech verify --model NAME`: axiom and symplectic-structure checks.
pub fn cmd_verify(cfg: &RunConfig) -> RunOutput {
    let (name, model) = match model_of(cfg) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let mut checks = Vec::new();
    let tol_used;
    match &model {
        BuiltModel::Chart(chart) => {
            let tol = cfg.tol.unwrap_or_else(|| chart.default_tol());
            tol_used = tol;
            checks.extend(axiom_checks(chart, cfg, tol));
        }
        BuiltModel::System(sys) => {
            let tol = cfg.tol.unwrap_or_else(|| sys.prolong.chart.default_tol());
            tol_used = tol;
            checks.extend(axiom_checks(&sys.prolong.chart, cfg, tol));
            match crate::prolongation::canonical_symplectic(&sys.prolong) {
                Ok(omega) => checks.extend(symplectic_checks(
                    &omega,
                    &sys.prolong.chart,
                    cfg,
                    tol,
                    true,
                )),
                Err(e) => checks.push(CheckResult::new(
                    "canonical_symplectic",
                    f64::INFINITY,
                    tol,
                    e.to_string(),
                )),
            }
        }
        BuiltModel::Symplectic(m) => {
            let tol = cfg.tol.unwrap_or_else(|| m.chart.default_tol());
            tol_used = tol;
            checks.extend(axiom_checks(&m.chart, cfg, tol));
            checks.extend(symplectic_checks(&m.omega, &m.chart, cfg, tol, true));
        }
        BuiltModel::Reduction(setup) => {
            let tol = cfg.tol.unwrap_or(1e-8);
            tol_used = tol;
            checks.extend(axiom_checks(&setup.sub.ambient, cfg, tol));
            checks.extend(axiom_checks(&setup.sub.sub, cfg, tol));
            checks.extend(symplectic_checks(
                &setup.omega_ambient,
                &setup.sub.ambient,
                cfg,
                tol,
                true,
            ));
        }
    }
    finish_report("verify", &name, cfg, tol_used, checks, None)
}

/// Build a Hamiltonian from a config expression over the chart labels.
fn expression_hamiltonian(
    chart: &Arc<LieAlgebroidChart>,
    src: &str,
    params: &BTreeMap<String, f64>,
) -> Result<MultiSection, String> {
    let expr = parse_expression(src).map_err(|e| e.to_string())?;
    expr.check_bindings(&chart.coord_labels, params)
        .map_err(|e| e.to_string())?;
    let labels = chart.coord_labels.clone();
    let consts = params.clone();
    let expr = Arc::new(expr);
    Ok(MultiSection::scalar(
        chart.clone(),
        Arc::new(move |x: &[f64]| {
            expr.eval(&|name| {
                labels
                    .iter()
                    .position(|l| l == name)
                    .map(|i| x[i])
                    .or_else(|| consts.get(name).copied())
            })
            .expect("expression evaluation")
        }),
    ))
}

/// `algmech simulate --model NAME --init …`: integrate and emit CSV.
pub fn cmd_simulate(cfg: &RunConfig) -> RunOutput {
    let (_, model) = match model_of(cfg) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let Some(init) = cfg.init.clone() else {
        return RunOutput::usage_error("simulate requires --init");
    };
    enum Sim {
        Prolongation(HamiltonianSystem),
        Symplectic(Arc<LieAlgebroidChart>, SymplecticSection, MultiSection),
    }
    let sim = match model {
        BuiltModel::System(mut sys) => {
            if let Some(src) = &cfg.hamiltonian {
                let mut env = sys.params.clone();
                for (k, v) in &cfg.params {
                    env.insert(k.clone(), *v);
                }
                match expression_hamiltonian(&sys.prolong.chart, src, &env) {
                    Ok(h) => sys.hamiltonian = h,
                    Err(e) => return RunOutput::usage_error(e),
                }
            }
            Sim::Prolongation(sys)
        }
        BuiltModel::Symplectic(m) => {
            let h = if let Some(src) = &cfg.hamiltonian {
                match expression_hamiltonian(&m.chart, src, &cfg.params) {
                    Ok(h) => h,
                    Err(e) => return RunOutput::usage_error(e),
                }
            } else {
                match m.hamiltonian {
                    Some(h) => h,
                    None => {
                        return RunOutput::usage_error(
                            "model carries no Hamiltonian; supply one with hamiltonian = \"…\"",
                        )
                    }
                }
            };
            Sim::Symplectic(m.chart, m.omega, h)
        }
        _ => {
            return RunOutput::usage_error(
                "simulate needs a Hamiltonian system model (try lagrange-top-full, free-rigid-body or lagrange-top-reduced)",
            )
        }
    };
    let (chart, result) = match &sim {
        Sim::Prolongation(sys) => {
            if init.len() != sys.state_dim() {
                return RunOutput::usage_error(format!(
                    "--init must have dimension {}",
                    sys.state_dim()
                ));
            }
            (
                sys.prolong.chart.clone(),
                integrate(sys, &init, cfg.t_end, cfg.step),
            )
        }
        Sim::Symplectic(chart, omega, h) => {
            if init.len() != chart.base_dim() {
                return RunOutput::usage_error(format!(
                    "--init must have dimension {}",
                    chart.base_dim()
                ));
            }
            let (c, o, hh) = (chart.clone(), omega.clone(), h.clone());
            (
                chart.clone(),
                integrate_rhs(
                    &|s: &[f64]| symplectic_rhs(&c, &o, &hh, s),
                    &|s: &[f64]| hh.value(s),
                    &init,
                    cfg.t_end,
                    cfg.step,
                    1e6,
                ),
            )
        }
    };
    match result {
        Ok(traj) => {
            let csv = trajectory_csv(&traj, &chart);
            let (stdout, file) = match &cfg.out {
                Some(path) => (
                    format!("wrote {} rows to {}\n", traj.times.len(), path),
                    Some((path.clone(), csv)),
                ),
                None => (csv, None),
            };
            RunOutput {
                stdout,
                stderr: String::new(),
                exit_code: EXIT_OK,
                file,
            }
        }
        Err((e, partial)) => {
            let csv = trajectory_csv(&partial, &chart);
            let (stdout, file) = match &cfg.out {
                Some(path) => (String::new(), Some((path.clone(), csv))),
                None => (csv, None),
            };
            RunOutput {
                stdout,
                stderr: format!("integration aborted: {e}\n"),
                exit_code: EXIT_MATH_FAILURE,
                file,
            }
        }
    }
}

fn reduction_model(cfg: &RunConfig) -> Result<(String, ReductionSetup), RunOutput> {
    let (name, model) = model_of(cfg)?;
    match model {
        BuiltModel::Reduction(setup) => Ok((name, setup)),
        other => Err(RunOutput::usage_error(format!(
            "model '{name}' is a {} model; reduce/compare need a reduction setup",
            other.kind()
        ))),
    }
}

/// Sampled dump of the reduced model along the slice.
fn reduced_dump(
    setup: &ReductionSetup,
    model: &crate::reduction::ReducedModel,
    h_red: &MultiSection,
    cfg: &RunConfig,
) -> Json {
    let pts = sample_box(&setup.reduced_box, cfg.seed, 5);
    let r = model.chart.rank();
    let mut out = Json::obj();
    out.push(
        "points",
        Json::Arr(pts.iter().map(|p| vec_to_json(p)).collect()),
    );
    let mut brackets = Json::obj();
    for a in 0..r {
        for b in (a + 1)..r {
            let mut rows = Vec::new();
            for p in &pts {
                let c = model.chart.structure_at(p).expect("reduced structure");
                rows.push(vec_to_json(&c.bracket_of_frames(a, b)));
            }
            brackets.push(&format!("e{},e{}", a + 1, b + 1), Json::Arr(rows));
        }
    }
    out.push("brackets", brackets);
    out.push(
        "anchor",
        Json::Arr(
            pts.iter()
                .map(|p| {
                    let rho = model.chart.anchor_at(p).expect("reduced anchor");
                    Json::Arr(
                        (0..rho.rows())
                            .map(|i| vec_to_json(rho.row(i)))
                            .collect(),
                    )
                })
                .collect(),
        ),
    );
    out.push(
        "omega",
        Json::Arr(
            pts.iter()
                .map(|p| {
                    let m = model.omega.matrix_at(p).expect("reduced omega");
                    Json::Arr((0..m.rows()).map(|i| vec_to_json(m.row(i))).collect())
                })
                .collect(),
        ),
    );
    out.push(
        "hamiltonian",
        Json::Arr(
            pts.iter()
                .map(|p| Json::Num(h_red.value(p).expect("reduced H")))
                .collect(),
        ),
    );
    out
}

/// `algmech reduce --model NAME`: run the reduction pipeline and dump the
/// reduced model on success.
pub fn cmd_reduce(cfg: &RunConfig) -> RunOutput {
    let (name, setup) = match reduction_model(cfg) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let tol = cfg.tol.unwrap_or(1e-8);
    let pts = sample_box(&setup.sub_box, cfg.seed, cfg.samples.max(1));
    match run_pipeline(&setup, &pts, tol) {
        Ok(outcome) => {
            let extra = match (&outcome.model, &outcome.reduced_h) {
                (Some(model), Some(h)) => Some((
                    "reduced",
                    reduced_dump(&setup, model, h, cfg),
                )),
                _ => None,
            };
            let mut out = finish_report("reduce", &name, cfg, tol, outcome.checks, extra);
            if let Some(failure) = outcome.failure {
                out.stderr
                    .push_str(&format!("reduction failed [{failure}]\n"));
                out.exit_code = EXIT_MATH_FAILURE;
            }
            out
        }
        Err(e) => RunOutput {
            stdout: String::new(),
            stderr: format!("reduction failed [{e}]\n"),
            exit_code: EXIT_MATH_FAILURE,
            file: None,
        },
    }
}

/// `algmech compare --model NAME --init …`: integrate the full and reduced
/// dynamics and report the sup-norm deviation of the projected trajectory.
pub fn cmd_compare(cfg: &RunConfig) -> RunOutput {
    let (name, setup) = match reduction_model(cfg) {
        Ok(v) => v,
        Err(out) => return out,
    };
    let Some(init) = cfg.init.clone() else {
        return RunOutput::usage_error("compare requires --init (a full-system state on N)");
    };
    if let Some(to_sub) = &setup.state_to_sub {
        let expected = setup
            .ambient_system
            .as_ref()
            .map(|s| s.state_dim())
            .unwrap_or(init.len());
        if init.len() != expected {
            return RunOutput::usage_error(format!("--init must have dimension {expected}"));
        }
        let (_, constraints) = to_sub(&init);
        if crate::linalg::norm(&constraints) > 1e-10 {
            return RunOutput::usage_error(format!(
                "initial state violates the N constraints by {:e}",
                crate::linalg::norm(&constraints)
            ));
        }
    }
    let hyp_tol = 1e-8;
    let pts = sample_box(&setup.sub_box, cfg.seed, cfg.samples.max(1));
    let outcome = match run_pipeline(&setup, &pts, hyp_tol) {
        Ok(o) => o,
        Err(e) => {
            return RunOutput {
                stdout: String::new(),
                stderr: format!("reduction failed [{e}]\n"),
                exit_code: EXIT_MATH_FAILURE,
                file: None,
            }
        }
    };
    let (Some(model), Some(h_red)) = (&outcome.model, &outcome.reduced_h) else {
        let failure = outcome
            .failure
            .unwrap_or_else(|| "reduction pipeline failed".into());
        return RunOutput {
            stdout: String::new(),
            stderr: format!("reduction failed [{failure}]\n"),
            exit_code: EXIT_MATH_FAILURE,
            file: None,
        };
    };
    let tol = cfg.tol.unwrap_or(1e-6);
    match verify_commutation(&setup, model, h_red, &init, cfg.t_end, cfg.step) {
        Ok(rep) => {
            let pass = rep.max_deviation <= tol;
            let mut json = Json::obj();
            json.push("command", Json::Str("compare".into()));
            json.push("model", Json::Str(name));
            json.push("t_end", Json::Num(cfg.t_end));
            json.push("h", Json::Num(cfg.step));
            json.push("max_deviation", Json::Num(rep.max_deviation));
            json.push("constraint_drift", Json::Num(rep.constraint_drift));
            json.push("tol", Json::Num(tol));
            json.push("pass", Json::Bool(pass));
            let rendered = json.render() + "\n";
            let summary = format!(
                "max deviation {:.3e}, constraint drift {:.3e}, tol {:.1e}: {}\n",
                rep.max_deviation,
                rep.constraint_drift,
                tol,
                if pass { "PASS" } else { "FAIL" }
            );
            let (stdout, file) = match &cfg.out {
                Some(path) => (summary, Some((path.clone(), rendered))),
                None => (rendered, None),
            };
            RunOutput {
                stdout,
                stderr: String::new(),
                exit_code: if pass { EXIT_OK } else { EXIT_MATH_FAILURE },
                file,
            }
        }
        Err(AlgError::Structural(msg)) => RunOutput::usage_error(msg),
        Err(e) => RunOutput {
            stdout: String::new(),
            stderr: format!("comparison failed: {e}\n"),
            exit_code: EXIT_MATH_FAILURE,
            file: None,
        },
    }
}
