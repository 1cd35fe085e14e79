//! Thin command-line front end: argument parsing and dispatch only.

use std::process::ExitCode;

use algmech::config::RunConfig;
use algmech::run::{cmd_compare, cmd_reduce, cmd_simulate, cmd_verify, RunOutput};

const USAGE: &str = "\
algmech <verify|simulate|reduce|compare> --model NAME [options]

Commands:
  verify     check the algebroid axioms and symplectic structure of a model
  simulate   integrate the Hamilton equations and emit a CSV trajectory
  reduce     run the symplectic reduction pipeline and dump the reduced model
  compare    integrate full and reduced dynamics and report their deviation

Options:
  --model NAME       built-in model name (see below)
  --config FILE      read a key = value config file ([params] section allowed)
  --params k=v,...   parameter overrides (repeatable)
  --init v,...       initial state (simulate/compare)
  --h H              integrator step size
  --t-end T          integration horizon
  --tol TOL          check tolerance
  --samples N        number of verification sample points
  --seed S           sampling seed
  --hamiltonian EXPR scalar expression over the model's coordinate labels
  --out PATH         write the CSV/JSON output to a file

Exit codes: 0 = pass, 1 = mathematical failure, 2 = usage/config error.

Models:
";

fn usage() -> String {
    let models: Vec<String> = algmech::models::model_descriptions()
        .iter()
        .map(|(name, what)| format!("  {name:<22} {what}"))
        .collect();
    format!("{USAGE}{}\n", models.join("\n"))
}

fn parse_args(args: &[String]) -> Result<(String, RunConfig), String> {
    if args.is_empty() {
        return Err("missing subcommand".into());
    }
    let command = args[0].clone();
    if command == "--help" || command == "-h" || command == "help" {
        print!("{}", usage());
        std::process::exit(0);
    }
    if !["verify", "simulate", "reduce", "compare"].contains(&command.as_str()) {
        return Err(format!("unknown subcommand '{command}'"));
    }
    let mut cfg = RunConfig::default();
    let mut flags: Vec<(String, String)> = Vec::new();
    let mut config_path: Option<String> = None;
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        let take_value = |i: &mut usize| -> Result<String, String> {
            *i += 1;
            args.get(*i)
                .cloned()
                .ok_or_else(|| format!("missing value for {arg}"))
        };
        match arg.as_str() {
            "--help" | "-h" => {
                print!("{}", usage());
                std::process::exit(0);
            }
            "--config" => config_path = Some(take_value(&mut i)?),
            "--model" | "--init" | "--h" | "--t-end" | "--tol" | "--samples" | "--seed"
            | "--out" | "--hamiltonian" | "--params" => {
                let key = arg.trim_start_matches("--").to_string();
                flags.push((key, take_value(&mut i)?));
            }
            other => return Err(format!("unknown option '{other}'")),
        }
        i += 1;
    }
    if let Some(path) = config_path {
        let text =
            std::fs::read_to_string(&path).map_err(|e| format!("cannot read {path}: {e}"))?;
        cfg = RunConfig::parse(&text).map_err(|e| e.to_string())?;
    }
    // flags win over the config file
    for (key, value) in flags {
        if key == "params" {
            for spec in value.split(',') {
                cfg.set_param(spec).map_err(|e| e.to_string())?;
            }
        } else {
            cfg.set_key(&key, &value).map_err(|e| e.to_string())?;
        }
    }
    Ok((command, cfg))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (command, cfg) = match parse_args(&args) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}\n\n{}", usage());
            return ExitCode::from(2);
        }
    };
    let out: RunOutput = match command.as_str() {
        "verify" => cmd_verify(&cfg),
        "simulate" => cmd_simulate(&cfg),
        "reduce" => cmd_reduce(&cfg),
        "compare" => cmd_compare(&cfg),
        _ => unreachable!(),
    };
    if let Some((path, contents)) = &out.file {
        if let Err(e) = std::fs::write(path, contents) {
            eprintln!("error: cannot write {path}: {e}");
            return ExitCode::from(2);
        }
    }
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.exit_code as u8)
}
