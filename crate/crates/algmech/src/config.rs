//! Run configuration: a flat key/value config file with a typed `[params]`
//! section, merged with command-line flag overrides (flags win).

use std::collections::BTreeMap;

use crate::error::{AlgError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Option<String>,
    pub params: BTreeMap<String, f64>,
    pub init: Option<Vec<f64>>,
    pub t_end: f64,
    pub step: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: Option<f64>,
    pub out: Option<String>,
    /// Optional Hamiltonian expression over the model's coordinate labels.
    pub hamiltonian: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            params: BTreeMap::new(),
            init: None,
            t_end: 1.0,
            step: 1e-3,
            samples: 50,
            seed: 1,
            tol: None,
            out: None,
            hamiltonian: None,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| AlgError::Model(format!("config key '{key}': not a number: '{v}'")))
}

fn parse_vec(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|p| parse_f64(key, p))
        .collect::<Result<Vec<f64>>>()
}

impl RunConfig {
    /// Parse a config file body. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut in_params = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                match line {
                    "[run]" => in_params = false,
                    "[params]" => in_params = true,
                    other => {
                        return Err(AlgError::Model(format!(
                            "config line {}: unknown section {other}",
                            lineno + 1
                        )))
                    }
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(AlgError::Model(format!(
                    "config line {}: expected key = value",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim().trim_matches('"');
            if in_params {
                cfg.params.insert(key.to_string(), parse_f64(key, value)?);
                continue;
            }
            cfg.set_key(key, value)?;
        }
        Ok(cfg)
    }

    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = Some(value.to_string()),
            "init" => self.init = Some(parse_vec(key, value)?),
            "t-end" | "t_end" => self.t_end = parse_f64(key, value)?,
            "h" | "step" => self.step = parse_f64(key, value)?,
            "samples" => self.samples = parse_f64(key, value)? as usize,
            "seed" => self.seed = parse_f64(key, value)? as u64,
            "tol" => self.tol = Some(parse_f64(key, value)?),
            "out" => self.out = Some(value.to_string()),
            "hamiltonian" => self.hamiltonian = Some(value.to_string()),
            other => {
                return Err(AlgError::Model(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Apply a `k=v` parameter override.
    pub fn set_param(&mut self, spec: &str) -> Result<()> {
        let Some((k, v)) = spec.split_once('=') else {
            return Err(AlgError::Model(format!(
                "expected --params k=v, got '{spec}'"
            )));
        };
        self.params
            .insert(k.trim().to_string(), parse_f64(k, v)?);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config_deterministically() {
        let text = r#"
# a comment
model = lagrange-top-full
t-end = 2.5
h = 0.002
init = 0, 0.3, 0.2, -0.1, 0
seed = 7
tol = 1e-9
samples = 25
out = traj.csv

[params]
I = 1.0
J = 2.0
"#;
        let a = RunConfig::parse(text).unwrap();
        let b = RunConfig::parse(text).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.model.as_deref(), Some("lagrange-top-full"));
        assert_eq!(a.t_end, 2.5);
        assert_eq!(a.tol, Some(1e-9));
        assert_eq!(a.init.as_ref().unwrap().len(), 5);
        assert_eq!(a.params["J"], 2.0);
        assert_eq!(a.seed, 7);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("model = x\nbogus = 1\n").is_err());
        assert!(RunConfig::parse("[weird]\n").is_err());
    }
}
