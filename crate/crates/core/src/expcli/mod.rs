//! Experiment runner behind the `qwork-lab` binary.
//!
//! A run is described by a flat `key = value` configuration (file and/or
//! command-line overrides, overrides win). Every experiment declares a
//! schema; configurations are validated against it before anything is
//! computed. Each run writes one directory holding `config.txt`, its CSV and
//! JSON artifacts and a `summary.json` with the outcome of the built-in
//! checks.

mod config;
mod experiments;
mod json;
mod output;

pub use config::{Config, Diagnostic};
pub use experiments::{find, registry, Experiment, ParamKind, ParamSpec};
pub use json::{to_json_string, write_json};
pub use output::{Check, Output, RunOutcome};

use std::path::{Path, PathBuf};

use crate::{Error, Exec, Result};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "QWORK_LAB_OUTPUT";

/// Output root used when neither `out` nor the environment variable is set.
pub const DEFAULT_OUTPUT_ROOT: &str = "qwork-runs";

/// Keys accepted by every experiment.
pub const COMMON_PARAMS: &[ParamSpec] = &[
    ParamSpec::optional("experiment", ParamKind::Text, "experiment name"),
    ParamSpec::new("seed", ParamKind::Count, Some("1"), "master RNG seed"),
    ParamSpec::optional("out", ParamKind::Text, "output directory for this run"),
    ParamSpec::new("exec", ParamKind::Exec, Some("parallel"), "parallel | sequential"),
];

/// Schema diagnostics for `config`; empty when it is valid.
pub fn validate(config: &Config) -> Vec<Diagnostic> {
    let Some(name) = config.get("experiment") else {
        return vec![Diagnostic::new(
            "experiment",
            "missing required field `experiment`",
        )];
    };
    match find(name) {
        None => vec![Diagnostic::new(
            "experiment",
            format!("unknown experiment `{name}` (see `qwork-lab list`)"),
        )],
        Some(exp) => config.check_against(exp.params, COMMON_PARAMS),
    }
}

/// Resolved parameter values of a validated configuration.
#[derive(Debug, Clone)]
pub struct Params {
    config: Config,
    experiment: &'static Experiment,
}

impl Params {
    fn raw(&self, name: &str) -> Option<&str> {
        if let Some(v) = self.config.get(name) {
            return Some(v);
        }
        self.experiment
            .params
            .iter()
            .chain(COMMON_PARAMS)
            .find(|p| p.name == name)
            .and_then(|p| p.default)
    }

    fn missing(name: &str) -> Error {
        Error::Config(format!("parameter `{name}` has no value"))
    }

    pub fn f64(&self, name: &str) -> Result<f64> {
        let raw = self.raw(name).ok_or_else(|| Self::missing(name))?;
        config::parse_f64(raw).map_err(|e| Error::Config(format!("`{name}`: {e}")))
    }

    pub fn usize(&self, name: &str) -> Result<usize> {
        let raw = self.raw(name).ok_or_else(|| Self::missing(name))?;
        raw.parse()
            .map_err(|_| Error::Config(format!("`{name}`: expected a non-negative integer, got `{raw}`")))
    }

    pub fn u64(&self, name: &str) -> Result<u64> {
        Ok(self.usize(name)? as u64)
    }

    pub fn list(&self, name: &str) -> Result<Vec<f64>> {
        let raw = self.raw(name).ok_or_else(|| Self::missing(name))?;
        config::parse_list(raw).map_err(|e| Error::Config(format!("`{name}`: {e}")))
    }

    pub fn text(&self, name: &str) -> Option<&str> {
        self.raw(name)
    }

    pub fn exec(&self) -> Exec {
        match self.raw("exec") {
            Some("sequential") => Exec::Sequential,
            _ => Exec::Parallel,
        }
    }

    /// Every schema key with its effective value, sorted.
    pub fn resolved(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = self
            .experiment
            .params
            .iter()
            .chain(COMMON_PARAMS)
            .filter(|p| p.name != "out")
            .filter_map(|p| self.raw(p.name).map(|v| (p.name.to_string(), v.to_string())))
            .collect();
        out.sort();
        out
    }
}

fn output_dir(config: &Config, experiment: &str, root: Option<&Path>) -> PathBuf {
    if let Some(out) = config.get("out") {
        return PathBuf::from(out);
    }
    let root = root
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
    root.join(experiment)
}

/// Validates, runs and writes one experiment.
///
/// Configuration problems are reported as [`Error::Config`]; numerical guard
/// failures propagate as their own error variants.
pub fn run(config: &Config, output_root: Option<&Path>) -> Result<RunOutcome> {
    let diags = validate(config);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(Error::Config(text.join("; ")));
    }
    let name = config.get("experiment").expect("validated");
    let experiment = find(name).expect("validated");
    let params = Params {
        config: config.clone(),
        experiment,
    };
    let dir = output_dir(config, experiment.name, output_root);
    let mut out = Output::create(&dir, experiment.name)?;
    out.write_config(&params.resolved())?;
    (experiment.run)(&params, &mut out)?;
    out.finish()
}
