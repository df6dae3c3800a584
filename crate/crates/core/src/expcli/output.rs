use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};

use super::json::write_json;
use crate::Result;

/// One built-in check of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `"<"`, `"<="` or `">"`: how `value` is compared with `limit`.
    pub relation: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub experiment: String,
    pub dir: PathBuf,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub metrics: Map<String, Value>,
}

impl RunOutcome {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Collects artifacts, checks and metrics for one run directory.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    experiment: String,
    checks: Vec<Check>,
    metrics: Map<String, Value>,
    started: Instant,
}

impl Output {
    pub fn create(dir: &Path, experiment: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            experiment: experiment.to_string(),
            checks: Vec::new(),
            metrics: Map::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_config(&self, entries: &[(String, String)]) -> Result<()> {
        let mut text = format!("experiment = {}\n", self.experiment);
        for (k, v) in entries.iter().filter(|(k, _)| k != "experiment") {
            text.push_str(&format!("{k} = {v}\n"));
        }
        std::fs::write(self.dir.join("config.txt"), text)?;
        Ok(())
    }

    /// Buffered writer for an artifact inside the run directory.
    pub fn file(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    pub fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        write_json(&self.dir.join(name), value)
    }

    fn push(&mut self, name: &str, value: f64, limit: f64, relation: &'static str, pass: bool) -> bool {
        self.checks.push(Check {
            name: name.to_string(),
            value,
            limit,
            relation,
            pass,
        });
        pass
    }

    /// Passes when `value < limit`. NaN fails.
    pub fn check_below(&mut self, name: &str, value: f64, limit: f64) -> bool {
        self.push(name, value, limit, "<", value < limit)
    }

    /// Passes when `value <= limit`. NaN fails.
    pub fn check_at_most(&mut self, name: &str, value: f64, limit: f64) -> bool {
        self.push(name, value, limit, "<=", value <= limit)
    }

    /// Passes when `value > limit`. NaN fails.
    pub fn check_above(&mut self, name: &str, value: f64, limit: f64) -> bool {
        self.push(name, value, limit, ">", value > limit)
    }

    pub fn metric<T: Serialize>(&mut self, name: &str, value: T) -> Result<()> {
        self.metrics
            .insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    pub fn note(&mut self, text: &str) {
        let notes = self
            .metrics
            .entry("notes")
            .or_insert_with(|| Value::Array(Vec::new()));
        if let Value::Array(xs) = notes {
            xs.push(Value::String(text.to_string()));
        }
    }

    /// Writes `summary.json` and returns the outcome.
    pub fn finish(self) -> Result<RunOutcome> {
        let passed = self.checks.iter().all(|c| c.pass);
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let summary = serde_json::json!({
            "experiment": self.experiment,
            "passed": passed,
            "checks": self.checks,
            "metrics": self.metrics,
            "metadata": {
                "version": env!("CARGO_PKG_VERSION"),
                "unix_time": timestamp,
                "elapsed_seconds": self.started.elapsed().as_secs_f64(),
            },
        });
        write_json(&self.dir.join("summary.json"), &summary)?;
        Ok(RunOutcome {
            experiment: self.experiment,
            dir: self.dir,
            checks: self.checks,
            passed,
            metrics: self.metrics,
        })
    }
}
