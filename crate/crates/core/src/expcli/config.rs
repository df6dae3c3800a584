use std::collections::BTreeMap;
use std::fmt;

use super::experiments::{ParamKind, ParamSpec};
use crate::{Error, Result};

/// Flat `key = value` run configuration.
///
/// Keys are case-sensitive and `_` is read as `-`, so `eps_prime` and
/// `eps-prime` name the same field. Later assignments replace earlier ones.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    entries: BTreeMap<String, String>,
}

/// One schema problem, tied to the field that caused it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub field: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl Config {
    /// Parses `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Config::default();
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    i + 1
                )));
            };
            let key = normalize_key(k);
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", i + 1)));
            }
            cfg.entries.insert(key, v.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) {
        self.entries.insert(normalize_key(key), value.trim().to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(&normalize_key(key)).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Applies `--key value` and `--key=value` pairs on top of the file.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, args: &[S]) -> Result<()> {
        let mut it = args.iter().map(AsRef::as_ref);
        while let Some(arg) = it.next() {
            let Some(key) = arg.strip_prefix("--") else {
                return Err(Error::Config(format!("expected `--key value`, got `{arg}`")));
            };
            if let Some((k, v)) = key.split_once('=') {
                self.set(k, v);
                continue;
            }
            let Some(value) = it.next() else {
                return Err(Error::Config(format!("`--{key}` is missing a value")));
            };
            self.set(key, value);
        }
        Ok(())
    }

    pub(crate) fn check_against(&self, params: &[ParamSpec], common: &[ParamSpec]) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let all = || params.iter().chain(common);
        for (key, value) in self.iter() {
            match all().find(|p| p.name == key) {
                None => diags.push(Diagnostic::new(key, "unknown parameter for this experiment")),
                Some(p) => {
                    if let Err(msg) = p.kind.check(value) {
                        diags.push(Diagnostic::new(key, msg));
                    }
                }
            }
        }
        for p in all() {
            if p.required && self.get(p.name).is_none() {
                diags.push(Diagnostic::new(
                    p.name,
                    format!("missing required field `{}` ({})", p.name, p.help),
                ));
            }
        }
        diags
    }
}

pub(crate) fn parse_f64(raw: &str) -> std::result::Result<f64, String> {
    match raw.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(format!("expected a finite number, got `{raw}`")),
    }
}

pub(crate) fn parse_list(raw: &str) -> std::result::Result<Vec<f64>, String> {
    let xs = raw
        .split(',')
        .map(parse_f64)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if xs.is_empty() {
        return Err("expected a comma-separated list".into());
    }
    Ok(xs)
}

impl ParamKind {
    pub(crate) fn check(self, raw: &str) -> std::result::Result<(), String> {
        match self {
            ParamKind::Real => parse_f64(raw).map(|_| ()),
            ParamKind::Positive => match parse_f64(raw)? {
                x if x > 0.0 => Ok(()),
                x => Err(format!("must be positive, got {x}")),
            },
            ParamKind::Count => raw
                .trim()
                .parse::<u64>()
                .map(|_| ())
                .map_err(|_| format!("expected a non-negative integer, got `{raw}`")),
            ParamKind::PositiveList => {
                let xs = parse_list(raw)?;
                match xs.iter().find(|&&x| !(x > 0.0)) {
                    Some(x) => Err(format!("entries must be positive, got {x}")),
                    None => Ok(()),
                }
            }
            ParamKind::Exec => match raw.trim() {
                "parallel" | "sequential" => Ok(()),
                _ => Err(format!("expected `parallel` or `sequential`, got `{raw}`")),
            },
            ParamKind::Text => {
                if raw.trim().is_empty() {
                    Err("must not be empty".into())
                } else {
                    Ok(())
                }
            }
        }
    }
}
