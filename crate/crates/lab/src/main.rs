//! `qwork-lab`: run, list and validate quantum-work experiments.
//!
//! ```text
//! qwork-lab list
//! qwork-lab validate run.cfg
//! qwork-lab run exp-ngt --eps 1 --eps-prime 2
//! qwork-lab exp-ngt --eps-prime 0
//! ```
//!
//! Exit status: 0 when every check passes, 1 when a check fails (or a
//! numerical guard aborts the run), 2 for configuration errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use qwork_core::expcli::{self, Config, RunOutcome, OUTPUT_ROOT_ENV};
use qwork_core::Error;

const EXIT_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "qwork-lab", version, about = "Quantum work experiment runner")]
struct Cli {
    /// Base configuration file (`key = value` lines); `--key value`
    /// overrides win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root for run directories when `out` is not set.
    #[arg(long, global = true, env = OUTPUT_ROOT_ENV)]
    out_root: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List registered experiments with their topics and parameters.
    List,
    /// Check a configuration file against its experiment's schema.
    Validate {
        file: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// Run an experiment. The name may be omitted when the `--config`
    /// file sets `experiment`.
    Run {
        #[arg(
            trailing_var_arg = true,
            allow_hyphen_values = true,
            value_name = "EXPERIMENT] [--KEY VALUE"
        )]
        args: Vec<String>,
    },
    #[command(external_subcommand)]
    Experiment(Vec<String>),
}

/// Failure split by exit status.
enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter { .. } | Error::InvalidGrid(_) => {
                Failure::Config(e.into())
            }
            other => Failure::Run(other.into()),
        }
    }
}

fn load(config: Option<&PathBuf>, overrides: &[String]) -> Result<Config> {
    let mut cfg = match config {
        Some(path) => Config::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => Config::default(),
    };
    cfg.apply_overrides(overrides)?;
    Ok(cfg)
}

fn list() {
    for e in expcli::registry() {
        println!("{:<26} [{}]", e.name, e.topics.join(", "));
        println!("    {}", e.summary);
        for p in e.params {
            let default = match (p.default, p.required) {
                (Some(d), _) => format!("default {d}"),
                (None, true) => "required".to_string(),
                (None, false) => "optional".to_string(),
            };
            println!("    --{:<16} {} ({default})", p.name, p.help);
        }
    }
}

fn validate(cli: &Cli, file: &Path, overrides: &[String]) -> std::result::Result<(), Failure> {
    let mut cfg = Config::load(file)
        .with_context(|| format!("loading {}", file.display()))
        .map_err(Failure::Config)?;
    cfg.apply_overrides(overrides)?;
    if let Some(base) = &cli.config {
        // `--config` is a base layer under the validated file.
        let mut merged = load(Some(base), &[]).map_err(Failure::Config)?;
        for (k, v) in cfg.iter() {
            merged.set(k, v);
        }
        cfg = merged;
    }
    let diags = expcli::validate(&cfg);
    if diags.is_empty() {
        println!("ok: {}", file.display());
        return Ok(());
    }
    for d in &diags {
        eprintln!("{d}");
    }
    Err(Failure::Config(anyhow::anyhow!(
        "{} diagnostic(s) in {}",
        diags.len(),
        file.display()
    )))
}

fn report(outcome: &RunOutcome) {
    for c in &outcome.checks {
        println!(
            "{} {:<48} {:.16e} {} {:.16e}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.relation,
            c.limit
        );
    }
    println!(
        "{}: {} ({} checks) -> {}",
        outcome.experiment,
        if outcome.passed { "passed" } else { "FAILED" },
        outcome.checks.len(),
        outcome.dir.display()
    );
}

fn run(cli: &Cli, experiment: Option<&str>, overrides: &[String]) -> std::result::Result<bool, Failure> {
    let mut cfg = load(cli.config.as_ref(), overrides).map_err(Failure::Config)?;
    if let Some(name) = experiment {
        cfg.set("experiment", name);
    }
    let diags = expcli::validate(&cfg);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("{d}");
        }
        return Err(Failure::Config(anyhow::anyhow!("invalid configuration")));
    }
    let outcome = expcli::run(&cfg, cli.out_root.as_deref())?;
    report(&outcome);
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::List => {
            list();
            Ok(true)
        }
        Command::Validate { file, overrides } => validate(&cli, file, overrides).map(|_| true),
        Command::Run { args } => match args.split_first() {
            Some((name, rest)) if !name.starts_with('-') => run(&cli, Some(name), rest),
            _ => run(&cli, None, args),
        },
        Command::Experiment(args) => run(&cli, Some(&args[0]), &args[1..]),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Run(e)) => {
            eprintln!("run aborted: {e:#}");
            ExitCode::from(EXIT_FAILED)
        }
    }
}
