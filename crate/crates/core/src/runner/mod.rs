//! Config-driven experiment runner behind the `l2lab` binary.
//!
//! Each subcommand reads one TOML config, runs one check and writes
//! `<out>/<name>/<check>.json`, an optional `<check>.csv` and a
//! `report.json` carrying the config hash, tool version and wall times.
//! Exit codes: 0 all verdicts pass, 1 a check failed, 2 usage or config error.

mod checks;
mod config;
mod report;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checks::{run_check, sample_points, DUALITY_TOLERANCE};
pub use config::{
    Check, ConfigError, DomainSpec, ExperimentConfig, ExtensionSpec, Spacing, TGrid, Tolerances, WeightSpec,
};
pub use report::{write_atomic, write_json, Cell, CheckOutcome, CheckTiming, RunReport, Table};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Overrides {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Radial nodes of the raw cross-check quadrature.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Replaces the tolerance the subcommand checks against.
    #[arg(long)]
    pub tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig, check: Option<Check>) {
        if let Some(r) = self.resolution {
            cfg.resolution = r;
        }
        if let Some(tol) = self.tol {
            let t = &mut cfg.tolerances;
            match check {
                Some(Check::CheckConcavity) => t.concavity = tol,
                Some(Check::VerifyOde) => t.ode = tol,
                Some(_) => t.relative = tol,
                None => {
                    t.concavity = tol;
                    t.relative = tol;
                    t.ode = tol;
                }
            }
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "l2lab", version, about = "Minimal weighted L2 integrals on model domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate G(t) and r = g(t).
    ComputeG(Single),
    /// Second differences of G against r, monotonicity and decay.
    CheckConcavity(Single),
    /// The three linearity statements, plus the second weight when configured.
    CheckLinearity(Single),
    /// Kernel ratios K_{D_t}(z, o) / K_D(z, o) against e^t.
    BergmanRatio(Single),
    /// Residuals of the two ODEs solved by (u, s).
    VerifyOde(Single),
    /// Layer-cake, integration by parts and the quotient inequality.
    VerifyIdentities(Single),
    /// Cutoff extension inequality, or the optimal slice extension.
    ExtensionCheck(Single),
    /// Every config in a directory, each with its listed checks.
    Suite(Single),
}

#[derive(Debug, Args)]
pub struct Single {
    /// Config file (directory for `suite`).
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Parses arguments and runs; returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let (check, single) = match cli.command {
        Command::ComputeG(s) => (Check::ComputeG, s),
        Command::CheckConcavity(s) => (Check::CheckConcavity, s),
        Command::CheckLinearity(s) => (Check::CheckLinearity, s),
        Command::BergmanRatio(s) => (Check::BergmanRatio, s),
        Command::VerifyOde(s) => (Check::VerifyOde, s),
        Command::VerifyIdentities(s) => (Check::VerifyIdentities, s),
        Command::ExtensionCheck(s) => (Check::ExtensionCheck, s),
        Command::Suite(s) => {
            return match run_suite(&s.config, &s.overrides) {
                Ok(summary) => summary.exit_code(),
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_USAGE
                }
            }
        }
    };
    match run_command(check, &single.config, &single.overrides) {
        Ok(report) => {
            if report.pass {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn load(path: &Path, overrides: &Overrides, check: Option<Check>) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::load(path)?;
    overrides.apply(&mut cfg, check);
    cfg.validate().map_err(|message| ConfigError {
        source: path.display().to_string(),
        message,
    })?;
    Ok(cfg)
}

fn io_error(path: &Path, e: std::io::Error) -> ConfigError {
    ConfigError {
        source: path.display().to_string(),
        message: format!("cannot write output: {e}"),
    }
}

/// Runs `checks` on a loaded config and writes all artifacts.
pub fn run_config(cfg: &ExperimentConfig, checks: &[Check], out: &Path) -> Result<RunReport, ConfigError> {
    let dir = out.join(&cfg.name);
    let mut report = RunReport::new(&cfg.name, cfg.hash());
    for &check in checks {
        let start = Instant::now();
        let outcome = run_check(cfg, check);
        let elapsed = start.elapsed().as_secs_f64();
        report::write_outcome(&dir, &outcome).map_err(|e| io_error(&dir, e))?;
        match &outcome.error {
            Some(e) => eprintln!("{}: {} FAILED: {e}", cfg.name, check.name()),
            None => {
                let failing: Vec<&str> = outcome
                    .verdicts
                    .iter()
                    .filter(|(_, &ok)| !ok)
                    .map(|(k, _)| k.as_str())
                    .collect();
                if failing.is_empty() {
                    eprintln!("{}: {} pass", cfg.name, check.name());
                } else {
                    eprintln!("{}: {} FAILED: {}", cfg.name, check.name(), failing.join(", "));
                }
            }
        }
        report.record(&outcome, elapsed);
    }
    write_json(&dir.join("report.json"), &report).map_err(|e| io_error(&dir, e))?;
    Ok(report)
}

/// A single subcommand on a single config.
pub fn run_command(check: Check, config: &Path, overrides: &Overrides) -> Result<RunReport, ConfigError> {
    let cfg = load(config, overrides, Some(check))?;
    run_config(&cfg, &[check], &overrides.out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteStatus {
    Pass,
    Fail,
    ConfigError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub status: SuiteStatus,
    pub checks: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

/// Keyed by config file stem, so ordering is deterministic.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub configs: BTreeMap<String, SuiteEntry>,
}

impl SuiteSummary {
    pub fn exit_code(&self) -> i32 {
        if self.configs.values().all(|e| e.status == SuiteStatus::Pass) {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Runs every `*.toml` in `dir`; one config failing does not stop the rest.
pub fn run_suite(dir: &Path, overrides: &Overrides) -> Result<SuiteSummary, ConfigError> {
    let entries = std::fs::read_dir(dir).map_err(|e| ConfigError {
        source: dir.display().to_string(),
        message: e.to_string(),
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        eprintln!("warning: no configs in {}", dir.display());
    }
    let results: Vec<(String, SuiteEntry)> = paths
        .par_iter()
        .map(|path| {
            let key = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let entry = match load(path, overrides, None) {
                Err(e) => {
                    eprintln!("{e}");
                    SuiteEntry {
                        status: SuiteStatus::ConfigError,
                        checks: BTreeMap::new(),
                        message: Some(e.message),
                    }
                }
                Ok(cfg) => match run_config(&cfg, &cfg.checks, &overrides.out) {
                    Ok(report) => SuiteEntry {
                        status: if report.pass { SuiteStatus::Pass } else { SuiteStatus::Fail },
                        checks: report.checks.iter().map(|c| (c.check.clone(), c.pass)).collect(),
                        message: None,
                    },
                    Err(e) => SuiteEntry {
                        status: SuiteStatus::Fail,
                        checks: BTreeMap::new(),
                        message: Some(e.message),
                    },
                },
            };
            (key, entry)
        })
        .collect();
    let summary = SuiteSummary {
        configs: results.into_iter().collect(),
    };
    write_json(&overrides.out.join("suite.json"), &summary).map_err(|e| io_error(&overrides.out, e))?;
    Ok(summary)
}
