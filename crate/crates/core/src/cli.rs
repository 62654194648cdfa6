//! The `sac` command line.
//!
//! ```text
//! sac check-hypotheses --config run.json
//! sac simulate         --config run.json [--set time.dt=5e-4] [--force]
//! sac ensemble         --config run.json [--workers 8] [--force]
//! sac converge         --config run.json [--workers 8] [--force]
//! sac certify          --config run.json | --report out/report.json
//! ```
//!
//! Exit codes: 0 success, 1 hypothesis or domain failure, 2 configuration
//! error, 3 I/O error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::check::{Check, CheckReport};
use crate::config::RunConfig;
use crate::diagnostics::{certificate_audit, AuditReport};
use crate::ensemble::{self, convergence_study, load_run, persist, EnsembleOptions};
use crate::error::{Error, Result};
use crate::noise::check_noise;
use crate::potential::check_h1;

#[derive(Debug, Parser)]
#[command(name = "sac", version, about = "Stochastic Allen-Cahn simulations with separation diagnostics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the potential, noise and separation hypotheses of a config.
    CheckHypotheses(ConfigArgs),
    /// Run trajectory 0 of the config and write its report and time series.
    Simulate(RunArgs),
    /// Run the whole ensemble.
    Ensemble(RunArgs),
    /// Run the refinement study of the `study` section.
    Converge(RunArgs),
    /// Audit a stored ensemble against the separation certificate.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dotted override, e.g. `--set time.dt=5e-4`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Run even if the hypotheses fail; the report is marked unverified.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Config whose `output.dir` holds the report.
    #[arg(long, required_unless_present = "report")]
    pub config: Option<PathBuf>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// A `report.json` or the directory containing it.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Strict lower bound on `s0` for the separation property in dimension `d`.
pub fn separation_threshold(d: usize) -> u32 {
    if d == 3 {
        6
    } else {
        2
    }
}

/// All hypothesis checks of a configuration.
pub fn hypothesis_report(cfg: &RunConfig) -> Result<CheckReport> {
    let p = cfg.log_potential()?;
    let c = cfg.constants(&p)?;
    let f = cfg.noise_family()?;
    let d = cfg.domain.d;
    let mut report = CheckReport::new("hypotheses");
    report.extend(check_h1(&p, &c, 4000)?);
    report.extend(check_noise(&f, &p, c.s_f, d)?);
    let mut sep = CheckReport::new("separation");
    let t = separation_threshold(d);
    sep.push(Check::new(
        format!("s0 > {t} (d = {d})"),
        f.s0() > t,
        format!("s0 = {}", f.s0()),
    ));
    report.extend(sep);
    Ok(report)
}

/// Parses `args` (including the program name), runs, returns the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(a: &ConfigArgs) -> Result<RunConfig> {
    RunConfig::load(&a.config, &a.overrides)
}

/// Prints the hypothesis report; returns whether the run may proceed and
/// whether it is unverified.
fn gate(cfg: &RunConfig, force: bool) -> Result<Option<bool>> {
    let report = hypothesis_report(cfg)?;
    if report.passed() {
        return Ok(Some(false));
    }
    eprint!("{report}");
    if force {
        eprintln!("warning: hypotheses failed; continuing because of --force");
        Ok(Some(true))
    } else {
        eprintln!("error: hypotheses failed (use --force to run anyway)");
        Ok(None)
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::CheckHypotheses(a) => {
            let cfg = load_config(&a)?;
            let report = hypothesis_report(&cfg)?;
            print!("{report}");
            Ok(if report.passed() { 0 } else { 1 })
        }
        Command::Simulate(a) => {
            let mut cfg = load_config(&a.config)?;
            let Some(unverified) = gate(&cfg, a.force)? else {
                return Ok(1);
            };
            cfg.ensemble.n_traj = 1;
            run_and_persist(&cfg, 1, unverified)
        }
        Command::Ensemble(a) => {
            let cfg = load_config(&a.config)?;
            let Some(unverified) = gate(&cfg, a.force)? else {
                return Ok(1);
            };
            run_and_persist(&cfg, a.workers, unverified)
        }
        Command::Converge(a) => {
            let cfg = load_config(&a.config)?;
            let Some(unverified) = gate(&cfg, a.force)? else {
                return Ok(1);
            };
            let study = convergence_study(&cfg, a.workers)?;
            let dir = &cfg.output.dir;
            let path = dir.join("study.json");
            write_json(&path, &StudyOutput { hypotheses_unverified: unverified, study: &study })?;
            println!("{:?} distances: {:?}", study.kind, study.distances);
            println!("strictly decreasing: {}", study.strictly_decreasing);
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Certify(a) => {
            let dir = match (&a.report, &a.config) {
                (Some(p), _) if p.is_dir() => p.clone(),
                (Some(p), _) => p.parent().map(Path::to_path_buf).unwrap_or_default(),
                (None, Some(c)) => RunConfig::load(c, &a.overrides)?.output.dir,
                (None, None) => return Err(Error::Config("certify needs --config or --report".into())),
            };
            let run = load_run(&dir)?;
            let audits = run
                .records
                .iter()
                .map(certificate_audit)
                .collect::<Result<Vec<AuditReport>>>()?;
            let passed = audits.iter().all(|r| r.passed);
            let path = dir.join("audit.json");
            write_json(&path, &audits)?;
            for r in &audits {
                let slack = r.entries.iter().map(|e| e.slack).fold(f64::INFINITY, f64::min);
                println!(
                    "trajectory {}: eps* = {:.6e}, min slack = {:.6e}, {}",
                    r.trajectory_id,
                    r.epsilon_star,
                    slack,
                    if r.passed { "pass" } else { "FAIL" }
                );
            }
            println!("wrote {}", path.display());
            Ok(if passed { 0 } else { 1 })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct StudyOutput<T> {
    hypotheses_unverified: bool,
    #[serde(flatten)]
    study: T,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidParameter(format!("serialisation: {e}")))?;
    s.push('\n');
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn run_and_persist(cfg: &RunConfig, workers: usize, unverified: bool) -> Result<i32> {
    let run = ensemble::run_ensemble(
        cfg,
        EnsembleOptions {
            workers,
            hypotheses_unverified: unverified,
        },
    )?;
    let (json, csv) = persist(&run, &cfg.output.dir)?;
    let a = &run.report.aggregate;
    println!(
        "{} trajectories, delta_min: min {:.6e}, median {:.6e}; clamp events {}",
        a.n_traj, a.delta_min.min, a.delta_min.median, a.total_clamp_events
    );
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::tests::EXAMPLE;

    fn cfg(overrides: &[&str]) -> RunConfig {
        let v: serde_json::Value = serde_json::from_str(EXAMPLE).unwrap();
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        RunConfig::from_value(v, &o).unwrap()
    }

    #[test]
    fn hypothesis_examples() {
        assert!(hypothesis_report(&cfg(&[])).unwrap().passed());

        let r = hypothesis_report(&cfg(&["domain.d=3", "domain.n=7", "noise.s0=6"])).unwrap();
        let fails: Vec<&str> = r.failures().map(|c| c.name.as_str()).collect();
        assert_eq!(fails, ["separation: s0 > 6 (d = 3)"]);
        assert!(hypothesis_report(&cfg(&["domain.d=3", "domain.n=7", "noise.s0=7"]))
            .unwrap()
            .passed());

        let r = hypothesis_report(&cfg(&["domain.d=2", "domain.n=7", "noise.s0=1"])).unwrap();
        assert!(!r.passed());
        assert!(!r.find("separation: s0 > 2 (d = 2)").unwrap().passed);
        assert!(r.find("H2/H3: s0 >= d s_F - 1").unwrap().passed);
    }

    #[test]
    fn parse_errors_exit_2() {
        for args in [&["sac", "bogus"][..], &["sac", "simulate"]] {
            assert_eq!(Cli::try_parse_from(args).unwrap_err().exit_code(), 2);
        }
    }
}
