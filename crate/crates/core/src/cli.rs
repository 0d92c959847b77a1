//! Command-line front end.
//!
//! Stdout carries payloads only (JSON reports); progress and errors go to
//! stderr. Output files are written to a temporary sibling and renamed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::assumptions::{check_assumption_a, scan_regime, ScanRow, CONDITION_IDS};
use crate::config::{Instance, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::{run_lemma_trials, verify_theorem_with, Tolerances, VerificationReport};
use crate::integrate::{integrate_with, RunControl, Trajectory};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_CHECK_FAILED: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_VACUOUS: u8 = 4;

/// Caps the worker pool size.
pub const THREADS_ENV: &str = "KURANET_THREADS";

#[derive(Debug, Parser)]
#[command(name = "kuranet", version, about = "Inertial Kuramoto networks: simulate, check, verify, scan")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate and write a CSV time series.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Observables::Diag)]
        observables: Observables,
    },
    /// Evaluate the sufficient conditions; prints the report JSON.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate and check the synchronization estimates; writes the report JSON.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search `K` on the `m = α = K⁻²` curve; writes one CSV row per grid point.
    Scan {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Randomized check of the energy and edge-sum inequalities; prints a summary JSON.
    Lemmas {
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Observables {
    /// `t,d_theta,d_omega,e1,e2`
    Diag,
    /// Diagnostics followed by `theta_1..theta_N,omega_1..omega_N`.
    Full,
}

/// Exit code for an error escaping a command.
pub fn exit_code(err: &Error) -> u8 {
    use Error::*;
    match err {
        NonFiniteState { .. }
        | BudgetExceeded { .. }
        | HorizonTooShort { .. }
        | TooFewSamples { .. }
        | AlreadyConverged
        | NoQualifyingSamples(_)
        | Io(_) => EXIT_RUNTIME,
        NotFound(_) | CounterexampleFound(_) => EXIT_CHECK_FAILED,
        _ => EXIT_CONFIG,
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let stdout = std::io::stdout();
    ExitCode::from(run(&cli.command, &mut stdout.lock()))
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // A pool may already exist when embedded; keep it.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Runs one command, writing payloads to `stdout`; returns the exit code.
pub fn run(command: &Command, stdout: &mut dyn Write) -> u8 {
    let result = match command {
        Command::Simulate { config, out, observables } => cmd_simulate(config, out, *observables),
        Command::Check { config } => cmd_check(config, stdout),
        Command::Verify { config, out } => cmd_verify(config, out),
        Command::Scan { config, out } => cmd_scan(config, out),
        Command::Lemmas { trials, seed, out } => cmd_lemmas(*trials, *seed, out.as_deref(), stdout),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })
}

pub fn cmd_simulate(config: &Path, out: &Path, observables: Observables) -> Result<u8> {
    let cfg = RunConfig::load(config)?;
    let (csv, traj) = simulate_csv(&cfg, observables, &RunControl::default())?;
    write_atomic(out, csv.as_bytes())?;
    eprintln!("simulate: {} samples", traj.len());
    Ok(EXIT_OK)
}

/// The `simulate` payload for a parsed config.
pub fn simulate_csv(cfg: &RunConfig, observables: Observables, control: &RunControl) -> Result<(String, Trajectory)> {
    let v = cfg.verify_config()?;
    let traj = integrate_with(&v.state0, &v.params, &v.graph, &v.plan, control)?;
    Ok((trajectory_csv(&traj, observables), traj))
}

pub fn cmd_check(config: &Path, stdout: &mut dyn Write) -> Result<u8> {
    let cfg = RunConfig::load(config)?;
    let Instance { graph, params, state0 } = cfg.instance()?;
    let report = check_assumption_a(&state0, &params, &graph, cfg.thresholds.d0, cfg.thresholds.d_inf)?;
    writeln!(stdout, "{}", serde_json::to_string_pretty(&report)?)?;
    for c in report.failing() {
        eprintln!("check: {} {} fails: {} (lhs {:e}, rhs {:e})", c.id, c.clause, c.description, c.lhs, c.rhs);
    }
    Ok(if report.all_hold { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cmd_verify(config: &Path, out: &Path) -> Result<u8> {
    let cfg = RunConfig::load(config)?;
    let (report, json) = verify_json(&cfg, &RunControl::default())?;
    write_atomic(out, json.as_bytes())?;
    eprintln!(
        "verify: trap {} e1 {} gronwall {} e2 {} rate {}",
        report.phase_trap_ok, report.e1_bounded_ok, report.e1_gronwall_ok, report.e2_decay_ok, report.rate_ok
    );
    Ok(verify_exit_code(&report))
}

/// The `verify` report and its JSON text for a parsed config.
pub fn verify_json(cfg: &RunConfig, control: &RunControl) -> Result<(VerificationReport, String)> {
    let (report, _) = verify_theorem_with(&cfg.verify_config()?, control, Tolerances::default())?;
    let json = format!("{}\n", serde_json::to_string_pretty(&report)?);
    Ok((report, json))
}

/// Vacuous outranks failed checks.
pub fn verify_exit_code(report: &VerificationReport) -> u8 {
    if report.vacuous {
        EXIT_VACUOUS
    } else if report.checks_pass() {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn cmd_scan(config: &Path, out: &Path) -> Result<u8> {
    let cfg = RunConfig::load(config)?;
    let grid = cfg.k_grid.ok_or_else(|| Error::Config("scan needs a k_grid".into()))?;
    let graph = cfg.build_graph()?;
    let n = graph.n();
    let omega_natural = cfg.omega_natural(n)?;
    let state0 = cfg.initial_state(n)?;
    let outcome = scan_regime(&state0, &graph, &omega_natural, cfg.thresholds.d0, cfg.thresholds.d_inf, &grid)?;
    write_atomic(out, scan_csv(&outcome.rows).as_bytes())?;
    match outcome.found {
        Some(r) => {
            eprintln!("scan: K = {:e}, m = alpha = {:e}", r.coupling_k, r.m);
            Ok(EXIT_OK)
        }
        None => {
            eprintln!("scan: no grid point satisfies every condition");
            Ok(EXIT_CHECK_FAILED)
        }
    }
}

pub fn cmd_lemmas(trials: u64, seed: u64, out: Option<&Path>, stdout: &mut dyn Write) -> Result<u8> {
    let summary = run_lemma_trials(trials, seed)?;
    let text = format!("{}\n", serde_json::to_string_pretty(&summary)?);
    match out {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(if summary.failures == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// Float text with 17 significant digits, enough to round-trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory, observables: Observables) -> String {
    let n = traj.samples.first().map_or(0, |s| s.state.n());
    let mut header = vec!["t".to_owned(), "d_theta".into(), "d_omega".into(), "e1".into(), "e2".into()];
    if observables == Observables::Full {
        header.extend((1..=n).map(|i| format!("theta_{i}")));
        header.extend((1..=n).map(|i| format!("omega_{i}")));
    }
    let mut out = header.join(",");
    out.push('\n');
    for s in &traj.samples {
        let d = &s.diag;
        let mut row = vec![fmt_f64(d.t), fmt_f64(d.d_theta), fmt_f64(d.d_omega), fmt_f64(d.e1), fmt_f64(d.e2)];
        if observables == Observables::Full {
            row.extend(s.state.theta.iter().chain(&s.state.omega).map(|&x| fmt_f64(x)));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `K,m,alpha,all_hold,c1,...,c6,margin_min`; each `c_k` column is the
/// smallest margin among that group's clauses.
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from("K,m,alpha,all_hold");
    for id in CONDITION_IDS {
        out.push(',');
        out.push_str(id);
    }
    out.push_str(",margin_min\n");
    for row in rows {
        let mut fields = vec![
            fmt_f64(row.regime.coupling_k),
            fmt_f64(row.regime.m),
            fmt_f64(row.regime.alpha),
            row.report.all_hold.to_string(),
        ];
        fields.extend(CONDITION_IDS.iter().map(|id| fmt_f64(row.report.group_margin(id))));
        fields.push(fmt_f64(row.report.margin_min()));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
