//! Command-line front end: `solve-coeffs`, `simulate` and `verify`.
//!
//! Exit codes: 0 success, 1 config or I/O error, 2 infeasible moments,
//! 3 runtime failure, 4 verification failure. Every failure prints one line
//! `error[<kind>]: <reason>` on standard error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{read_json, CoeffConfig, SimConfig};
use crate::dynamics::{max_drifts, write_diagnostics, Simulation};
use crate::equilibrium::{
    inter_feasibility, intra_feasibility, solve_inter, solve_intra, verify_coeffs, verify_intra, InterCoeffs,
    IntraCoeffs, MixtureProblem, ResidualReport, Species,
};
use crate::error::Error;
use crate::snapshot;
use crate::verify::{render_table, run_checks, Level};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

pub const COEFFICIENTS_FILE: &str = "coefficients.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Parser)]
#[command(name = "qbgk", version, about = "Quantum BGK mixture equilibria and relaxation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve intra- and inter-species equilibrium coefficients for given moments.
    SolveCoeffs {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Integrate the relaxation (and transport) dynamics to t_end.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the built-in check suite.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        /// Scale every tolerance to zero (exercises the failure path).
        #[arg(long, hide = true)]
        tamper: bool,
    },
}

/// A failure carrying its exit code and a one-line reason.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self { code, kind, message: message.into() }
    }

    fn config(e: impl ToString) -> Self {
        Self::new(EXIT_CONFIG, "config", e.to_string())
    }

    pub fn line(&self) -> String {
        format!("error[{}]: {}", self.kind, self.message.replace('\n', " "))
    }
}

fn io_failure(e: Error) -> Failure {
    Failure::new(EXIT_CONFIG, "io", e.to_string())
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub config_sha256: Option<String>,
    pub version: &'static str,
    pub timestamp: u64,
    pub subcommand: &'static str,
    pub outputs: Vec<String>,
}

/// Seconds since the epoch; `SOURCE_DATE_EPOCH` overrides the clock.
fn timestamp() -> u64 {
    if let Some(v) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.trim().parse().ok()) {
        return v;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn write_manifest(out: &Path, subcommand: &'static str, config: Option<&[u8]>, outputs: Vec<String>) -> Result<(), Failure> {
    let manifest = RunManifest {
        config_sha256: config.map(|b| hex::encode(Sha256::digest(b))),
        version: env!("CARGO_PKG_VERSION"),
        timestamp: timestamp(),
        subcommand,
        outputs,
    };
    write_json(&out.join(MANIFEST_FILE), &manifest)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(Failure::config)?;
    text.push('\n');
    snapshot::write_atomic(path, text.as_bytes()).map_err(io_failure)
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_CONFIG, "io", format!("{}: {e}", dir.display())))
}

#[derive(Debug, Serialize)]
pub struct IntraReport {
    #[serde(flatten)]
    pub coeffs: IntraCoeffs,
    pub iterations: usize,
    pub clamped: bool,
    pub residuals: ResidualReport,
}

#[derive(Debug, Serialize)]
pub struct InterReport {
    #[serde(flatten)]
    pub coeffs: InterCoeffs,
    pub iterations: usize,
    pub clamped: bool,
    pub residuals: ResidualReport,
}

#[derive(Debug, Serialize)]
pub struct Feasibility {
    pub intra: [bool; 2],
    pub inter: bool,
}

#[derive(Debug, Serialize)]
pub struct CoefficientReport {
    pub species: [Species; 2],
    pub feasible: Feasibility,
    pub reasons: Vec<String>,
    pub intra: [Option<IntraReport>; 2],
    pub inter: Option<InterReport>,
    pub residual_tol: f64,
    pub residuals_passed: bool,
}

/// Solves every feasible part of `cfg`. Parts that fail are reported as
/// `null` with a reason.
pub fn coefficient_report(cfg: &CoeffConfig) -> CoefficientReport {
    let tol = cfg.residual_tol;
    let mut reasons = Vec::new();
    let mut intra: [Option<IntraReport>; 2] = [None, None];
    for (i, slot) in intra.iter_mut().enumerate() {
        let s = cfg.species[i];
        let mom = &cfg.moments[i];
        if let Err(reason) = intra_feasibility(s.mass, s.statistics, mom) {
            reasons.push(reason.for_species(i + 1).to_string());
            continue;
        }
        match solve_intra(s.mass, s.statistics, mom) {
            Ok(sol) => {
                *slot = Some(IntraReport {
                    residuals: verify_intra(&sol.coeffs, s.mass, s.statistics, mom, tol),
                    coeffs: sol.coeffs,
                    iterations: sol.iterations,
                    clamped: sol.clamped,
                })
            }
            Err(e) => reasons.push(format!("species {}: {e}", i + 1)),
        }
    }
    let prob = MixtureProblem::new(cfg.species[0], cfg.species[1], cfg.moments[0], cfg.moments[1]);
    let inter = match inter_feasibility(&prob) {
        Err(reason) => {
            // the mixture reason leads: it implies any intra failure
            reasons.insert(0, reason.to_string());
            None
        }
        Ok(()) => match solve_inter(&prob) {
            Ok(sol) => Some(InterReport {
                residuals: verify_coeffs(&sol.coeffs, &prob, tol),
                coeffs: sol.coeffs,
                iterations: sol.iterations,
                clamped: sol.clamped,
            }),
            Err(e) => {
                reasons.push(e.to_string());
                None
            }
        },
    };
    let residuals_passed = intra.iter().flatten().all(|r| r.residuals.passed) && inter.as_ref().is_none_or(|r| r.residuals.passed);
    CoefficientReport {
        species: cfg.species,
        feasible: Feasibility { intra: [intra[0].is_some(), intra[1].is_some()], inter: inter.is_some() },
        reasons,
        intra,
        inter,
        residual_tol: tol,
        residuals_passed,
    }
}

pub fn cmd_solve_coeffs(config: &Path, out: &Path) -> Result<(), Failure> {
    let (cfg, bytes): (CoeffConfig, _) = read_json(config).map_err(Failure::config)?;
    cfg.validate().map_err(Failure::config)?;
    create_dir(out)?;
    let report = coefficient_report(&cfg);
    write_json(&out.join(COEFFICIENTS_FILE), &report)?;
    write_manifest(out, "solve-coeffs", Some(&bytes), vec![COEFFICIENTS_FILE.into()])?;
    if !report.reasons.is_empty() {
        return Err(Failure::new(EXIT_INFEASIBLE, "infeasible", report.reasons.join("; ")));
    }
    if !report.residuals_passed {
        return Err(Failure::new(EXIT_RUNTIME, "accuracy", format!("residuals exceed {}", report.residual_tol)));
    }
    println!("wrote {}", out.join(COEFFICIENTS_FILE).display());
    Ok(())
}

pub fn snapshot_name(species: usize, cell: usize) -> String {
    format!("snapshots/species{species}_cell{cell:04}.bin")
}

fn runtime_failure(e: &Error) -> Failure {
    let kind = if e.infeasibility().is_some() { "infeasible" } else { "runtime" };
    Failure::new(EXIT_RUNTIME, kind, e.to_string())
}

pub fn cmd_simulate(config: &Path, out: &Path) -> Result<(), Failure> {
    let (mut cfg, bytes): (SimConfig, _) = read_json(config).map_err(Failure::config)?;
    if let Some(base) = config.parent() {
        cfg.resolve_paths(base);
    }
    let masses = [cfg.species[0].mass, cfg.species[1].mass];
    let mut sim = Simulation::new(cfg).map_err(|e| match e {
        Error::Io(_) | Error::Snapshot(_) => io_failure(e),
        Error::Config(_) | Error::Cfl { .. } => Failure::config(e),
        other if other.infeasibility().is_some() => Failure::new(EXIT_INFEASIBLE, "infeasible", other.to_string()),
        other => Failure::config(other),
    })?;
    create_dir(&out.join("snapshots"))?;
    let outcome = sim.run().map(|_| ()).map_err(|e| runtime_failure(&e));
    // the diagnostics written so far are kept on failure
    write_diagnostics(&out.join(DIAGNOSTICS_FILE), &sim.state.diagnostics).map_err(io_failure)?;
    let mut outputs = vec![DIAGNOSTICS_FILE.to_string()];
    if let Err(failure) = outcome {
        write_manifest(out, "simulate", Some(&bytes), outputs)?;
        return Err(failure);
    }
    for (c, cell) in sim.state.cells.iter().enumerate() {
        for (k, field) in [(1, &cell.f1), (2, &cell.f2)] {
            let name = snapshot_name(k, c);
            snapshot::write(&out.join(&name), field, &sim.grid).map_err(io_failure)?;
            outputs.push(name);
        }
    }
    write_manifest(out, "simulate", Some(&bytes), outputs)?;

    let d = &sim.state.diagnostics;
    let last = d.last().expect("initial record");
    let drift = max_drifts(d, masses);
    println!("steps          {}", sim.state.step);
    println!("final t        {:.6}", last.t);
    println!("final H        {:.16e}", last.h);
    println!("drift mass1    {:.3e}", drift[0]);
    println!("drift mass2    {:.3e}", drift[1]);
    println!("drift momentum {:.3e}", drift[2]);
    println!("drift energy   {:.3e}", drift[3]);
    Ok(())
}

pub fn cmd_verify(level: Level, tamper: bool) -> Result<(), Failure> {
    let checks = run_checks(level, if tamper { 0.0 } else { 1.0 });
    print!("{}", render_table(&checks));
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_VERIFY, "verify", format!("failed checks: {}", failed.join(", "))))
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::config(format!("THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(Failure::config)
}

pub fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::SolveCoeffs { config, out } => cmd_solve_coeffs(&config, &out),
        Command::Simulate { config, out } => cmd_simulate(&config, &out),
        Command::Verify { level, tamper } => cmd_verify(level, tamper),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", Failure::new(EXIT_CONFIG, "usage", first).line());
            return EXIT_CONFIG;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", f.line());
            f.code
        }
    }
}
