//! `kglab`: scenario runner, acceptance suite and one-off ground-state and
//! region queries.

mod config;
mod output;
mod scenarios;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kglab::classify::classify;
use kglab::functionals::{report, FieldPair, NonlinearityParams, PhasePoint};
use kglab::groundstate::{
    candidate_levels, constraint_defect, solve_ground_state_with, threshold, SolverOptions,
};
use kglab::spectral::{read_snapshot, Geometry, SpectralGrid};
use kglab::validation::{validate_suite, CRITERIA};
use serde::Serialize;
use serde_json::json;

use config::{ConfigError, Scenario};
use output::RunDir;

const WORKERS_VAR: &str = "KGLAB_WORKERS";

#[derive(Parser)]
#[command(name = "kglab", version, about = "Coupled Klein-Gordon laboratory")]
struct Cli {
    /// Threshold cache (JSON). Corrupt or missing files are recomputed.
    #[arg(long, global = true, env = "KGLAB_CACHE")]
    cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file.
    Run {
        config: PathBuf,
        /// Overrides `output_dir` from the file.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print a JSON report.
    Validate {
        /// Criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Also write the report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Solve for the ground state at one parameter point.
    Groundstate {
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu2: f64,
        /// Radial grid points.
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long, default_value_t = 24.0)]
        half_length: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the minimizer as a snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Classify a stored phase point (fields u1, v1, u2, v2, or u1, u2 at rest).
    Classify {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        mu1: f64,
        #[arg(long, default_value_t = 1.0)]
        mu2: f64,
        /// Threshold to compare against; computed when omitted (3D data only).
        #[arg(long)]
        h0: Option<f64>,
    },
}

enum Failure {
    Check,
    Config(String),
    Runtime(String),
}

impl From<kglab::Error> for Failure {
    fn from(e: kglab::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::Config(format!("{WORKERS_VAR}={raw:?} is not a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Runtime(e.to_string()))
}

/// Stdout may be a closed pipe; the report is best effort there.
fn print_json(value: &impl Serialize) {
    let text = serde_json::to_string_pretty(value).expect("serializable report");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

#[derive(Serialize)]
struct Manifest<'a> {
    program: &'static str,
    version: &'static str,
    kind: &'static str,
    seed: u64,
    config_sha256: &'a str,
    workers: usize,
    scenario: &'a Scenario,
}

fn run_scenario(path: &Path, output_dir: Option<PathBuf>) -> Result<(), Failure> {
    // Everything that can be wrong with the file is reported before any output exists.
    let mut loaded = Scenario::load(path)?;
    if let Some(dir) = output_dir {
        loaded.scenario.output_dir = dir;
    }
    let s = &loaded.scenario;
    let out = RunDir::create(&s.output_dir, &loaded.hash)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", s.output_dir.display())))?;
    let manifest = Manifest {
        program: "kglab",
        version: env!("CARGO_PKG_VERSION"),
        kind: s.kind.name(),
        seed: s.seed,
        config_sha256: &loaded.hash,
        workers: rayon::current_num_threads(),
        scenario: s,
    };
    let result = out
        .json("manifest.json", &manifest)
        .and_then(|_| scenarios::run(s, &out));
    let checks = match result {
        Ok(c) => c,
        Err(e) => {
            out.mark_failed(&e.to_string());
            return Err(e.into());
        }
    };
    let passed = checks.passed();
    out.json(
        "summary.json",
        &json!({ "kind": s.kind.name(), "passed": passed, "checks": checks }),
    )?;
    for c in &checks.0 {
        let v = c.value.map(|v| format!(" {v:.4e}")).unwrap_or_default();
        eprintln!("{} {}{v}", if c.passed { "PASS" } else { "FAIL" }, c.name);
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn validate(criteria: Vec<u8>, seed: u64, path: Option<PathBuf>) -> Result<(), Failure> {
    let ids: Vec<u8> = if criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        criteria
    };
    if let Some(bad) = ids.iter().find(|i| !CRITERIA.iter().any(|c| c.0 == **i)) {
        return Err(Failure::Config(format!("unknown criterion {bad}")));
    }
    let report = validate_suite(&ids, seed);
    for o in &report.outcomes {
        eprintln!(
            "criterion {:>2} {:<34} {} ({:.1}s) {}",
            o.id,
            o.name,
            if o.passed { "PASS" } else { "FAIL" },
            o.seconds,
            o.summary
        );
    }
    print_json(&report);
    if let Some(p) = path {
        std::fs::write(&p, serde_json::to_string_pretty(&report).expect("report"))
            .map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
    }
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn params(beta: f64, mu1: f64, mu2: f64) -> Result<NonlinearityParams, Failure> {
    NonlinearityParams::new(beta, mu1, mu2).map_err(|e| Failure::Config(e.to_string()))
}

fn groundstate(
    p: NonlinearityParams,
    points: usize,
    half_length: f64,
    tol: f64,
    snapshot: Option<PathBuf>,
) -> Result<(), Failure> {
    let grid =
        SpectralGrid::radial(points, half_length).map_err(|e| Failure::Config(e.to_string()))?;
    let cands = candidate_levels(&p)?;
    let gs = solve_ground_state_with(&p, &grid, tol, &SolverOptions::default())?;
    print_json(&json!({
        "row": gs.table_row(),
        "converged": gs.converged,
        "iterations": gs.iterations,
        "k0_defect": constraint_defect(&gs.pair, &p),
        "candidates": cands,
        "h0": gs.level.min(cands.best()),
    }));
    if let Some(path) = snapshot {
        let ph = PhasePoint::at_rest(gs.pair.clone());
        let f = ph.fields();
        kglab::spectral::write_snapshot(&path, &[f[0], f[1], f[2], f[3]])?;
    }
    if gs.converged {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn classify_snapshot(path: &Path, p: NonlinearityParams, h0: Option<f64>) -> Result<(), Failure> {
    let snap =
        read_snapshot(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let phase = match snap.fields.as_slice() {
        [u1, v1, u2, v2] => PhasePoint::new(
            FieldPair::new(u1.clone(), u2.clone())?,
            v1.clone(),
            v2.clone(),
        )?,
        [u1, u2] => PhasePoint::at_rest(FieldPair::new(u1.clone(), u2.clone())?),
        f => {
            return Err(Failure::Config(format!(
                "{}: expected 2 or 4 fields, found {}",
                path.display(),
                f.len()
            )))
        }
    };
    let three_d = snap.grid.geometry() == Geometry::Radial || snap.grid.dim() == 3;
    let h0 = match h0 {
        Some(h) => h,
        None if three_d => threshold(&p)?.h0,
        None => {
            return Err(Failure::Config(
                "the threshold is defined for data on R^3; pass --h0 for other grids".into(),
            ))
        }
    };
    print_json(&json!({
        "verdict": classify(&phase, &p, h0),
        "h0": h0,
        "functionals": report(&phase, &p),
    }));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(c) = &cli.cache {
        output::load_cache(c);
    }
    let result = configure_workers().and_then(|_| match cli.command {
        Command::Run { config, output_dir } => run_scenario(&config, output_dir),
        Command::Validate {
            criteria,
            seed,
            report,
        } => validate(criteria, seed, report),
        Command::Groundstate {
            beta,
            mu1,
            mu2,
            points,
            half_length,
            tol,
            snapshot,
        } => {
            params(beta, mu1, mu2).and_then(|p| groundstate(p, points, half_length, tol, snapshot))
        }
        Command::Classify {
            snapshot,
            beta,
            mu1,
            mu2,
            h0,
        } => params(beta, mu1, mu2).and_then(|p| classify_snapshot(&snapshot, p, h0)),
    });
    if let Some(c) = &cli.cache {
        output::save_cache(c);
    }
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
    }
}
