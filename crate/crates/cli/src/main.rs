mod modes;
mod scenario;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use w1plus::Error;

use crate::modes::Check;

const EXIT_CHECK: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser)]
#[command(name = "w1plus", version, about = "Canonical W1,+ geodesics on finite graphs and entropy convexity reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario.
    Run {
        scenario: PathBuf,
        /// Slack on inequality checks (default 1e-8).
        #[arg(long)]
        tol: Option<f64>,
        /// Number of uniform time points (default: the scenario's grid, else 101).
        #[arg(long)]
        grid: Option<usize>,
        /// CSV output path (default: the scenario's `out`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the bundled invariant suites.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, tol, grid, out } => run(scenario, tol, grid, out),
        Command::Selftest { seed, inject_fault } => {
            let checks = selftest::run(seed, inject_fault);
            println!("{:<24} {:<6} detail", "suite", "status");
            for c in &checks {
                println!("{:<24} {:<6} {}", c.name, if c.passed { "ok" } else { "FAIL" }, c.detail);
            }
            exit_for(&checks)
        }
    }
}

fn exit_for(checks: &[Check]) -> ExitCode {
    if checks.iter().all(|c| c.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}

fn error_code(e: &Error) -> u8 {
    match e {
        Error::NotConverged { .. } | Error::DegenerateBoundary(_) | Error::Infeasible | Error::Unbounded => EXIT_SOLVER,
        Error::NotDominated | Error::InvalidTriple(_) | Error::NotCanonical(_) => EXIT_CHECK,
        _ => EXIT_PARSE,
    }
}

fn run(path: PathBuf, tol: Option<f64>, grid: Option<usize>, out: Option<PathBuf>) -> ExitCode {
    let loaded = match scenario::load(&path, grid) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_PARSE);
        }
    };
    let mut tolerances = loaded.scenario.tolerances;
    if let Some(t) = tol {
        tolerances.check = t;
    }
    let outcome = match modes::run(&loaded, &tolerances) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(error_code(&e));
        }
    };
    let out = out.or_else(|| {
        let base = path.parent().unwrap_or(std::path::Path::new("."));
        loaded.scenario.out.as_ref().map(|p| base.join(p))
    });
    let summary: Vec<String> = outcome
        .checks
        .iter()
        .map(|c| format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
        .collect();
    match &out {
        Some(p) => {
            if let Err(e) = fs::write(p, &outcome.csv) {
                eprintln!("error: writing {}: {e}", p.display());
                return ExitCode::from(EXIT_PARSE);
            }
            for line in &summary {
                println!("{line}");
            }
        }
        None => {
            print!("{}", outcome.csv);
            for line in &summary {
                eprintln!("{line}");
            }
        }
    }
    exit_for(&outcome.checks)
}
