use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use supermaze::scenario::{execute, load_scenario_with, RunError, RunOptions};
use supermaze::Tolerances;

const EXIT_INVALID: u8 = 2;
const EXIT_MODEL: u8 = 3;
const EXIT_QSL: u8 = 4;

/// Run a supermaze scenario and write its reports.
#[derive(Debug, Parser)]
#[command(name = "supermaze", version)]
struct Args {
    /// Scenario file (JSON, schema version "1").
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,

    /// Output directory.
    #[arg(long, value_name = "DIR", env = "SUPERMAZE_OUT", default_value = "out")]
    out: PathBuf,

    /// Override the scenario's hbar.
    #[arg(long, value_name = "X")]
    hbar: Option<f64>,

    /// Override every numeric validation tolerance.
    #[arg(long, value_name = "X")]
    tolerance: Option<f64>,

    /// Exit with status 4 when any shortcut undercuts the speed limit.
    #[arg(long)]
    strict_qsl: bool,

    /// Override the scenario's seed.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();

    let tolerances = match args.tolerance {
        Some(t) if t > 0.0 && t.is_finite() => Tolerances::uniform(t),
        Some(t) => {
            eprintln!("error: --tolerance must be finite and > 0, got {t}");
            return ExitCode::from(EXIT_INVALID);
        }
        None => Tolerances::default(),
    };

    let mut scenario = match load_scenario_with(&args.scenario, &tolerances) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Some(hbar) = args.hbar {
        scenario.hbar = hbar;
    }
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }

    let outputs = match execute(&scenario, &RunOptions { tolerances }) {
        Ok(o) => o,
        Err(RunError::Scenario(e)) => {
            eprintln!("error: {}: {e}", args.scenario.display());
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e @ RunError::Model { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_MODEL);
        }
    };

    if let Err(e) = outputs.write_to(&args.out) {
        eprintln!("error: writing to {}: {e}", args.out.display());
        return ExitCode::FAILURE;
    }
    for name in outputs.files.keys() {
        println!("{}", args.out.join(name).display());
    }

    let violations = outputs.qsl_violation_count();
    if violations > 0 {
        eprintln!("warning: {violations} speed-limit violation(s)");
        if args.strict_qsl {
            return ExitCode::from(EXIT_QSL);
        }
    }
    ExitCode::SUCCESS
}
