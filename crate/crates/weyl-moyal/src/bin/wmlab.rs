//! Command-line front end for the scenario runner.
//!
//! Exit codes: 0 all checks passed, 1 at least one check failed,
//! 2 configuration error, 3 runtime/resource error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use weyl_moyal::scenario::{run_scenario, ScenarioConfig, SuiteName, CONFIG_SCHEMA};
use weyl_moyal::Error;

#[derive(Parser)]
#[command(name = "wmlab", about = "Run deterministic verification suites for the Weyl-Moyal toolkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the suite described by a TOML scenario config
    Run {
        /// Path to the scenario config file
        config: PathBuf,
    },
    /// List the available suites with one-line descriptions
    ListSuites,
    /// Print the scenario config schema
    PrintSchema,
}

fn main() -> ExitCode {
    // WMLAB_WORKERS caps the worker-thread count for the whole process
    if let Ok(value) = std::env::var("WMLAB_WORKERS") {
        match value.parse::<usize>() {
            Ok(workers) if workers >= 1 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global()
                {
                    eprintln!("wmlab: cannot configure {workers} workers: {e}");
                    return ExitCode::from(3);
                }
            }
            _ => {
                eprintln!("wmlab: WMLAB_WORKERS must be a positive integer, got {value:?}");
                return ExitCode::from(2);
            }
        }
    }

    match Cli::parse().command {
        Command::Run { config } => run(&config),
        Command::ListSuites => {
            for suite in SuiteName::all() {
                println!("{suite:<16} {}", suite.description());
            }
            ExitCode::SUCCESS
        }
        Command::PrintSchema => {
            print!("{CONFIG_SCHEMA}");
            ExitCode::SUCCESS
        }
    }
}

fn run(path: &std::path::Path) -> ExitCode {
    let config = match ScenarioConfig::load(path) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("wmlab: {e}");
            return ExitCode::from(2);
        }
    };
    match run_scenario(&config) {
        Ok(report) => {
            for check in &report.checks {
                let status = if check.passed { "pass" } else { "FAIL" };
                println!("{status}  {:<36} measured {:.6e}", check.name, check.measured);
            }
            let summary = config.output_dir.join("summary.json");
            if report.all_passed {
                println!("{}: all {} checks passed ({})", report.suite, report.checks.len(), summary.display());
                ExitCode::SUCCESS
            } else {
                let failed = report.checks.iter().filter(|c| !c.passed).count();
                println!("{}: {failed} of {} checks failed ({})", report.suite, report.checks.len(), summary.display());
                ExitCode::from(1)
            }
        }
        Err(e @ Error::Config(_)) => {
            eprintln!("wmlab: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("wmlab: runtime error: {e}");
            ExitCode::from(3)
        }
    }
}
