use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use timelime::core::PlannerId;
use timelime::experiment::{missing_files, run_experiment, ExperimentError, Overrides};
use timelime::roster::ROSTER;
use timelime::validate_config;

#[derive(Parser)]
#[command(name = "timelime", version, about = "Precedence-filtered explanation plans and the K-test")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment and write reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Only run this project (repeatable).
        #[arg(long = "project")]
        projects: Vec<String>,
        /// Only run this planner: classical, time or random (repeatable).
        #[arg(long = "planner")]
        planners: Vec<PlannerId>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the resolved configuration and any missing data files.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the eight public projects and their releases.
    Roster,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, projects, planners, seed, out } => {
            let mut cfg = match validate_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            if let Err(e) = cfg.apply(&Overrides { projects, planners, seed, out }) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            let started = std::time::Instant::now();
            match run_experiment(&cfg) {
                Err(e @ ExperimentError::MissingData(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
                Ok(outcome) => {
                    for (project, error) in outcome.failed() {
                        eprintln!("project {project} failed: {error}");
                    }
                    eprintln!(
                        "{} summary rows written to {} in {:.1}s",
                        outcome.summary.len(),
                        cfg.out.display(),
                        started.elapsed().as_secs_f64()
                    );
                    if outcome.success() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::FAILURE
                    }
                }
            }
        }
        Command::Check { config } => match validate_config(&config) {
            Ok(cfg) => {
                print!("{}", cfg.describe());
                let missing = missing_files(&cfg);
                for m in &missing {
                    println!("missing {}", m.display());
                }
                if missing.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Roster => {
            println!("project,x,y,z,files,buggy");
            for e in ROSTER {
                println!("{},{},{},{},{},{}", e.project, e.versions[0], e.versions[1], e.versions[2], e.files, e.buggy);
            }
            ExitCode::SUCCESS
        }
    }
}
