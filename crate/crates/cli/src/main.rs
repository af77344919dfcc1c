use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use corrdeco_cli::{diagnostics, output_dir, parse_config, run_path, RunError, EXIT_ERROR, EXIT_OK, SCENARIOS};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "corrdeco", version, about = "Master equations for qubits in spatially correlated environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario configs. Artifacts go to $CORRDECO_OUTPUT_DIR (default: .).
    Run {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Worker threads when several configs are given.
        #[arg(short, long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
        jobs: u16,
    },
    /// Check a config and print the resolved settings and any warnings.
    Validate { path: PathBuf },
    /// Print the available scenarios and diagnostic codes.
    ListScenarios,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { paths, jobs } => run(&paths, jobs as usize),
        Command::Validate { path } => validate(&path),
        Command::ListScenarios => {
            for (name, about) in SCENARIOS {
                println!("{name:<18} {about}");
            }
            println!();
            for c in diagnostics::ALL_CODES {
                println!("{:<18} {}", c.as_str(), c.summary());
            }
            EXIT_OK
        }
    };
    ExitCode::from(code as u8)
}

fn run(paths: &[PathBuf], jobs: usize) -> i32 {
    let out = output_dir();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_ERROR;
        }
    };
    let results: Vec<Result<_, RunError>> = pool.install(|| paths.par_iter().map(|p| run_path(p, &out)).collect());
    let mut code = EXIT_OK;
    let mut failed = false;
    for (path, r) in paths.iter().zip(results) {
        match r {
            Ok(s) => {
                for w in &s.report.warnings {
                    eprintln!("{}: {w}", path.display());
                }
                println!("{} -> {} {}", path.display(), s.csv.display(), s.json.display());
                if s.report.exit_status != EXIT_OK {
                    println!("{}: non-completely-positive kernel found (exit 2)", path.display());
                }
                code = code.max(s.report.exit_status);
            }
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    if failed {
        EXIT_ERROR
    } else {
        code
    }
}

fn validate(path: &PathBuf) -> i32 {
    match parse_config(path) {
        Ok(cfg) => {
            for w in &cfg.warnings {
                eprintln!("{w}");
            }
            let resolved = serde_json::to_string_pretty(&cfg).expect("config serializes");
            println!("{resolved}");
            println!("config hash: {}", cfg.hash());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
