use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ehf::{acceptance, io};

#[derive(Parser)]
#[command(
    name = "ehf",
    version,
    about = "Entanglement contours and hyperfine fields of free fermions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a TOML run config and write CSV fields and summary.json.
    Run { config: PathBuf },
    /// Convert field CSVs into whitespace tables for gnuplot.
    Plotdata {
        #[arg(required = true)]
        csv: Vec<PathBuf>,
        /// Emit the row `y = ROW` as a decay profile instead of the full map.
        #[arg(long, value_name = "ROW")]
        cross_section: Option<usize>,
    },
    /// Run the acceptance suite.
    Selftest,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => {
            let outcome = io::run(&config);
            if outcome.code == 0 {
                println!("{}", outcome.message);
            } else {
                eprintln!("{}", outcome.message);
            }
            ExitCode::from(outcome.code as u8)
        }
        Command::Plotdata { csv, cross_section } => {
            let mut inputs = Vec::new();
            for path in csv {
                let parsed = std::fs::read_to_string(&path)
                    .map_err(|e| e.to_string())
                    .and_then(|t| io::parse_field_csv(&t).map_err(|e| e.to_string()));
                match parsed {
                    Ok(rows) => inputs.push((path.display().to_string(), rows)),
                    Err(e) => {
                        eprintln!("{}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
            }
            print!("{}", io::plotdata(&inputs, cross_section));
            ExitCode::SUCCESS
        }
        Command::Selftest => {
            let results = acceptance::run_all();
            for r in &results {
                println!("{}", r.line());
            }
            // The self-test reports honestly: any failure, known or not, is nonzero.
            if results.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
