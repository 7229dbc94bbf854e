//! Command-line front end: synthesize certified quotient approximants from
//! problem files, verify recorded artifacts, and export plot data.

use clap::{Parser, Subcommand};
use innerquot::cli;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "innerquot",
    about = "Certified approximation of unimodular step functions by quotients of inner functions"
)]
struct Cli {
    /// Escalate certificate warnings (less than 10% budget headroom) to failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run synthesis for a problem file and write artifacts to a directory.
    Synthesize {
        problem: PathBuf,
        /// Output directory for approximant.json and certificate.json.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Independently recheck a recorded approximant against its problem.
    Verify {
        approximant: PathBuf,
        problem: PathBuf,
    },
    /// Emit CSV plot data for an approximant on a uniform grid.
    #[command(name = "plot-data")]
    PlotData {
        approximant: PathBuf,
        problem: PathBuf,
        /// Number of grid points.
        #[arg(short = 'n', long, default_value_t = 1024)]
        grid: usize,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let result = match &args.command {
        Command::Synthesize { problem, output } => {
            cli::run_synthesize(problem, output, args.strict)
        }
        Command::Verify {
            approximant,
            problem,
        } => cli::run_verify(approximant, problem),
        Command::PlotData {
            approximant,
            problem,
            grid,
        } => cli::run_plotdata(approximant, problem, *grid),
    };
    match result {
        Ok(output) => {
            print!("{output}");
            if !output.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            // budget/certification failures carry the FAIL summary; keep it on
            // stdout where the summary line belongs, diagnostics on stderr
            if e.exit_code() == 3 {
                println!("{e}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
