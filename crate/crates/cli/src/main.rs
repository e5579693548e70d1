//! `zerofree`: compute, sweep, verify, bound and audit the extremal constants Vₙ.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "zerofree", version, about = "Extremal constants of nonnegative cosine polynomials")]
struct Cli {
    /// Settings file of `key = value` lines; defaults to $ZEROFREE_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct SolveFlags {
    /// Degree, 2 to 8.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=8))]
    pub n: u8,
    /// Grid points in the sweep.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random starts per grid point.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Worker threads; more than one disables warm starts.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Restrict the interval with the published V_{n-1} instead of the computed one.
    #[arg(long)]
    pub strict_paper_bounds: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute Vₙ and print the result as JSON.
    Compute {
        #[command(flatten)]
        solve: SolveFlags,
        /// Write the JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate the ratio over the restricted interval as CSV.
    Sweep {
        #[command(flatten)]
        solve: SolveFlags,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also write one CSV per active-set subproblem next to the main table.
        #[arg(long)]
        subproblems: bool,
    },
    /// Check a polynomial file (`{"coeffs": [...]}` or a bare array) for class membership.
    Verify { file: PathBuf },
    /// Interval of `a` left by the bound lines below an upper bound.
    Bounds {
        #[arg(long, value_parser = clap::value_parser!(u8).range(4..=8))]
        n: u8,
        #[arg(long)]
        upper: f64,
    },
    /// Cross-check the optimum and sampled sweep points against the oracles.
    Audit {
        #[command(flatten)]
        solve: SolveFlags,
        /// Random samples for the brute-force oracle.
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let settings = match config::load(cli.config.as_deref()) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Compute { solve, out } => commands::compute(&solve, &settings, out.as_deref()),
        Command::Sweep { solve, csv, subproblems } => commands::sweep(&solve, &settings, csv.as_deref(), subproblems),
        Command::Verify { file } => commands::verify(&file),
        Command::Bounds { n, upper } => commands::bounds(n.into(), upper),
        Command::Audit { solve, samples } => commands::audit(&solve, &settings, samples),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
