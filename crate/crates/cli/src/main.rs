use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mttdl_cli::{load_config, run, Command};

#[derive(Parser)]
#[command(name = "mttdl", version, about = "Mean time to data loss of erasure-coded disk groups")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// MTTDL of one group by every applicable method (JSON)
    Analyze(Common),
    /// MTTDL over a swept parameter and parity counts (CSV)
    Sweep(Common),
    /// Average degraded read overhead table (CSV)
    Overhead(Common),
    /// MTTDL of the code profiles across failure rates (CSV)
    Pyramid(Common),
    /// System MTTDL under horizontal and vertical placement (CSV)
    Allocate(Common),
    /// Monte Carlo estimate against the exact solve (JSON)
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the Monte Carlo seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Overhead(a) => (Command::Overhead, a),
        Cmd::Pyramid(a) => (Command::Pyramid, a),
        Cmd::Allocate(a) => (Command::Allocate, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
    };
    let result = load_config(&args.config).and_then(|cfg| run(command, &cfg, args.seed));
    let bytes = match result {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &args.out {
        Some(path) => std::fs::write(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
