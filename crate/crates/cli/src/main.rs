mod bench;
mod integrate;
mod output;
mod train;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qnet", version, about = "Train sigmoidal proxies and integrate them in closed form")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a proxy network to samples and write its weight file.
    Train(train::TrainArgs),
    /// Integrate a trained proxy over its domain, a box, a segment, or marginalize it.
    Integrate(integrate::IntegrateArgs),
    /// Run an estimator study and write a results CSV.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Integrate(a) => integrate::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
