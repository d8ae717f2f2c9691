use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use gradmix_cli::commands;

/// Multi-objective gradient-combination benchmark runner.
#[derive(Parser)]
#[command(name = "gradmix", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one training run from a JSON config.
    Run {
        /// Path to the run configuration.
        config: PathBuf,
    },
    /// Run all five combinators on the built-in 2D benchmark and export
    /// trajectories, an overlay SVG, and the convergence step counts.
    ReproduceFig3 {
        /// Output directory.
        #[arg(long, default_value = "fig3-out")]
        out: PathBuf,
        /// Step budget per combinator.
        #[arg(long, default_value_t = 5000)]
        max_steps: usize,
    },
    /// Solve the min-norm problem for a list of vectors and print the
    /// weights, point, and optimality residual as JSON.
    Solve {
        /// JSON file holding an array of equal-length vectors.
        #[arg(long, conflicts_with = "vec")]
        file: Option<PathBuf>,
        /// Inline JSON array of vectors, e.g. "[[1,0],[-1,0]]".
        #[arg(long)]
        vec: Option<String>,
    },
    /// Train the tabular preference simulator and export the trajectory,
    /// final per-objective losses, and the datasets used.
    DpoSim {
        /// Path to the run configuration (problem kind must be dpo-sim).
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { config } => commands::cmd_run(config),
        Command::ReproduceFig3 { out, max_steps } => commands::cmd_reproduce_fig3(out, *max_steps),
        Command::Solve { file, vec } => commands::cmd_solve(file.as_deref(), vec.as_deref()),
        Command::DpoSim { config } => commands::cmd_dpo_sim(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
