mod commands;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::CliError;

/// Specular derivatives, tangent geometry and wave solvers for
/// piecewise-smooth data.
#[derive(Parser)]
#[command(name = "speculus", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Semi-derivatives, specular derivative and tangent data at a point.
    Deriv {
        file: PathBuf,
        /// Coordinates, comma-separated.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Variable to differentiate along.
        #[arg(long)]
        axis: String,
    },
    /// Solve the problem and export sampled values as CSV.
    Solve {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the checks listed in the problem file.
    Check { file: PathBuf },
}

fn load(path: &PathBuf) -> Result<problem::Problem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(problem::parse_problem(&text)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Deriv { file, point, axis } => {
            print!("{}", commands::cmd_deriv(&load(&file)?, &point, &axis)?);
        }
        Cmd::Solve { file, out } => {
            let (summary, warnings) = commands::cmd_solve(&load(&file)?, &out.display().to_string())?;
            print!("{summary}");
            for w in warnings {
                eprintln!("warning: {w}");
            }
        }
        Cmd::Check { file } => {
            let (report, failed) = commands::cmd_check(&load(&file)?)?;
            print!("{report}");
            if failed > 0 {
                return Err(CliError::ChecksFailed(failed));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
