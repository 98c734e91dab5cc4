use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gpcol::cli::{self, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "gpcol", version, about = "Gaussian-process collocation solver for linear BVPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write mean, std and 95% band on a regular grid.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Grid nodes per axis.
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the normalized likelihood over a lengthscale grid.
    Likelihood {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        ell_min: f64,
        #[arg(long)]
        ell_max: f64,
        #[arg(long)]
        steps: usize,
        /// Space the grid linearly instead of logarithmically.
        #[arg(long)]
        linear: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Error against the reference solution for several interior counts.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        ni: Vec<usize>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in case configs as JSON files.
    ExportCases {
        #[arg(long, default_value = "configs")]
        dir: PathBuf,
    },
}

fn run(command: Command) -> gpcol::Result<()> {
    match command {
        Command::Solve { config, grid, out } => {
            let report = cli::cmd_solve(&config, grid, &out)?;
            eprintln!(
                "wrote {} grid points to {} (ell = {}, jitter = {:e})",
                report.grid_points,
                out.display(),
                report.lengthscale,
                report.jitter_used
            );
        }
        Command::Likelihood {
            config,
            ell_min,
            ell_max,
            steps,
            linear,
            out,
        } => {
            let grid = cli::likelihood_grid(ell_min, ell_max, steps, linear)?;
            cli::cmd_likelihood(&config, grid, &out)?;
        }
        Command::Convergence { config, ni, grid, out } => {
            cli::cmd_convergence(&config, &ni, grid, &out)?;
        }
        Command::ExportCases { dir } => {
            for p in cli::export_cases(&dir)? {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK } as u8);
        }
    };
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
