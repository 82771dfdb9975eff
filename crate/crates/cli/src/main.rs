mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliOverrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "fracsolve",
    about = "Implicit difference scheme for the 1D time-space fractional convection-diffusion equation with fast Toeplitz solvers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Flat key=value configuration file; flags override file values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Problem name: example1, example2, or custom-constant
    #[arg(long)]
    problem: Option<String>,
    /// Time-fractional order in (0, 1]
    #[arg(long)]
    alpha: Option<f64>,
    /// Space-fractional order in (1, 2]
    #[arg(long)]
    beta: Option<f64>,
    /// Space subinterval count (at least 5)
    #[arg(long = "N")]
    n: Option<usize>,
    /// Time step count
    #[arg(long = "M")]
    m: Option<usize>,
    /// Final time
    #[arg(long = "T")]
    t_final: Option<f64>,
    /// Relative residual tolerance of the iterative solver
    #[arg(long)]
    tol: Option<f64>,
    /// Iteration cap of the iterative solver
    #[arg(long)]
    maxit: Option<usize>,
    /// Solver path: pcgs, dense, or auto
    #[arg(long)]
    solver: Option<String>,
    /// Output file or directory
    #[arg(long)]
    output: Option<PathBuf>,
}

impl CommonArgs {
    fn overrides(&self) -> CliOverrides {
        CliOverrides {
            problem: self.problem.clone(),
            alpha: self.alpha,
            beta: self.beta,
            n: self.n,
            m: self.m,
            t_final: self.t_final,
            tol: self.tol,
            maxit: self.maxit,
            solver: self.solver.clone(),
            output: self.output.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the scheme once and write the solution as CSV
    Solve {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run a refinement ladder and emit a convergence table
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        /// Ascending ladder of N (space-time mode) or M (time-only mode)
        #[arg(long, value_delimiter = ',', required = true)]
        ladder: Vec<usize>,
        /// space-time (tau = h) or time-only (fixed h, varying tau)
        #[arg(long, default_value = "space-time")]
        mode: String,
    },
    /// Time the dense and fast paths over a ladder of N = M sizes
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        ladder: Vec<usize>,
    },
    /// Dump the coefficient sequences g, omega, a, b as CSV
    Weights {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Highest index to emit
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Export the dense system matrix and its preconditioned product
    Export {
        #[command(flatten)]
        common: CommonArgs,
        /// Time level to export
        #[arg(long, default_value_t = 0)]
        level: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<(), Box<dyn std::error::Error>> {
        match cli.command {
            Command::Solve { common } => {
                let cfg = RunConfig::load(common.config.as_deref(), &common.overrides())?;
                output::cmd_solve(&cfg)
            }
            Command::Convergence {
                common,
                ladder,
                mode,
            } => {
                let cfg = RunConfig::load(common.config.as_deref(), &common.overrides())?;
                output::cmd_convergence(&cfg, &ladder, &mode)
            }
            Command::Bench { common, ladder } => {
                let cfg = RunConfig::load(common.config.as_deref(), &common.overrides())?;
                output::cmd_bench(&cfg, &ladder)
            }
            Command::Weights {
                alpha,
                beta,
                k,
                output,
            } => output::cmd_weights(alpha, beta, k, output.as_deref()),
            Command::Export { common, level } => {
                let cfg = RunConfig::load(common.config.as_deref(), &common.overrides())?;
                output::cmd_export(&cfg, level)
            }
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
