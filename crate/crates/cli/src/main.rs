use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use apost_cli::{EstimatorTag, MeshArg, MethodArg, ProblemArg, RunConfig};
use apost_core::{FhatVariant, QuadRule};

/// Maximum-norm a posteriori error bounds for time discretisations of a 1-D
/// parabolic test problem; all output is CSV.
#[derive(Parser)]
#[command(name = "apost", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One row per M: error, bounds and efficiencies.
    Table(Common),
    /// Unweighted backward Euler components per step (single M, uniform mesh by default).
    Components {
        #[command(flatten)]
        common: Common,
        /// Also emit eta_f_hat.
        #[arg(long)]
        with_fhat: bool,
    },
    /// Observed orders of the error and of the bounds over doubling M.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value = "euler")]
    method: MethodArg,
    /// Bound to evaluate; repeatable. Defaults depend on the method.
    #[arg(long = "estimator")]
    estimators: Vec<EstimatorTag>,
    /// Defaults to pairdouble, or uniform for `components`.
    #[arg(long, value_enum)]
    mesh: Option<MeshArg>,
    /// Number of time steps; repeatable.
    #[arg(long = "M")]
    steps: Vec<usize>,
    #[arg(long, default_value_t = 31)]
    degree: usize,
    #[arg(long, default_value_t = 1001)]
    sampling: usize,
    #[arg(long, default_value = "simpson")]
    quad: QuadRule,
    #[arg(long, default_value = "paper")]
    fhat_variant: FhatVariant,
    /// J of the KL2 and CNKL2 bounds.
    #[arg(long = "J", default_value_t = 1)]
    j: usize,
    #[arg(long, value_enum, default_value = "tabulated")]
    problem: ProblemArg,
    /// Run the reference on a mesh refined by this factor.
    #[arg(long, default_value_t = 1)]
    reference_refinement: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, default_mesh: MeshArg) -> RunConfig {
        RunConfig {
            estimators: self.estimators.clone(),
            degree: self.degree,
            sampling: self.sampling,
            quad: self.quad,
            fhat_variant: self.fhat_variant,
            j: self.j,
            problem: self.problem,
            reference_refinement: self.reference_refinement,
            ..RunConfig::new(self.method, self.mesh.unwrap_or(default_mesh), self.steps.clone())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (csv, out) = match cli.command {
        Command::Table(c) => (apost_cli::table(&c.config(MeshArg::Pairdouble))?, c.out),
        Command::Components { common, with_fhat } => {
            let config = RunConfig {
                with_fhat,
                ..common.config(MeshArg::Uniform)
            };
            (apost_cli::components(&config)?, common.out)
        }
        Command::Convergence(c) => (apost_cli::convergence(&c.config(MeshArg::Pairdouble))?, c.out),
    };
    match out {
        Some(path) => fs::write(&path, csv).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(csv.as_bytes())?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
