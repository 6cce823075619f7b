use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "qms",
    version,
    about = "Transport geometry and functional inequalities for quantum Markov semigroups"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the structural invariants of a generator.
    Validate(Common),
    /// Estimate the functional-inequality constants and write the report.
    Constants(Common),
    /// Transport distance between two states.
    W2 {
        #[command(flatten)]
        common: Common,
        /// Start state: `pure:k`, `maxmix`, `sigma`, a JSON matrix or a path to one.
        #[arg(long)]
        from: String,
        /// End state, same forms as `--from`.
        #[arg(long)]
        to: String,
    },
    /// Run every implication check and write the report.
    Suite(Common),
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Builtin name (`depolarizing(d)`, `dephasing(d)`, `thermal_qubit(beta)`) or generator JSON path.
    #[arg(long = "gen", value_name = "PATH|BUILTIN")]
    pub generator: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Number of random states in the sample battery.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub samples: Option<u64>,
    /// Target relative suboptimality of transport distances.
    #[arg(long, value_parser = positive)]
    pub tol: Option<f64>,
    /// Number of points on discrete transport paths, endpoints included.
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub path_points: Option<u64>,
    #[arg(long)]
    pub json_out: Option<PathBuf>,
    #[arg(long)]
    pub csv_out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Use this curvature bound instead of estimating it.
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}
