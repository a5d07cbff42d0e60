//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use primelab::additive::AdditiveFunctionSpec;
use primelab::clt::Normalization;
use primelab::lln;
use primelab::models::{self, TwoPointModel};

use crate::experiment::{ExecOptions, Experiment};
use crate::render::Format;

#[derive(Debug, Parser)]
#[command(
    name = "primelab",
    version,
    about = "Probabilistic number theory experiments on [1, n]"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Integers per sieve block.
    #[arg(long, value_parser = parse_count_usize, global = true)]
    pub block_size: Option<usize>,

    /// Worker threads (defaults to all cores).
    #[arg(long, env = "PRIMELAB_THREADS", global = true)]
    pub threads: Option<usize>,
}

impl OutputArgs {
    pub fn exec_options(&self) -> ExecOptions {
        ExecOptions {
            threads: self.threads,
            block_size: self.block_size,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Prime density against 1/ln n and the Mertens product.
    Density {
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e2,1e4,1e6")]
        grid: Vec<u64>,
    },
    /// Chebyshev checks with b(n) = (ln ln n)^epsilon.
    Lln {
        #[arg(long, default_value = "omega")]
        spec: AdditiveFunctionSpec,
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6,1e7")]
        grid: Vec<u64>,
        #[arg(long, default_value_t = lln::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Hardy–Ramanujan exceedances of omega around ln ln n.
    Hr {
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6,1e7")]
        grid: Vec<u64>,
        #[arg(long, default_value_t = lln::DEFAULT_EPSILON)]
        epsilon: f64,
    },
    /// Kolmogorov–Smirnov distance of the normalized law to Phi.
    Ek {
        #[arg(long, default_value = "omega")]
        spec: AdditiveFunctionSpec,
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e4,1e5,1e6,1e7")]
        grid: Vec<u64>,
        #[arg(long, default_value = "empirical")]
        norm: Normalization,
    },
    /// Empirical central moments on [1, n].
    Moments {
        #[arg(long, default_value = "omega")]
        spec: AdditiveFunctionSpec,
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6")]
        grid: Vec<u64>,
        #[arg(long = "K", visible_alias = "max-order", default_value_t = models::DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// Exact and Monte Carlo moments of a two-point model.
    Model {
        #[arg(long, default_value = "inv_p")]
        model: TwoPointModel,
        #[arg(long, value_parser = parse_count, default_value = "1e4")]
        n: u64,
        #[arg(long = "K", visible_alias = "max-order", default_value_t = models::DEFAULT_MAX_ORDER)]
        max_order: usize,
        #[arg(long, value_parser = parse_count_usize, default_value = "1e5")]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Moments of an additive function next to its two-point model.
    Match {
        #[arg(long, default_value = "omega")]
        spec: AdditiveFunctionSpec,
        /// Defaults to the model paired with the spec.
        #[arg(long)]
        model: Option<TwoPointModel>,
        #[arg(long, value_parser = parse_count, default_value = "1e6")]
        n: u64,
        #[arg(long = "K", visible_alias = "max-order", default_value_t = models::DEFAULT_MAX_ORDER)]
        max_order: usize,
    },
    /// sigma_n^2 / A_n along a grid.
    Turan {
        #[arg(long, default_value = "omega")]
        spec: AdditiveFunctionSpec,
        #[arg(long, value_delimiter = ',', value_parser = parse_count, default_value = "1e3,1e4,1e5,1e6,1e7")]
        grid: Vec<u64>,
    },
    /// Recompute the golden reference file (sieves up to 1e8).
    RegenGolden,
}

impl Command {
    /// The experiment to run, or `None` for maintenance commands.
    pub fn experiment(&self) -> anyhow::Result<Option<Experiment>> {
        let e = match self {
            Command::Density { grid } => Experiment::Density { grid: grid.clone() },
            Command::Lln {
                spec,
                grid,
                epsilon,
            } => Experiment::Lln {
                spec: spec.clone(),
                grid: grid.clone(),
                epsilon: *epsilon,
            },
            Command::Hr { grid, epsilon } => Experiment::Hr {
                grid: grid.clone(),
                epsilon: *epsilon,
            },
            Command::Ek { spec, grid, norm } => Experiment::Ek {
                spec: spec.clone(),
                grid: grid.clone(),
                normalization: *norm,
            },
            Command::Moments {
                spec,
                grid,
                max_order,
            } => Experiment::Moments {
                spec: spec.clone(),
                grid: grid.clone(),
                max_order: *max_order,
            },
            Command::Model {
                model,
                n,
                max_order,
                samples,
                seed,
            } => Experiment::Model {
                model: *model,
                n: *n,
                max_order: *max_order,
                samples: *samples,
                seed: *seed,
            },
            Command::Match {
                spec,
                model,
                n,
                max_order,
            } => {
                let model = match model.or_else(|| models::sanctioned_model(spec)) {
                    Some(m) => m,
                    None => {
                        return Err(primelab::Error::Hypothesis(format!(
                            "no two-point model is paired with {}",
                            spec.label()
                        ))
                        .into())
                    }
                };
                Experiment::Match {
                    spec: spec.clone(),
                    model,
                    n: *n,
                    max_order: *max_order,
                }
            }
            Command::Turan { spec, grid } => Experiment::Turan {
                spec: spec.clone(),
                grid: grid.clone(),
            },
            Command::RegenGolden => return Ok(None),
        };
        Ok(Some(e))
    }
}

/// A nonnegative integer, also written in scientific notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.replace('_', "").parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a count"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= 2f64.powi(53)) {
        return Err(format!("{s:?} is not a nonnegative integer below 2^53"));
    }
    Ok(v as u64)
}

fn parse_count_usize(s: &str) -> Result<usize, String> {
    parse_count(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}
