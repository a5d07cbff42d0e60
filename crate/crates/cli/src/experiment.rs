//! Experiment configurations and their execution.
//!
//! An [`Experiment`] holds everything that determines a report's numbers and
//! is echoed verbatim in JSON output. Execution knobs that cannot change the
//! numbers (threads, block size, output path) live in [`ExecOptions`].

use primelab::additive::{self, AdditiveFunctionSpec};
use primelab::clt::{self, ErdosKacRun, Normalization};
use primelab::density::{self, DensityReport};
use primelab::lln::{self, BoundCheck, HardyRamanujanCheck, TuranReport};
use primelab::models::{self, MatchReport, MonteCarloReport, TwoPointModel};
use primelab::sieve::SieveConfig;
use primelab::space::{self, EmpiricalStats};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Experiment {
    Density {
        grid: Vec<u64>,
    },
    Lln {
        spec: AdditiveFunctionSpec,
        grid: Vec<u64>,
        epsilon: f64,
    },
    Hr {
        grid: Vec<u64>,
        epsilon: f64,
    },
    Ek {
        spec: AdditiveFunctionSpec,
        grid: Vec<u64>,
        normalization: Normalization,
    },
    Moments {
        spec: AdditiveFunctionSpec,
        grid: Vec<u64>,
        max_order: usize,
    },
    Model {
        model: TwoPointModel,
        n: u64,
        max_order: usize,
        samples: usize,
        seed: u64,
    },
    Match {
        spec: AdditiveFunctionSpec,
        model: TwoPointModel,
        n: u64,
        max_order: usize,
    },
    Turan {
        spec: AdditiveFunctionSpec,
        grid: Vec<u64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExecOptions {
    pub threads: Option<usize>,
    pub block_size: Option<usize>,
}

impl ExecOptions {
    pub fn sieve_config(&self) -> SieveConfig {
        let mut config = SieveConfig::default();
        if let Some(b) = self.block_size {
            config.block_size = b;
        }
        config
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub n: u64,
    pub stats: EmpiricalStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Results {
    Density(Vec<DensityReport>),
    Bounds(Vec<BoundCheck>),
    HardyRamanujan(Vec<HardyRamanujanCheck>),
    ErdosKac(ErdosKacRun),
    Moments(Vec<MomentRow>),
    Model(MonteCarloReport),
    Match(MatchReport),
    Turan(TuranReport),
}

/// A finished run: the configuration and what it produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: Experiment,
    pub results: Results,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Density { .. } => "density",
            Experiment::Lln { .. } => "lln",
            Experiment::Hr { .. } => "hr",
            Experiment::Ek { .. } => "ek",
            Experiment::Moments { .. } => "moments",
            Experiment::Model { .. } => "model",
            Experiment::Match { .. } => "match",
            Experiment::Turan { .. } => "turan",
        }
    }

    /// Rejects configurations that cannot run, before any sieving.
    pub fn validate(&self) -> primelab::Result<()> {
        use primelab::Error::InvalidArgument;
        let grid = match self {
            Experiment::Density { grid }
            | Experiment::Lln { grid, .. }
            | Experiment::Hr { grid, .. }
            | Experiment::Ek { grid, .. }
            | Experiment::Moments { grid, .. }
            | Experiment::Turan { grid, .. } => Some(grid),
            _ => None,
        };
        if let Some(grid) = grid {
            if grid.is_empty() {
                return Err(InvalidArgument("--grid needs at least one value".into()));
            }
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(InvalidArgument(format!(
                    "--grid must be strictly increasing, got {grid:?}"
                )));
            }
        }
        match self {
            Experiment::Moments { max_order, .. }
            | Experiment::Model { max_order, .. }
            | Experiment::Match { max_order, .. }
                if *max_order < 2 =>
            {
                Err(InvalidArgument(format!(
                    "--K must be at least 2, got {max_order}"
                )))
            }
            Experiment::Model { samples, .. } if *samples < models::MIN_SAMPLES => {
                Err(InvalidArgument(format!(
                    "--samples must be at least {}, got {samples}",
                    models::MIN_SAMPLES
                )))
            }
            _ => Ok(()),
        }
    }

    pub fn run(&self, options: &ExecOptions) -> primelab::Result<Report> {
        self.validate()?;
        let config = options.sieve_config();
        let results = match self {
            Experiment::Density { grid } => Results::Density(density::density_scan(grid)?),
            Experiment::Lln {
                spec,
                grid,
                epsilon,
            } => Results::Bounds(lln::lln_scan_with(spec, grid, *epsilon, &config)?),
            Experiment::Hr { grid, epsilon } => {
                let omega = AdditiveFunctionSpec::omega();
                let hists = additive::histograms(&omega, grid, omega.default_binning(), &config)?;
                Results::HardyRamanujan(
                    hists
                        .iter()
                        .map(|h| lln::hardy_ramanujan_from_histogram(h, *epsilon))
                        .collect::<primelab::Result<_>>()?,
                )
            }
            Experiment::Ek {
                spec,
                grid,
                normalization,
            } => Results::ErdosKac(clt::erdos_kac_experiment_with(
                spec,
                grid,
                *normalization,
                &config,
            )?),
            Experiment::Moments {
                spec,
                grid,
                max_order,
            } => {
                let hists = additive::histograms(spec, grid, spec.default_binning(), &config)?;
                Results::Moments(
                    grid.iter()
                        .zip(&hists)
                        .map(|(&n, h)| {
                            Ok(MomentRow {
                                n,
                                stats: space::moments_from_histogram(h, *max_order)?,
                            })
                        })
                        .collect::<primelab::Result<_>>()?,
                )
            }
            Experiment::Model {
                model,
                n,
                max_order,
                samples,
                seed,
            } => Results::Model(models::monte_carlo(
                *model, *n, *max_order, *samples, *seed,
            )?),
            Experiment::Match {
                spec,
                model,
                n,
                max_order,
            } => Results::Match(models::match_report(spec, *model, *n, *max_order)?),
            Experiment::Turan { spec, grid } => {
                Results::Turan(lln::turan_check_with(spec, grid, &config)?)
            }
        };
        Ok(Report {
            config: self.clone(),
            results,
        })
    }
}
