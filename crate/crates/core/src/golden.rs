//! Reference values from full-size runs, kept under `data/golden/` so slow
//! sieves need not be repeated to check for regressions.

use serde::{Deserialize, Serialize};

use crate::additive::{self, AdditiveFunctionSpec};
use crate::clt::ks_from_histogram;
use crate::density::density_report;
use crate::error::Result;
use crate::lln::{chebyshev_check, hardy_ramanujan_from_histogram, turan_ratio_from_histogram};
use crate::ln_ln;
use crate::sieve::SieveConfig;
use crate::space::moments_from_histogram;

pub const GOLDEN_VERSION: u32 = 1;

/// Relative path of the current golden file from the workspace root.
pub const GOLDEN_PATH: &str = "data/golden/v1.json";

pub const DENSITY_N: u64 = 100_000_000;
pub const OMEGA_GRID: [u64; 5] = [1_000, 10_000, 100_000, 1_000_000, 10_000_000];
pub const EPSILON: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaPoint {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    pub turan_ratio: f64,
    /// Chebyshev exceedance with `b = (ln ln n)^EPSILON`, empirical center.
    pub lln_exceedance: f64,
    /// Exceedance of `|omega - ln ln n| >= (ln ln n)^(1/2 + EPSILON)`.
    pub hardy_ramanujan_exceedance: f64,
    pub ks_empirical: f64,
    pub ks_theoretical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenData {
    pub version: u32,
    pub density_n: u64,
    pub pi: u64,
    /// `pi(n)/n * ln n`.
    pub pi_times_ln_n: f64,
    /// `prod_{p <= sqrt n} (1 - 1/p) * ln n`.
    pub mertens_times_ln_n: f64,
    pub epsilon: f64,
    pub omega: Vec<OmegaPoint>,
}

impl GoldenData {
    pub fn omega_at(&self, n: u64) -> Option<&OmegaPoint> {
        self.omega.iter().find(|p| p.n == n)
    }
}

pub fn compute() -> Result<GoldenData> {
    let density = density_report(DENSITY_N)?;
    let omega = AdditiveFunctionSpec::omega();
    let hists = additive::histograms(
        &omega,
        &OMEGA_GRID,
        omega.default_binning(),
        &SieveConfig::default(),
    )?;
    let points = OMEGA_GRID
        .iter()
        .zip(&hists)
        .map(|(&n, h)| {
            let stats = moments_from_histogram(h, 2)?;
            let ll = ln_ln(n);
            Ok(OmegaPoint {
                n,
                mean: stats.mean,
                variance: stats.variance,
                turan_ratio: turan_ratio_from_histogram(h)?.ratio,
                lln_exceedance: chebyshev_check(h, &stats, ll.powf(EPSILON))?.exceedance_fraction,
                hardy_ramanujan_exceedance: hardy_ramanujan_from_histogram(h, EPSILON)?
                    .check
                    .exceedance_fraction,
                ks_empirical: ks_from_histogram(h, stats.mean, stats.std_dev())?.ks_statistic,
                ks_theoretical: ks_from_histogram(h, ll, ll.sqrt())?.ks_statistic,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GoldenData {
        version: GOLDEN_VERSION,
        density_n: DENSITY_N,
        pi: density.pi_n,
        pi_times_ln_n: density.ratios.pi_over_pnt,
        mertens_times_ln_n: density.ratios.mertens_times_ln_n,
        epsilon: EPSILON,
        omega: points,
    })
}
