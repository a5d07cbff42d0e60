//! Prime density on `[1, n]` against the sieve-independence heuristic.
//!
//! Four estimates are compared: the measured density `pi(n)/n`, the prime
//! number theorem's `1/ln n`, the product `prod_{p <= sqrt n} (1 - 1/p)` one
//! gets by treating divisibility by distinct primes as independent events,
//! and Mertens' asymptote for that product, `2 e^-gamma / ln n`. The last two
//! converge to each other while the first two do, leaving a constant factor
//! `2 e^-gamma` between the pairs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sieve::{self, isqrt};

/// Euler–Mascheroni constant to 20 significant digits (OEIS A001620:
/// 0.57721566490153286060651209...). Rounded to `f64` on use.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_61;

/// `2 e^-gamma`, the limit of `mertens_product(sqrt n) * ln n`.
pub fn mertens_constant() -> f64 {
    2.0 * (-EULER_GAMMA).exp()
}

/// `prod_{p <= x} (1 - 1/p)`, accumulated as a sum of logarithms.
pub fn mertens_product(x: f64) -> f64 {
    if x.is_nan() || x < 2.0 {
        return 1.0;
    }
    mertens_product_int(x.floor() as u64)
}

fn mertens_product_int(x: u64) -> f64 {
    let mut log_sum = CompensatedSum::default();
    sieve::for_each_prime(x, |p| log_sum.add((-1.0 / p as f64).ln_1p()));
    log_sum.value().exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityRatios {
    pub pi_over_pnt: f64,
    pub mertens_over_pnt: f64,
    pub mertens_times_ln_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub n: u64,
    pub pi_n: u64,
    pub pi_density: f64,
    pub pnt_estimate: f64,
    /// Product over primes up to `isqrt(n)`.
    pub mertens_product: f64,
    pub mertens_asymptote: f64,
    pub gamma: f64,
    pub ratios: DensityRatios,
}

impl DensityReport {
    fn assemble(n: u64, pi_n: u64, mertens_product: f64) -> Self {
        let ln_n = (n as f64).ln();
        let pi_density = pi_n as f64 / n as f64;
        let pnt_estimate = 1.0 / ln_n;
        DensityReport {
            n,
            pi_n,
            pi_density,
            pnt_estimate,
            mertens_product,
            mertens_asymptote: mertens_constant() / ln_n,
            gamma: EULER_GAMMA,
            ratios: DensityRatios {
                pi_over_pnt: pi_density / pnt_estimate,
                mertens_over_pnt: mertens_product / pnt_estimate,
                mertens_times_ln_n: mertens_product * ln_n,
            },
        }
    }

    /// `pi_over_pnt - mertens_over_pnt`; tends to `1 - 2 e^-gamma`.
    pub fn discrepancy(&self) -> f64 {
        self.ratios.pi_over_pnt - self.ratios.mertens_over_pnt
    }
}

fn check_point(n: u64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "density report needs n >= 3 (ln n too small), got {n}"
        )));
    }
    Ok(())
}

pub fn density_report(n: u64) -> Result<DensityReport> {
    check_point(n)?;
    Ok(DensityReport::assemble(
        n,
        sieve::prime_count(n),
        mertens_product_int(isqrt(n)),
    ))
}

/// Reports along an ascending grid. One prime-counting pass serves every
/// point, and the Mertens products come from one walk over the primes up to
/// `sqrt(max n)`.
pub fn density_scan(grid: &[u64]) -> Result<Vec<DensityReport>> {
    for &n in grid {
        check_point(n)?;
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("grid must be ascending".into()));
    }
    let Some(&max) = grid.last() else {
        return Ok(Vec::new());
    };
    let counts = sieve::prime_counts(grid);
    let roots: Vec<u64> = grid.iter().map(|&n| isqrt(n)).collect();
    let mut products = vec![1.0; grid.len()];
    let mut log_sum = CompensatedSum::default();
    let mut next = 0;
    let mut settle = |upto: u64, log_sum: &CompensatedSum, next: &mut usize| {
        while *next < roots.len() && roots[*next] < upto {
            products[*next] = log_sum.value().exp();
            *next += 1;
        }
    };
    sieve::for_each_prime(isqrt(max), |p| {
        settle(p, &log_sum, &mut next);
        log_sum.add((-1.0 / p as f64).ln_1p());
    });
    settle(u64::MAX, &log_sum, &mut next);
    Ok(grid
        .iter()
        .zip(counts)
        .zip(products)
        .map(|((&n, pi), prod)| DensityReport::assemble(n, pi, prod))
        .collect())
}
