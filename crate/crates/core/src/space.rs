//! `[1, n]` with the uniform counting measure `P_n(A) = #A / n`.
//!
//! An arithmetic function restricted to `[1, n]` is a random variable on this
//! space; its law is a [`ValueHistogram`]. Limits as `n` grows are only ever
//! reported as sequences of finite-`n` values ([`density_trend`]); the limit
//! itself is not a measure.

use serde::{Deserialize, Serialize};

use crate::additive::ValueHistogram;
use crate::error::{Error, Result};
use crate::par;

/// Default highest central moment order.
pub const DEFAULT_MAX_ORDER: usize = 6;

const DENSITY_CHUNK: u64 = 1 << 16;

/// `#{m <= n : indicator(m)} / n`.
pub fn density<F>(indicator: F, n: u64) -> f64
where
    F: Fn(u64) -> bool + Sync + Send,
{
    assert!(n >= 1, "density needs n >= 1");
    let chunks = n.div_ceil(DENSITY_CHUNK) as usize;
    let hits = par::map_reduce(
        chunks,
        || 0u64,
        |i| {
            let lo = 1 + i as u64 * DENSITY_CHUNK;
            let hi = n.min(lo + DENSITY_CHUNK - 1);
            (lo..=hi).filter(|&m| indicator(m)).count() as u64
        },
        |a, b| a + b,
    );
    hits as f64 / n as f64
}

/// Finite-`n` approximations of an asymptotic density along a grid.
pub fn density_trend<F>(indicator: F, grid: &[u64]) -> Vec<(u64, f64)>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    grid.iter().map(|&n| (n, density(&indicator, n))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    /// Central moments of orders `2..=max_order`; `central_moments[0]` is the variance.
    pub central_moments: Vec<f64>,
    pub max_order: usize,
}

impl EmpiricalStats {
    /// Central moment of order `k` (`2 <= k <= max_order`).
    pub fn central_moment(&self, k: usize) -> Option<f64> {
        k.checked_sub(2)
            .and_then(|i| self.central_moments.get(i))
            .copied()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Mean and central moments up to `max_order` of the law in `hist`. Two
/// passes over the bins: the mean first, then powers of the deviations.
pub fn moments_from_histogram(hist: &ValueHistogram, max_order: usize) -> Result<EmpiricalStats> {
    if max_order < 2 {
        return Err(Error::InvalidOrder(max_order));
    }
    if hist.is_empty() {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    let n = hist.n();
    let mean = hist.mean();
    let mut sums = vec![0.0f64; max_order - 1];
    for (v, c) in hist.iter() {
        let d = v - mean;
        let c = c as f64;
        let mut pow = d;
        for s in sums.iter_mut() {
            pow *= d;
            *s += c * pow;
        }
    }
    let central_moments: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    Ok(EmpiricalStats {
        n,
        mean,
        variance: central_moments[0].max(0.0),
        central_moments,
        max_order,
    })
}

/// A right-continuous step CDF on finitely many support points.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    points: Vec<(f64, f64)>,
    sample_size: u64,
}

impl EmpiricalCdf {
    /// `(support point, F(point))`, ascending.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn sample_size(&self) -> u64 {
        self.sample_size
    }

    /// F(x) = P(X <= x).
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&(v, _)| v <= x);
        if i == 0 {
            0.0
        } else {
            self.points[i - 1].1
        }
    }

    /// F(x-) = P(X < x).
    pub fn eval_left(&self, x: f64) -> f64 {
        let i = self.points.partition_point(|&(v, _)| v < x);
        if i == 0 {
            0.0
        } else {
            self.points[i - 1].1
        }
    }

    /// Mean and variance of the law, recomputed from the jumps.
    pub fn mean_variance(&self) -> (f64, f64) {
        let mut prev = 0.0;
        let jumps: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|&(v, f)| {
                let w = f - prev;
                prev = f;
                (v, w)
            })
            .collect();
        let mean: f64 = jumps.iter().map(|(v, w)| v * w).sum();
        let var: f64 = jumps.iter().map(|(v, w)| (v - mean).powi(2) * w).sum();
        (mean, var)
    }
}

/// CDF of the histogram's law, optionally of `(value - center) / scale`.
pub fn empirical_cdf(hist: &ValueHistogram, normalize: Option<(f64, f64)>) -> Result<EmpiricalCdf> {
    let (center, scale) = normalize.unwrap_or((0.0, 1.0));
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidScale(scale));
    }
    if hist.is_empty() {
        return Err(Error::InvalidArgument("empty histogram".into()));
    }
    let n = hist.n();
    let mut cumulative = 0u64;
    let points = hist
        .iter()
        .map(|(v, c)| {
            cumulative += c;
            let x = if normalize.is_some() {
                (v - center) / scale
            } else {
                v
            };
            (x, cumulative as f64 / n as f64)
        })
        .collect();
    Ok(EmpiricalCdf {
        points,
        sample_size: n,
    })
}
