//! Convergence of normalized additive functions to the standard normal law,
//! measured by the Kolmogorov–Smirnov distance.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::additive::{self, AdditiveFunctionSpec, SpecKind, ValueHistogram};
use crate::error::{Error, Result};
use crate::lln::MIN_SCAN_N;
use crate::ln_ln;
use crate::sieve::SieveConfig;
use crate::space::{empirical_cdf, moments_from_histogram, EmpiricalCdf};

pub const DEFAULT_GRID: [u64; 4] = [10_000, 100_000, 1_000_000, 10_000_000];

pub const MEAN_NOT_DIVERGENT: &str = "condition A_n → ∞ not met";

/// Phi(x), the standard normal CDF. The tail `erfc(|x|/sqrt 2) / 2` is
/// computed once and reflected, so `Phi(-x) + Phi(x) == 1` exactly.
pub fn standard_normal_cdf(x: f64) -> f64 {
    let tail = 0.5 * erfc(x.abs() / std::f64::consts::SQRT_2);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub n: u64,
    pub ks_statistic: f64,
    pub center: f64,
    pub scale: f64,
    pub sample_size: u64,
}

/// `sup_x |F(x) - Phi(x)|` for a step CDF. The supremum sits at a jump, so
/// both one-sided limits of every step are compared.
pub fn ks_distance(cdf: &EmpiricalCdf) -> f64 {
    let mut prev = 0.0;
    let mut sup = 0.0f64;
    for &(x, f) in cdf.points() {
        let phi = standard_normal_cdf(x);
        sup = sup.max((prev - phi).abs()).max((f - phi).abs());
        prev = f;
    }
    sup.min(1.0)
}

/// KS distance of `(value - center) / scale` under the histogram's law.
pub fn ks_from_histogram(hist: &ValueHistogram, center: f64, scale: f64) -> Result<KsResult> {
    let cdf = empirical_cdf(hist, Some((center, scale)))?;
    Ok(KsResult {
        n: hist.n(),
        ks_statistic: ks_distance(&cdf),
        center,
        scale,
        sample_size: cdf.sample_size(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Centers and scales from the limit theorem.
    Theoretical,
    /// Sample mean and standard deviation on `[1, n]`.
    Empirical,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Theoretical => "theoretical",
            Normalization::Empirical => "empirical",
        })
    }
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "theoretical" | "theory" => Ok(Normalization::Theoretical),
            "empirical" | "sample" => Ok(Normalization::Empirical),
            other => Err(Error::Parse(format!("unknown normalization {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErdosKacRun {
    pub spec: String,
    pub normalization: Normalization,
    pub results: Vec<KsResult>,
}

/// Rejects specs outside the hypotheses of the limit theorems: `|f(p)| <= 1`,
/// a diverging variance, and for nonnegative specs a diverging mean.
pub fn check_hypotheses(spec: &AdditiveFunctionSpec) -> Result<()> {
    if spec.max_abs_prime_value() > 1.0 {
        return Err(Error::Hypothesis(format!(
            "|f(p)| <= 1 fails: sup |f(p)| = {}",
            spec.max_abs_prime_value()
        )));
    }
    if spec.is_nonnegative() && !spec.mean_diverges() {
        return Err(Error::Hypothesis(format!(
            "{}: {MEAN_NOT_DIVERGENT}",
            spec.label()
        )));
    }
    if !spec.variance_diverges() {
        return Err(Error::Hypothesis(format!(
            "{}: sigma_n → ∞ not met",
            spec.label()
        )));
    }
    Ok(())
}

/// Center and scale used by the theoretical normalization at `n`.
pub fn theoretical_normalization(spec: &AdditiveFunctionSpec, n: u64) -> Result<(f64, f64)> {
    let ll = ln_ln(n);
    if spec.is_omega() || spec.is_big_omega() {
        return Ok((ll, ll.sqrt()));
    }
    if matches!(spec.kind(), SpecKind::SignedDifference) {
        return Ok((0.0, (0.5 * ll).sqrt()));
    }
    let a = additive::exact_mean(spec, n)?;
    if a == 0.0 {
        return Err(Error::Degenerate(format!("A_n = 0 at n = {n}")));
    }
    Ok((a, a.abs().sqrt()))
}

pub fn erdos_kac_experiment(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    normalization: Normalization,
) -> Result<ErdosKacRun> {
    erdos_kac_experiment_with(spec, grid, normalization, &SieveConfig::default())
}

pub fn erdos_kac_experiment_with(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    normalization: Normalization,
    config: &SieveConfig,
) -> Result<ErdosKacRun> {
    check_hypotheses(spec)?;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "grid must be strictly ascending".into(),
        ));
    }
    if let Some(&n) = grid.iter().find(|&&n| n < MIN_SCAN_N) {
        return Err(Error::Domain(format!(
            "n = {n} below {MIN_SCAN_N}; ln ln n must exceed 1"
        )));
    }
    let hists = additive::histograms(spec, grid, spec.default_binning(), config)?;
    let results = grid
        .iter()
        .zip(&hists)
        .map(|(&n, h)| {
            let (center, scale) = match normalization {
                Normalization::Theoretical => theoretical_normalization(spec, n)?,
                Normalization::Empirical => {
                    let s = moments_from_histogram(h, 2)?;
                    if s.variance <= 0.0 {
                        return Err(Error::Degenerate(format!("sigma_n = 0 at n = {n}")));
                    }
                    (s.mean, s.std_dev())
                }
            };
            ks_from_histogram(h, center, scale)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ErdosKacRun {
        spec: spec.label(),
        normalization,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::Binning;
    use proptest::prelude::*;

    // Composite Simpson on the Gaussian density from 0 to x.
    fn phi_oracle(x: f64) -> f64 {
        let steps = 20_000;
        let h = x / steps as f64;
        let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(0.0) + pdf(x);
        for i in 1..steps {
            s += pdf(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        0.5 + s * h / 3.0
    }

    #[test]
    fn phi_examples() {
        assert_eq!(standard_normal_cdf(0.0), 0.5);
        assert!((standard_normal_cdf(1.959964) - 0.975).abs() < 1e-6);
        for x in [0.1, 0.5, 1.0, 1.959964, 2.5, 4.0, 6.0] {
            assert!(
                (standard_normal_cdf(x) - phi_oracle(x)).abs() < 1e-9,
                "x={x}"
            );
        }
        assert!(standard_normal_cdf(-8.0) < 1e-7);
        assert!(standard_normal_cdf(8.0) > 1.0 - 1e-7);
    }

    #[test]
    fn ks_examples() {
        let point = ValueHistogram::from_counts(Binning::ExactInteger, [(0.0, 100)]).unwrap();
        let ks = ks_from_histogram(&point, 0.0, 1.0).unwrap();
        assert_eq!(ks.ks_statistic, 0.5);

        // Phi sampled on a fine grid of quantiles.
        let m = 20_000u64;
        let xs = (1..=m).map(|i| {
            let p = (i as f64 - 0.5) / m as f64;
            let (mut lo, mut hi) = (-10.0f64, 10.0f64);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if standard_normal_cdf(mid) < p {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        });
        let h = ValueHistogram::from_values(Binning::FixedWidth(1e-6), xs).unwrap();
        let ks = ks_from_histogram(&h, 0.0, 1.0).unwrap();
        assert!(
            ks.ks_statistic <= 1.0 / m as f64 + 1e-6,
            "{}",
            ks.ks_statistic
        );
    }

    #[test]
    fn hypothesis_rejections() {
        let phi = erdos_kac_experiment(
            &AdditiveFunctionSpec::phi_log(),
            &[1000],
            Normalization::Empirical,
        );
        assert!(matches!(&phi, Err(Error::Hypothesis(m)) if m.contains(MEAN_NOT_DIVERGENT)));
        let big: AdditiveFunctionSpec = "kind=residue_class;modulus=3;residue=1;weight=2"
            .parse()
            .unwrap();
        assert!(matches!(
            erdos_kac_experiment(&big, &[1000], Normalization::Empirical),
            Err(Error::Hypothesis(_))
        ));
        let dead: AdditiveFunctionSpec = "kind=residue_class;modulus=4;residue=2;weight=1"
            .parse()
            .unwrap();
        assert!(matches!(
            erdos_kac_experiment(&dead, &[1000], Normalization::Empirical),
            Err(Error::Hypothesis(_))
        ));
        let omega = AdditiveFunctionSpec::omega();
        assert!(matches!(
            erdos_kac_experiment(&omega, &[15], Normalization::Empirical),
            Err(Error::Domain(_))
        ));
        assert!(erdos_kac_experiment(&omega, &[1000, 100], Normalization::Empirical).is_err());
    }

    #[test]
    fn single_point_grid() {
        let run = erdos_kac_experiment(
            &AdditiveFunctionSpec::omega(),
            &[16],
            Normalization::Theoretical,
        )
        .unwrap();
        assert_eq!(run.results.len(), 1);
        let r = &run.results[0];
        assert!((0.0..=1.0).contains(&r.ks_statistic));
        assert_eq!(r.sample_size, 16);
    }

    #[test]
    fn omega_sequences() {
        let grid = [10_000, 100_000, 1_000_000];
        let omega = AdditiveFunctionSpec::omega();
        let emp = erdos_kac_experiment(&omega, &grid, Normalization::Empirical).unwrap();
        let theo = erdos_kac_experiment(&omega, &grid, Normalization::Theoretical).unwrap();
        for w in emp.results.windows(2) {
            assert!(w[1].ks_statistic <= w[0].ks_statistic + 0.01);
        }
        for (e, t) in emp.results.iter().zip(&theo.results) {
            assert!(e.ks_statistic < t.ks_statistic + 0.05);
            assert_eq!(t.center, ln_ln(t.n));
        }
        // The signed difference has variance ln ln n + O(1), twice the 0.5 ln ln n
        // scale the theoretical path uses, so that path sits well away from Phi
        // while the sample-moment path is close.
        let signed = AdditiveFunctionSpec::omega_difference();
        let theo = erdos_kac_experiment(&signed, &[1_000_000], Normalization::Theoretical).unwrap();
        let emp = erdos_kac_experiment(&signed, &[1_000_000], Normalization::Empirical).unwrap();
        assert_eq!(theo.results[0].center, 0.0);
        assert!(theo.results[0].ks_statistic > 0.2, "{:?}", theo.results);
        assert!(emp.results[0].ks_statistic < 0.2, "{:?}", emp.results);
        let s =
            moments_from_histogram(&additive::histogram(&signed, 1_000_000).unwrap(), 2).unwrap();
        assert!(s.variance > 0.8 * ln_ln(1_000_000));
    }

    #[test]
    fn normalization_parses() {
        assert_eq!(
            "Empirical".parse::<Normalization>().unwrap(),
            Normalization::Empirical
        );
        assert_eq!(
            Normalization::Theoretical
                .to_string()
                .parse::<Normalization>()
                .unwrap(),
            Normalization::Theoretical
        );
        assert!("x".parse::<Normalization>().is_err());
    }

    proptest! {
        #[test]
        fn phi_reflects_exactly(x in -40.0f64..40.0) {
            prop_assert_eq!(standard_normal_cdf(x) + standard_normal_cdf(-x), 1.0);
        }

        #[test]
        fn phi_is_monotone(a in -10.0f64..10.0, d in 0.0f64..5.0) {
            prop_assert!(standard_normal_cdf(a) <= standard_normal_cdf(a + d));
        }

        #[test]
        fn ks_commutes_with_affine_maps(
            counts in proptest::collection::vec((-40i64..40, 1u64..300), 1..30),
            shift in -3.0f64..3.0,
            stretch in 0.25f64..4.0,
        ) {
            let base = ValueHistogram::from_counts(
                Binning::FixedWidth(1e-3),
                counts.iter().map(|&(v, c)| (v as f64 * 0.1, c)),
            ).unwrap();
            let moved = ValueHistogram::from_counts(
                Binning::FixedWidth(1e-3),
                counts.iter().map(|&(v, c)| (v as f64 * 0.1 * stretch + shift, c)),
            ).unwrap();
            prop_assume!(moved.bin_count() == base.bin_count());
            let a = ks_from_histogram(&base, 0.3, 1.2).unwrap().ks_statistic;
            let b = ks_from_histogram(&moved, 0.3 * stretch + shift, 1.2 * stretch).unwrap().ks_statistic;
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
    }
}
