//! Law-of-large-numbers analogues on `[1, n]`.
//!
//! Every check counts the points whose deviation from a center reaches a
//! threshold. Ties belong to the exceedance side: a point with
//! `|f(m) - center| >= threshold` is an exceedance, everything else is within.

use serde::{Deserialize, Serialize};

use crate::additive::{self, AdditiveFunctionSpec, ValueHistogram};
use crate::error::{Error, Result};
use crate::ln_ln;
use crate::sieve::SieveConfig;
use crate::space::{moments_from_histogram, EmpiricalStats};

/// Default exponent in `b(n) = (ln ln n)^epsilon`.
pub const DEFAULT_EPSILON: f64 = 0.25;

/// Default grid for scans.
pub const DEFAULT_GRID: [u64; 5] = [1_000, 10_000, 100_000, 1_000_000, 10_000_000];

/// Smallest `n` with `ln ln n > 1`.
pub const MIN_SCAN_N: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub n: u64,
    /// Deviation multiplier.
    pub b: f64,
    pub epsilon: Option<f64>,
    pub center: f64,
    pub scale: f64,
    /// `b * scale`.
    pub threshold: f64,
    pub exceedance_count: u64,
    pub exceedance_fraction: f64,
    /// `1 / b^2`.
    pub chebyshev_bound: f64,
    pub within_count: u64,
    pub within_fraction: f64,
}

impl BoundCheck {
    pub fn satisfies_chebyshev(&self) -> bool {
        self.exceedance_fraction * self.b * self.b <= 1.0
    }
}

/// Counts `|v - center| >= b * scale` over the histogram.
pub fn deviation_check(
    hist: &ValueHistogram,
    center: f64,
    scale: f64,
    b: f64,
) -> Result<BoundCheck> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "b must be positive, got {b}"
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidScale(scale));
    }
    let threshold = b * scale;
    let n = hist.n();
    let exceedance_count: u64 = hist
        .iter()
        .filter(|&(v, _)| (v - center).abs() >= threshold)
        .map(|(_, c)| c)
        .sum();
    let within_count = n - exceedance_count;
    Ok(BoundCheck {
        n,
        b,
        epsilon: None,
        center,
        scale,
        threshold,
        exceedance_count,
        exceedance_fraction: exceedance_count as f64 / n as f64,
        chebyshev_bound: 1.0 / (b * b),
        within_count,
        within_fraction: within_count as f64 / n as f64,
    })
}

/// Chebyshev's inequality on the empirical law: the fraction of `m` with
/// `|f(m) - A_n| >= b sigma_n` never exceeds `1/b^2`.
pub fn chebyshev_check(
    hist: &ValueHistogram,
    stats: &EmpiricalStats,
    b: f64,
) -> Result<BoundCheck> {
    if stats.variance <= 0.0 {
        return Err(Error::Degenerate("sigma_n = 0".into()));
    }
    deviation_check(hist, stats.mean, stats.std_dev(), b)
}

fn check_scan_point(n: u64) -> Result<()> {
    if n < MIN_SCAN_N {
        return Err(Error::Domain(format!(
            "n = {n} is below e^e; ln ln n must exceed 1 (use n >= {MIN_SCAN_N})"
        )));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// Chebyshev checks with the growing multiplier `b(n) = (ln ln n)^epsilon`
/// along a grid, from one sieve pass.
pub fn lln_scan(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    epsilon: f64,
) -> Result<Vec<BoundCheck>> {
    lln_scan_with(spec, grid, epsilon, &SieveConfig::default())
}

pub fn lln_scan_with(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    epsilon: f64,
    config: &SieveConfig,
) -> Result<Vec<BoundCheck>> {
    check_epsilon(epsilon)?;
    for &n in grid {
        check_scan_point(n)?;
    }
    let hists = additive::histograms(spec, grid, spec.default_binning(), config)?;
    grid.iter()
        .zip(&hists)
        .map(|(&n, h)| {
            let stats = moments_from_histogram(h, 2)?;
            let mut check = chebyshev_check(h, &stats, ln_ln(n).powf(epsilon))?;
            check.epsilon = Some(epsilon);
            Ok(check)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyRamanujanCheck {
    pub check: BoundCheck,
    /// `(ln ln n)^(-2 epsilon)`, Chebyshev's bound for `b(n) = (ln ln n)^epsilon`.
    pub chebyshev_rate: f64,
    /// `(ln ln n)^(-(1/2 + 2 epsilon))`, the rate stated with the theorem.
    pub stated_rate: f64,
    pub within_chebyshev_rate: bool,
    pub within_stated_rate: bool,
}

/// Hardy–Ramanujan on the omega histogram: exceedances of
/// `|omega(m) - ln ln n| >= (ln ln n)^(1/2 + epsilon)`, with the theoretical
/// center and scale rather than the empirical ones.
pub fn hardy_ramanujan_from_histogram(
    omega_hist: &ValueHistogram,
    epsilon: f64,
) -> Result<HardyRamanujanCheck> {
    check_epsilon(epsilon)?;
    let n = omega_hist.n();
    check_scan_point(n)?;
    let ll = ln_ln(n);
    let mut check = deviation_check(omega_hist, ll, ll.sqrt(), ll.powf(epsilon))?;
    check.epsilon = Some(epsilon);
    let chebyshev_rate = ll.powf(-2.0 * epsilon);
    let stated_rate = ll.powf(-(0.5 + 2.0 * epsilon));
    Ok(HardyRamanujanCheck {
        within_chebyshev_rate: check.exceedance_fraction <= chebyshev_rate,
        within_stated_rate: check.exceedance_fraction <= stated_rate,
        check,
        chebyshev_rate,
        stated_rate,
    })
}

pub fn hardy_ramanujan_check(n: u64, epsilon: f64) -> Result<HardyRamanujanCheck> {
    check_scan_point(n)?;
    let h = additive::histogram(&AdditiveFunctionSpec::omega(), n)?;
    hardy_ramanujan_from_histogram(&h, epsilon)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuranPoint {
    pub n: u64,
    pub mean: f64,
    pub variance: f64,
    /// `sigma_n^2 / A_n`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuranReport {
    pub spec: String,
    pub points: Vec<TuranPoint>,
    /// Set when the spec's mean stays bounded, so the limit statement does not apply.
    pub hypothesis_note: Option<String>,
}

pub const TURAN_NOT_MET: &str = "Turán hypothesis A_n → ∞ not met";

pub fn turan_ratio_from_histogram(hist: &ValueHistogram) -> Result<TuranPoint> {
    let stats = moments_from_histogram(hist, 2)?;
    if stats.mean <= 0.0 {
        return Err(Error::Degenerate(format!(
            "A_n = {} at n = {}",
            stats.mean,
            hist.n()
        )));
    }
    Ok(TuranPoint {
        n: hist.n(),
        mean: stats.mean,
        variance: stats.variance,
        ratio: stats.variance / stats.mean,
    })
}

/// `sigma_n^2 / A_n` along a grid for a nonnegative, bounded strongly
/// additive function.
pub fn turan_check(spec: &AdditiveFunctionSpec, grid: &[u64]) -> Result<TuranReport> {
    turan_check_with(spec, grid, &SieveConfig::default())
}

pub fn turan_check_with(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    config: &SieveConfig,
) -> Result<TuranReport> {
    if !spec.is_strongly_additive() {
        return Err(Error::Hypothesis(
            "Turán's statement is for strongly additive functions".into(),
        ));
    }
    if !spec.is_nonnegative() {
        return Err(Error::Hypothesis(
            "Turán's statement needs 0 <= f(p) < c".into(),
        ));
    }
    let hists = additive::histograms(spec, grid, spec.default_binning(), config)?;
    let points = hists
        .iter()
        .map(turan_ratio_from_histogram)
        .collect::<Result<Vec<_>>>()?;
    Ok(TuranReport {
        spec: spec.label(),
        points,
        hypothesis_note: (!spec.mean_diverges()).then(|| TURAN_NOT_MET.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::additive::Binning;
    use proptest::prelude::*;

    fn omega_hist(n: u64) -> ValueHistogram {
        additive::histogram(&AdditiveFunctionSpec::omega(), n).unwrap()
    }

    #[test]
    fn chebyshev_example_over_ten() {
        let h = omega_hist(10);
        let s = moments_from_histogram(&h, 2).unwrap();
        let c = chebyshev_check(&h, &s, 2.0).unwrap();
        assert_eq!(c.exceedance_count, 1);
        assert_eq!(c.exceedance_fraction, 0.1);
        assert_eq!(c.chebyshev_bound, 0.25);
        assert_eq!(c.within_count + c.exceedance_count, 10);
        let far = chebyshev_check(&h, &s, 1e6).unwrap();
        assert_eq!(far.exceedance_count, 0);
    }

    #[test]
    fn ties_count_as_exceedances() {
        let h = ValueHistogram::from_counts(Binning::ExactInteger, [(0.0, 1), (2.0, 1)]).unwrap();
        let s = moments_from_histogram(&h, 2).unwrap();
        let c = chebyshev_check(&h, &s, 1.0).unwrap();
        assert_eq!(c.exceedance_count, 2);
        assert_eq!(c.within_count, 0);
    }

    #[test]
    fn degenerate_and_bad_inputs() {
        let h = ValueHistogram::from_counts(Binning::ExactInteger, [(3.0, 10)]).unwrap();
        let s = moments_from_histogram(&h, 2).unwrap();
        assert!(matches!(
            chebyshev_check(&h, &s, 1.0),
            Err(Error::Degenerate(_))
        ));
        let h = omega_hist(100);
        let s = moments_from_histogram(&h, 2).unwrap();
        assert!(chebyshev_check(&h, &s, 0.0).is_err());
        assert!(chebyshev_check(&h, &s, -1.0).is_err());
    }

    #[test]
    fn lln_scan_examples() {
        let omega = AdditiveFunctionSpec::omega();
        let grid = [1_000, 100_000, 10_000_000];
        let scan = lln_scan(&omega, &grid, 0.25).unwrap();
        for c in &scan {
            assert!(c.within_fraction >= 1.0 - ln_ln(c.n).powf(-0.5), "{c:?}");
            assert!(c.satisfies_chebyshev());
        }
        assert!(scan[2].within_fraction >= scan[0].within_fraction - 0.01);
        let flat = lln_scan(&omega, &[1_000], 0.0).unwrap();
        assert_eq!(flat[0].b, 1.0);
        assert_eq!(flat[0].chebyshev_bound, 1.0);
        assert!(matches!(
            lln_scan(&omega, &[15], 0.25),
            Err(Error::Domain(_))
        ));
        assert!(lln_scan(&omega, &[16], 0.25).is_ok());
    }

    #[test]
    fn hardy_ramanujan_examples() {
        let edge = hardy_ramanujan_check(16, 0.25).unwrap();
        assert!((ln_ln(16) - 1.0197).abs() < 1e-4);
        assert!(edge.check.threshold.is_finite());
        let h = omega_hist(1_000_000);
        let a = hardy_ramanujan_from_histogram(&h, 0.25).unwrap();
        let b = hardy_ramanujan_from_histogram(&h, 0.5).unwrap();
        assert!(b.check.exceedance_fraction <= a.check.exceedance_fraction);
        assert!(a.within_chebyshev_rate);
    }

    #[test]
    fn hardy_ramanujan_with_empirical_center_is_chebyshev() {
        let h = omega_hist(50_000);
        let s = moments_from_histogram(&h, 2).unwrap();
        for b in [0.5, 1.0, 1.7, 3.0] {
            let via_dev = deviation_check(&h, s.mean, s.std_dev(), b).unwrap();
            assert_eq!(via_dev, chebyshev_check(&h, &s, b).unwrap());
        }
    }

    #[test]
    fn turan_examples() {
        let zero: AdditiveFunctionSpec = "kind=residue_class;modulus=1;residue=0;weight=0"
            .parse()
            .unwrap();
        assert!(matches!(
            turan_check(&zero, &[1000]),
            Err(Error::Degenerate(_))
        ));
        let phi = turan_check(&AdditiveFunctionSpec::phi_log(), &[1000, 100_000]).unwrap();
        assert_eq!(phi.hypothesis_note.as_deref(), Some(TURAN_NOT_MET));
        let omega = turan_check(&AdditiveFunctionSpec::omega(), &[1000, 100_000]).unwrap();
        assert!(omega.hypothesis_note.is_none());
        assert!(omega.points[1].ratio > omega.points[0].ratio);
        assert!(turan_check(&AdditiveFunctionSpec::omega_difference(), &[1000]).is_err());
    }

    proptest! {
        #[test]
        fn exceedance_is_monotone_in_b(
            counts in proptest::collection::vec((-30i64..30, 1u64..500), 2..30),
            b1 in 0.1f64..5.0,
            db in 0.0f64..5.0,
        ) {
            let h = ValueHistogram::from_counts(
                Binning::ExactInteger,
                counts.iter().map(|&(v, c)| (v as f64, c)),
            ).unwrap();
            let s = moments_from_histogram(&h, 2).unwrap();
            prop_assume!(s.variance > 0.0);
            let lo = chebyshev_check(&h, &s, b1).unwrap();
            let hi = chebyshev_check(&h, &s, b1 + db).unwrap();
            prop_assert!(hi.exceedance_fraction <= lo.exceedance_fraction);
            prop_assert!(lo.satisfies_chebyshev() && hi.satisfies_chebyshev());
        }
    }
}
