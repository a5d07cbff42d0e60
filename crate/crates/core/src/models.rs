//! Independent two-point models `S_n = sum_{p <= n} X_p` matched to additive
//! functions, with exact moments and a seeded Monte Carlo cross-check.
//!
//! Central moments of independent sums are additive only for orders 2 and 3.
//! For every order this module reports both the per-prime sum
//! `sum_p E[(X_p - mu_p)^k]` (the leading-term reading) and the exact central
//! moment of `S_n`, obtained by summing cumulants and converting back.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::additive::{self, AdditiveFunctionSpec};
use crate::error::{Error, Result};
use crate::ln_ln;
use crate::numeric::{binomial, CompensatedSum};
use crate::par;
use crate::sieve::{self, DEFAULT_MEMORY_BUDGET};
use crate::space::moments_from_histogram;

/// Default highest moment order.
pub const DEFAULT_MAX_ORDER: usize = 6;

/// Default cap on `2^pi(n)`, the support size of `S_n` before merging.
pub const DEFAULT_SUPPORT_BUDGET: u64 = 1 << 22;

/// Width of the grid on which equal real-valued sums are merged.
pub const MERGE_WIDTH: f64 = 1e-12;

pub const MIN_SAMPLES: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwoPointModel {
    /// 1 with probability 1/p, else 0.
    BernoulliInvP,
    /// 1 with probability 1/(2p), else 0.
    BernoulliHalfInvP,
    /// +-1/sqrt(2p) with probability 1/2 each.
    SymmetricSigned,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointLaw {
    pub value_a: f64,
    pub prob_a: f64,
    pub value_b: f64,
    pub prob_b: f64,
}

impl TwoPointLaw {
    pub fn mean(&self) -> f64 {
        self.value_a * self.prob_a + self.value_b * self.prob_b
    }

    pub fn central_moment(&self, k: u32) -> f64 {
        let mu = self.mean();
        (self.value_a - mu).powi(k as i32) * self.prob_a
            + (self.value_b - mu).powi(k as i32) * self.prob_b
    }
}

impl TwoPointModel {
    pub const ALL: [TwoPointModel; 3] = [
        TwoPointModel::BernoulliInvP,
        TwoPointModel::BernoulliHalfInvP,
        TwoPointModel::SymmetricSigned,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TwoPointModel::BernoulliInvP => "bernoulli_inv_p",
            TwoPointModel::BernoulliHalfInvP => "bernoulli_half_inv_p",
            TwoPointModel::SymmetricSigned => "symmetric_signed",
        }
    }

    /// Denominator `d` of the success probability `1/d` for Bernoulli models.
    fn bernoulli_denominator(self, p: u64) -> Option<u64> {
        match self {
            TwoPointModel::BernoulliInvP => Some(p),
            TwoPointModel::BernoulliHalfInvP => Some(2 * p),
            TwoPointModel::SymmetricSigned => None,
        }
    }

    pub fn law(self, p: u64) -> TwoPointLaw {
        match self.bernoulli_denominator(p) {
            Some(d) => {
                let q = 1.0 / d as f64;
                TwoPointLaw {
                    value_a: 1.0,
                    prob_a: q,
                    value_b: 0.0,
                    prob_b: 1.0 - q,
                }
            }
            None => {
                let a = signed_amplitude(p);
                TwoPointLaw {
                    value_a: a,
                    prob_a: 0.5,
                    value_b: -a,
                    prob_b: 0.5,
                }
            }
        }
    }

    /// E[X_p].
    pub fn prime_mean(self, p: u64) -> f64 {
        self.bernoulli_denominator(p)
            .map_or(0.0, |d| 1.0 / d as f64)
    }

    /// E[(X_p - mu_p)^k], written to avoid cancellation.
    pub fn prime_central_moment(self, p: u64, k: u32) -> f64 {
        match self.bernoulli_denominator(p) {
            Some(d) => {
                let q = 1.0 / d as f64;
                (1.0 - q).powi(k as i32) * q + (-q).powi(k as i32) * (1.0 - q)
            }
            None if k % 2 == 1 => 0.0,
            None => (0.5 / p as f64).powi(k as i32 / 2),
        }
    }

    /// Growth the paper attaches to the k-th central moment of `S_n`;
    /// `None` where it only claims a bounded value.
    pub fn paper_asymptote(self, n: u64, k: usize) -> Option<f64> {
        let ll = ln_ln(n);
        match self {
            TwoPointModel::BernoulliInvP => Some(ll),
            TwoPointModel::BernoulliHalfInvP => Some(0.5 * ll),
            TwoPointModel::SymmetricSigned if k == 2 => Some(0.5 * ll),
            TwoPointModel::SymmetricSigned if k % 2 == 1 => Some(0.0),
            TwoPointModel::SymmetricSigned => None,
        }
    }
}

fn signed_amplitude(p: u64) -> f64 {
    (2.0 * p as f64).sqrt().recip()
}

impl fmt::Display for TwoPointModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TwoPointModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bernoulli_inv_p" | "inv_p" => Ok(TwoPointModel::BernoulliInvP),
            "bernoulli_half_inv_p" | "half_inv_p" | "half" => Ok(TwoPointModel::BernoulliHalfInvP),
            "symmetric_signed" | "signed" => Ok(TwoPointModel::SymmetricSigned),
            other => Err(Error::Parse(format!(
                "unknown model {other:?} (expected inv_p, half_inv_p or signed)"
            ))),
        }
    }
}

/// Central moment of order `k` of the law taking `value_a` w.p. `prob_a` and
/// `value_b` w.p. `prob_b`.
pub fn two_point_central_moment(
    value_a: f64,
    prob_a: f64,
    value_b: f64,
    prob_b: f64,
    k: u32,
) -> Result<f64> {
    let valid = |q: f64| (0.0..=1.0).contains(&q);
    if !valid(prob_a) || !valid(prob_b) || (prob_a + prob_b - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "probabilities {prob_a}, {prob_b} must lie in [0, 1] and sum to 1"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidOrder(k as usize));
    }
    Ok(TwoPointLaw {
        value_a,
        prob_a,
        value_b,
        prob_b,
    }
    .central_moment(k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMoment {
    pub model: TwoPointModel,
    pub n: u64,
    pub k: usize,
    /// `sum_p E[(X_p - mu_p)^k]`.
    pub leading_term_sum: f64,
    /// Central moment of `S_n`.
    pub exact: f64,
    /// Orders 2 and 3, where the two agree identically.
    pub leading_term_is_exact: bool,
}

/// Per-prime cumulants `kappa_1..=kappa_k` of a centered law from its
/// central moments `c_0..=c_k`.
fn cumulants_from_central(c: &[f64]) -> Vec<f64> {
    let k = c.len() - 1;
    let mut kappa = vec![0.0; k + 1];
    for j in 2..=k {
        let mut v = c[j];
        for m in 2..j {
            v -= binomial(j - 1, m - 1) * kappa[m] * c[j - m];
        }
        kappa[j] = v;
    }
    kappa
}

fn central_from_cumulants(kappa: &[f64]) -> Vec<f64> {
    let k = kappa.len() - 1;
    let mut mu = vec![0.0; k + 1];
    mu[0] = 1.0;
    for j in 2..=k {
        mu[j] = (2..=j)
            .map(|m| binomial(j - 1, m - 1) * kappa[m] * mu[j - m])
            .sum();
    }
    mu
}

/// Moments of orders `2..=max_k` of `S_n`, from one walk over the primes.
pub fn model_moments(model: TwoPointModel, n: u64, max_k: usize) -> Result<Vec<ModelMoment>> {
    if max_k < 2 {
        return Err(Error::InvalidOrder(max_k));
    }
    let mut leading = vec![CompensatedSum::default(); max_k + 1];
    let mut cumulants = vec![CompensatedSum::default(); max_k + 1];
    let mut central = vec![0.0; max_k + 1];
    sieve::for_each_prime(n, |p| {
        central[0] = 1.0;
        for (j, c) in central.iter_mut().enumerate().skip(2) {
            *c = model.prime_central_moment(p, j as u32);
            leading[j].add(*c);
        }
        for (j, kappa) in cumulants_from_central(&central)
            .into_iter()
            .enumerate()
            .skip(2)
        {
            cumulants[j].add(kappa);
        }
    });
    let kappa: Vec<f64> = cumulants.iter().map(CompensatedSum::value).collect();
    let exact = central_from_cumulants(&kappa);
    Ok((2..=max_k)
        .map(|k| ModelMoment {
            model,
            n,
            k,
            leading_term_sum: leading[k].value(),
            exact: if k <= 3 { leading[k].value() } else { exact[k] },
            leading_term_is_exact: k <= 3,
        })
        .collect())
}

pub fn model_central_moment_sum(model: TwoPointModel, n: u64, k: usize) -> Result<ModelMoment> {
    Ok(model_moments(model, n, k)?.pop().expect("k >= 2"))
}

/// E[S_n].
pub fn model_mean(model: TwoPointModel, n: u64) -> f64 {
    let mut s = CompensatedSum::default();
    sieve::for_each_prime(n, |p| s.add(model.prime_mean(p)));
    s.value()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactDistribution {
    model: TwoPointModel,
    n: u64,
    atoms: Vec<(f64, f64)>,
    rational: Option<Vec<BigRational>>,
}

impl ExactDistribution {
    pub fn model(&self) -> TwoPointModel {
        self.model
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `(value, probability)` in ascending value order.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// For Bernoulli models, `P(S_n = j)` for `j = 0, 1, ...` as exact fractions.
    pub fn rational_probabilities(&self) -> Option<&[BigRational]> {
        self.rational.as_deref()
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms
            .iter()
            .map(|&(_, w)| w)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn mean(&self) -> f64 {
        self.atoms
            .iter()
            .map(|&(v, w)| v * w)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn central_moment(&self, k: u32) -> f64 {
        let mu = self.mean();
        self.atoms
            .iter()
            .map(|&(v, w)| (v - mu).powi(k as i32) * w)
            .collect::<CompensatedSum>()
            .value()
    }
}

pub fn exact_distribution(model: TwoPointModel, n: u64) -> Result<ExactDistribution> {
    exact_distribution_with(model, n, DEFAULT_SUPPORT_BUDGET)
}

/// Law of `S_n` by convolution over the primes up to `n`. Bernoulli models
/// are convolved in exact rational arithmetic; the signed model merges sums
/// that agree on a grid of width [`MERGE_WIDTH`].
pub fn exact_distribution_with(
    model: TwoPointModel,
    n: u64,
    budget: u64,
) -> Result<ExactDistribution> {
    let primes = sieve::primes_up_to(n)?;
    let count = primes.len() as u64;
    if count >= 64 || 1u64 << count > budget {
        return Err(Error::Capacity {
            what: "exact distribution support (2^pi(n) atoms)",
            required: if count >= 64 { u64::MAX } else { 1 << count },
            budget,
        });
    }
    if model == TwoPointModel::SymmetricSigned {
        let mut law: BTreeMap<i64, (f64, f64)> = BTreeMap::from([(0, (0.0, 1.0))]);
        for p in primes.iter() {
            let a = signed_amplitude(p);
            let mut next: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
            for &(v, w) in law.values() {
                for x in [v - a, v + a] {
                    let key = (x / MERGE_WIDTH).round() as i64;
                    next.entry(key).or_insert((x, 0.0)).1 += 0.5 * w;
                }
            }
            law = next;
        }
        return Ok(ExactDistribution {
            model,
            n,
            atoms: law.into_values().collect(),
            rational: None,
        });
    }
    // Numerators over the common denominator prod d_p.
    let mut numerators = vec![BigInt::one()];
    let mut denominator = BigInt::one();
    for p in primes.iter() {
        let d = model.bernoulli_denominator(p).expect("bernoulli model");
        let stay = BigInt::from(d - 1);
        let mut next = vec![BigInt::zero(); numerators.len() + 1];
        for (j, num) in numerators.iter().enumerate() {
            next[j] += num * &stay;
            next[j + 1] += num;
        }
        numerators = next;
        denominator *= d;
    }
    let rational: Vec<BigRational> = numerators
        .into_iter()
        .map(|num| BigRational::new(num, denominator.clone()))
        .collect();
    let atoms = rational
        .iter()
        .enumerate()
        .map(|(j, r)| (j as f64, r.to_f64().unwrap_or(0.0)))
        .collect();
    Ok(ExactDistribution {
        model,
        n,
        atoms,
        rational: Some(rational),
    })
}

/// Draws `S_n` for one sample.
enum Sampler {
    /// Bernoulli with decreasing probabilities `1/d_i`, by thinning: skip
    /// geometrically at the current bound, accept with the ratio, tighten.
    Thinning { denominators: Vec<u64> },
    /// Sums of `+-a_p` read four primes per nibble of a random word.
    SignedNibbles { table: Vec<f64> },
}

impl Sampler {
    fn new(model: TwoPointModel, n: u64) -> Result<Self> {
        if model == TwoPointModel::SymmetricSigned {
            let required = sieve::prime_count_upper_bound(n).saturating_mul(4 * 8);
            if required > DEFAULT_MEMORY_BUDGET {
                return Err(Error::Capacity {
                    what: "signed sampler table",
                    required,
                    budget: DEFAULT_MEMORY_BUDGET,
                });
            }
            let amps: Vec<f64> = sieve::primes_up_to(n)?
                .iter()
                .map(signed_amplitude)
                .collect();
            let mut table = Vec::with_capacity(amps.len().div_ceil(4) * 16);
            for group in amps.chunks(4) {
                for mask in 0..16u32 {
                    let mut s = 0.0;
                    for (j, a) in group.iter().enumerate() {
                        s += if mask >> j & 1 == 1 { *a } else { -*a };
                    }
                    table.push(s);
                }
            }
            return Ok(Sampler::SignedNibbles { table });
        }
        let denominators = sieve::primes_up_to(n)?
            .iter()
            .map(|p| model.bernoulli_denominator(p).expect("bernoulli model"))
            .collect();
        Ok(Sampler::Thinning { denominators })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Thinning { denominators } => {
                let mut hits = 0u64;
                let mut i = 0usize;
                while i < denominators.len() {
                    let bound = 1.0 / denominators[i] as f64;
                    let u: f64 = 1.0 - rng.gen::<f64>();
                    let skip = (u.ln() / (-bound).ln_1p()).floor();
                    if skip >= (denominators.len() - i) as f64 {
                        break;
                    }
                    let c = i + skip as usize;
                    let accept = denominators[i] as f64 / denominators[c] as f64;
                    if rng.gen::<f64>() < accept {
                        hits += 1;
                    }
                    i = c + 1;
                }
                hits as f64
            }
            Sampler::SignedNibbles { table } => {
                let groups = table.len() / 16;
                let mut s = 0.0;
                let mut word = 0u64;
                for g in 0..groups {
                    if g % 16 == 0 {
                        word = rng.gen();
                    }
                    s += table[g * 16 + (word & 15) as usize];
                    word >>= 4;
                }
                s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMomentReport {
    pub n: u64,
    pub k: usize,
    pub exact_central_moment: f64,
    pub leading_term_sum: f64,
    pub paper_asymptote: Option<f64>,
    pub monte_carlo_estimate: f64,
    pub monte_carlo_stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

impl ModelMomentReport {
    /// `(estimate - exact) / stderr`.
    pub fn z_score(&self) -> f64 {
        (self.monte_carlo_estimate - self.exact_central_moment) / self.monte_carlo_stderr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub model: TwoPointModel,
    pub n: u64,
    pub samples: usize,
    pub seed: u64,
    pub exact_mean: f64,
    pub monte_carlo_mean: f64,
    pub monte_carlo_mean_stderr: f64,
    pub moments: Vec<ModelMomentReport>,
}

/// Sample `i` is drawn from stream `i` of a ChaCha8 generator keyed by
/// `seed`, so the report does not depend on how samples are scheduled.
pub fn monte_carlo(
    model: TwoPointModel,
    n: u64,
    max_k: usize,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    monte_carlo_impl(model, n, max_k, samples, seed, false)
}

pub fn monte_carlo_sequential(
    model: TwoPointModel,
    n: u64,
    max_k: usize,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloReport> {
    monte_carlo_impl(model, n, max_k, samples, seed, true)
}

fn monte_carlo_impl(
    model: TwoPointModel,
    n: u64,
    max_k: usize,
    samples: usize,
    seed: u64,
    sequential: bool,
) -> Result<MonteCarloReport> {
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let sampler = Sampler::new(model, n)?;
    let exact = model_moments(model, n, max_k)?;
    let draw = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        sampler.draw(&mut rng)
    };
    let values = if sequential {
        par::sequential_map_collect(samples, draw)
    } else {
        par::map_collect(samples, draw)
    };

    let count = samples as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / count;
    let top = 2 * max_k;
    let mut sums = vec![CompensatedSum::default(); top + 1];
    for &x in &values {
        let d = x - mean;
        let mut pow = 1.0;
        for s in sums.iter_mut().skip(1) {
            pow *= d;
            s.add(pow);
        }
    }
    let m: Vec<f64> = sums.iter().map(|s| s.value() / count).collect();
    let moments = exact
        .iter()
        .map(|e| {
            let k = e.k;
            let kf = k as f64;
            let var = m[2 * k] - m[k] * m[k] - 2.0 * kf * m[k - 1] * m[k + 1]
                + kf * kf * m[2] * m[k - 1] * m[k - 1];
            ModelMomentReport {
                n,
                k,
                exact_central_moment: e.exact,
                leading_term_sum: e.leading_term_sum,
                paper_asymptote: model.paper_asymptote(n, k),
                monte_carlo_estimate: m[k],
                monte_carlo_stderr: (var.max(0.0) / count).sqrt(),
                samples,
                seed,
            }
        })
        .collect();
    Ok(MonteCarloReport {
        model,
        n,
        samples,
        seed,
        exact_mean: model_mean(model, n),
        monte_carlo_mean: mean,
        monte_carlo_mean_stderr: (m[2] / count).sqrt(),
        moments,
    })
}

/// The model the paper pairs with each spec.
pub fn sanctioned_model(spec: &AdditiveFunctionSpec) -> Option<TwoPointModel> {
    if spec.is_omega() || spec.is_big_omega() {
        Some(TwoPointModel::BernoulliInvP)
    } else if *spec == AdditiveFunctionSpec::omega1() || *spec == AdditiveFunctionSpec::omega2() {
        Some(TwoPointModel::BernoulliHalfInvP)
    } else if *spec == AdditiveFunctionSpec::omega_difference() {
        Some(TwoPointModel::SymmetricSigned)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRow {
    pub k: usize,
    /// Central moment of the function under the uniform measure on `[1, n]`.
    pub arithmetic: f64,
    pub model_exact: f64,
    pub model_leading_term: f64,
    pub paper_asymptote: Option<f64>,
    /// `arithmetic - model_exact`.
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub spec: String,
    pub model: TwoPointModel,
    pub n: u64,
    pub arithmetic_mean: f64,
    pub model_mean: f64,
    pub rows: Vec<MatchRow>,
}

/// Central moments of an additive function on `[1, n]` next to those of its
/// two-point model, for orders `2..=max_k`.
pub fn match_report(
    spec: &AdditiveFunctionSpec,
    model: TwoPointModel,
    n: u64,
    max_k: usize,
) -> Result<MatchReport> {
    match sanctioned_model(spec) {
        Some(m) if m == model => {}
        Some(m) => {
            return Err(Error::Hypothesis(format!(
                "{} is modelled by {m}, not {model}",
                spec.label()
            )))
        }
        None => return Err(Error::Hypothesis(format!(
            "no two-point model is paired with {}; supported: omega/bigomega ~ bernoulli_inv_p, \
                 omega1/omega2 ~ bernoulli_half_inv_p, omega_diff ~ symmetric_signed",
            spec.label()
        ))),
    }
    if n < 3 {
        return Err(Error::Domain(format!(
            "n = {n}: ln ln n is undefined below 3"
        )));
    }
    let hist = additive::histogram(spec, n)?;
    let stats = moments_from_histogram(&hist, max_k)?;
    let rows = model_moments(model, n, max_k)?
        .into_iter()
        .map(|m| {
            let arithmetic = stats.central_moment(m.k).expect("order within max_k");
            MatchRow {
                k: m.k,
                arithmetic,
                model_exact: m.exact,
                model_leading_term: m.leading_term_sum,
                paper_asymptote: model.paper_asymptote(n, m.k),
                discrepancy: arithmetic - m.exact,
            }
        })
        .collect();
    Ok(MatchReport {
        spec: spec.label(),
        model,
        n,
        arithmetic_mean: stats.mean,
        model_mean: model_mean(model, n),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const SMALL_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29];

    // Brute force over all 2^k sign/indicator patterns.
    fn brute_force(model: TwoPointModel, primes: &[u64]) -> Vec<(f64, f64)> {
        (0u32..1 << primes.len())
            .map(|mask| {
                primes
                    .iter()
                    .enumerate()
                    .fold((0.0, 1.0), |(v, w), (j, &p)| {
                        let law = model.law(p);
                        if mask >> j & 1 == 1 {
                            (v + law.value_a, w * law.prob_a)
                        } else {
                            (v + law.value_b, w * law.prob_b)
                        }
                    })
            })
            .collect()
    }

    fn brute_central(atoms: &[(f64, f64)], k: i32) -> f64 {
        let mu: f64 = atoms.iter().map(|(v, w)| v * w).sum();
        atoms.iter().map(|(v, w)| (v - mu).powi(k) * w).sum()
    }

    #[test]
    fn two_point_examples() {
        assert_eq!(
            two_point_central_moment(1.0, 0.5, 0.0, 0.5, 2).unwrap(),
            0.25
        );
        assert!(two_point_central_moment(1.0, 0.7, 0.0, 0.5, 2).is_err());
        assert!(two_point_central_moment(1.0, 0.5, 0.0, 0.5, 0).is_err());
        for p in [2u64, 3, 5, 101, 7919] {
            for k in 2..=8 {
                let m = TwoPointModel::BernoulliInvP.prime_central_moment(p, k);
                let q = 1.0 / p as f64;
                assert!((m - q).abs() <= k as f64 * q * q + 1e-15, "p={p} k={k}");
                let law = TwoPointModel::BernoulliInvP.law(p);
                assert_relative_eq!(m, law.central_moment(k), max_relative = 1e-12);
            }
            for k in [1, 3, 5, 7] {
                assert_eq!(
                    TwoPointModel::SymmetricSigned.prime_central_moment(p, k),
                    0.0
                );
                assert_eq!(TwoPointModel::SymmetricSigned.law(p).central_moment(k), 0.0);
            }
            assert_eq!(TwoPointModel::SymmetricSigned.law(p).mean(), 0.0);
        }
    }

    #[test]
    fn moment_sum_examples() {
        let m = model_central_moment_sum(TwoPointModel::BernoulliInvP, 10, 2).unwrap();
        let hand = (0.5 - 0.25) + (1.0 / 3.0 - 1.0 / 9.0) + (0.2 - 0.04) + (1.0 / 7.0 - 1.0 / 49.0);
        assert_relative_eq!(m.exact, hand, max_relative = 1e-14);
        assert!((m.exact - 0.754_671_2).abs() < 1e-7);
        for n in [10, 1000, 100_000] {
            assert_eq!(
                model_central_moment_sum(TwoPointModel::SymmetricSigned, n, 3)
                    .unwrap()
                    .exact,
                0.0
            );
        }
        let var = model_central_moment_sum(TwoPointModel::SymmetricSigned, 1_000_000, 2).unwrap();
        assert!((var.exact - 0.5 * ln_ln(1_000_000)).abs() < 0.5);
        assert!(model_moments(TwoPointModel::BernoulliInvP, 10, 1).is_err());
    }

    #[test]
    fn variance_gap_is_bounded() {
        let mut grid = vec![2u64, 3, 10, 100, 10_000];
        grid.push(1_000_000);
        for n in grid {
            let var = model_central_moment_sum(TwoPointModel::BernoulliInvP, n, 2)
                .unwrap()
                .exact;
            let gap = var - model_mean(TwoPointModel::BernoulliInvP, n);
            assert!(gap < 0.0 && gap > -0.4523, "n={n} gap={gap}");
        }
    }

    #[test]
    fn signed_fourth_moment_leading_term_is_bounded() {
        for n in [10u64, 1000, 1_000_000] {
            let m = model_central_moment_sum(TwoPointModel::SymmetricSigned, n, 4).unwrap();
            assert!(m.leading_term_sum < 0.12, "{m:?}");
            assert!(!m.leading_term_is_exact);
        }
    }

    #[test]
    fn exact_distribution_examples() {
        let d = exact_distribution(TwoPointModel::BernoulliInvP, 3).unwrap();
        let r = d.rational_probabilities().unwrap();
        let frac = |a: i64, b: i64| BigRational::new(a.into(), b.into());
        assert_eq!(r, &[frac(1, 3), frac(1, 2), frac(1, 6)]);
        for model in TwoPointModel::ALL {
            let d = exact_distribution(model, 1).unwrap();
            assert_eq!(d.atoms(), &[(0.0, 1.0)]);
        }
        assert!(matches!(
            exact_distribution_with(TwoPointModel::SymmetricSigned, 30, 512),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn exact_distribution_matches_analytic_sums() {
        for model in TwoPointModel::ALL {
            for n in 1..=30u64 {
                let d = exact_distribution(model, n).unwrap();
                assert!((d.total_probability() - 1.0).abs() < 1e-12);
                let moments = model_moments(model, n, 6).unwrap();
                for m in &moments {
                    let got = d.central_moment(m.k as u32);
                    if m.exact == 0.0 {
                        assert!(got.abs() < 1e-14, "{model} n={n} k={}", m.k);
                    } else {
                        assert_relative_eq!(got, m.exact, max_relative = 1e-10);
                    }
                }
                let primes: Vec<u64> = SMALL_PRIMES.iter().copied().filter(|&p| p <= n).collect();
                let brute = brute_force(model, &primes);
                for k in 2..=6 {
                    let b = brute_central(&brute, k);
                    let e = moments[k as usize - 2].exact;
                    assert!(
                        (b - e).abs() <= 1e-12 * b.abs().max(1e-3),
                        "{model} n={n} k={k}: {b} vs {e}"
                    );
                }
            }
        }
    }

    #[test]
    fn leading_term_differs_from_exact_at_order_four() {
        let m = model_central_moment_sum(TwoPointModel::BernoulliInvP, 1000, 4).unwrap();
        let v = model_central_moment_sum(TwoPointModel::BernoulliInvP, 1000, 2)
            .unwrap()
            .exact;
        assert_relative_eq!(
            m.exact - m.leading_term_sum,
            3.0 * v * v
                - 3.0 * {
                    let mut s = 0.0;
                    sieve::for_each_prime(1000, |p| {
                        let q = 1.0 / p as f64;
                        s += (q * (1.0 - q)).powi(2);
                    });
                    s
                },
            max_relative = 1e-10
        );
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let r = monte_carlo(TwoPointModel::BernoulliInvP, 10_000, 4, 100_000, 7).unwrap();
        assert!(
            (r.monte_carlo_mean - r.exact_mean).abs() < 4.0 * r.monte_carlo_mean_stderr,
            "{r:?}"
        );
        for m in &r.moments {
            assert!(m.z_score().abs() < 4.0, "{m:?}");
        }
        let s = monte_carlo(TwoPointModel::SymmetricSigned, 10_000, 6, 100_000, 42).unwrap();
        for m in &s.moments {
            if m.k % 2 == 1 {
                assert_eq!(m.exact_central_moment, 0.0);
                assert!(
                    m.monte_carlo_estimate.abs() < 4.0 * m.monte_carlo_stderr,
                    "{m:?}"
                );
            }
            assert!(m.z_score().abs() < 4.0, "{m:?}");
        }
        let h = monte_carlo(TwoPointModel::BernoulliHalfInvP, 1000, 3, 20_000, 1).unwrap();
        assert!(h.moments.iter().all(|m| m.z_score().abs() < 4.0));
        assert!(monte_carlo(TwoPointModel::BernoulliInvP, 100, 2, 999, 1).is_err());
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        for model in TwoPointModel::ALL {
            let a = monte_carlo(model, 5000, 6, 4000, 99).unwrap();
            let b = monte_carlo(model, 5000, 6, 4000, 99).unwrap();
            let c = monte_carlo_sequential(model, 5000, 6, 4000, 99).unwrap();
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap()
            );
            assert_eq!(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&c).unwrap()
            );
            let d = monte_carlo(model, 5000, 6, 4000, 100).unwrap();
            assert_ne!(a.monte_carlo_mean, d.monte_carlo_mean);
        }
    }

    #[test]
    fn match_report_examples() {
        let omega = match_report(
            &AdditiveFunctionSpec::omega(),
            TwoPointModel::BernoulliInvP,
            1_000_000,
            4,
        )
        .unwrap();
        let ll = ln_ln(1_000_000);
        assert!((ll - 2.626).abs() < 1e-3);
        assert_eq!(omega.rows.len(), 3);
        assert!((omega.rows[0].arithmetic - ll).abs() < 2.0);
        assert!((omega.rows[0].model_exact - ll).abs() < 2.0);
        for row in &omega.rows {
            assert_eq!(row.discrepancy, row.arithmetic - row.model_exact);
        }

        let signed = match_report(
            &AdditiveFunctionSpec::omega_difference(),
            TwoPointModel::SymmetricSigned,
            100_000,
            4,
        )
        .unwrap();
        assert_eq!(signed.rows[1].model_exact, 0.0);
        assert_eq!(signed.rows[1].paper_asymptote, Some(0.0));
        assert!(signed.rows[1].arithmetic.is_finite());
        assert!(signed.rows[2].model_leading_term < 0.12);
        assert_eq!(signed.rows[2].paper_asymptote, None);

        for (spec, model) in [
            (
                AdditiveFunctionSpec::big_omega(),
                TwoPointModel::BernoulliInvP,
            ),
            (
                AdditiveFunctionSpec::omega1(),
                TwoPointModel::BernoulliHalfInvP,
            ),
            (
                AdditiveFunctionSpec::omega2(),
                TwoPointModel::BernoulliHalfInvP,
            ),
        ] {
            assert!(match_report(&spec, model, 1000, 3).is_ok());
        }
        assert!(matches!(
            match_report(
                &AdditiveFunctionSpec::omega(),
                TwoPointModel::SymmetricSigned,
                1000,
                3
            ),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            match_report(
                &AdditiveFunctionSpec::phi_log(),
                TwoPointModel::BernoulliInvP,
                1000,
                3
            ),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn model_names_round_trip() {
        for m in TwoPointModel::ALL {
            assert_eq!(m.to_string().parse::<TwoPointModel>().unwrap(), m);
        }
        assert_eq!(
            "signed".parse::<TwoPointModel>().unwrap(),
            TwoPointModel::SymmetricSigned
        );
        assert!("gauss".parse::<TwoPointModel>().is_err());
    }

    proptest! {
        #[test]
        fn two_point_second_moment(a in -5.0f64..5.0, b in -5.0f64..5.0, q in 0.0f64..=1.0) {
            let m = two_point_central_moment(a, q, b, 1.0 - q, 2).unwrap();
            prop_assert!((m - q * (1.0 - q) * (a - b).powi(2)).abs() < 1e-12);
            prop_assert!(two_point_central_moment(a, q, b, 1.0 - q, 1).unwrap().abs() < 1e-12);
        }

        #[test]
        fn cumulant_round_trip(c2 in 0.01f64..2.0, c3 in -1.0f64..1.0, c4 in 0.0f64..5.0) {
            let c = [1.0, 0.0, c2, c3, c4];
            let back = central_from_cumulants(&cumulants_from_central(&c));
            for j in 2..=4 {
                prop_assert!((back[j] - c[j]).abs() < 1e-12);
            }
        }
    }
}
