//! Strongly additive arithmetic functions and their value histograms on `[1, n]`.
//!
//! A strongly additive function is fixed by its values on primes:
//! `f(m) = sum of f(p) over the distinct primes p dividing m`. The one
//! exception supported here is Omega, which counts prime factors with
//! multiplicity.
//!
//! # Text format
//!
//! Specs serialize to a single line of `key=value` pairs separated by `;`
//! (newlines are accepted as separators too, and `#` starts a comment):
//!
//! ```text
//! kind=residue_class;modulus=4;residue=1;weight=1;mode=distinct
//! ```
//!
//! | kind                | parameters                                     |
//! |---------------------|------------------------------------------------|
//! | `constant_one`      | none                                           |
//! | `excluded_primes`   | `primes=3,7,11`                                |
//! | `scaled_primes`     | `values=3:0.5,7:0.25` (values in `(0, 1)`)     |
//! | `residue_class`     | `modulus`, `residue`, `weight` (default `1`)   |
//! | `parity_indexed`    | `selector=even_index\|odd_index`, `value` (default `1`) |
//! | `phi_log`           | none                                           |
//! | `signed_difference` | none                                           |
//!
//! `mode` is `distinct` (default) or `with_multiplicity`; the latter is only
//! valid for `constant_one`. Shorthand names (`omega`, `bigomega`, `omega1`,
//! `omega2`, `omega_diff`, `phi_log`, `even_index`, `odd_index_neg`) parse to
//! the corresponding canonical specs.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::sieve::{self, for_each_prime, BlockConsumer, BlockDetail, FactorBlock, SieveConfig};

/// Bin width for real-valued functions.
pub const DEFAULT_BIN_WIDTH: f64 = 1e-3;

/// Values are accumulated as integers in units of `2^-40` so that bin sums
/// merge associatively.
const FIXED_POINT_SCALE: f64 = (1u64 << 40) as f64;

fn to_fixed(v: f64) -> i128 {
    (v * FIXED_POINT_SCALE).round() as i128
}

fn from_fixed(x: i128) -> f64 {
    x as f64 / FIXED_POINT_SCALE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndexParity {
    /// p2, p4, p6, ... with p1 = 2.
    Even,
    /// p1, p3, p5, ...
    Odd,
}

impl IndexParity {
    fn of(index: u64) -> Self {
        if index.is_multiple_of(2) {
            IndexParity::Even
        } else {
            IndexParity::Odd
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            IndexParity::Even => "even_index",
            IndexParity::Odd => "odd_index",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultiplicityMode {
    Distinct,
    WithMultiplicity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpecKind {
    /// f(p) = 1: omega, or Omega with multiplicity.
    ConstantOne,
    /// f(q) = 0 on the listed primes, 1 elsewhere.
    ExcludedPrimes(Vec<u64>),
    /// f(p) = value in (0, 1) on the listed primes, 1 elsewhere.
    ScaledPrimes(Vec<(u64, f64)>),
    /// f(p) = weight when p = residue (mod modulus), 0 otherwise.
    ResidueClass {
        modulus: u64,
        residue: u64,
        weight: f64,
    },
    /// f(p_i) = value when the 1-based index i has the given parity.
    ParityIndexed { selector: IndexParity, value: f64 },
    /// f(p) = -ln(1 - 1/p), so that f(m) = |ln(phi(m)/m)|.
    PhiLog,
    /// omega_1 - omega_2: +1 on p = 1 (mod 4), -1 on p = 3 (mod 4), 0 at 2.
    SignedDifference,
}

/// A validated strongly additive function (or Omega).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AdditiveFunctionSpec {
    kind: SpecKind,
    mode: MultiplicityMode,
}

impl AdditiveFunctionSpec {
    pub fn new(kind: SpecKind, mode: MultiplicityMode) -> Result<Self> {
        let kind = match kind {
            SpecKind::ExcludedPrimes(mut primes) => {
                primes.sort_unstable();
                primes.dedup();
                if let Some(q) = primes.iter().find(|&&q| !sieve::is_prime(q)) {
                    return Err(Error::InvalidArgument(format!(
                        "excluded value {q} is not prime"
                    )));
                }
                SpecKind::ExcludedPrimes(primes)
            }
            SpecKind::ScaledPrimes(mut values) => {
                values.sort_by_key(|&(p, _)| p);
                for w in values.windows(2) {
                    if w[0].0 == w[1].0 {
                        return Err(Error::InvalidArgument(format!(
                            "prime {} listed twice",
                            w[0].0
                        )));
                    }
                }
                for &(p, v) in &values {
                    if !sieve::is_prime(p) {
                        return Err(Error::InvalidArgument(format!("{p} is not prime")));
                    }
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::InvalidArgument(format!(
                            "scaled value {v} for prime {p} must lie strictly inside (0, 1)"
                        )));
                    }
                }
                SpecKind::ScaledPrimes(values)
            }
            SpecKind::ResidueClass {
                modulus,
                residue,
                weight,
            } => {
                if modulus == 0 || residue >= modulus {
                    return Err(Error::InvalidArgument(format!(
                        "residue class {residue} mod {modulus} is not reduced"
                    )));
                }
                if !weight.is_finite() {
                    return Err(Error::InvalidArgument("weight must be finite".into()));
                }
                SpecKind::ResidueClass {
                    modulus,
                    residue,
                    weight,
                }
            }
            SpecKind::ParityIndexed { selector, value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidArgument("value must be finite".into()));
                }
                SpecKind::ParityIndexed { selector, value }
            }
            other => other,
        };
        if mode == MultiplicityMode::WithMultiplicity && kind != SpecKind::ConstantOne {
            return Err(Error::InvalidArgument(
                "with_multiplicity is only defined for constant_one (Omega)".into(),
            ));
        }
        Ok(AdditiveFunctionSpec { kind, mode })
    }

    /// omega(m): number of distinct prime divisors.
    pub fn omega() -> Self {
        AdditiveFunctionSpec {
            kind: SpecKind::ConstantOne,
            mode: MultiplicityMode::Distinct,
        }
    }

    /// Omega(m): number of prime divisors with multiplicity.
    pub fn big_omega() -> Self {
        AdditiveFunctionSpec {
            kind: SpecKind::ConstantOne,
            mode: MultiplicityMode::WithMultiplicity,
        }
    }

    /// omega_1: distinct prime divisors p = 1 (mod 4).
    pub fn omega1() -> Self {
        Self::distinct(SpecKind::ResidueClass {
            modulus: 4,
            residue: 1,
            weight: 1.0,
        })
    }

    /// omega_2: distinct prime divisors p = 3 (mod 4).
    pub fn omega2() -> Self {
        Self::distinct(SpecKind::ResidueClass {
            modulus: 4,
            residue: 3,
            weight: 1.0,
        })
    }

    pub fn omega_difference() -> Self {
        Self::distinct(SpecKind::SignedDifference)
    }

    pub fn phi_log() -> Self {
        Self::distinct(SpecKind::PhiLog)
    }

    fn distinct(kind: SpecKind) -> Self {
        AdditiveFunctionSpec {
            kind,
            mode: MultiplicityMode::Distinct,
        }
    }

    pub fn kind(&self) -> &SpecKind {
        &self.kind
    }

    pub fn mode(&self) -> MultiplicityMode {
        self.mode
    }

    pub fn is_strongly_additive(&self) -> bool {
        self.mode == MultiplicityMode::Distinct
    }

    pub fn is_omega(&self) -> bool {
        *self == Self::omega()
    }

    pub fn is_big_omega(&self) -> bool {
        *self == Self::big_omega()
    }

    /// Short human label used in reports.
    pub fn label(&self) -> String {
        match (&self.kind, self.mode) {
            (SpecKind::ConstantOne, MultiplicityMode::Distinct) => "omega".into(),
            (SpecKind::ConstantOne, MultiplicityMode::WithMultiplicity) => "bigomega".into(),
            _ if *self == Self::omega1() => "omega1".into(),
            _ if *self == Self::omega2() => "omega2".into(),
            (SpecKind::SignedDifference, _) => "omega_diff".into(),
            (SpecKind::PhiLog, _) => "phi_log".into(),
            _ => self.to_string(),
        }
    }

    /// Every value f(m) is an integer.
    pub fn is_integer_valued(&self) -> bool {
        match &self.kind {
            SpecKind::ConstantOne | SpecKind::ExcludedPrimes(_) | SpecKind::SignedDifference => {
                true
            }
            SpecKind::ResidueClass { weight, .. } => weight.fract() == 0.0,
            SpecKind::ParityIndexed { value, .. } => value.fract() == 0.0,
            SpecKind::ScaledPrimes(_) | SpecKind::PhiLog => false,
        }
    }

    pub fn default_binning(&self) -> Binning {
        if self.is_integer_valued() {
            Binning::ExactInteger
        } else {
            Binning::FixedWidth(DEFAULT_BIN_WIDTH)
        }
    }

    /// Whether the spec needs the parity of a prime's index.
    fn needs_index(&self) -> bool {
        matches!(self.kind, SpecKind::ParityIndexed { .. })
    }

    fn value_with_parity(&self, p: u64, parity: IndexParity) -> f64 {
        match &self.kind {
            SpecKind::ConstantOne => 1.0,
            SpecKind::ExcludedPrimes(qs) => {
                if qs.binary_search(&p).is_ok() {
                    0.0
                } else {
                    1.0
                }
            }
            SpecKind::ScaledPrimes(vs) => match vs.binary_search_by_key(&p, |&(q, _)| q) {
                Ok(i) => vs[i].1,
                Err(_) => 1.0,
            },
            SpecKind::ResidueClass {
                modulus,
                residue,
                weight,
            } => {
                if p % modulus == *residue {
                    *weight
                } else {
                    0.0
                }
            }
            SpecKind::ParityIndexed { selector, value } => {
                if parity == *selector {
                    *value
                } else {
                    0.0
                }
            }
            SpecKind::PhiLog => -(-1.0 / p as f64).ln_1p(),
            SpecKind::SignedDifference => match p % 4 {
                1 => 1.0,
                3 => -1.0,
                _ => 0.0,
            },
        }
    }

    /// f(p) for the prime `p` with 1-based index `index` (p_1 = 2).
    pub fn prime_value(&self, p: u64, index: u64) -> f64 {
        self.value_with_parity(p, IndexParity::of(index))
    }

    /// Upper bound of |f(p)| over all primes.
    pub fn max_abs_prime_value(&self) -> f64 {
        match &self.kind {
            SpecKind::ConstantOne | SpecKind::ExcludedPrimes(_) | SpecKind::ScaledPrimes(_) => 1.0,
            SpecKind::ResidueClass { weight, .. } => weight.abs(),
            SpecKind::ParityIndexed { value, .. } => value.abs(),
            SpecKind::PhiLog => std::f64::consts::LN_2,
            SpecKind::SignedDifference => 1.0,
        }
    }

    /// f(p) >= 0 for every prime.
    pub fn is_nonnegative(&self) -> bool {
        match &self.kind {
            SpecKind::ResidueClass { weight, .. } => *weight >= 0.0,
            SpecKind::ParityIndexed { value, .. } => *value >= 0.0,
            SpecKind::SignedDifference => false,
            _ => true,
        }
    }

    /// Whether infinitely many primes carry a nonzero value with
    /// `sum f(p)^2 / p` divergent, i.e. whether the variance grows without bound.
    pub fn variance_diverges(&self) -> bool {
        match &self.kind {
            SpecKind::PhiLog => false,
            SpecKind::ResidueClass {
                modulus,
                residue,
                weight,
            } => *weight != 0.0 && gcd(*modulus, *residue) == 1,
            SpecKind::ParityIndexed { value, .. } => *value != 0.0,
            _ => true,
        }
    }

    /// Whether `sum_{p<=n} f(p)/p` tends to infinity (the mean grows without
    /// bound). Only meaningful for nonnegative specs.
    pub fn mean_diverges(&self) -> bool {
        self.is_nonnegative() && self.variance_diverges()
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for AdditiveFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SpecKind::ConstantOne => write!(f, "kind=constant_one")?,
            SpecKind::ExcludedPrimes(qs) => {
                let list: Vec<String> = qs.iter().map(u64::to_string).collect();
                write!(f, "kind=excluded_primes;primes={}", list.join(","))?
            }
            SpecKind::ScaledPrimes(vs) => {
                let list: Vec<String> = vs.iter().map(|(p, v)| format!("{p}:{v}")).collect();
                write!(f, "kind=scaled_primes;values={}", list.join(","))?
            }
            SpecKind::ResidueClass {
                modulus,
                residue,
                weight,
            } => write!(
                f,
                "kind=residue_class;modulus={modulus};residue={residue};weight={weight}"
            )?,
            SpecKind::ParityIndexed { selector, value } => write!(
                f,
                "kind=parity_indexed;selector={};value={value}",
                selector.as_str()
            )?,
            SpecKind::PhiLog => write!(f, "kind=phi_log")?,
            SpecKind::SignedDifference => write!(f, "kind=signed_difference")?,
        }
        let mode = match self.mode {
            MultiplicityMode::Distinct => "distinct",
            MultiplicityMode::WithMultiplicity => "with_multiplicity",
        };
        write!(f, ";mode={mode}")
    }
}

fn parse_num<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad value {raw:?} for {key}")))
}

impl FromStr for AdditiveFunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        match trimmed {
            "omega" => return Ok(Self::omega()),
            "bigomega" | "Omega" => return Ok(Self::big_omega()),
            "omega1" => return Ok(Self::omega1()),
            "omega2" => return Ok(Self::omega2()),
            "omega_diff" | "signed" | "signed_difference" => return Ok(Self::omega_difference()),
            "phi_log" => return Ok(Self::phi_log()),
            "even_index" => {
                return Ok(Self::distinct(SpecKind::ParityIndexed {
                    selector: IndexParity::Even,
                    value: 1.0,
                }))
            }
            "odd_index_neg" => {
                return Ok(Self::distinct(SpecKind::ParityIndexed {
                    selector: IndexParity::Odd,
                    value: -1.0,
                }))
            }
            _ => {}
        }
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for entry in trimmed.split([';', '\n']) {
            let entry = entry.split('#').next().unwrap_or("").trim();
            if entry.is_empty() {
                continue;
            }
            let (k, v) = entry
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {entry:?}")))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::Parse(format!("duplicate key {:?}", k.trim())));
            }
        }
        let mut take = |key: &str| fields.remove(key);
        let kind_name = take("kind").ok_or_else(|| Error::Parse("missing kind".into()))?;
        let mode = match take("mode") {
            None | Some("distinct") => MultiplicityMode::Distinct,
            Some("with_multiplicity") => MultiplicityMode::WithMultiplicity,
            Some(other) => return Err(Error::Parse(format!("unknown mode {other:?}"))),
        };
        let kind = match kind_name {
            "constant_one" => SpecKind::ConstantOne,
            "excluded_primes" => {
                let raw = take("primes").unwrap_or("");
                let primes = raw
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| parse_num("primes", t))
                    .collect::<Result<Vec<u64>>>()?;
                SpecKind::ExcludedPrimes(primes)
            }
            "scaled_primes" => {
                let raw = take("values").ok_or_else(|| Error::Parse("missing values".into()))?;
                let values = raw
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        let (p, v) = t
                            .split_once(':')
                            .ok_or_else(|| Error::Parse(format!("expected p:value, got {t:?}")))?;
                        Ok((parse_num("values", p)?, parse_num("values", v)?))
                    })
                    .collect::<Result<Vec<(u64, f64)>>>()?;
                SpecKind::ScaledPrimes(values)
            }
            "residue_class" => SpecKind::ResidueClass {
                modulus: parse_num(
                    "modulus",
                    take("modulus").ok_or_else(|| Error::Parse("missing modulus".into()))?,
                )?,
                residue: parse_num(
                    "residue",
                    take("residue").ok_or_else(|| Error::Parse("missing residue".into()))?,
                )?,
                weight: take("weight").map_or(Ok(1.0), |w| parse_num("weight", w))?,
            },
            "parity_indexed" => SpecKind::ParityIndexed {
                selector: match take("selector") {
                    Some("even_index") => IndexParity::Even,
                    Some("odd_index") => IndexParity::Odd,
                    other => return Err(Error::Parse(format!("bad selector {other:?}"))),
                },
                value: take("value").map_or(Ok(1.0), |v| parse_num("value", v))?,
            },
            "phi_log" => SpecKind::PhiLog,
            "signed_difference" => SpecKind::SignedDifference,
            other => return Err(Error::Parse(format!("unknown kind {other:?}"))),
        };
        if let Some(extra) = fields.keys().next() {
            return Err(Error::Parse(format!(
                "unexpected key {extra:?} for {kind_name}"
            )));
        }
        AdditiveFunctionSpec::new(kind, mode)
    }
}

impl TryFrom<String> for AdditiveFunctionSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AdditiveFunctionSpec> for String {
    fn from(spec: AdditiveFunctionSpec) -> String {
        spec.to_string()
    }
}

/// One bit per odd number up to a bound, set when the number is a prime
/// with an even 1-based index.
#[derive(Debug, Clone)]
pub struct PrimeIndexParity {
    bound: u64,
    even: Vec<u64>,
}

impl PrimeIndexParity {
    pub fn build(bound: u64, config: &SieveConfig) -> Result<Self> {
        let words = (bound / 2 + 1).div_ceil(64);
        let required = words * 8;
        if required > config.memory_budget {
            return Err(Error::Capacity {
                what: "prime index parity table",
                required,
                budget: config.memory_budget,
            });
        }
        let mut even = vec![0u64; words as usize];
        let mut index = 0u64;
        for_each_prime(bound, |p| {
            index += 1;
            if index.is_multiple_of(2) {
                let bit = p / 2;
                even[(bit / 64) as usize] |= 1 << (bit % 64);
            }
        });
        Ok(PrimeIndexParity { bound, even })
    }

    /// Parity of the index of the prime `p <= bound`.
    pub fn parity(&self, p: u64) -> IndexParity {
        debug_assert!(p <= self.bound);
        if p == 2 {
            return IndexParity::Odd;
        }
        let bit = p / 2;
        if self.even[(bit / 64) as usize] >> (bit % 64) & 1 == 1 {
            IndexParity::Even
        } else {
            IndexParity::Odd
        }
    }
}

/// f(p) lookup for every prime up to a bound.
#[derive(Debug, Clone)]
pub struct PrimeWeights<'a> {
    spec: &'a AdditiveFunctionSpec,
    parity: Option<PrimeIndexParity>,
}

impl<'a> PrimeWeights<'a> {
    pub fn new(spec: &'a AdditiveFunctionSpec, bound: u64, config: &SieveConfig) -> Result<Self> {
        let parity = if spec.needs_index() {
            Some(PrimeIndexParity::build(bound, config)?)
        } else {
            None
        };
        Ok(PrimeWeights { spec, parity })
    }

    pub fn weight(&self, p: u64) -> f64 {
        let parity = self
            .parity
            .as_ref()
            .map_or(IndexParity::Odd, |t| t.parity(p));
        self.spec.value_with_parity(p, parity)
    }
}

fn trial_factor(mut m: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d <= m / d {
        if m.is_multiple_of(d) {
            let mut e = 0;
            while m.is_multiple_of(d) {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// f(m) for a single `m >= 1` by trial division. Use [`histogram`] for ranges.
pub fn eval_at(spec: &AdditiveFunctionSpec, m: u64) -> f64 {
    assert!(m >= 1, "arithmetic functions are defined on m >= 1");
    let factors = trial_factor(m);
    if spec.mode == MultiplicityMode::WithMultiplicity {
        return factors.iter().map(|&(_, e)| f64::from(e)).sum();
    }
    factors
        .iter()
        .map(|&(p, _)| {
            let index = if spec.needs_index() {
                sieve::prime_count(p)
            } else {
                1
            };
            spec.prime_value(p, index)
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Binning {
    ExactInteger,
    FixedWidth(f64),
}

impl Binning {
    fn key(self, v: f64) -> i64 {
        match self {
            Binning::ExactInteger => v as i64,
            Binning::FixedWidth(w) => (v / w).floor() as i64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Bin {
    count: u64,
    sum: i128,
}

/// Exact counts of the values of a function over `[1, n]`.
///
/// With [`Binning::ExactInteger`] each bin holds one integer value. With
/// [`Binning::FixedWidth`] a bin holds every value in `[k w, (k+1) w)` and is
/// represented by the mean of those values, so the histogram mean is exact
/// while higher moments carry at most the bin width of smoothing.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHistogram {
    n: u64,
    binning: Binning,
    bins: BTreeMap<i64, Bin>,
}

impl ValueHistogram {
    pub fn new(binning: Binning) -> Self {
        ValueHistogram {
            n: 0,
            binning,
            bins: BTreeMap::new(),
        }
    }

    /// Histogram of `(value, count)` pairs; repeated values accumulate.
    pub fn from_counts(
        binning: Binning,
        counts: impl IntoIterator<Item = (f64, u64)>,
    ) -> Result<Self> {
        if let Binning::FixedWidth(w) = binning {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidBinning(format!("bin width {w}")));
            }
        }
        let mut h = ValueHistogram::new(binning);
        for (v, c) in counts {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite value {v}")));
            }
            if binning == Binning::ExactInteger && v.fract() != 0.0 {
                return Err(Error::InvalidBinning(format!(
                    "value {v} in an exact-integer histogram"
                )));
            }
            h.add_many(v, c);
        }
        Ok(h)
    }

    pub fn from_values(binning: Binning, values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::from_counts(binning, values.into_iter().map(|v| (v, 1)))
    }

    fn add_many(&mut self, v: f64, count: u64) {
        if count == 0 {
            return;
        }
        let bin = self.bins.entry(self.binning.key(v)).or_default();
        bin.count += count;
        bin.sum += to_fixed(v) * i128::from(count);
        self.n += count;
    }

    /// Bin-wise sum. Both histograms must share the binning.
    pub fn merge(&mut self, other: &ValueHistogram) {
        assert_eq!(self.binning, other.binning, "merging different binnings");
        for (&k, b) in &other.bins {
            let bin = self.bins.entry(k).or_default();
            bin.count += b.count;
            bin.sum += b.sum;
        }
        self.n += other.n;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn binning(&self) -> Binning {
        self.binning
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of occupied bins.
    pub fn bin_count(&self) -> usize {
        self.bins.len()
    }

    fn representative(&self, key: i64, bin: &Bin) -> f64 {
        match self.binning {
            Binning::ExactInteger => key as f64,
            Binning::FixedWidth(_) => from_fixed(bin.sum) / bin.count as f64,
        }
    }

    /// `(value, count)` in ascending value order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, u64)> + '_ {
        self.bins
            .iter()
            .map(|(&k, b)| (self.representative(k, b), b.count))
    }

    /// Count of an exact value (exact-integer binning) or of its bin.
    pub fn count_of(&self, v: f64) -> u64 {
        self.bins.get(&self.binning.key(v)).map_or(0, |b| b.count)
    }

    /// Sum of all values.
    pub fn total(&self) -> f64 {
        match self.binning {
            Binning::ExactInteger => self
                .bins
                .iter()
                .map(|(&k, b)| i128::from(k) * i128::from(b.count))
                .sum::<i128>() as f64,
            Binning::FixedWidth(_) => from_fixed(self.bins.values().map(|b| b.sum).sum()),
        }
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.n as f64
    }
}

/// Dense per-block bin storage; keys of one block span a narrow range.
struct DenseBins {
    min: i64,
    counts: Vec<u64>,
    sums: Vec<i128>,
}

impl DenseBins {
    fn new() -> Self {
        DenseBins {
            min: 0,
            counts: Vec::new(),
            sums: Vec::new(),
        }
    }

    fn add(&mut self, key: i64, fixed: i128) {
        if self.counts.is_empty() {
            self.min = key;
        }
        if key < self.min {
            let grow = (self.min - key) as usize;
            self.counts.splice(0..0, std::iter::repeat_n(0, grow));
            self.sums.splice(0..0, std::iter::repeat_n(0, grow));
            self.min = key;
        }
        let idx = (key - self.min) as usize;
        if idx >= self.counts.len() {
            self.counts.resize(idx + 1, 0);
            self.sums.resize(idx + 1, 0);
        }
        self.counts[idx] += 1;
        self.sums[idx] += fixed;
    }

    fn into_histogram(self, binning: Binning) -> ValueHistogram {
        let mut h = ValueHistogram::new(binning);
        for (i, (&count, &sum)) in self.counts.iter().zip(&self.sums).enumerate() {
            if count > 0 {
                h.bins.insert(self.min + i as i64, Bin { count, sum });
                h.n += count;
            }
        }
        h
    }
}

/// Histograms for several prefixes `[1, n_i]` in one pass: values of `m` go
/// to the band of the smallest cutoff `>= m`, and bands are summed at the end.
struct HistogramConsumer<'a> {
    spec: &'a AdditiveFunctionSpec,
    weights: PrimeWeights<'a>,
    binning: Binning,
    cutoffs: &'a [u64],
}

impl HistogramConsumer<'_> {
    fn value(&self, block: &FactorBlock, m: u64) -> f64 {
        match (&self.spec.kind, self.spec.mode) {
            (SpecKind::ConstantOne, MultiplicityMode::Distinct) => {
                f64::from(block.distinct_count(m))
            }
            (SpecKind::ConstantOne, MultiplicityMode::WithMultiplicity) => {
                f64::from(block.total_count(m))
            }
            _ => block
                .factors(m)
                .expect("factor detail requested")
                .iter()
                .map(|pp| self.weights.weight(pp.prime))
                .sum(),
        }
    }
}

impl BlockConsumer for HistogramConsumer<'_> {
    type Output = Vec<ValueHistogram>;

    fn detail(&self) -> BlockDetail {
        match self.spec.kind {
            SpecKind::ConstantOne => BlockDetail::Counts,
            _ => BlockDetail::Factors,
        }
    }

    fn identity(&self) -> Self::Output {
        vec![ValueHistogram::new(self.binning); self.cutoffs.len()]
    }

    fn consume(&self, block: &FactorBlock) -> Self::Output {
        let mut band = self.cutoffs.partition_point(|&c| c < block.range_start());
        let mut out = self.identity();
        let mut dense = DenseBins::new();
        for m in block.range() {
            if m > self.cutoffs[band] {
                let done = std::mem::replace(&mut dense, DenseBins::new());
                out[band] = done.into_histogram(self.binning);
                band += 1;
            }
            let v = self.value(block, m);
            dense.add(self.binning.key(v), to_fixed(v));
        }
        out[band] = dense.into_histogram(self.binning);
        out
    }

    fn merge(&self, mut a: Self::Output, b: Self::Output) -> Self::Output {
        for (x, y) in a.iter_mut().zip(&b) {
            x.merge(y);
        }
        a
    }
}

fn check_binning(spec: &AdditiveFunctionSpec, binning: Binning) -> Result<()> {
    match binning {
        Binning::ExactInteger if !spec.is_integer_valued() => Err(Error::InvalidBinning(format!(
            "{} is real-valued; use fixed-width bins",
            spec.label()
        ))),
        Binning::FixedWidth(w) if !(w > 0.0 && w.is_finite()) => {
            Err(Error::InvalidBinning(format!("bin width {w}")))
        }
        _ => Ok(()),
    }
}

/// Value histogram of `spec` over `[1, n]` with the spec's default binning.
pub fn histogram(spec: &AdditiveFunctionSpec, n: u64) -> Result<ValueHistogram> {
    histogram_with(spec, n, spec.default_binning(), &SieveConfig::default())
}

pub fn histogram_with(
    spec: &AdditiveFunctionSpec,
    n: u64,
    binning: Binning,
    config: &SieveConfig,
) -> Result<ValueHistogram> {
    Ok(histograms(spec, &[n], binning, config)?.remove(0))
}

/// Histograms over `[1, n]` for every `n` in `grid`, from a single sieve pass
/// up to the largest `n`. Output order follows `grid`.
pub fn histograms(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    binning: Binning,
    config: &SieveConfig,
) -> Result<Vec<ValueHistogram>> {
    run_histograms(spec, grid, binning, config, false)
}

/// [`histograms`] on the calling thread only.
pub fn histograms_sequential(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    binning: Binning,
    config: &SieveConfig,
) -> Result<Vec<ValueHistogram>> {
    run_histograms(spec, grid, binning, config, true)
}

fn run_histograms(
    spec: &AdditiveFunctionSpec,
    grid: &[u64],
    binning: Binning,
    config: &SieveConfig,
    sequential: bool,
) -> Result<Vec<ValueHistogram>> {
    check_binning(spec, binning)?;
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    if let Some(&bad) = grid.iter().find(|&&n| n == 0) {
        return Err(Error::Domain(format!("histogram needs n >= 1, got {bad}")));
    }
    if config.block_size == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let mut cutoffs = grid.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let max = *cutoffs.last().unwrap();
    let consumer = HistogramConsumer {
        spec,
        weights: PrimeWeights::new(spec, max, config)?,
        binning,
        cutoffs: &cutoffs,
    };
    let bands = if sequential {
        sieve::sieve_blocks_sequential(max, config.block_size, &consumer)
    } else {
        sieve::sieve_blocks(max, config.block_size, &consumer)
    };
    let mut prefix = Vec::with_capacity(bands.len());
    let mut acc = ValueHistogram::new(binning);
    for band in &bands {
        acc.merge(band);
        prefix.push(acc.clone());
    }
    Ok(grid
        .iter()
        .map(|n| prefix[cutoffs.binary_search(n).unwrap()].clone())
        .collect())
}

/// Mean of f over `[1, n]` from the prime sum `sum_{p<=n} f(p) floor(n/p) / n`,
/// without enumerating `m`. Defined for strongly additive specs only.
pub fn exact_mean(spec: &AdditiveFunctionSpec, n: u64) -> Result<f64> {
    if !spec.is_strongly_additive() {
        return Err(Error::Unsupported(
            "the prime-sum mean identity does not hold with multiplicity".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let mut index = 0u64;
    if spec.is_integer_valued() {
        let mut total: i128 = 0;
        for_each_prime(n, |p| {
            index += 1;
            total += spec.prime_value(p, index) as i128 * i128::from(n / p);
        });
        Ok(total as f64 / n as f64)
    } else {
        let mut total = CompensatedSum::default();
        for_each_prime(n, |p| {
            index += 1;
            total.add(spec.prime_value(p, index) * (n / p) as f64);
        });
        Ok(total.value() / n as f64)
    }
}

/// `sum_{p<=n} f(p)/p`, the large-n asymptote of the mean.
pub fn mean_asymptote(spec: &AdditiveFunctionSpec, n: u64) -> f64 {
    let mut index = 0u64;
    let mut total = CompensatedSum::default();
    for_each_prime(n, |p| {
        index += 1;
        total.add(spec.prime_value(p, index) / p as f64);
    });
    total.value()
}
