//! Segmented sieves over `[1, n]`.
//!
//! Two kinds of segments are produced here. Prime enumeration and counting use
//! an odd-only bit sieve whose segments are sized to stay in L1/L2. Arithmetic
//! function work uses [`FactorBlock`]s: contiguous ranges of integers with the
//! smallest prime factor, the number of distinct prime divisors and, on
//! request, the full factorization of every member. Neither path allocates
//! memory proportional to `n`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::par;

/// Integers per [`FactorBlock`] unless configured otherwise.
pub const DEFAULT_BLOCK_SIZE: usize = 1 << 15;

/// Default cap on the bytes a single table may occupy (1 GiB).
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;

/// Odd numbers per bit-sieve segment (32 KiB of bits).
const SEGMENT_BITS: u64 = 1 << 18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SieveConfig {
    pub block_size: usize,
    pub memory_budget: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        SieveConfig {
            block_size: DEFAULT_BLOCK_SIZE,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }
}

/// Floor of the square root, exact for every `u64`.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Deterministic trial-division primality check. `O(sqrt(n))`; meant for
/// verification and single values, not for bulk work.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3;
    while d <= n / d {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Plain sieve of Eratosthenes for the base primes of a segmented run.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// Upper bound on pi(x) (Rosser & Schoenfeld: pi(x) < 1.25506 x / ln x).
pub(crate) fn prime_count_upper_bound(x: u64) -> u64 {
    if x < 17 {
        return x / 2 + 1;
    }
    let xf = x as f64;
    (1.25506 * xf / xf.ln()).ceil() as u64
}

/// One odd-only bit segment covering the odd numbers in `[lo, hi]`.
struct OddSegment {
    lo: u64,
    bits: u64,
    composite: Vec<u64>,
}

impl OddSegment {
    /// Sieves odd numbers in `[lo, hi]` (`lo` odd) with the odd base primes.
    fn sieve(lo: u64, hi: u64, base: &[u64]) -> Self {
        debug_assert!(lo % 2 == 1);
        let bits = if hi < lo { 0 } else { (hi - lo) / 2 + 1 };
        let mut composite = vec![0u64; bits.div_ceil(64) as usize];
        for &p in base.iter().skip_while(|&&p| p == 2) {
            let sq = p * p;
            if sq > hi {
                break;
            }
            let mut start = if sq >= lo { sq } else { lo.div_ceil(p) * p };
            if start % 2 == 0 {
                start += p;
            }
            let mut idx = (start - lo) / 2;
            while idx < bits {
                composite[(idx >> 6) as usize] |= 1 << (idx & 63);
                idx += p;
            }
        }
        // 1 is not prime.
        if lo == 1 && bits > 0 {
            composite[0] |= 1;
        }
        OddSegment {
            lo,
            bits,
            composite,
        }
    }

    fn count(&self) -> u64 {
        let full = (self.bits / 64) as usize;
        let mut total: u64 = self.composite[..full]
            .iter()
            .map(|w| u64::from((!w).count_ones()))
            .sum();
        let rest = self.bits % 64;
        if rest > 0 {
            let mask = (1u64 << rest) - 1;
            total += u64::from((!self.composite[full] & mask).count_ones());
        }
        total
    }

    fn for_each(&self, mut f: impl FnMut(u64)) {
        for (wi, &w) in self.composite.iter().enumerate() {
            let mut free = !w;
            while free != 0 {
                let bit = free.trailing_zeros() as u64;
                let idx = wi as u64 * 64 + bit;
                if idx >= self.bits {
                    return;
                }
                f(self.lo + 2 * idx);
                free &= free - 1;
            }
        }
    }
}

/// Segment boundaries of the odd-only sieve for odd numbers in `[lo, hi]`.
fn odd_segments(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let lo = if lo.is_multiple_of(2) { lo + 1 } else { lo };
    let mut out = Vec::new();
    let mut start = lo;
    while start <= hi {
        let end = hi.min(start + 2 * (SEGMENT_BITS - 1));
        out.push((start, end));
        match end.checked_add(2) {
            Some(next) => start = next,
            None => break,
        }
    }
    out
}

/// Number of primes in `[lo, hi]`, given all primes up to `sqrt(hi)`.
fn count_primes_in(lo: u64, hi: u64, base: &[u64]) -> u64 {
    if hi < lo || hi < 2 {
        return 0;
    }
    let two = u64::from(lo <= 2 && hi >= 2);
    let segments = odd_segments(lo.max(1), hi);
    let odd = par::map_reduce(
        segments.len(),
        || 0u64,
        |i| {
            let (a, b) = segments[i];
            OddSegment::sieve(a, b, base).count()
        },
        |a, b| a + b,
    );
    two + odd
}

/// Calls `f` on every prime `<= bound` in ascending order.
pub fn for_each_prime(bound: u64, mut f: impl FnMut(u64)) {
    if bound < 2 {
        return;
    }
    f(2);
    let base = small_primes(isqrt(bound));
    for (a, b) in odd_segments(3, bound) {
        OddSegment::sieve(a, b, &base).for_each(&mut f);
    }
}

/// All primes up to a bound, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    /// pi(x) for `x <= bound`.
    pub fn count_up_to(&self, x: u64) -> usize {
        self.primes.partition_point(|&p| p <= x)
    }

    pub fn contains(&self, x: u64) -> bool {
        self.primes.binary_search(&x).is_ok()
    }
}

/// Primes up to `bound` under the default memory budget.
pub fn primes_up_to(bound: u64) -> Result<PrimeTable> {
    primes_up_to_with(bound, &SieveConfig::default())
}

pub fn primes_up_to_with(bound: u64, config: &SieveConfig) -> Result<PrimeTable> {
    let required = prime_count_upper_bound(bound).saturating_mul(8);
    if required > config.memory_budget {
        return Err(Error::Capacity {
            what: "prime table",
            required,
            budget: config.memory_budget,
        });
    }
    let mut primes = Vec::with_capacity(prime_count_upper_bound(bound) as usize);
    if bound <= 1 << 16 {
        primes = small_primes(bound);
    } else {
        for_each_prime(bound, |p| primes.push(p));
    }
    Ok(PrimeTable { bound, primes })
}

/// pi(n), the number of primes `<= n`.
pub fn prime_count(n: u64) -> u64 {
    if n < 2 {
        return 0;
    }
    let base = small_primes(isqrt(n));
    count_primes_in(2, n, &base)
}

/// pi(n) at every point of an ascending grid with one shared set of base
/// primes; the total sieving work is that of the largest point.
pub fn prime_counts(grid: &[u64]) -> Vec<u64> {
    let Some(&max) = grid.iter().max() else {
        return Vec::new();
    };
    let base = small_primes(isqrt(max));
    let mut sorted: Vec<u64> = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut at = Vec::with_capacity(sorted.len());
    let (mut prev, mut acc) = (1u64, 0u64);
    for &x in &sorted {
        acc += count_primes_in(prev + 1, x, &base);
        at.push((x, acc));
        prev = prev.max(x);
    }
    grid.iter()
        .map(|x| at[at.partition_point(|&(y, _)| y < *x)].1)
        .collect()
}

/// How much per-integer data a [`FactorBlock`] carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockDetail {
    /// Smallest prime factor and the distinct / total prime factor counts.
    Counts,
    /// Counts plus the full list of prime powers of every integer.
    Factors,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimePower {
    pub prime: u64,
    pub exponent: u32,
}

/// Factorization data for the integers `range_start..=range_end`.
#[derive(Debug, Clone)]
pub struct FactorBlock {
    range_start: u64,
    range_end: u64,
    spf: Vec<u64>,
    distinct_count: Vec<u8>,
    total_count: Vec<u8>,
    offsets: Vec<u32>,
    factors: Vec<PrimePower>,
    detail: BlockDetail,
}

impl FactorBlock {
    /// Builds the block for `[start, end]`. `base` must contain every prime
    /// up to `sqrt(end)` in ascending order.
    pub fn build(start: u64, end: u64, base: &[u64], detail: BlockDetail) -> Self {
        assert!(start >= 1 && start <= end, "empty or zero-based block");
        let len = (end - start + 1) as usize;
        let mut spf = vec![0u64; len];
        let mut distinct_count = vec![0u8; len];
        let mut total_count = vec![0u8; len];
        // Product of the prime powers found so far; the cofactor m / product
        // is 1 or a single prime above sqrt(end).
        let mut found = vec![1u64; len];
        let mut hits: Vec<(u32, u64)> = Vec::new();
        let keep_hits = detail == BlockDetail::Factors;

        for &p in base {
            if p * p > end {
                break;
            }
            let mut first = start.div_ceil(p) * p;
            let mut i = first - start;
            while (i as usize) < len {
                let k = i as usize;
                distinct_count[k] += 1;
                total_count[k] += 1;
                found[k] *= p;
                if spf[k] == 0 {
                    spf[k] = p;
                }
                if keep_hits {
                    hits.push((k as u32, p));
                }
                i += p;
            }
            let mut pk = p;
            while let Some(next) = pk.checked_mul(p).filter(|&q| q <= end) {
                pk = next;
                first = start.div_ceil(pk) * pk;
                let mut i = first - start;
                while (i as usize) < len {
                    let k = i as usize;
                    total_count[k] += 1;
                    found[k] *= p;
                    if keep_hits {
                        hits.push((k as u32, p));
                    }
                    i += pk;
                }
            }
        }

        for k in 0..len {
            let m = start + k as u64;
            if found[k] != m {
                let q = m / found[k];
                distinct_count[k] += 1;
                total_count[k] += 1;
                if spf[k] == 0 {
                    spf[k] = q;
                }
                if keep_hits {
                    hits.push((k as u32, q));
                }
            }
        }

        let (offsets, factors) = if keep_hits {
            // Stable counting sort by offset keeps primes ascending and the
            // repeated hits of one prime adjacent.
            let mut offsets = vec![0u32; len + 1];
            for k in 0..len {
                offsets[k + 1] = offsets[k] + u32::from(distinct_count[k]);
            }
            let mut factors = vec![
                PrimePower {
                    prime: 0,
                    exponent: 0
                };
                offsets[len] as usize
            ];
            let mut cursor: Vec<u32> = offsets[..len].to_vec();
            let mut last: Vec<u64> = vec![0; len];
            for (k, p) in hits {
                let k = k as usize;
                if last[k] == p {
                    factors[cursor[k] as usize - 1].exponent += 1;
                } else {
                    factors[cursor[k] as usize] = PrimePower {
                        prime: p,
                        exponent: 1,
                    };
                    cursor[k] += 1;
                    last[k] = p;
                }
            }
            (offsets, factors)
        } else {
            (Vec::new(), Vec::new())
        };

        FactorBlock {
            range_start: start,
            range_end: end,
            spf,
            distinct_count,
            total_count,
            offsets,
            factors,
            detail,
        }
    }

    pub fn range_start(&self) -> u64 {
        self.range_start
    }

    pub fn range_end(&self) -> u64 {
        self.range_end
    }

    pub fn range(&self) -> RangeInclusive<u64> {
        self.range_start..=self.range_end
    }

    pub fn len(&self) -> usize {
        self.spf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spf.is_empty()
    }

    pub fn detail(&self) -> BlockDetail {
        self.detail
    }

    fn index(&self, m: u64) -> usize {
        assert!(
            self.range().contains(&m),
            "{m} outside block {:?}",
            self.range()
        );
        (m - self.range_start) as usize
    }

    /// Smallest prime factor; `None` for 1.
    pub fn spf(&self, m: u64) -> Option<u64> {
        match self.spf[self.index(m)] {
            0 => None,
            p => Some(p),
        }
    }

    /// omega(m), the number of distinct prime divisors.
    pub fn distinct_count(&self, m: u64) -> u8 {
        self.distinct_count[self.index(m)]
    }

    /// Omega(m), prime divisors counted with multiplicity.
    pub fn total_count(&self, m: u64) -> u8 {
        self.total_count[self.index(m)]
    }

    pub fn distinct_counts(&self) -> &[u8] {
        &self.distinct_count
    }

    pub fn total_counts(&self) -> &[u8] {
        &self.total_count
    }

    /// Prime powers of `m` in ascending prime order. `None` when the block
    /// was built with [`BlockDetail::Counts`].
    pub fn factors(&self, m: u64) -> Option<&[PrimePower]> {
        if self.detail != BlockDetail::Factors {
            return None;
        }
        let k = self.index(m);
        Some(&self.factors[self.offsets[k] as usize..self.offsets[k + 1] as usize])
    }
}

/// Per-block aggregation with a mergeable result. `merge` must be associative
/// and commutative with `identity` as neutral element; the final value of
/// [`sieve_blocks`] is then independent of block size and scheduling.
pub trait BlockConsumer: Sync {
    type Output: Send;

    fn detail(&self) -> BlockDetail {
        BlockDetail::Counts
    }

    fn identity(&self) -> Self::Output;

    fn consume(&self, block: &FactorBlock) -> Self::Output;

    fn merge(&self, a: Self::Output, b: Self::Output) -> Self::Output;
}

fn block_bounds(n: u64, block_size: usize, i: usize) -> (u64, u64) {
    let bs = block_size as u64;
    let start = 1 + i as u64 * bs;
    (start, n.min(start + bs - 1))
}

/// Streams every [`FactorBlock`] of `[1, n]` through `consumer`, on the
/// rayon pool when the `parallel` feature is enabled.
pub fn sieve_blocks<C: BlockConsumer>(n: u64, block_size: usize, consumer: &C) -> C::Output {
    run_blocks(n, block_size, consumer, false)
}

/// Same as [`sieve_blocks`] but always on the calling thread.
pub fn sieve_blocks_sequential<C: BlockConsumer>(
    n: u64,
    block_size: usize,
    consumer: &C,
) -> C::Output {
    run_blocks(n, block_size, consumer, true)
}

fn run_blocks<C: BlockConsumer>(
    n: u64,
    block_size: usize,
    consumer: &C,
    sequential: bool,
) -> C::Output {
    assert!(n >= 1, "sieve_blocks needs n >= 1");
    assert!(block_size >= 1, "block size must be positive");
    let base = small_primes(isqrt(n));
    let blocks = n.div_ceil(block_size as u64) as usize;
    let detail = consumer.detail();
    let map = |i: usize| {
        let (start, end) = block_bounds(n, block_size, i);
        consumer.consume(&FactorBlock::build(start, end, &base, detail))
    };
    let identity = || consumer.identity();
    let merge = |a, b| consumer.merge(a, b);
    if sequential {
        par::sequential_map_reduce(blocks, identity, map, merge)
    } else {
        par::map_reduce(blocks, identity, map, merge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(bound: u64) -> Vec<u64> {
        (2..=bound).filter(|&m| is_prime(m)).collect()
    }

    fn trial_factor(mut m: u64) -> Vec<PrimePower> {
        let mut out = Vec::new();
        let mut d = 2;
        while d * d <= m {
            if m.is_multiple_of(d) {
                let mut e = 0;
                while m.is_multiple_of(d) {
                    m /= d;
                    e += 1;
                }
                out.push(PrimePower {
                    prime: d,
                    exponent: e,
                });
            }
            d += 1;
        }
        if m > 1 {
            out.push(PrimePower {
                prime: m,
                exponent: 1,
            });
        }
        out
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), (1u64 << 32) - 1);
        assert_eq!(isqrt((1 << 62) - 1), (1 << 31) - 1);
    }

    #[test]
    fn small_tables() {
        assert_eq!(primes_up_to(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert!(primes_up_to(1).unwrap().is_empty());
        assert!(primes_up_to(0).unwrap().is_empty());
        let t = primes_up_to(100).unwrap();
        assert_eq!(t.len(), 25);
        assert_eq!(*t.primes().last().unwrap(), 97);
    }

    #[test]
    fn table_matches_trial_division_exhaustively() {
        let oracle = trial_division_primes(10_000);
        for b in 0..=10_000u64 {
            let t = primes_up_to(b).unwrap();
            let k = oracle.partition_point(|&p| p <= b);
            assert_eq!(t.primes(), &oracle[..k], "bound {b}");
            assert_eq!(prime_count(b), k as u64, "pi({b})");
        }
    }

    #[test]
    fn segmented_path_matches_small_sieve() {
        let bound = 3_000_000;
        let mut seg = Vec::new();
        for_each_prime(bound, |p| seg.push(p));
        assert_eq!(seg, small_primes(bound));
        assert_eq!(prime_count(bound), seg.len() as u64);
    }

    #[test]
    fn capacity_error_names_budget() {
        let cfg = SieveConfig {
            block_size: DEFAULT_BLOCK_SIZE,
            memory_budget: 1024,
        };
        let err = primes_up_to_with(1_000_000, &cfg).unwrap_err();
        assert!(err.to_string().contains("1024"), "{err}");
    }

    #[test]
    fn prime_counts_on_grid() {
        let grid = [100, 2, 10_000, 10, 100];
        assert_eq!(prime_counts(&grid), vec![25, 1, 1229, 4, 25]);
        assert_eq!(prime_count(2), 1);
        assert_eq!(prime_count(100), 25);
    }

    #[test]
    fn blocks_match_trial_factorization() {
        let n = 20_000;
        let base = small_primes(isqrt(n));
        for (start, end) in [(1, 1), (1, 97), (5000, 5999), (19_000, 20_000)] {
            let block = FactorBlock::build(start, end, &base, BlockDetail::Factors);
            for m in start..=end {
                let f = trial_factor(m);
                assert_eq!(block.factors(m).unwrap(), f.as_slice(), "m={m}");
                assert_eq!(block.distinct_count(m) as usize, f.len());
                let total: u32 = f.iter().map(|pp| pp.exponent).sum();
                assert_eq!(u32::from(block.total_count(m)), total);
                assert_eq!(block.spf(m), f.first().map(|pp| pp.prime));
            }
        }
    }

    #[test]
    fn spf_walk_reconstructs_every_m() {
        let n = 100_000;
        let base = small_primes(isqrt(n));
        let block = FactorBlock::build(1, n, &base, BlockDetail::Counts);
        assert_eq!(block.distinct_count(1), 0);
        assert_eq!(block.spf(1), None);
        for m in 2..=n {
            let p = block.spf(m).unwrap();
            assert_eq!(m % p, 0);
            assert_eq!(p == m, is_prime(m), "m={m}");
            assert_eq!(block.spf(p), Some(p));
            // Repeated spf division: m / p lies in the same block.
            let mut rest = m;
            let mut product = 1u64;
            while rest > 1 {
                let q = block.spf(rest).unwrap();
                rest /= q;
                product *= q;
            }
            assert_eq!(product, m);
            let d = block.distinct_count(m);
            assert!(d >= 1 && f64::from(d) <= (m as f64).log2());
        }
    }

    struct CountExactlyOne;

    impl BlockConsumer for CountExactlyOne {
        type Output = u64;
        fn identity(&self) -> u64 {
            0
        }
        fn consume(&self, block: &FactorBlock) -> u64 {
            block.distinct_counts().iter().filter(|&&d| d == 1).count() as u64
        }
        fn merge(&self, a: u64, b: u64) -> u64 {
            a + b
        }
    }

    struct CollectAll;

    impl BlockConsumer for CollectAll {
        type Output = Vec<(u64, u8)>;
        fn identity(&self) -> Self::Output {
            Vec::new()
        }
        fn consume(&self, block: &FactorBlock) -> Self::Output {
            block
                .range()
                .map(|m| (m, block.distinct_count(m)))
                .collect()
        }
        fn merge(&self, mut a: Self::Output, b: Self::Output) -> Self::Output {
            a.extend(b);
            a.sort_unstable();
            a
        }
    }

    #[test]
    fn sieve_blocks_examples() {
        assert_eq!(sieve_blocks(20, 7, &CountExactlyOne), 12);
        assert_eq!(sieve_blocks(1, 5, &CollectAll), vec![(1, 0)]);
        let reference = sieve_blocks(100, 100, &CollectAll);
        for bs in [10, 64, 100] {
            assert_eq!(sieve_blocks(100, bs, &CollectAll), reference);
        }
        assert_eq!(reference.len(), 100);
    }

    #[test]
    fn sieve_blocks_block_size_invariance() {
        let n = 100_000;
        let expected = sieve_blocks_sequential(n, n as usize, &CountExactlyOne);
        for bs in [1, 32, 4096, n as usize] {
            assert_eq!(sieve_blocks(n, bs, &CountExactlyOne), expected, "bs={bs}");
        }
    }
}
