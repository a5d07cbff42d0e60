use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use primelab::additive::{self, AdditiveFunctionSpec};
use primelab::models::{self, TwoPointModel};
use primelab::sieve::{self, BlockConsumer, FactorBlock, SieveConfig, DEFAULT_BLOCK_SIZE};

struct DistinctSum;

impl BlockConsumer for DistinctSum {
    type Output = u64;

    fn identity(&self) -> u64 {
        0
    }

    fn consume(&self, block: &FactorBlock) -> u64 {
        block.distinct_counts().iter().map(|&c| c as u64).sum()
    }

    fn merge(&self, a: u64, b: u64) -> u64 {
        a + b
    }
}

fn blocks(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve_blocks");
    g.sample_size(10);
    for n in [1_000_000u64, 10_000_000] {
        g.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, &n| {
            b.iter(|| sieve::sieve_blocks(black_box(n), DEFAULT_BLOCK_SIZE, &DistinctSum))
        });
        g.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, &n| {
            b.iter(|| {
                sieve::sieve_blocks_sequential(black_box(n), DEFAULT_BLOCK_SIZE, &DistinctSum)
            })
        });
    }
    g.finish();
}

fn histograms(c: &mut Criterion) {
    let spec = AdditiveFunctionSpec::omega();
    let grid = [10_000u64, 100_000, 1_000_000, 10_000_000];
    let config = SieveConfig::default();
    let mut g = c.benchmark_group("omega_histograms");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| {
            additive::histograms(&spec, black_box(&grid), spec.default_binning(), &config).unwrap()
        })
    });
    g.bench_function("sequential", |b| {
        b.iter(|| {
            additive::histograms_sequential(
                &spec,
                black_box(&grid),
                spec.default_binning(),
                &config,
            )
            .unwrap()
        })
    });
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut g = c.benchmark_group("monte_carlo_signed_1e5");
    g.sample_size(10);
    let model = TwoPointModel::SymmetricSigned;
    g.bench_function("parallel", |b| {
        b.iter(|| models::monte_carlo(model, 100_000, 6, black_box(20_000), 42).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| models::monte_carlo_sequential(model, 100_000, 6, black_box(20_000), 42).unwrap())
    });
    g.finish();
}

criterion_group!(benches, blocks, histograms, monte_carlo);
criterion_main!(benches);
