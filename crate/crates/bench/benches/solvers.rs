use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pvw_core::normal;
use pvw_core::weights::{breakpoint_k, PriorEffect};
use pvw_core::{bayes_weights_general, bayes_weights_small_q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn effects(j: usize, seed: u64) -> Vec<PriorEffect> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..j)
        .map(|_| {
            let eta: f64 = rng.sample(StandardNormal);
            let s: f64 = rng.sample(StandardNormal);
            PriorEffect::with_sd(eta, s.abs()).unwrap()
        })
        .collect()
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solvers");
    g.sample_size(20);
    for &j in &[1_000usize, 100_000] {
        let effs = effects(j, 1);
        g.bench_with_input(BenchmarkId::new("small_q", j), &effs, |b, e| {
            b.iter(|| bayes_weights_small_q(black_box(e), 1e-4).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("general_q0.01", j), &effs, |b, e| {
            b.iter(|| bayes_weights_general(black_box(e), 0.01).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("general_q0.3", j), &effs, |b, e| {
            b.iter(|| bayes_weights_general(black_box(e), 0.3).unwrap())
        });
    }
    g.finish();
}

fn per_test(c: &mut Criterion) {
    let effs = effects(1_000, 2);
    c.bench_function("breakpoint_x1000", |b| {
        b.iter(|| {
            effs.iter()
                .map(|e| breakpoint_k(black_box(e)))
                .sum::<f64>()
        })
    });
    let xs: Vec<f64> = (0..1_000).map(|k| -8.0 + 0.016 * k as f64).collect();
    c.bench_function("cdf_x1000", |b| {
        b.iter(|| xs.iter().map(|&x| normal::cdf(black_box(x))).sum::<f64>())
    });
    let ps: Vec<f64> = (1..=1_000).map(|k| k as f64 / 1_001.0).collect();
    c.bench_function("quantile_x1000", |b| {
        b.iter(|| {
            ps.iter()
                .map(|&p| normal::quantile(black_box(p)).unwrap())
                .sum::<f64>()
        })
    });
}

criterion_group!(benches, solvers, per_test);
criterion_main!(benches);
