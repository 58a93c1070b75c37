use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdorder::gamma::{min_constant_gamma, min_gamma};
use sdorder::{check_ffsd, check_mfsd, dirac, from_samples, greediness_profile, mixture, Distribution, GammaFn, UtilityPWL};

/// Empirical CDF of `n` draws, and a mixture of it with a point mass at its
/// mean so that the pair is ordered by second-order dominance.
fn ordered_pair(n: usize, seed: u64) -> (Distribution, Distribution) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let f = from_samples(&xs).unwrap();
    let g = mixture(&[f.clone(), dirac(f.mean())], &[0.5, 0.5]).unwrap();
    (f, g)
}

fn wavy_utility(n: usize, seed: u64) -> UtilityPWL {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let knots: Vec<f64> = (0..n).map(|i| i as f64 * 0.1).collect();
    let slopes: Vec<f64> = (0..=n).map(|_| rng.gen_range(0.1..3.0)).collect();
    UtilityPWL::new((0.0, 0.0), knots, slopes).unwrap()
}

fn deciders(c: &mut Criterion) {
    let mut group = c.benchmark_group("deciders");
    for n in [16, 128, 1024] {
        let (f, g) = ordered_pair(n, 7);
        let gamma = min_gamma(&f, &g).unwrap();
        group.bench_with_input(BenchmarkId::new("check_mfsd", n), &n, |b, _| {
            b.iter(|| check_mfsd(black_box(&f), black_box(&g), black_box(&gamma)))
        });
        // The minimal gamma vanishes at the first crossing, where the
        // functional order divides by it; a positive constant is always valid.
        let flat = GammaFn::constant(min_constant_gamma(&f, &g).raw().clamp(0.05, 1.0)).unwrap();
        group.bench_with_input(BenchmarkId::new("check_ffsd", n), &n, |b, _| {
            b.iter(|| check_ffsd(black_box(&f), black_box(&g), black_box(&flat)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("min_gamma", n), &n, |b, _| {
            b.iter(|| min_gamma(black_box(&f), black_box(&g)))
        });
        let u = wavy_utility(n, 11);
        group.bench_with_input(BenchmarkId::new("greediness_profile", n), &n, |b, _| {
            b.iter(|| greediness_profile(black_box(&u)))
        });
    }
    group.finish();
}

criterion_group!(benches, deciders);
criterion_main!(benches);
