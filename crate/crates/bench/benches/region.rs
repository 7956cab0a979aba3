use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use equiregion::region::SweepAxis;
use equiregion::{evaluate_bounds, max_equivocation, region_sweep, SearchConfig};
use equiregion_bench::{dsbs, hamming, padded_scheme};

fn bounds(c: &mut Criterion) {
    let (source, scheme, d) = (dsbs(0.05, 0.3), padded_scheme(), hamming());
    c.bench_function("evaluate_bounds", |b| b.iter(|| evaluate_bounds(black_box(&source), &scheme, &d, 0.5).unwrap()));
}

fn search(c: &mut Criterion) {
    let (source, d) = (dsbs(0.05, 0.3), hamming());
    let config = SearchConfig::default();
    c.bench_function("max_equivocation", |b| {
        b.iter(|| max_equivocation(black_box(&source), &d, 0.5, 0.5, 0.2, &config).unwrap())
    });
    let axis = SweepAxis::Rate { caps: (0..=10).map(|i| i as f64 * 0.1).collect(), key_rate: 0.5, dist_cap: 1.0 };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("rate_axis", |b| b.iter(|| region_sweep(black_box(&source), &d, &axis, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, bounds, search);
criterion_main!(benches);
