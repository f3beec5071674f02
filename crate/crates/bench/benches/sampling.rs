//! How expensive is each selection route? The headline comparison is the
//! brute-force optimum (C(T, N) clip evaluations) against the per-frame
//! surrogate (T single-frame evaluations) on the same videos.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use framepick_bench::fixture;
use framepick_core::{
    binomial, optimal_policy, relevance, semi_optimal_policy, total_loss, AggregationMode,
    KernelConfig, TrainConfig, DEFAULT_ENUMERATION_BUDGET,
};

fn bench_policies(c: &mut Criterion) {
    let fx = fixture();
    let mut group = c.benchmark_group("policy");
    for n in [2usize, 4, 6] {
        group.bench_with_input(BenchmarkId::new("optimal", n), &n, |b, &n| {
            b.iter(|| {
                for video in &fx.videos {
                    black_box(
                        optimal_policy(&fx.penalized, video, n, DEFAULT_ENUMERATION_BUDGET)
                            .unwrap(),
                    );
                }
            })
        });
        group.bench_with_input(BenchmarkId::new("semi_optimal", n), &n, |b, &n| {
            b.iter(|| {
                for video in &fx.videos {
                    black_box(
                        semi_optimal_policy(&fx.penalized, video, n, AggregationMode::TrueLabel)
                            .unwrap(),
                    );
                }
            })
        });
    }
    group.finish();
}

fn bench_kernel(c: &mut Criterion) {
    let fx = fixture();
    let kernel = KernelConfig::scalar(1.4);
    let frames = fx.videos[0].frames();
    c.bench_function("relevance_pair", |b| {
        b.iter(|| black_box(relevance(&frames[0], &frames[1], &kernel).unwrap()))
    });
}

fn bench_binomial(c: &mut Criterion) {
    c.bench_function("binomial_60_16", |b| {
        b.iter(|| black_box(binomial(black_box(60), black_box(16)).unwrap()))
    });
}

fn bench_sampler(c: &mut Criterion) {
    let fx = fixture();
    let views: Vec<_> = fx
        .videos
        .iter()
        .map(|v| fx.projection.project(v).unwrap())
        .collect();
    c.bench_function("sampler_forward", |b| {
        b.iter(|| {
            for view in &views {
                black_box(fx.model.forward(view).unwrap());
            }
        })
    });

    let teacher = fx.additive.classify_all_frames(&fx.videos[0]).unwrap();
    let config = TrainConfig::default();
    c.bench_function("total_loss_with_gradients", |b| {
        b.iter(|| {
            black_box(
                total_loss(
                    &fx.model,
                    &views[0],
                    &teacher,
                    fx.videos[0].label(),
                    &config,
                )
                .unwrap(),
            )
        })
    });
}

criterion_group!(
    benches,
    bench_policies,
    bench_kernel,
    bench_binomial,
    bench_sampler
);
criterion_main!(benches);
