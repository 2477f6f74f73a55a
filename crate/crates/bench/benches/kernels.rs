use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use woodyline_core::morphology::{distance_transform_pixels, skeletonize_pixels};
use woodyline_core::rng::mix64;
use woodyline_core::skeleval::skeleton_curve_pixels;
use woodyline_core::synthgen::{compose_scene, SceneTemplate};

fn blobs(n: usize, seed: u64) -> Vec<u8> {
    // sparse seeds grown into thick strokes, close to real woody masks
    (0..n * n)
        .map(|i| {
            let (x, y) = ((i % n) as u64 / 6, (i / n) as u64 / 6);
            u8::from(mix64(seed ^ (x << 32) ^ y).is_multiple_of(5))
        })
        .collect()
}

fn edt(c: &mut Criterion) {
    let mut g = c.benchmark_group("distance_transform");
    for n in [256usize, 1024] {
        let m = blobs(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| distance_transform_pixels(black_box(m), n, n))
        });
    }
    g.finish();
}

fn skeleton(c: &mut Criterion) {
    let mut g = c.benchmark_group("skeletonize");
    for n in [256usize, 1024] {
        let m = blobs(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| skeletonize_pixels(black_box(m), n, n))
        });
    }
    g.finish();
}

fn curve(c: &mut Criterion) {
    let n = 256;
    let (a, b) = (blobs(n, 3), blobs(n, 4));
    c.bench_function("skeleton_curve/256", |bch| {
        bch.iter(|| skeleton_curve_pixels(black_box(&a), black_box(&b), n, n, 12))
    });
}

fn scenes(c: &mut Criterion) {
    let templates = SceneTemplate::library(256);
    c.bench_function("compose_scene/256", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            let t = &templates[seed as usize % templates.len()];
            compose_scene(black_box(t), seed).unwrap()
        })
    });
}

criterion_group!(benches, edt, skeleton, curve, scenes);
criterion_main!(benches);
