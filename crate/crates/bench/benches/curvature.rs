use beflow::{generate, ricci_all, Dimension, Family, VertexMeasure};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("ricci_all");
    for (name, family) in [
        ("c8", Family::Cycle(8)),
        ("tree_t3", Family::TreeT3),
        ("k6", Family::Complete(6)),
    ] {
        let g = generate(family).unwrap();
        let m = VertexMeasure::new((0..g.len()).map(|i| 1.0 + 0.37 * i as f64).collect()).unwrap();
        for (label, n) in [("inf", Dimension::Infinite), ("n2", Dimension::Finite(2.0))] {
            group.bench_function(format!("{name}/{label}"), |b| {
                b.iter(|| ricci_all(black_box(&g), black_box(&m), n).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, curvature);
criterion_main!(benches);
