#![allow(dead_code)]

use beflow::{VertexMeasure, WeightedGraph};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` samples log-uniform on `[lo, hi]`.
pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|_| rng.random_range(a..b).exp()).collect()
}

pub fn measure(values: Vec<f64>) -> VertexMeasure {
    VertexMeasure::new(values).unwrap()
}

/// Connected graph on `n` vertices: a random spanning tree plus `extra`
/// random chords, weights uniform on `[0.5, 2]`.
pub fn random_graph(rng: &mut impl Rng, n: usize, extra: usize) -> WeightedGraph {
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut has = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        has.insert((u, v));
        edges.push((u, v, rng.random_range(0.5..2.0)));
    }
    for _ in 0..extra {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let key = (u.min(v), u.max(v));
        if u != v && has.insert(key) {
            edges.push((key.0, key.1, rng.random_range(0.5..2.0)));
        }
    }
    let labels = (0..n).map(|i| format!("v{i}")).collect();
    WeightedGraph::new(labels, edges).unwrap()
}

pub fn random_function(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Vertices within graph distance `r` of `x`.
pub fn ball(graph: &WeightedGraph, x: usize, r: usize) -> Vec<bool> {
    let mut inside = vec![false; graph.len()];
    inside[x] = true;
    let mut frontier = vec![x];
    for _ in 0..r {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, _) in graph.neighbors(u) {
                if !inside[v] {
                    inside[v] = true;
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    inside
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
