//! Pointwise Γ-calculus: the Laplacian, the carré du champ Γ and the
//! iterated form Γ₂.
//!
//! Γ₂ is evaluated by composing the Δ and Γ evaluators, so it only ever
//! reads `f` on the closed 2-ball around the evaluation point.

use crate::graph::{VertexMeasure, WeightedGraph};

/// `Δf(x)` for a function given as a closure over vertex indices.
fn laplacian_with<F>(graph: &WeightedGraph, m: &VertexMeasure, x: usize, f: F) -> f64
where
    F: Fn(usize) -> f64,
{
    let fx = f(x);
    let sum: f64 = graph
        .neighbors(x)
        .iter()
        .map(|&(y, w)| w * (f(y) - fx))
        .sum();
    sum / m[x]
}

/// `Γ(f, g)(x) = ½(Δ(fg) − fΔg − gΔf)(x)`.
fn gamma_with<F, G>(graph: &WeightedGraph, m: &VertexMeasure, x: usize, f: F, g: G) -> f64
where
    F: Fn(usize) -> f64,
    G: Fn(usize) -> f64,
{
    let lap_fg = laplacian_with(graph, m, x, |y| f(y) * g(y));
    let lap_f = laplacian_with(graph, m, x, &f);
    let lap_g = laplacian_with(graph, m, x, &g);
    0.5 * (lap_fg - f(x) * lap_g - g(x) * lap_f)
}

/// `Δf(x) = Σ_{y∼x} w(x,y)/m(x) · (f(y) − f(x))`.
pub fn laplacian_at(graph: &WeightedGraph, m: &VertexMeasure, f: &[f64], x: usize) -> f64 {
    laplacian_with(graph, m, x, |y| f[y])
}

/// Carré du champ `Γ(f, g)(x)`.
pub fn gamma_at(graph: &WeightedGraph, m: &VertexMeasure, f: &[f64], g: &[f64], x: usize) -> f64 {
    gamma_with(graph, m, x, |y| f[y], |y| g[y])
}

/// `Γ(f)(x)` written as the explicit sum `1/(2m(x)) Σ w(x,y)(f(y) − f(x))²`.
pub fn gamma_sum(graph: &WeightedGraph, m: &VertexMeasure, f: &[f64], x: usize) -> f64 {
    let s: f64 = graph
        .neighbors(x)
        .iter()
        .map(|&(y, w)| w * (f[y] - f[x]).powi(2))
        .sum();
    s / (2.0 * m[x])
}

/// `Γ₂(f)(x) = ½ΔΓ(f)(x) − Γ(Δf, f)(x)`.
pub fn gamma2_at(graph: &WeightedGraph, m: &VertexMeasure, f: &[f64], x: usize) -> f64 {
    let fv = |y: usize| f[y];
    let gamma_f = |y: usize| gamma_with(graph, m, y, fv, fv);
    let lap_f = |y: usize| laplacian_with(graph, m, y, fv);
    0.5 * laplacian_with(graph, m, x, gamma_f) - gamma_with(graph, m, x, lap_f, fv)
}
