//! Bakry-Émery curvature `Ric_{n,m}(x)` as a minimal eigenvalue.
//!
//! At a vertex `x` the curvature-dimension inequality
//! `Γ₂(f)(x) ≥ (1/n)(Δf(x))² + K·Γ(f)(x)` only sees `f` on the 2-ball, and
//! all three quantities are invariant under adding constants. Fixing the
//! gauge `f(x) = 0`, the left-hand side minus the dimension term is a
//! quadratic form `q` in the values on `S1 ∪ S2`:
//!
//! ```text
//! q(f) = [f₁; f₂]ᵀ [A B; Bᵀ D] [f₁; f₂],    Γ(f)(x) = f₁ᵀ G f₁
//! ```
//!
//! `D` is positive definite, so the `S2` values are eliminated exactly by a
//! Schur complement, and the best constant is the minimal eigenvalue of
//! `G^{-1/2} (A − B D⁻¹ Bᵀ) G^{-1/2}`.

mod eigen;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calculus::{gamma2_at, laplacian_at};
use crate::error::{Error, Result};
use crate::graph::{spheres, GraphFunction, VertexMeasure, WeightedGraph};

pub use eigen::{asymmetry, jacobi_eigen, min_eig_sym};

/// Smallest admissible diagonal entry of the 2-sphere block.
const MIN_TWO_SPHERE_DIAGONAL: f64 = 1e-14;

/// Dimension parameter `n ∈ (0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Dimension {
    Finite(f64),
    #[default]
    Infinite,
}

impl Dimension {
    pub fn finite(n: f64) -> Result<Self> {
        if n.is_finite() && n > 0.0 {
            Ok(Dimension::Finite(n))
        } else if n == f64::INFINITY {
            Ok(Dimension::Infinite)
        } else {
            Err(Error::InvalidParameter(format!(
                "dimension must be positive, got {n}"
            )))
        }
    }

    /// `1/n`, or `None` for `n = ∞`.
    pub fn reciprocal(self) -> Option<f64> {
        match self {
            Dimension::Finite(n) => Some(1.0 / n),
            Dimension::Infinite => None,
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(n) => write!(f, "{n}"),
            Dimension::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "∞" => Ok(Dimension::Infinite),
            t => {
                let n: f64 = t.parse().map_err(|_| {
                    Error::InvalidParameter(format!("dimension `{t}` is not `inf` or a number"))
                })?;
                Dimension::finite(n)
            }
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dimension::Finite(n) => s.serialize_f64(*n),
            Dimension::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Dimension {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        let parsed = match Repr::deserialize(d)? {
            Repr::Number(n) => Dimension::finite(n),
            Repr::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Block form of `q(f) = Γ₂(f)(x) − (1/n)(Δf(x))²` and of `Γ(f)(x)` at one
/// vertex, in the gauge `f(x) = 0` with variables ordered `(S1, S2)`.
#[derive(Debug, Clone)]
pub struct LocalCurvatureProblem {
    pub center: usize,
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub d: DMatrix<f64>,
    /// Diagonal of `G`, `w(x,y) / (2m(x))` for `y ∈ S1`.
    pub g: DVector<f64>,
}

impl LocalCurvatureProblem {
    /// The full `[A B; Bᵀ D]` matrix.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let p = self.s1.len();
        let k = p + self.s2.len();
        let mut q = DMatrix::zeros(k, k);
        q.view_mut((0, 0), (p, p)).copy_from(&self.a);
        q.view_mut((0, p), (p, k - p)).copy_from(&self.b);
        q.view_mut((p, 0), (k - p, p))
            .copy_from(&self.b.transpose());
        q.view_mut((p, p), (k - p, k - p)).copy_from(&self.d);
        q
    }

    /// `D⁻¹ Bᵀ`, the linear map from `S1` values to the negated optimal
    /// `S2` values.
    fn elimination(&self) -> Result<DMatrix<f64>> {
        if self.s2.is_empty() {
            return Ok(DMatrix::zeros(0, self.s1.len()));
        }
        let chol = self
            .d
            .clone()
            .cholesky()
            .ok_or(Error::DegenerateTwoSphere {
                center: self.center,
                entry: self.d.diagonal().min(),
            })?;
        Ok(chol.solve(&self.b.transpose()))
    }
}

/// `A_{n,m}(x) = G^{-1/2}(A − B D⁻¹ Bᵀ)G^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureMatrix(DMatrix<f64>);

impl CurvatureMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn min_eigen(&self) -> Result<(f64, DVector<f64>)> {
        min_eig_sym(&self.0)
    }
}

/// Evaluate `q(f) = Γ₂(f)(x) − (1/n)(Δf(x))²`.
pub fn local_form_value(
    graph: &WeightedGraph,
    m: &VertexMeasure,
    n: Dimension,
    f: &[f64],
    x: usize,
) -> f64 {
    let g2 = gamma2_at(graph, m, f, x);
    match n.reciprocal() {
        Some(inv) => {
            let lap = laplacian_at(graph, m, f, x);
            g2 - inv * lap * lap
        }
        None => g2,
    }
}

/// Build the block quadratic forms at `x` by polarization of `q` over unit
/// functions on `S1 ∪ S2`.
pub fn assemble_local_form(
    graph: &WeightedGraph,
    m: &VertexMeasure,
    n: Dimension,
    x: usize,
) -> Result<LocalCurvatureProblem> {
    if graph.degree(x) == 0 {
        return Err(Error::IsolatedVertex(x));
    }
    let (s1, s2) = spheres(graph, x);
    let vars: Vec<usize> = s1.iter().chain(&s2).copied().collect();
    let k = vars.len();
    let p = s1.len();

    let mut f = vec![0.0; graph.len()];
    let q = |f: &[f64]| local_form_value(graph, m, n, f, x);

    let mut diag = Vec::with_capacity(k);
    for &v in &vars {
        f[v] = 1.0;
        diag.push(q(&f));
        f[v] = 0.0;
    }
    let mut full = DMatrix::zeros(k, k);
    for i in 0..k {
        full[(i, i)] = diag[i];
        for j in i + 1..k {
            f[vars[i]] = 1.0;
            f[vars[j]] = 1.0;
            let pair = q(&f);
            f[vars[i]] = 0.0;
            f[vars[j]] = 0.0;
            let entry = 0.5 * (pair - diag[i] - diag[j]);
            full[(i, j)] = entry;
            full[(j, i)] = entry;
        }
    }

    let d = full.view((p, p), (k - p, k - p)).into_owned();
    for i in 0..d.nrows() {
        if d[(i, i)] <= MIN_TWO_SPHERE_DIAGONAL {
            return Err(Error::DegenerateTwoSphere {
                center: x,
                entry: d[(i, i)],
            });
        }
    }

    let g = DVector::from_iterator(p, graph.neighbors(x).iter().map(|&(_, w)| w / (2.0 * m[x])));

    Ok(LocalCurvatureProblem {
        center: x,
        a: full.view((0, 0), (p, p)).into_owned(),
        b: full.view((0, p), (p, k - p)).into_owned(),
        d,
        g,
        s1,
        s2,
    })
}

pub fn curvature_matrix(problem: &LocalCurvatureProblem) -> Result<CurvatureMatrix> {
    let elim = problem.elimination()?;
    let mut schur = problem.a.clone();
    if !problem.s2.is_empty() {
        schur -= &problem.b * elim;
    }
    let p = problem.s1.len();
    let inv_sqrt: Vec<f64> = problem.g.iter().map(|g| 1.0 / g.sqrt()).collect();
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(i, j)] = 0.5 * (schur[(i, j)] + schur[(j, i)]) * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    Ok(CurvatureMatrix(out))
}

/// `Ric_{n,m}(x)`.
pub fn ricci(graph: &WeightedGraph, m: &VertexMeasure, n: Dimension, x: usize) -> Result<f64> {
    let problem = assemble_local_form(graph, m, n, x)?;
    Ok(curvature_matrix(&problem)?.min_eigen()?.0)
}

/// Curvature at every vertex, in vertex order.
pub fn ricci_all(graph: &WeightedGraph, m: &VertexMeasure, n: Dimension) -> Result<Vec<f64>> {
    (0..graph.len()).map(|x| ricci(graph, m, n, x)).collect()
}

/// A test function attaining the curvature bound at `x`.
///
/// `f(x) = 0`, the `S1` values come from the minimal eigenvector pulled back
/// through `G^{-1/2}`, the `S2` values minimize `q` given `S1`, and `f`
/// vanishes elsewhere.
pub fn witness(
    graph: &WeightedGraph,
    m: &VertexMeasure,
    n: Dimension,
    x: usize,
) -> Result<GraphFunction> {
    let problem = assemble_local_form(graph, m, n, x)?;
    let (_, vec) = curvature_matrix(&problem)?.min_eigen()?;
    let f1 = DVector::from_iterator(
        problem.s1.len(),
        vec.iter().zip(problem.g.iter()).map(|(v, g)| v / g.sqrt()),
    );
    let f2 = -problem.elimination()? * &f1;

    let mut f = GraphFunction::zeros(graph.len());
    let values = f.values_mut();
    for (i, &y) in problem.s1.iter().enumerate() {
        values[y] = f1[i];
    }
    for (i, &z) in problem.s2.iter().enumerate() {
        values[z] = f2[i];
    }
    Ok(f)
}
