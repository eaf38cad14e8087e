//! Finite weighted graphs, vertex measures and the example families.
//!
//! Vertices are identified by their index in a fixed, user-supplied order.
//! Labels are display metadata only.

use std::collections::{BTreeSet, VecDeque};
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// A finite, simple, connected graph with symmetric positive edge weights.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    labels: Vec<String>,
    edges: Vec<Edge>,
    /// Neighbour lists sorted by vertex index.
    adjacency: Vec<Vec<(usize, f64)>>,
    boundary: Vec<usize>,
}

impl WeightedGraph {
    /// Build a graph from labels and an edge list given as index pairs.
    pub fn new<I>(labels: Vec<String>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if labels.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateVertex(l.clone()));
            }
        }

        let n = labels.len();
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut edge_list = Vec::new();
        for (a, b, w) in edges {
            if a >= n {
                return Err(Error::UnknownVertex(a.to_string()));
            }
            if b >= n {
                return Err(Error::UnknownVertex(b.to_string()));
            }
            if a == b {
                return Err(Error::SelfLoop(labels[a].clone()));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositiveWeight {
                    u: labels[a].clone(),
                    v: labels[b].clone(),
                    w,
                });
            }
            if adjacency[a].iter().any(|&(y, _)| y == b) {
                return Err(Error::ParallelEdge(labels[a].clone(), labels[b].clone()));
            }
            adjacency[a].push((b, w));
            adjacency[b].push((a, w));
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            edge_list.push(Edge { u, v, w });
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by_key(|&(y, _)| y);
        }
        edge_list.sort_by_key(|e| (e.u, e.v));

        let graph = WeightedGraph {
            labels,
            edges: edge_list,
            adjacency,
            boundary: Vec::new(),
        };
        graph.check_connected()?;
        Ok(graph)
    }

    /// Attach boundary metadata (e.g. the leaves of the tree family).
    pub fn with_boundary(mut self, mut boundary: Vec<usize>) -> Result<Self> {
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&bad) = boundary.iter().find(|&&b| b >= self.len()) {
            return Err(Error::UnknownVertex(bad.to_string()));
        }
        self.boundary = boundary;
        Ok(self)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.len();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in &self.adjacency[x] {
                if !visited[y] {
                    visited[y] = true;
                    queue.push_back(y);
                }
            }
        }
        match visited.iter().position(|&v| !v) {
            Some(i) => Err(Error::Disconnected(self.labels[i].clone())),
            None => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Neighbours of `x` with edge weights, sorted by index.
    pub fn neighbors(&self, x: usize) -> &[(usize, f64)] {
        &self.adjacency[x]
    }

    pub fn degree(&self, x: usize) -> usize {
        self.adjacency[x].len()
    }

    /// Edge weight, or `None` when `x` and `y` are not adjacent.
    pub fn weight(&self, x: usize, y: usize) -> Option<f64> {
        self.adjacency[x]
            .iter()
            .find(|&&(z, _)| z == y)
            .map(|&(_, w)| w)
    }

    pub fn is_adjacent(&self, x: usize, y: usize) -> bool {
        self.weight(x, y).is_some()
    }
}

/// The 1-sphere and 2-sphere of `x`, each in vertex order.
pub fn spheres(graph: &WeightedGraph, x: usize) -> (Vec<usize>, Vec<usize>) {
    let s1: Vec<usize> = graph.neighbors(x).iter().map(|&(y, _)| y).collect();
    let mut s2 = BTreeSet::new();
    for &y in &s1 {
        for &(z, _) in graph.neighbors(y) {
            if z != x && !graph.is_adjacent(x, z) {
                s2.insert(z);
            }
        }
    }
    (s1, s2.into_iter().collect())
}

/// Graph families with unit edge weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Cycle `0 ~ 1 ~ ... ~ k-1 ~ 0`, `k >= 3`.
    Cycle(usize),
    /// Path on `k >= 2` vertices.
    Path(usize),
    /// Complete graph on `k >= 2` vertices.
    Complete(usize),
    /// Star with a center `c` and `k >= 1` leaves.
    Star(usize),
    /// The ten-vertex tree: center `x1` adjacent to `x2, x3, x4`, each of
    /// which carries two leaves. Boundary is `{x5, ..., x10}`.
    TreeT3,
}

/// Index of `x_i` (1-based label) in the tree family.
pub const fn t3(i: usize) -> usize {
    i - 1
}

/// Parent of each vertex of the tree family, `None` for the center.
pub const T3_PARENT: [Option<usize>; 10] = [
    None,
    Some(0),
    Some(0),
    Some(0),
    Some(1),
    Some(1),
    Some(2),
    Some(2),
    Some(3),
    Some(3),
];

pub fn generate(family: Family) -> Result<WeightedGraph> {
    let numbered = |k: usize| (0..k).map(|i| i.to_string()).collect::<Vec<_>>();
    match family {
        Family::Cycle(k) => {
            if k < 3 {
                return Err(Error::InvalidParameter(format!(
                    "cycle needs at least 3 vertices, got {k}"
                )));
            }
            WeightedGraph::new(numbered(k), (0..k).map(|i| (i, (i + 1) % k, 1.0)))
        }
        Family::Path(k) => {
            if k < 2 {
                return Err(Error::InvalidParameter(format!(
                    "path needs at least 2 vertices, got {k}"
                )));
            }
            WeightedGraph::new(numbered(k), (0..k - 1).map(|i| (i, i + 1, 1.0)))
        }
        Family::Complete(k) => {
            if k < 2 {
                return Err(Error::InvalidParameter(format!(
                    "complete graph needs at least 2 vertices, got {k}"
                )));
            }
            let edges = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j, 1.0)));
            WeightedGraph::new(numbered(k), edges)
        }
        Family::Star(k) => {
            if k < 1 {
                return Err(Error::InvalidParameter("star needs at least 1 leaf".into()));
            }
            let mut labels = vec!["c".to_string()];
            labels.extend((1..=k).map(|i| format!("l{i}")));
            WeightedGraph::new(labels, (1..=k).map(|i| (0, i, 1.0)))
        }
        Family::TreeT3 => {
            let labels = (1..=10).map(|i| format!("x{i}")).collect();
            let edges = T3_PARENT
                .iter()
                .enumerate()
                .filter_map(|(x, p)| p.map(|p| (p, x, 1.0)));
            WeightedGraph::new(labels, edges)?.with_boundary((4..10).collect())
        }
    }
}

fn check_positive(values: &[f64], label: impl Fn(usize) -> String) -> Result<()> {
    for (i, &v) in values.iter().enumerate() {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::NonPositiveMeasure {
                vertex: label(i),
                value: v,
            });
        }
    }
    Ok(())
}

/// Strictly positive vertex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct VertexMeasure(Vec<f64>);

impl VertexMeasure {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyGraph);
        }
        check_positive(&values, |i| i.to_string())?;
        Ok(VertexMeasure(values))
    }

    /// Validate a measure against the vertex set of `graph`.
    pub fn for_graph(graph: &WeightedGraph, values: Vec<f64>) -> Result<Self> {
        if values.len() != graph.len() {
            return Err(Error::MeasureLength {
                expected: graph.len(),
                got: values.len(),
            });
        }
        check_positive(&values, |i| graph.label(i).to_string())?;
        Ok(VertexMeasure(values))
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    /// Total mass `m(V)`.
    pub fn volume(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * factor).collect())
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for VertexMeasure {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for VertexMeasure {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<VertexMeasure> for Vec<f64> {
    fn from(m: VertexMeasure) -> Vec<f64> {
        m.0
    }
}

/// Real-valued function on the vertex set.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction(Vec<f64>);

impl GraphFunction {
    pub fn new(values: Vec<f64>) -> Self {
        GraphFunction(values)
    }

    pub fn zeros(n: usize) -> Self {
        GraphFunction(vec![0.0; n])
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for GraphFunction {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for GraphFunction {
    fn from(v: Vec<f64>) -> Self {
        GraphFunction(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_five() {
        let g = generate(Family::Cycle(5)).unwrap();
        assert_eq!(g.len(), 5);
        assert_eq!(g.edges().len(), 5);
        assert!((0..5).all(|x| g.degree(x) == 2));
    }

    #[test]
    fn cycle_three_is_triangle() {
        let g = generate(Family::Cycle(3)).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(g.is_adjacent(x, y), x != y);
            }
        }
    }

    #[test]
    fn short_cycle_rejected() {
        assert!(matches!(
            generate(Family::Cycle(2)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn tree_t3_shape() {
        let g = generate(Family::TreeT3).unwrap();
        assert_eq!(g.len(), 10);
        assert_eq!(g.edges().len(), 9);
        assert_eq!(g.degree(t3(1)), 3);
        let leaves: Vec<_> = (0..10).filter(|&x| g.degree(x) == 1).collect();
        assert_eq!(leaves, vec![4, 5, 6, 7, 8, 9]);
        assert_eq!(g.boundary(), &leaves[..]);
        assert_eq!(g.label(t3(5)), "x5");
    }

    #[test]
    fn sphere_structure() {
        let c5 = generate(Family::Cycle(5)).unwrap();
        assert_eq!(spheres(&c5, 0), (vec![1, 4], vec![2, 3]));

        let t = generate(Family::TreeT3).unwrap();
        assert_eq!(spheres(&t, t3(5)), (vec![t3(2)], vec![t3(1), t3(6)]));

        let k4 = generate(Family::Complete(4)).unwrap();
        for x in 0..4 {
            let (s1, s2) = spheres(&k4, x);
            assert_eq!(s1.len(), 3);
            assert!(s2.is_empty());
        }
    }

    #[test]
    fn rejects_bad_edges() {
        let labels = || vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            WeightedGraph::new(labels(), [(0, 0, 1.0), (0, 1, 1.0)]),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            WeightedGraph::new(labels(), [(0, 1, 1.0), (1, 0, 1.0)]),
            Err(Error::ParallelEdge(..))
        ));
        assert!(matches!(
            WeightedGraph::new(labels(), [(0, 1, 0.0)]),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            WeightedGraph::new(labels(), []),
            Err(Error::Disconnected(_))
        ));
    }

    #[test]
    fn measure_validation() {
        assert!(VertexMeasure::new(vec![1.0, 0.0]).is_err());
        assert!(VertexMeasure::new(vec![1.0, f64::NAN]).is_err());
        let g = generate(Family::Cycle(3)).unwrap();
        assert!(matches!(
            VertexMeasure::for_graph(&g, vec![1.0; 4]),
            Err(Error::MeasureLength { .. })
        ));
        assert_eq!(VertexMeasure::new(vec![1.0, 2.5]).unwrap().volume(), 3.5);
    }
}
