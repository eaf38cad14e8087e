//! File formats: graph documents (JSON), trajectories (CSV plus a JSON
//! manifest) and phase-field samples (CSV).
//!
//! Graph document:
//!
//! ```json
//! {
//!   "vertices": ["x0", "x1", "x2"],
//!   "edges": [{"u": "x0", "v": "x1", "w": 1.0}, {"u": "x1", "v": "x2"}],
//!   "measure": {"x0": 2.0, "x1": 3.0, "x2": 4.0},
//!   "boundary": ["x2"]
//! }
//! ```
//!
//! `w` defaults to 1. `measure` and `boundary` are optional.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::PhaseSample;
use crate::error::{Error, Result};
use crate::flow::{FlowConfig, FlowOutcome, Trajectory};
use crate::graph::{VertexMeasure, WeightedGraph};

fn unit_weight() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDocument {
    pub u: String,
    pub v: String,
    #[serde(default = "unit_weight")]
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub boundary: Vec<String>,
}

impl GraphDocument {
    pub fn from_graph(graph: &WeightedGraph, measure: Option<&VertexMeasure>) -> Self {
        let label = |x: usize| graph.label(x).to_string();
        GraphDocument {
            vertices: graph.labels().to_vec(),
            edges: graph
                .edges()
                .iter()
                .map(|e| EdgeDocument {
                    u: label(e.u),
                    v: label(e.v),
                    w: e.w,
                })
                .collect(),
            measure: measure.map(|m| (0..graph.len()).map(|x| (label(x), m[x])).collect()),
            boundary: graph.boundary().iter().map(|&x| label(x)).collect(),
        }
    }

    /// Validate into a graph and an optional measure.
    pub fn build(&self) -> Result<(WeightedGraph, Option<VertexMeasure>)> {
        let mut index = BTreeMap::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if index.insert(v.as_str(), i).is_some() {
                return Err(Error::DuplicateVertex(v.clone()).at(format!("vertices[{i}]")));
            }
        }
        let lookup = |name: &str, path: String| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(name.to_string()).at(path))
        };

        let mut seen: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            let a = lookup(&e.u, format!("edges[{i}].u"))?;
            let b = lookup(&e.v, format!("edges[{i}].v"))?;
            if a == b {
                return Err(Error::SelfLoop(e.u.clone()).at(format!("edges[{i}]")));
            }
            if !(e.w.is_finite() && e.w > 0.0) {
                return Err(Error::NonPositiveWeight {
                    u: e.u.clone(),
                    v: e.v.clone(),
                    w: e.w,
                }
                .at(format!("edges[{i}].w")));
            }
            let key = (a.min(b), a.max(b));
            match seen.get(&key) {
                None => {
                    seen.insert(key, (a, e.w));
                    edges.push((a, b, e.w));
                }
                // The reverse orientation may be listed with the same weight.
                Some(&(first, w)) if first != a && w == e.w => {}
                Some(&(first, w)) if first != a => {
                    return Err(Error::AsymmetricWeight {
                        u: e.u.clone(),
                        v: e.v.clone(),
                        forward: w,
                        backward: e.w,
                    }
                    .at(format!("edges[{i}].w")));
                }
                Some(_) => {
                    return Err(
                        Error::ParallelEdge(e.u.clone(), e.v.clone()).at(format!("edges[{i}]"))
                    );
                }
            }
        }

        let graph = WeightedGraph::new(self.vertices.clone(), edges).map_err(|e| match e {
            Error::EmptyGraph => e.at("vertices"),
            other => other.at("edges"),
        })?;

        let boundary = self
            .boundary
            .iter()
            .enumerate()
            .map(|(i, b)| lookup(b, format!("boundary[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let graph = graph.with_boundary(boundary)?;

        let measure = match &self.measure {
            None => None,
            Some(map) => {
                for key in map.keys() {
                    lookup(key, format!("measure.{key}"))?;
                }
                let mut values = Vec::with_capacity(graph.len());
                for v in &self.vertices {
                    let value = *map.get(v).ok_or_else(|| {
                        Error::InvalidParameter(format!("no weight for vertex `{v}`"))
                            .at(format!("measure.{v}"))
                    })?;
                    if !(value.is_finite() && value > 0.0) {
                        return Err(Error::NonPositiveMeasure {
                            vertex: v.clone(),
                            value,
                        }
                        .at(format!("measure.{v}")));
                    }
                    values.push(value);
                }
                Some(VertexMeasure::for_graph(&graph, values)?)
            }
        };
        Ok((graph, measure))
    }
}

/// Parse and validate a graph document.
pub fn parse_graph(document: &[u8]) -> Result<(WeightedGraph, Option<VertexMeasure>)> {
    let doc: GraphDocument = serde_json::from_slice(document)?;
    doc.build()
}

pub fn read_graph(path: &Path) -> Result<(WeightedGraph, Option<VertexMeasure>)> {
    parse_graph(&fs::read(path)?)
}

pub fn write_graph(
    graph: &WeightedGraph,
    measure: Option<&VertexMeasure>,
    path: &Path,
) -> Result<()> {
    let doc = GraphDocument::from_graph(graph, measure);
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Provenance of a flow run, written next to the trajectory CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: FlowConfig,
    pub graph_source: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<FlowOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_estimate: Option<f64>,
    #[serde(default)]
    pub samples: usize,
}

impl RunManifest {
    pub fn new(
        command: impl Into<String>,
        config: FlowConfig,
        graph_source: impl Into<String>,
    ) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            command: command.into(),
            config,
            graph_source: graph_source.into(),
            timestamp,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outcome: None,
            blowup_estimate: None,
            samples: 0,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Trajectory as CSV: `t,m:<label>...,ric:<label>...`, one row per
/// snapshot, 17 significant digits.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, labels: &[String], out: W) -> Result<()> {
    if traj.is_empty() {
        return Err(Error::Contract("cannot write an empty trajectory".into()));
    }
    if traj.measures[0].len() != labels.len() {
        return Err(Error::Contract(format!(
            "trajectory has {} vertices, {} labels given",
            traj.measures[0].len(),
            labels.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    let header = std::iter::once("t".to_string())
        .chain(labels.iter().map(|l| format!("m:{l}")))
        .chain(labels.iter().map(|l| format!("ric:{l}")));
    w.write_record(header)?;
    for ((t, m), ric) in traj.times.iter().zip(&traj.measures).zip(&traj.curvatures) {
        let row = std::iter::once(fmt_real(*t))
            .chain(m.iter().map(|v| fmt_real(*v)))
            .chain(ric.iter().map(|v| fmt_real(*v)));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Sibling manifest path: `run.csv` → `run.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Write the CSV and its manifest; returns the manifest path.
pub fn write_trajectory(
    traj: &Trajectory,
    graph: &WeightedGraph,
    path: &Path,
    manifest: &RunManifest,
) -> Result<PathBuf> {
    let file = fs::File::create(path)?;
    write_trajectory_csv(traj, graph.labels(), std::io::BufWriter::new(file))?;
    let mpath = manifest_path(path);
    let mut text = manifest.to_json()?;
    text.push('\n');
    fs::write(&mpath, text)?;
    Ok(mpath)
}

/// Phase-field samples as CSV: `a,b,c,da,db`; infeasible points keep `a,b`
/// and leave the other columns empty.
pub fn write_phase_csv<W: Write>(samples: &[PhaseSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["a", "b", "c", "da", "db"])?;
    for s in samples {
        match *s {
            PhaseSample::Field { a, b, c, da, db } => {
                w.write_record([a, b, c, da, db].map(fmt_real))?;
            }
            PhaseSample::Infeasible { a, b } => {
                w.write_record([
                    fmt_real(a),
                    fmt_real(b),
                    String::new(),
                    String::new(),
                    String::new(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::integrate;
    use crate::graph::{generate, Family};

    const TRIANGLE: &str = r#"{
        "vertices": ["x0", "x1", "x2"],
        "edges": [{"u": "x0", "v": "x1"}, {"u": "x1", "v": "x2", "w": 1.0}, {"u": "x2", "v": "x0"}],
        "measure": {"x0": 2, "x1": 3, "x2": 4}
    }"#;

    fn err_path(e: Error) -> (String, Error) {
        match e {
            Error::Document { path, source } => (path, *source),
            other => panic!("expected a located error, got {other}"),
        }
    }

    #[test]
    fn triangle_document() {
        let (g, m) = parse_graph(TRIANGLE.as_bytes()).unwrap();
        assert_eq!(g.edges(), generate(Family::Cycle(3)).unwrap().edges());
        assert_eq!(g.labels(), ["x0", "x1", "x2"]);
        assert_eq!(&m.unwrap()[..], &[2.0, 3.0, 4.0]);
        assert!(g.edges().iter().all(|e| e.w == 1.0));
    }

    #[test]
    fn diagnostics_carry_key_paths() {
        let cases = [
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"a"}]}"#,
                "edges[0]",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"c"}]}"#,
                "edges[0].v",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","w":-1}]}"#,
                "edges[0].w",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","w":1},{"u":"b","v":"a","w":2}]}"#,
                "edges[1].w",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b"},{"u":"a","v":"b"}]}"#,
                "edges[1]",
            ),
            (
                r#"{"vertices":["a","b","c"],"edges":[{"u":"a","v":"b"}]}"#,
                "edges",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b"}],"measure":{"a":1,"b":0}}"#,
                "measure.b",
            ),
            (
                r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b"}],"measure":{"a":1}}"#,
                "measure.b",
            ),
            (r#"{"vertices":["a","a"],"edges":[]}"#, "vertices[1]"),
        ];
        for (doc, expected) in cases {
            let (path, _) = err_path(parse_graph(doc.as_bytes()).unwrap_err());
            assert_eq!(path, expected, "{doc}");
        }
        assert!(matches!(parse_graph(b"{not json"), Err(Error::Json(_))));
    }

    #[test]
    fn symmetric_duplicate_is_accepted() {
        let doc =
            r#"{"vertices":["a","b"],"edges":[{"u":"a","v":"b","w":2},{"u":"b","v":"a","w":2}]}"#;
        let (g, m) = parse_graph(doc.as_bytes()).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert!(m.is_none());
    }

    #[test]
    fn csv_layout() {
        let g = generate(Family::Cycle(3)).unwrap();
        let m0 = VertexMeasure::new(vec![2.0, 3.0, 4.0]).unwrap();
        let traj = integrate(&g, &m0, &FlowConfig::with_t_max(0.1)).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, g.labels(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,m:0,m:1,m:2,ric:0,ric:1,ric:2");
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 7);
        assert_eq!(first[1], "2.0000000000000000e0");
        assert_eq!(text.lines().count(), traj.len() + 1);
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        let traj = Trajectory {
            times: vec![],
            measures: vec![],
            curvatures: vec![],
            outcome: FlowOutcome::ReachedTMax,
            config: FlowConfig::default(),
        };
        assert!(matches!(
            write_trajectory_csv(&traj, &[], Vec::new()),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = RunManifest::new("flow --cycle 3", FlowConfig::with_t_max(3.5), "cycle:3");
        m.outcome = Some(FlowOutcome::BlownUp {
            t_hat: 1.915967337300512,
            t_stop: 1.9159673372971628,
            dt_underflow: false,
        });
        m.blowup_estimate = Some(1.915967337300512);
        m.samples = 168;
        let back = RunManifest::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(
            manifest_path(Path::new("out/run.csv")),
            Path::new("out/run.json")
        );
    }
}
