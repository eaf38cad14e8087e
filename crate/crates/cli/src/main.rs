use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beflow::analysis::{phase_field_c3, run_suite, square_grid, Suite};
use beflow::io::{read_graph, write_graph, write_phase_csv, write_trajectory, RunManifest};
use beflow::{
    estimate_blowup_time, generate, integrate, ricci_all, Dimension, Error, Family, FlowConfig,
    FlowOutcome, VertexMeasure, WeightedGraph,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_BAD_INPUT: u8 = 2;
const EXIT_IO: u8 = 3;

/// Bakry-Emery curvature and Ricci flow on weighted graphs.
#[derive(Parser)]
#[command(name = "beflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the curvature at every vertex as JSON.
    Curvature {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        measure: MeasureArg,
        /// Dimension parameter: `inf` or a positive number.
        #[arg(long, default_value = "inf")]
        dimension: Dimension,
    },
    /// Integrate the flow and print the run manifest as JSON.
    Flow {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long, default_value = "inf")]
        dimension: Dimension,
        /// Integrate the volume-preserving flow.
        #[arg(long)]
        normalized: bool,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-10)]
        atol: f64,
        /// Trajectory CSV; the manifest goes next to it with a `.json` suffix.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the normalized triangle flow on a square grid.
    PhaseC3 {
        #[arg(long, default_value_t = 1.2)]
        grid_min: f64,
        #[arg(long, default_value_t = 271.0 / 60.0)]
        grid_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        /// CSV destination; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite. Exits 1 if any check fails.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteArg,
    },
    /// Write a graph document for one of the built-in families.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        /// Size parameter (ignored for `tree-t3`).
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Destination; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct GraphSource {
    /// Graph document (JSON).
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    cycle: Option<usize>,
    #[arg(long, value_name = "K")]
    path: Option<usize>,
    #[arg(long, value_name = "K")]
    complete: Option<usize>,
    /// Star with K leaves.
    #[arg(long, value_name = "K")]
    star: Option<usize>,
    /// The ten-vertex tree with boundary x5..x10.
    #[arg(long)]
    tree_t3: bool,
}

#[derive(Args)]
struct MeasureArg {
    /// Vertex weights: a comma-separated list in vertex order, or a JSON
    /// file holding an array or a label-to-weight object. Defaults to the
    /// measure in the graph document, else all ones.
    #[arg(long, visible_alias = "m0", allow_hyphen_values = true)]
    measure: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    T3,
    C3,
    C4,
    Ck,
    Normalized,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Cycle,
    Path,
    Complete,
    Star,
    TreeT3,
}

impl GraphSource {
    fn load(&self) -> Result<(WeightedGraph, Option<VertexMeasure>, String), Error> {
        let family = match *self {
            GraphSource {
                graph: Some(ref p), ..
            } => {
                let (g, m) = read_graph(p).map_err(|e| e.at(p.display().to_string()))?;
                return Ok((g, m, p.display().to_string()));
            }
            GraphSource { cycle: Some(k), .. } => Family::Cycle(k),
            GraphSource { path: Some(k), .. } => Family::Path(k),
            GraphSource {
                complete: Some(k), ..
            } => Family::Complete(k),
            GraphSource { star: Some(k), .. } => Family::Star(k),
            _ => Family::TreeT3,
        };
        Ok((generate(family)?, None, describe(family)))
    }
}

fn describe(family: Family) -> String {
    match family {
        Family::Cycle(k) => format!("cycle:{k}"),
        Family::Path(k) => format!("path:{k}"),
        Family::Complete(k) => format!("complete:{k}"),
        Family::Star(k) => format!("star:{k}"),
        Family::TreeT3 => "tree-t3".into(),
    }
}

impl MeasureArg {
    fn resolve(
        &self,
        graph: &WeightedGraph,
        from_doc: Option<VertexMeasure>,
    ) -> Result<VertexMeasure, Error> {
        let Some(spec) = &self.measure else {
            return match from_doc {
                Some(m) => Ok(m),
                None => VertexMeasure::uniform(graph.len(), 1.0),
            };
        };
        let inline: Result<Vec<f64>, _> =
            spec.split(',').map(|s| s.trim().parse::<f64>()).collect();
        if let Ok(values) = inline {
            return VertexMeasure::for_graph(graph, values).map_err(|e| e.at("--measure"));
        }
        let path = Path::new(spec);
        let text = std::fs::read(path).map_err(|e| Error::from(e).at(spec.clone()))?;
        let values = match serde_json::from_slice::<serde_json::Value>(&text)? {
            serde_json::Value::Object(_) => {
                let map: BTreeMap<String, f64> = serde_json::from_slice(&text)?;
                let mut values = Vec::with_capacity(graph.len());
                for label in graph.labels() {
                    let v = map.get(label).ok_or_else(|| {
                        Error::InvalidParameter(format!("no weight for vertex `{label}`"))
                            .at(label.clone())
                    })?;
                    values.push(*v);
                }
                for key in map.keys() {
                    if graph.index_of(key).is_none() {
                        return Err(Error::UnknownVertex(key.clone()).at(key.clone()));
                    }
                }
                values
            }
            _ => serde_json::from_slice(&text)?,
        };
        VertexMeasure::for_graph(graph, values).map_err(|e| e.at(spec.clone()))
    }
}

enum Failure {
    Checks,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Error(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Failure::Error(Error::Io(e.into()))
        } else {
            Failure::Error(e.into())
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Curvature {
            source,
            measure,
            dimension,
        } => {
            let (graph, doc_measure, _) = source.load()?;
            let m = measure.resolve(&graph, doc_measure)?;
            let ric = ricci_all(&graph, &m, dimension)?;
            let vertices: Vec<_> = (0..graph.len())
                .map(|x| serde_json::json!({ "label": graph.label(x), "m": m[x], "ric": ric[x] }))
                .collect();
            print_json(&serde_json::json!({ "dimension": dimension, "vertices": vertices }))
        }
        Command::Flow {
            source,
            measure,
            dimension,
            normalized,
            t_max,
            rtol,
            atol,
            out,
        } => {
            let (graph, doc_measure, origin) = source.load()?;
            let m0 = measure.resolve(&graph, doc_measure)?;
            let config = FlowConfig {
                dimension,
                normalized,
                t_max,
                rtol,
                atol,
                ..FlowConfig::default()
            };
            let traj = integrate(&graph, &m0, &config)?;
            let command = std::env::args().collect::<Vec<_>>().join(" ");
            let mut manifest = RunManifest::new(command, config, origin);
            manifest.outcome = Some(traj.outcome);
            manifest.samples = traj.len();
            if let FlowOutcome::BlownUp { .. } = traj.outcome {
                manifest.blowup_estimate = estimate_blowup_time(&traj).ok();
            }
            if let Some(path) = out {
                write_trajectory(&traj, &graph, &path, &manifest)
                    .map_err(|e| e.at(path.display().to_string()))?;
            }
            print_json(&manifest)
        }
        Command::PhaseC3 {
            grid_min,
            grid_max,
            steps,
            out,
        } => {
            let samples = phase_field_c3(&square_grid(grid_min, grid_max, steps)?)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path)
                        .map_err(|e| Error::from(e).at(path.display().to_string()))?;
                    write_phase_csv(&samples, std::io::BufWriter::new(file))?;
                }
                None => write_phase_csv(&samples, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::T3 => Suite::T3,
                SuiteArg::C3 => Suite::C3,
                SuiteArg::C4 => Suite::C4,
                SuiteArg::Ck => Suite::Ck,
                SuiteArg::Normalized => Suite::Normalized,
                SuiteArg::All => Suite::All,
            };
            let reports = run_suite(suite)?;
            print_json(&reports)?;
            if reports.iter().all(|r| r.passed) {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::Generate { family, size, out } => {
            let family = match family {
                FamilyArg::Cycle => Family::Cycle(size),
                FamilyArg::Path => Family::Path(size),
                FamilyArg::Complete => Family::Complete(size),
                FamilyArg::Star => Family::Star(size),
                FamilyArg::TreeT3 => Family::TreeT3,
            };
            let graph = generate(family)?;
            match out {
                Some(path) => write_graph(&graph, None, &path)
                    .map_err(|e| e.at(path.display().to_string()))?,
                None => print_json(&beflow::io::GraphDocument::from_graph(&graph, None))?,
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_BAD_INPUT })
        }
    }
}
