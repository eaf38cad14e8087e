use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("self-loop at vertex `{0}`")]
    SelfLoop(String),

    #[error("parallel edge between `{0}` and `{1}`")]
    ParallelEdge(String, String),

    #[error("asymmetric weight on edge `{u}`-`{v}`: {forward} vs {backward}")]
    AsymmetricWeight {
        u: String,
        v: String,
        forward: f64,
        backward: f64,
    },

    #[error("edge `{u}`-`{v}` has non-positive weight {w}")]
    NonPositiveWeight { u: String, v: String, w: f64 },

    #[error("graph is disconnected: vertex `{0}` is unreachable from the first vertex")]
    Disconnected(String),

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("measure at vertex `{vertex}` is not positive ({value})")]
    NonPositiveMeasure { vertex: String, value: f64 },

    #[error("measure has {got} entries, graph has {expected} vertices")]
    MeasureLength { expected: usize, got: usize },

    #[error("vertex {0} has no neighbours")]
    IsolatedVertex(usize),

    #[error("2-sphere block at vertex {center} is degenerate (diagonal entry {entry:e})")]
    DegenerateTwoSphere { center: usize, entry: f64 },

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("{path}: {source}")]
    Document {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Attach a document key path (e.g. `edges[2].w`) to an error.
    pub fn at(self, path: impl Into<String>) -> Error {
        Error::Document {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// True when the error originates from the filesystem.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => e.is_io_error(),
            Error::Document { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
