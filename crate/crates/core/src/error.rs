use std::path::PathBuf;

/// Every failure the toolkit reports.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid depth {0}: depth must be finite and positive")]
    InvalidDepth(f64),
    #[error("pixel ({u}, {v}) outside {width}x{height} image")]
    OutOfBounds {
        u: f64,
        v: f64,
        width: usize,
        height: usize,
    },
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("mesh is not watertight: {0}")]
    Topology(String),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("parse error in {source_name} at {location}: {message}")]
    Parse {
        source_name: String,
        location: String,
        message: String,
    },
    #[error("no intent survived proposal filtering")]
    EmptyProposal,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("degenerate bounding box [{0}, {1}, {2}, {3}]")]
    DegenerateBox(f64, f64, f64, f64),
    #[error("no mask for view {view_id}, intent {intent_id}")]
    MissingMask { view_id: usize, intent_id: usize },
    #[error("view {0} has no depth map")]
    MissingDepth(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid finger assignment: {0}")]
    Assignment(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("episode has no recorded fingertip contacts")]
    MissingContact,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid kinematic chain: {0}")]
    InvalidChain(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("bundle failed validation: {}", .0.join("; "))]
    Bundle(Vec<String>),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        source_name: impl Into<String>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn json(source_name: impl Into<String>, err: serde_json::Error) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            location: format!("line {}, column {}", err.line(), err.column()),
            message: err.to_string(),
        }
    }

    /// Wraps an error with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
