use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate triangle (area below {threshold:e} m^2)")]
    DegenerateTriangle { threshold: f64 },

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("bvh covers {bvh} triangles but the mesh has {mesh} faces")]
    MismatchedBvh { bvh: usize, mesh: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown preset `{0}` (known: {known})", known = crate::nn::PRESET_NAMES.join(", "))]
    UnknownPreset(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("training data contains a single class")]
    SingleClassData,

    #[error("pooled covariance is singular even after ridge regularization")]
    SingularCovariance,

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("class {class} occurred in {found} of {draws} draws (below 1%)")]
    ClassStarvation { class: u8, found: usize, draws: usize },

    #[error("invalid robot model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

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

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        Error::DimensionMismatch { expected, found }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
