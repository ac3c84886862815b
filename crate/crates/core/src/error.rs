use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("projection error: {0}")]
    Projection(String),

    #[error("street network is empty")]
    EmptyNetwork,

    #[error("missing required field `{field}`")]
    MissingField { field: String },

    #[error("camera {image_id} is inside building {building_id}")]
    InsideBuilding { image_id: String, building_id: String },

    #[error("image {image_id} has no usable window or door detections")]
    NoDetections { image_id: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("feature computation failed for building {building_id}: {reason}")]
    Feature { building_id: String, reason: String },

    #[error("not enough rows: need {requested} {source_kind} rows, have {available}")]
    Availability {
        source_kind: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("training error: {0}")]
    Training(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("export error: {0}")]
    Export(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Input(_) | Error::MissingField { .. } | Error::EmptyNetwork | Error::Projection(_) => 2,
            Error::Contract(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
