use std::path::PathBuf;

use thiserror::Error;

use crate::scene::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(ValidationReport),

    #[error("invalid chirp: {0}")]
    InvalidChirp(String),

    #[error("range must be non-negative, got {0} m")]
    NegativeRange(f64),

    #[error(
        "scene max_range {max_range_m} m exceeds the unambiguous range {unambiguous_m:.3} m of the chirp"
    )]
    UnambiguousRange { max_range_m: f64, unambiguous_m: f64 },

    #[error("target `{0}` is not part of the scene")]
    TargetNotInScene(String),

    #[error("reference feature not found within 3 bins of {hint_m} m")]
    ReferenceFeatureNotFound { hint_m: f64 },

    #[error("at least one profile is required")]
    NoProfiles,

    #[error("profiles were produced by different chirp configurations")]
    ChirpMismatch,

    #[error("amplitude must be positive, got {0}")]
    NonPositiveAmplitude(f64),

    #[error("classes are not separable: {0}")]
    NotSeparable(String),

    #[error("need ≥ 2 classes to calibrate, got {0}")]
    TooFewClasses(usize),

    #[error("invalid configuration `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("unknown built-in scenario `{0}`")]
    UnknownScenario(String),

    #[error("step {step} ({stage}): {source}")]
    Stage {
        step: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("summary requires the `{0}` stage")]
    MissingStage(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the filesystem rather than by the inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            Error::Stage { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
