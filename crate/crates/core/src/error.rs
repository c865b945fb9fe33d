use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    Path {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("k too large: k = {k} but only {distinct} distinct values")]
    KTooLarge { k: usize, distinct: usize },

    #[error("no labeled events")]
    NoLabeledEvents,

    #[error("uncategorized event {0}")]
    UncategorizedEvent(String),

    #[error("unknown category {0}")]
    UnknownCategory(String),

    #[error("country {0} is absent from the cluster model")]
    UnknownCountry(String),

    #[error("dimension mismatch: model expects {expected} features, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("negative feature value {value} at row {row}, column {col}")]
    NegativeFeature { row: usize, col: usize, value: f64 },

    #[error("degenerate training labels: {0}")]
    DegenerateLabels(String),

    #[error("training diverged (non-finite loss) with learning rate {lr}")]
    Divergence { lr: f64 },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_path(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Path {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

/// Attach a pipeline stage name to an error.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageContext<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
