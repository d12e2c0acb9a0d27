use thiserror::Error;

/// Errors raised by the fitting pipelines, the harness and the file readers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("invalid sampling grid: {0}")]
    InvalidGrid(String),
    #[error("invalid width: {0}")]
    InvalidWidth(String),
    #[error("invalid amplitude: {0}")]
    InvalidAmplitude(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("clamp floor must be positive, got {0}")]
    InvalidClamp(f64),
    #[error("weighted normal equations are singular")]
    SingularSystem,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("signal has no positive maximum")]
    NoPeak,
    #[error("window length {len} out of range for {samples} samples")]
    InvalidWindow { len: usize, samples: usize },
    #[error("area {0} is not positive")]
    DegenerateArea(f64),
    #[error("combination coefficient has a zero denominator")]
    DegenerateRho,
    #[error("Fisher information sum vanishes on the index range")]
    DegenerateFisher,
    #[error("iteration count must be at least 1")]
    InvalidIterations,
    #[error("unknown method id `{0}`")]
    UnknownMethod(String),
    #[error("shape mismatch: {0}")]
    ShapeError(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<FitError>,
    },
    #[error("{stage}: {source}")]
    AtStage {
        stage: &'static str,
        #[source]
        source: Box<FitError>,
    },
}

impl FitError {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        FitError::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        FitError::AtStage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with iteration and stage labels stripped.
    pub fn root(&self) -> &FitError {
        match self {
            FitError::AtIteration { source, .. } | FitError::AtStage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<std::io::Error> for FitError {
    fn from(err: std::io::Error) -> Self {
        FitError::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FitError>;
