use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures surfaced by the analysis routines.
///
/// Each variant maps onto a stable upper-case code (see [`Error::code`]) that
/// the CLI writes into its error reports.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("input source is empty")]
    EmptySource,
    #[error("no complete cases remain after listwise deletion")]
    NoCompleteCases,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("matrix is singular or not positive definite")]
    SingularMatrix,
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("factor extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("rotation failed: {0}")]
    RotationFailed(String),
    #[error("value outside its domain: {0}")]
    Domain(String),
    #[error("dimension error: {0}")]
    Dimension(String),
    #[error("at least {min} trials required, got {got}")]
    MinTrials { min: usize, got: usize },
    #[error("predictors are collinear (condition number {condition:.3e})")]
    Collinear { condition: f64 },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptySource => "EMPTY_SOURCE",
            Error::NoCompleteCases => "NO_COMPLETE_CASES",
            Error::Config(_) => "CONFIG_ERROR",
            Error::InsufficientData(_) => "INSUFFICIENT_DATA",
            Error::SingularMatrix => "SINGULAR_MATRIX",
            Error::Degenerate(_) => "DEGENERATE",
            Error::ExtractionFailed(_) => "EXTRACTION_FAILED",
            Error::RotationFailed(_) => "ROTATION_FAILED",
            Error::Domain(_) => "DOMAIN_ERROR",
            Error::Dimension(_) => "DIMENSION_ERROR",
            Error::MinTrials { .. } => "MIN_TRIALS",
            Error::Collinear { .. } => "COLLINEAR",
        }
    }

    /// True for errors caused by invalid parameters rather than by the data.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Dimension(_) | Error::MinTrials { .. }
        )
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        Error::InsufficientData(msg.into())
    }
}
