use thiserror::Error;

/// Errors raised anywhere in the ingestion, fitting, and evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed CSV row. `line` is 1-based and counts the header.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A well-formed row that violates a data invariant (tie score, bad header).
    #[error("validation error at line {line}: {message}")]
    Validation { line: u64, message: String },

    /// Duplicate or missing game indices within a (season, team) group.
    #[error("integrity error in {season} {team}: {message}")]
    Integrity {
        season: i32,
        team: String,
        message: String,
    },

    /// A team-season too short to split into halves.
    #[error("degenerate season {season} {team}: {message}")]
    DegenerateSeason {
        season: i32,
        team: String,
        message: String,
    },

    /// Input values for which an indicator is undefined (e.g. zero point totals).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Out-of-domain parameter (non-positive scale, cap < 1, empty grid ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Pearson correlation with a constant input vector.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("gradient descent diverged after {iteration} iterations (loss {loss:e}); try a smaller learning rate")]
    Divergence { iteration: usize, loss: f64 },

    #[error("non-finite value encountered: {0}")]
    Numeric(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse grouping used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    DataIntegrity,
    Numeric,
    Io,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parameter(_) | Error::Dimension(_) => ErrorClass::Validation,
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::Integrity { .. }
            | Error::DegenerateSeason { .. }
            | Error::DegenerateInput(_)
            | Error::Json(_) => ErrorClass::DataIntegrity,
            Error::UndefinedCorrelation(_)
            | Error::Divergence { .. }
            | Error::Numeric(_)
            | Error::Singular(_) => ErrorClass::Numeric,
            Error::Io(_) => ErrorClass::Io,
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation { .. } => "validation",
            Error::Integrity { .. } => "integrity",
            Error::DegenerateSeason { .. } => "degenerate-season",
            Error::DegenerateInput(_) => "degenerate-input",
            Error::Parameter(_) => "parameter",
            Error::Dimension(_) => "dimension",
            Error::UndefinedCorrelation(_) => "undefined-correlation",
            Error::Divergence { .. } => "divergence",
            Error::Numeric(_) => "numeric",
            Error::Singular(_) => "singular",
            Error::Json(_) => "json",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
