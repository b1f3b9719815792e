use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the sampling pipeline.
#[derive(Debug, Error)]
pub enum SvarError {
    #[error("matrix is rank deficient (|R_jj| = {min_diag:e} below tolerance)")]
    RankDeficient { min_diag: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("index out of sample: {0}")]
    OutOfSample(String),

    #[error("narrative restrictions need innovations in the margin context")]
    MissingContext,

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("unknown shock `{0}`")]
    UnknownShock(String),

    #[error("unknown date `{0}`")]
    UnknownDate(String),

    #[error("every importance weight is zero")]
    AllInfeasible,

    #[error("identified set treated as empty after {attempts} attempts")]
    EmptyVerdict { attempts: u64 },

    #[error("slice shrinkage exceeded {0} iterations")]
    ShrinkBudgetExceeded(usize),

    #[error("posterior plausibility floor hit: {kept} non-empty of {attempts} phi draws")]
    PlausibilityFloor { kept: usize, attempts: usize },

    #[error("robust credible interval has zero width")]
    DegenerateWidth,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dates are not contiguous monthly at line {line}")]
    GapInDates { line: usize },

    #[error("non-positive value for log transform in `{variable}` at line {line}")]
    NonPositiveForLog { variable: String, line: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SvarError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        SvarError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SvarError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            SvarError::PlausibilityFloor { .. } => EXIT_PLAUSIBILITY_FLOOR,
            SvarError::Config(_)
            | SvarError::Schema { .. }
            | SvarError::Parse { .. }
            | SvarError::GapInDates { .. }
            | SvarError::NonPositiveForLog { .. }
            | SvarError::UnknownVariable(_)
            | SvarError::UnknownShock(_)
            | SvarError::UnknownDate(_)
            | SvarError::OutOfSample(_)
            | SvarError::Io { .. } => EXIT_INPUT,
            _ => EXIT_FAILURE,
        }
    }

    /// Short machine-readable tag used in the CLI error record.
    pub fn kind(&self) -> &'static str {
        match self {
            SvarError::RankDeficient { .. } => "rank-deficient",
            SvarError::NotPositiveDefinite => "not-positive-definite",
            SvarError::InsufficientData(_) => "insufficient-data",
            SvarError::OutOfSample(_) => "out-of-sample",
            SvarError::MissingContext => "missing-context",
            SvarError::Schema { .. } => "schema",
            SvarError::UnknownVariable(_) => "unknown-variable",
            SvarError::UnknownShock(_) => "unknown-shock",
            SvarError::UnknownDate(_) => "unknown-date",
            SvarError::AllInfeasible => "all-infeasible",
            SvarError::EmptyVerdict { .. } => "empty-verdict",
            SvarError::ShrinkBudgetExceeded(_) => "shrink-budget-exceeded",
            SvarError::PlausibilityFloor { .. } => "plausibility-floor",
            SvarError::DegenerateWidth => "degenerate-width",
            SvarError::Parse { .. } => "parse",
            SvarError::GapInDates { .. } => "gap-in-dates",
            SvarError::NonPositiveForLog { .. } => "non-positive-for-log",
            SvarError::Config(_) => "config",
            SvarError::Io { .. } => "io",
        }
    }
}

pub const EXIT_FAILURE: i32 = 1;
/// Invalid configuration, restriction document or dataset.
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_PLAUSIBILITY_FLOOR: i32 = 3;

pub type Result<T> = std::result::Result<T, SvarError>;
