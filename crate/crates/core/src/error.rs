use thiserror::Error;

use crate::models::ValidationErrors;
use crate::verify::SimulationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension mismatch: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },

    #[error("{context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("coordinate range {start}..{end} outside ambient dimension {ambient}")]
    BadRange {
        start: usize,
        end: usize,
        ambient: usize,
    },

    #[error("invalid tolerance: {0}")]
    InvalidTolerance(String),

    #[error("invalid model: {0}")]
    Invalid(ValidationErrors),

    #[error("contracts are not series composable")]
    NotComposable(Box<SimulationReport>),

    #[error("initial state is not in the required subspace (residual {residual:e})")]
    NotConsistent { residual: f64 },

    #[error("entry is not an exact rational: {0}")]
    NonRational(String),
}

impl From<ValidationErrors> for Error {
    fn from(errs: ValidationErrors) -> Self {
        Error::Invalid(errs)
    }
}

pub(crate) fn expect_dim(context: impl Into<String>, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        })
    }
}
