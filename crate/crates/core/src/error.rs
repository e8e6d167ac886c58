use thiserror::Error;

/// Errors raised by the physical model.
///
/// Configuration problems are reported separately as
/// [`Diagnostic`](crate::config::Diagnostic)s; everything here is a failure
/// of a model operation on inputs that already passed validation, or a
/// violated precondition when the library is driven directly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Raman table needs at least two rows, got {0}")]
    EmptyTable(usize),

    #[error("negative Raman coefficient {value} at detuning {detuning_ghz} GHz")]
    NegativeCoefficient { detuning_ghz: f64, value: f64 },

    #[error("duplicate detuning {0} GHz in Raman table")]
    DuplicateDetuning(f64),

    #[error("negative detuning {0} GHz")]
    NegativeDetuning(f64),

    #[error("Raman table line {line}: {reason}")]
    TableParse { line: usize, reason: String },

    #[error("channel plan has no classical channels")]
    EmptyPlan,

    #[error("invalid channel plan: {0}")]
    InvalidPlan(String),

    #[error("fibre attenuation must be positive for FWM, got {0} dB/km")]
    NonPositiveAttenuation(f64),

    #[error("negative optical power {0} mW")]
    NegativePower(f64),

    #[error("all count rates are zero, QBER is undefined")]
    AllRatesZero,

    #[error("calibration has no solution: {0}")]
    NoSolution(String),

    #[error("FWM never reaches Raman between {lo_dbm} and {hi_dbm} dBm")]
    NoCrossover { lo_dbm: f64, hi_dbm: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
