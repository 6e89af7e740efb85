use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("transition rate requires distinct states, got n = m = {0}")]
    SameIndex(usize),

    #[error("eigensolver did not converge")]
    EigenNonConvergence,

    #[error("no dressed state has more than half its weight on |0,{k}> (best overlap {best_overlap:.4})")]
    AmbiguousBranch { k: usize, best_overlap: f64 },

    #[error("denominator `{name}` = {value:e} is too close to zero")]
    NearSingularDenominator { name: &'static str, value: f64 },

    #[error("state |j,{needed}> exceeds the truncation n_max = {n_max}")]
    TruncationOverflow { needed: usize, n_max: usize },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("norm drift {drift:e} at t = {t} exceeds {limit:e}")]
    NormDrift { t: f64, drift: f64, limit: f64 },

    #[error("trace drift {drift:e} at t = {t} exceeds {limit:e}")]
    TraceDrift { t: f64, drift: f64, limit: f64 },

    #[error("density operator lost positivity at t = {t}: min eigenvalue {min_eigenvalue:e}")]
    PositivityLoss { t: f64, min_eigenvalue: f64 },
}

impl Error {
    /// Integrator failures (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenNonConvergence
                | Error::AmbiguousBranch { .. }
                | Error::NearSingularDenominator { .. }
                | Error::NormDrift { .. }
                | Error::TraceDrift { .. }
                | Error::PositivityLoss { .. }
        )
    }
}
