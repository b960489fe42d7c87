use thiserror::Error;

pub type Result<T> = std::result::Result<T, AcdError>;

/// Errors raised by simulation, filtering, estimation and the Monte Carlo lab.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcdError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infinite mean: alpha + beta = {persistence} >= 1")]
    InfiniteMean { persistence: f64 },

    #[error("empty series: first duration {first_duration} exceeds horizon {horizon}")]
    EmptySeries { horizon: f64, first_duration: f64 },

    #[error("series too short: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("invalid duration {value} at index {index}")]
    InvalidDuration { index: usize, value: f64 },

    #[error("explosion: psi = {value:e} exceeds cap {cap:e} at index {index}")]
    Explosion { index: usize, value: f64, cap: f64 },

    #[error("filter diverged at index {index}: non-finite intermediate")]
    FilterDivergence { index: usize },

    #[error("dimension mismatch: filter has {filter} observations, data has {data}")]
    DimensionMismatch { filter: usize, data: usize },

    #[error("singular information matrix: condition number {condition:e} exceeds cap {cap:e}")]
    Singular { condition: f64, cap: f64 },

    #[error("Lyapunov exponent {estimate} (se {std_error}) is not negative; process is not ergodic")]
    NotErgodic { estimate: f64, std_error: f64 },

    #[error("mean duration {mu} is within 10% of 1; rate factors are indistinguishable")]
    IndistinguishableFactors { mu: f64 },
}
