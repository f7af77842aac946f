use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum ErwsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("probabilities must sum to 1: p+q+r = {sum}")]
    Sum { sum: f64 },

    #[error("invalid walk state: {0}")]
    State(String),

    #[error("{what} = {value} exceeds cap {cap}")]
    Cap {
        what: &'static str,
        value: u64,
        cap: u64,
    },

    #[error("degenerate statistic: {0}")]
    Degenerate(String),

    #[error("wrong regime: {0}")]
    Regime(String),

    #[error("increment out of range at index {index}: step of size {delta}")]
    Increment { index: usize, delta: i64 },
}

pub type Result<T> = core::result::Result<T, ErwsError>;
