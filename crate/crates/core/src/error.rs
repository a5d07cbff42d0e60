use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A computation would exceed a configured memory or support budget.
    #[error("capacity exceeded: {what} needs {required} but the budget is {budget}")]
    Capacity {
        what: &'static str,
        required: u64,
        budget: u64,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("invalid moment order {0}: orders start at 2")]
    InvalidOrder(usize),
    #[error("invalid scale {0}: must be positive and finite")]
    InvalidScale(f64),
    #[error("degenerate distribution: {0}")]
    Degenerate(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// The hypotheses of a limit theorem do not hold for the requested input.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),
    #[error("parse error: {0}")]
    Parse(String),
}
