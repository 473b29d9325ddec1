use thiserror::Error;

use crate::exactnum::ExactError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error("digit x_{0} is not available (finite digit window)")]
    DigitsUnavailable(u64),
    #[error("window indices must be strictly increasing")]
    NotIncreasing,
    #[error("malformed window: {0}")]
    BadWindow(String),
    #[error("coherence violation between entries {from} and {to}: defect {defect} is not an integer")]
    Incoherent { from: u64, to: u64, defect: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("condition gcd(c0*p, d0 - c0*x0) = 1 fails: {0}")]
    ConditionFails(String),
    #[error("trace line ({c}, {d}) is not coprime")]
    NotCoprime { c: String, d: String },
    #[error("module element has modulus {found}, expected {expected}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("sample plan is empty")]
    EmptyPlan,
}

pub type Result<T> = std::result::Result<T, Error>;
