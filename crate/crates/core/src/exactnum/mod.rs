//! Exact arithmetic substrate.
//!
//! Arbitrary-precision rationals, elements of `Z[1/p]` and real quadratic
//! irrationals `r + s*sqrt(D)` with exact ordering and floor. Nothing in this
//! module touches floating point except the explicit `to_f64` lowerings.

mod gcd;
mod pfrac;
mod quad;
mod rat;

pub use gcd::{ext_gcd, Bezout};
pub use pfrac::PFrac;
pub use quad::{arith, ArithOp, QuadReal};
pub use rat::{floor_rat, frac_rat, is_prime, parse_rat, pow_u, Rat};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("incompatible radicands sqrt({0}) and sqrt({1})")]
    RadicandMismatch(u64, u64),
    #[error("radicand {0} is not square-free")]
    NotSquareFree(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("primes differ: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("{value} is not an element of Z[1/{p}]")]
    NotInZ1p { value: String, p: u64 },
    #[error("gcd(0, 0) is undefined")]
    BothZero,
    #[error("invalid digit data: {0}")]
    InvalidDigits(String),
    #[error("p-adic precision exhausted: {0}")]
    Precision(String),
    #[error("cannot parse {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

impl ExactError {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        ExactError::Parse {
            input: input.to_string(),
            reason: reason.into(),
        }
    }
}
