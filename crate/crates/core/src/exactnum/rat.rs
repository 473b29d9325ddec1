use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use super::ExactError;

/// Reduced arbitrary-precision rational with positive denominator.
pub type Rat = BigRational;

/// Greatest integer `<= q`.
pub fn floor_rat(q: &Rat) -> BigInt {
    q.numer().div_floor(q.denom())
}

/// `q - floor(q)`, always in `[0, 1)`.
pub fn frac_rat(q: &Rat) -> Rat {
    q - Rat::from_integer(floor_rat(q))
}

pub fn pow_u(base: u64, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parses `a`, `a/b` or `-a/b` (ASCII or U+2212 minus).
pub fn parse_rat(input: &str) -> Result<Rat, ExactError> {
    let cleaned: String = input
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| if c == '\u{2212}' { '-' } else { c })
        .collect();
    let (num, den) = match cleaned.split_once('/') {
        Some((n, d)) => (n, d),
        None => (cleaned.as_str(), "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| ExactError::parse(input, "bad numerator"))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| ExactError::parse(input, "bad denominator"))?;
    if den.is_zero() {
        return Err(ExactError::DivisionByZero);
    }
    Ok(Rat::new(num, den))
}

pub(crate) fn rat_int(n: impl Into<BigInt>) -> Rat {
    Rat::from_integer(n.into())
}
