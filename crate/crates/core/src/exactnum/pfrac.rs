use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::rat::{pow_u, Rat};
use super::ExactError;

/// An element `j / p^k` of `Z[1/p]` in reduced form (`p` does not divide `j`
/// unless `k == 0`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PFrac {
    p: u64,
    num: BigInt,
    exp: u32,
}

impl PFrac {
    pub fn new(p: u64, num: impl Into<BigInt>, exp: u32) -> Self {
        let pb = BigInt::from(p);
        let mut num = num.into();
        let mut exp = exp;
        if num.is_zero() {
            exp = 0;
        }
        while exp > 0 && num.is_multiple_of(&pb) {
            num /= &pb;
            exp -= 1;
        }
        PFrac { p, num, exp }
    }

    pub fn zero(p: u64) -> Self {
        PFrac::new(p, 0, 0)
    }

    pub fn integer(p: u64, n: impl Into<BigInt>) -> Self {
        PFrac::new(p, n, 0)
    }

    /// Fails unless the reduced denominator of `q` is a power of `p`.
    pub fn from_rat(p: u64, q: &Rat) -> Result<Self, ExactError> {
        let pb = BigInt::from(p);
        let mut den = q.denom().clone();
        let mut exp = 0u32;
        while den.is_multiple_of(&pb) {
            den /= &pb;
            exp += 1;
        }
        if !den.is_one() {
            return Err(ExactError::NotInZ1p {
                value: q.to_string(),
                p,
            });
        }
        Ok(PFrac::new(p, q.numer().clone(), exp))
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_rat(&self) -> Rat {
        Rat::new(self.num.clone(), pow_u(self.p, self.exp as u64))
    }

    fn check_prime(&self, other: &PFrac) {
        assert_eq!(
            self.p, other.p,
            "PFrac arithmetic across different primes"
        );
    }
}

impl fmt::Display for PFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.num, self.p, self.exp)
    }
}

impl FromStr for PFrac {
    type Err = ExactError;

    /// Parses `j/p^k`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| if c == '\u{2212}' { '-' } else { c })
            .collect();
        let (num, rest) = cleaned
            .split_once('/')
            .ok_or_else(|| ExactError::parse(s, "expected j/p^k"))?;
        let (p, k) = rest
            .split_once('^')
            .ok_or_else(|| ExactError::parse(s, "expected j/p^k"))?;
        let num: BigInt = num.parse().map_err(|_| ExactError::parse(s, "bad j"))?;
        let p: u64 = p.parse().map_err(|_| ExactError::parse(s, "bad p"))?;
        let k: u32 = k.parse().map_err(|_| ExactError::parse(s, "bad k"))?;
        if !super::is_prime(p) {
            return Err(ExactError::NotPrime(p));
        }
        Ok(PFrac::new(p, num, k))
    }
}

impl Add for &PFrac {
    type Output = PFrac;

    fn add(self, rhs: &PFrac) -> PFrac {
        self.check_prime(rhs);
        let k = self.exp.max(rhs.exp);
        let a = &self.num * pow_u(self.p, (k - self.exp) as u64);
        let b = &rhs.num * pow_u(self.p, (k - rhs.exp) as u64);
        PFrac::new(self.p, a + b, k)
    }
}

impl Sub for &PFrac {
    type Output = PFrac;

    fn sub(self, rhs: &PFrac) -> PFrac {
        self + &(-rhs)
    }
}

impl Mul for &PFrac {
    type Output = PFrac;

    fn mul(self, rhs: &PFrac) -> PFrac {
        self.check_prime(rhs);
        PFrac::new(self.p, &self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Neg for &PFrac {
    type Output = PFrac;

    fn neg(self) -> PFrac {
        PFrac {
            p: self.p,
            num: -&self.num,
            exp: self.exp,
        }
    }
}
