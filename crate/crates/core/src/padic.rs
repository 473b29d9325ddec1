//! Exact p-adic numbers.
//!
//! Rational p-adics are stored as an order plus an eventually periodic digit
//! stream in canonical form, so equality is structural. Arbitrary digit
//! lists (possibly irrational) live in [`TruncatedPAdic`], which is correct
//! modulo its absolute precision.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exactnum::{is_prime, pow_u, ExactError, PFrac, Rat};

/// Working precision (in digits) for truncated computations.
pub const DEFAULT_PRECISION: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PAdicJson", into = "PAdicJson")]
pub struct PAdic {
    p: u64,
    /// `None` for zero.
    ord: Option<i64>,
    preperiod: Vec<u64>,
    period: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct PAdicJson {
    p: u64,
    ord: Option<i64>,
    preperiod: Vec<u64>,
    period: Vec<u64>,
}

impl TryFrom<PAdicJson> for PAdic {
    type Error = ExactError;

    fn try_from(j: PAdicJson) -> Result<Self, Self::Error> {
        match j.ord {
            None => {
                let x = PAdic::zero(j.p)?;
                if j.preperiod.iter().chain(&j.period).any(|&d| d != 0) {
                    return Err(ExactError::InvalidDigits("zero must have no nonzero digits".into()));
                }
                Ok(x)
            }
            Some(ord) => PAdic::from_parts(j.p, ord, j.preperiod, j.period),
        }
    }
}

impl From<PAdic> for PAdicJson {
    fn from(x: PAdic) -> Self {
        PAdicJson {
            p: x.p,
            ord: x.ord,
            preperiod: x.preperiod,
            period: x.period,
        }
    }
}

fn check_prime(p: u64) -> Result<(), ExactError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(ExactError::NotPrime(p))
    }
}

/// p-adic valuation of a nonzero integer, and the cofactor.
fn split_valuation(n: &BigInt, p: &BigInt) -> (i64, BigInt) {
    let mut n = n.clone();
    let mut v = 0;
    while !n.is_zero() && n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    (v, n)
}

impl PAdic {
    pub fn zero(p: u64) -> Result<Self, ExactError> {
        check_prime(p)?;
        Ok(PAdic {
            p,
            ord: None,
            preperiod: Vec::new(),
            period: vec![0],
        })
    }

    /// Builds `sum_j x_j p^j` whose digits from index `ord` on are
    /// `preperiod` followed by `period` repeated. The result is canonicalized.
    pub fn from_parts(
        p: u64,
        ord: i64,
        preperiod: Vec<u64>,
        period: Vec<u64>,
    ) -> Result<Self, ExactError> {
        check_prime(p)?;
        if period.is_empty() {
            return Err(ExactError::InvalidDigits("period must be nonempty".into()));
        }
        if let Some(d) = preperiod.iter().chain(&period).find(|&&d| d >= p) {
            return Err(ExactError::InvalidDigits(format!("digit {d} not below p = {p}")));
        }
        Ok(PAdic {
            p,
            ord: Some(ord),
            preperiod,
            period,
        }
        .canonical())
    }

    /// A finite digit list `d_0 + d_1 p + ...`, i.e. a nonnegative integer.
    pub fn from_digits(p: u64, digits: &[u64]) -> Result<Self, ExactError> {
        PAdic::from_parts(p, 0, digits.to_vec(), vec![0])
    }

    pub fn from_integer(p: u64, n: impl Into<BigInt>) -> Result<Self, ExactError> {
        PAdic::from_rational(p, &Rat::from_integer(n.into()))
    }

    pub fn from_pfrac(x: &PFrac) -> Self {
        PAdic::from_rational(x.prime(), &x.to_rat()).expect("PFrac carries a prime")
    }

    /// Expansion of a rational. The digit recursion `d = m/n mod p`,
    /// `m <- (m - d n)/p` visits finitely many states, so a repeated state
    /// closes the period.
    pub fn from_rational(p: u64, q: &Rat) -> Result<Self, ExactError> {
        check_prime(p)?;
        if q.is_zero() {
            return PAdic::zero(p);
        }
        let pb = BigInt::from(p);
        let (vn, mut m) = split_valuation(q.numer(), &pb);
        let (vd, n) = split_valuation(q.denom(), &pb);
        let n_inv = n
            .mod_floor(&pb)
            .modpow(&BigInt::from(p - 2), &pb);
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        loop {
            if let Some(&start) = seen.get(&m) {
                let period = digits.split_off(start);
                return PAdic::from_parts(p, vn - vd, digits, period);
            }
            seen.insert(m.clone(), digits.len());
            let d = (&m * &n_inv).mod_floor(&pb);
            m = (&m - &d * &n) / &pb;
            digits.push(d.to_u64().expect("digit below p"));
        }
    }

    fn canonical(mut self) -> Self {
        // shortest period
        let len = self.period.len();
        if let Some(l) = (1..=len)
            .filter(|l| len.is_multiple_of(*l))
            .find(|&l| (0..len).all(|i| self.period[i] == self.period[i % l]))
        {
            self.period.truncate(l);
        }
        // absorb the tail of the preperiod into the period
        while let (Some(&a), Some(&b)) = (self.preperiod.last(), self.period.last()) {
            if a != b {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
        if self.preperiod.iter().chain(&self.period).all(|&d| d == 0) {
            self.ord = None;
            self.preperiod.clear();
            self.period = vec![0];
            return self;
        }
        let mut ord = self.ord.expect("nonzero value has an order");
        let lead = self.preperiod.iter().take_while(|&&d| d == 0).count();
        self.preperiod.drain(..lead);
        ord += lead as i64;
        if self.preperiod.is_empty() {
            let lead = self.period.iter().take_while(|&&d| d == 0).count();
            self.period.rotate_left(lead);
            ord += lead as i64;
        }
        self.ord = Some(ord);
        self
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// `None` for zero.
    pub fn ord(&self) -> Option<i64> {
        self.ord
    }

    pub fn preperiod(&self) -> &[u64] {
        &self.preperiod
    }

    pub fn period(&self) -> &[u64] {
        &self.period
    }

    pub fn is_zero(&self) -> bool {
        self.ord.is_none()
    }

    /// Membership in `Z_p`.
    pub fn is_integral(&self) -> bool {
        self.ord.is_none_or(|v| v >= 0)
    }

    /// Coefficient of `p^j`.
    pub fn digit(&self, j: i64) -> u64 {
        let Some(v) = self.ord else { return 0 };
        if j < v {
            return 0;
        }
        let idx = (j - v) as usize;
        match self.preperiod.get(idx) {
            Some(&d) => d,
            None => self.period[(idx - self.preperiod.len()) % self.period.len()],
        }
    }

    pub fn to_rational(&self) -> Rat {
        let Some(v) = self.ord else { return Rat::zero() };
        let p = self.p;
        let horner = |ds: &[u64]| {
            ds.iter()
                .rev()
                .fold(BigInt::zero(), |acc, &d| acc * p + BigInt::from(d))
        };
        let head = Rat::from_integer(horner(&self.preperiod));
        let cycle = Rat::from_integer(horner(&self.period));
        let shift = Rat::from_integer(pow_u(p, self.preperiod.len() as u64));
        let denom = Rat::one() - Rat::from_integer(pow_u(p, self.period.len() as u64));
        let unit = head + shift * cycle / denom;
        unit * pow_rat(p, v)
    }

    fn same_prime(&self, other: &PAdic) -> Result<(), ExactError> {
        if self.p == other.p {
            Ok(())
        } else {
            Err(ExactError::PrimeMismatch(self.p, other.p))
        }
    }

    pub fn add(&self, other: &PAdic) -> Result<PAdic, ExactError> {
        self.same_prime(other)?;
        PAdic::from_rational(self.p, &(self.to_rational() + other.to_rational()))
    }

    pub fn sub(&self, other: &PAdic) -> Result<PAdic, ExactError> {
        self.same_prime(other)?;
        PAdic::from_rational(self.p, &(self.to_rational() - other.to_rational()))
    }

    pub fn mul(&self, other: &PAdic) -> Result<PAdic, ExactError> {
        self.same_prime(other)?;
        PAdic::from_rational(self.p, &(self.to_rational() * other.to_rational()))
    }

    pub fn mul_pfrac(&self, s: &PFrac) -> Result<PAdic, ExactError> {
        if s.prime() != self.p {
            return Err(ExactError::PrimeMismatch(self.p, s.prime()));
        }
        PAdic::from_rational(self.p, &(self.to_rational() * s.to_rat()))
    }

    pub fn neg(&self) -> PAdic {
        PAdic::from_rational(self.p, &-self.to_rational()).expect("prime already checked")
    }

    /// Multiplicative inverse; `ord(x^-1) = -ord(x)`.
    pub fn invert(&self) -> Result<PAdic, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        PAdic::from_rational(self.p, &self.to_rational().recip())
    }

    /// `{x}_p`: the sum of the digits at negative indices, in `[0, 1)`.
    pub fn frac_part(&self) -> PFrac {
        match self.ord {
            Some(v) if v < 0 => self.truncate_sum(v, -1),
            _ => PFrac::zero(self.p),
        }
    }

    /// `sum_{j=lo}^{hi} x_j p^j`, zero when `lo > hi`.
    pub fn truncate_sum(&self, lo: i64, hi: i64) -> PFrac {
        let start = match self.ord {
            Some(v) => lo.max(v),
            None => return PFrac::zero(self.p),
        };
        if start > hi {
            return PFrac::zero(self.p);
        }
        let mut num = BigInt::zero();
        for j in (start..=hi).rev() {
            num = num * self.p + BigInt::from(self.digit(j));
        }
        if start >= 0 {
            PFrac::integer(self.p, num * pow_u(self.p, start as u64))
        } else {
            PFrac::new(self.p, num, (-start) as u32)
        }
    }

    /// `-x` from its digits: `p - x_v` at the leading index, `p - 1 - x_j`
    /// after it. Zero maps to zero.
    pub fn negate_digits(&self) -> PAdic {
        let Some(v) = self.ord else { return self.clone() };
        let p = self.p;
        let flip = |d: &u64| p - 1 - d;
        let (lead, pre, period) = if self.preperiod.is_empty() {
            let mut rest = self.period.clone();
            rest.rotate_left(1);
            (self.period[0], Vec::new(), rest)
        } else {
            (
                self.preperiod[0],
                self.preperiod[1..].to_vec(),
                self.period.clone(),
            )
        };
        let mut digits = vec![p - lead];
        digits.extend(pre.iter().map(flip));
        let period = period.iter().map(flip).collect();
        PAdic::from_parts(p, v, digits, period).expect("digits stay below p")
    }

    pub fn truncate(&self, precision: i64) -> TruncatedPAdic {
        TruncatedPAdic::from_padic(self, precision)
    }
}

fn pow_rat(p: u64, e: i64) -> Rat {
    let m = Rat::from_integer(pow_u(p, e.unsigned_abs()));
    if e >= 0 {
        m
    } else {
        m.recip()
    }
}

impl fmt::Display for PAdic {
    /// `p=5: ord 0, [3](2)` style.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ds: &[u64]| {
            ds.iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self.ord {
            None => write!(f, "0 (p={})", self.p),
            Some(v) => write!(
                f,
                "ord {} [{}]({}) (p={})",
                v,
                join(&self.preperiod),
                join(&self.period),
                self.p
            ),
        }
    }
}

/// Finitely many digits of a p-adic number: `sum_{j=ord}^{precision-1} x_j p^j`,
/// meaningful modulo `p^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedPAdic {
    p: u64,
    ord: i64,
    digits: Vec<u64>,
}

impl TruncatedPAdic {
    /// Digits start at index `ord`; the absolute precision is
    /// `ord + digits.len()`. Leading zeros are shifted into the order.
    pub fn new(p: u64, ord: i64, digits: Vec<u64>) -> Result<Self, ExactError> {
        check_prime(p)?;
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(ExactError::InvalidDigits(format!("digit {d} not below p = {p}")));
        }
        let lead = digits.iter().take_while(|&&d| d == 0).count();
        let digits = digits[lead..].to_vec();
        Ok(TruncatedPAdic {
            p,
            ord: ord + lead as i64,
            digits,
        })
    }

    /// Digits of `x` below absolute index `precision`.
    pub fn from_padic(x: &PAdic, precision: i64) -> Self {
        let ord = x.ord().unwrap_or(precision).min(precision);
        let digits = (ord..precision).map(|j| x.digit(j)).collect();
        TruncatedPAdic {
            p: x.prime(),
            ord,
            digits,
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn ord(&self) -> i64 {
        self.ord
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn precision(&self) -> i64 {
        self.ord + self.digits.len() as i64
    }

    /// `true` if no digit below the precision is nonzero.
    pub fn is_zero(&self) -> bool {
        self.digits.is_empty()
    }

    /// `Some(x_j)` below the precision, `None` past it.
    pub fn digit(&self, j: i64) -> Option<u64> {
        if j >= self.precision() {
            None
        } else if j < self.ord {
            Some(0)
        } else {
            Some(self.digits[(j - self.ord) as usize])
        }
    }

    /// `sum_{j=lo}^{hi} x_j p^j`; errors if the window passes the precision.
    pub fn truncate_sum(&self, lo: i64, hi: i64) -> Result<PFrac, ExactError> {
        if lo > hi {
            return Ok(PFrac::zero(self.p));
        }
        if hi >= self.precision() {
            return Err(ExactError::Precision(format!(
                "digit {hi} requested at precision {}",
                self.precision()
            )));
        }
        let mut num = BigInt::zero();
        for j in (lo..=hi).rev() {
            num = num * self.p + BigInt::from(self.digit(j).unwrap_or(0));
        }
        Ok(if lo >= 0 {
            PFrac::integer(self.p, num * pow_u(self.p, lo as u64))
        } else {
            PFrac::new(self.p, num, (-lo) as u32)
        })
    }

    /// The unit part `sum_i digits[i] p^i` as an integer.
    fn unit_value(&self) -> BigInt {
        self.digits
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, &d| acc * self.p + BigInt::from(d))
    }

    fn from_unit_value(p: u64, ord: i64, value: &BigInt, len: usize) -> Self {
        let pb = BigInt::from(p);
        let mut v = value.mod_floor(&pow_u(p, len as u64));
        let mut digits = Vec::with_capacity(len);
        for _ in 0..len {
            let (q, r) = v.div_mod_floor(&pb);
            digits.push(r.to_u64().expect("digit below p"));
            v = q;
        }
        TruncatedPAdic::new(p, ord, digits).expect("digits below p")
    }

    /// Product with the relative precision of the less precise factor.
    pub fn mul(&self, other: &TruncatedPAdic) -> Result<TruncatedPAdic, ExactError> {
        if self.p != other.p {
            return Err(ExactError::PrimeMismatch(self.p, other.p));
        }
        let len = self.digits.len().min(other.digits.len());
        let prod = self.unit_value() * other.unit_value();
        Ok(TruncatedPAdic::from_unit_value(
            self.p,
            self.ord + other.ord,
            &prod,
            len,
        ))
    }

    /// Inverse by Newton iteration `y <- y (2 - u y)` on the unit part,
    /// doubling the number of correct digits each step.
    pub fn invert(&self) -> Result<TruncatedPAdic, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let p = self.p;
        let pb = BigInt::from(p);
        let len = self.digits.len();
        let u = self.unit_value();
        let u0 = BigInt::from(self.digits[0]);
        let mut y = u0.modpow(&BigInt::from(p - 2), &pb);
        let mut known = 1usize;
        while known < len {
            known = (2 * known).min(len);
            let modulus = pow_u(p, known as u64);
            let two = BigInt::from(2);
            y = (&y * (two - &u * &y)).mod_floor(&modulus);
        }
        debug_assert!((&u * &y - BigInt::one())
            .mod_floor(&pow_u(p, len as u64))
            .is_zero());
        Ok(TruncatedPAdic::from_unit_value(p, -self.ord, &y, len))
    }

    /// The represented finite sum as an element of `Z[1/p]`.
    pub fn to_pfrac(&self) -> PFrac {
        let u = self.unit_value();
        if self.ord >= 0 {
            PFrac::integer(self.p, u * pow_u(self.p, self.ord as u64))
        } else {
            PFrac::new(self.p, u, (-self.ord) as u32)
        }
    }
}

/// `true` when `a == b (mod p^k)` for integers.
pub fn congruent_mod_power(a: &BigInt, b: &BigInt, p: u64, k: u64) -> bool {
    (a - b).mod_floor(&pow_u(p, k)).is_zero()
}

/// Windowed inverse product: with
/// `v = ord(x) >= 0` and `y = x^-1`,
/// `(sum_{j=-v}^{-v+k} y_j p^{j+v}) * (sum_{j=v}^{v+k} x_j p^{j-v})`.
pub fn windowed_inverse_product(
    x: &TruncatedPAdic,
    y: &TruncatedPAdic,
    k: i64,
) -> Result<BigInt, ExactError> {
    let v = x.ord();
    let ys = y.truncate_sum(-v, -v + k)?.to_rat() * pow_rat(x.prime(), v);
    let xs = x.truncate_sum(v, v + k)?.to_rat() * pow_rat(x.prime(), -v);
    let prod = ys * xs;
    debug_assert!(prod.is_integer());
    Ok(prod.to_integer())
}
