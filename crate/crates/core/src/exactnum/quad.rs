use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::rat::{floor_rat, parse_rat, rat_int, Rat};
use super::ExactError;

/// A real number `rational + surd * sqrt(radicand)` in `Q(sqrt(D))`.
///
/// When `surd == 0` the radicand is normalized to 1, so rational values are
/// compatible with every field. Two irrational values only combine when they
/// share the radicand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadReal {
    rational: Rat,
    surd: Rat,
    radicand: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Exact field arithmetic, rejecting mixed radicands and division by zero.
pub fn arith(x: &QuadReal, y: &QuadReal, op: ArithOp) -> Result<QuadReal, ExactError> {
    match op {
        ArithOp::Add => x.checked_add(y),
        ArithOp::Sub => x.checked_sub(y),
        ArithOp::Mul => x.checked_mul(y),
        ArithOp::Div => x.checked_div(y),
    }
}

fn is_square_free(d: u64) -> bool {
    let mut k = 2u64;
    while k.saturating_mul(k) <= d {
        if d.is_multiple_of(k * k) {
            return false;
        }
        k += 1;
    }
    true
}

impl QuadReal {
    pub fn new(rational: Rat, surd: Rat, radicand: u64) -> Result<Self, ExactError> {
        match radicand {
            0 => Ok(QuadReal::from_rat(rational)),
            1 => Ok(QuadReal::from_rat(rational + surd)),
            d if !is_square_free(d) => Err(ExactError::NotSquareFree(d)),
            d => Ok(QuadReal::raw(rational, surd, d)),
        }
    }

    fn raw(rational: Rat, surd: Rat, radicand: u64) -> Self {
        if surd.is_zero() {
            QuadReal::from_rat(rational)
        } else {
            QuadReal {
                rational,
                surd,
                radicand,
            }
        }
    }

    pub fn from_rat(q: Rat) -> Self {
        QuadReal {
            rational: q,
            surd: Rat::zero(),
            radicand: 1,
        }
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        QuadReal::from_rat(rat_int(n))
    }

    pub fn zero() -> Self {
        QuadReal::from_int(0)
    }

    pub fn one() -> Self {
        QuadReal::from_int(1)
    }

    /// `sqrt(d)` for square-free `d`.
    pub fn sqrt(d: u64) -> Result<Self, ExactError> {
        QuadReal::new(Rat::zero(), Rat::one(), d)
    }

    pub fn rational_part(&self) -> &Rat {
        &self.rational
    }

    pub fn surd_part(&self) -> &Rat {
        &self.surd
    }

    pub fn radicand(&self) -> u64 {
        self.radicand
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }

    pub fn to_rat(&self) -> Option<Rat> {
        self.is_rational().then(|| self.rational.clone())
    }

    /// `Some(n)` when the value is the integer `n`.
    pub fn to_integer(&self) -> Option<BigInt> {
        match self.to_rat() {
            Some(q) if q.denom().is_one() => Some(q.numer().clone()),
            _ => None,
        }
    }

    pub fn is_integer(&self) -> bool {
        self.to_integer().is_some()
    }

    fn common_radicand(&self, other: &QuadReal) -> Result<u64, ExactError> {
        if self.is_rational() {
            Ok(other.radicand)
        } else if other.is_rational() || self.radicand == other.radicand {
            Ok(self.radicand)
        } else {
            Err(ExactError::RadicandMismatch(self.radicand, other.radicand))
        }
    }

    pub fn checked_add(&self, other: &QuadReal) -> Result<QuadReal, ExactError> {
        let d = self.common_radicand(other)?;
        Ok(QuadReal::raw(
            &self.rational + &other.rational,
            &self.surd + &other.surd,
            d,
        ))
    }

    pub fn checked_sub(&self, other: &QuadReal) -> Result<QuadReal, ExactError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &QuadReal) -> Result<QuadReal, ExactError> {
        let d = self.common_radicand(other)?;
        let dq = rat_int(d);
        let rational = &self.rational * &other.rational + &self.surd * &other.surd * dq;
        let surd = &self.rational * &other.surd + &self.surd * &other.rational;
        Ok(QuadReal::raw(rational, surd, d))
    }

    pub fn checked_recip(&self) -> Result<QuadReal, ExactError> {
        if self.is_zero() {
            return Err(ExactError::DivisionByZero);
        }
        let d = rat_int(self.radicand);
        let norm = &self.rational * &self.rational - &self.surd * &self.surd * d;
        // norm != 0: sqrt(D) is irrational for square-free D > 1
        Ok(QuadReal::raw(
            &self.rational / &norm,
            -(&self.surd / &norm),
            self.radicand,
        ))
    }

    pub fn checked_div(&self, other: &QuadReal) -> Result<QuadReal, ExactError> {
        self.common_radicand(other)?;
        self.checked_mul(&other.checked_recip()?)
    }

    pub fn scale(&self, q: &Rat) -> QuadReal {
        QuadReal::raw(&self.rational * q, &self.surd * q, self.radicand)
    }

    /// Sign of the value, decided by comparing squares of the two parts.
    pub fn signum(&self) -> Ordering {
        let sr = self.rational.cmp(&Rat::zero());
        let ss = self.surd.cmp(&Rat::zero());
        if ss == Ordering::Equal {
            return sr;
        }
        if sr == Ordering::Equal || sr == ss {
            return ss;
        }
        let lhs = &self.rational * &self.rational;
        let rhs = &self.surd * &self.surd * rat_int(self.radicand);
        if lhs > rhs {
            sr
        } else {
            ss
        }
    }

    pub fn cmp_exact(&self, other: &QuadReal) -> Result<Ordering, ExactError> {
        Ok(self.checked_sub(other)?.signum())
    }

    /// Greatest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        if self.is_rational() {
            return floor_rat(&self.rational);
        }
        // value = (a + b*sqrt(D)) / c with integers and c > 0
        let (a, b, c) = self.integer_form();
        let m: BigInt = (&b * &b * BigInt::from(self.radicand)).sqrt();
        let mut n: BigInt = if b.is_negative() {
            (&a - &m - BigInt::one()).div_floor(&c)
        } else {
            (&a + &m).div_floor(&c)
        };
        while (self - &QuadReal::from_int(n.clone())).signum() == Ordering::Less {
            n -= 1;
        }
        while (self - &QuadReal::from_int(&n + 1)).signum() != Ordering::Less {
            n += 1;
        }
        n
    }

    /// `self - floor(self)`, in `[0, 1)`.
    pub fn fract(&self) -> QuadReal {
        self - &QuadReal::from_int(self.floor())
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.rational.to_f64().unwrap_or(f64::NAN);
        if self.is_rational() {
            return r;
        }
        let root = (self.radicand as f64).sqrt();
        let s = self.surd.to_f64().unwrap_or(f64::NAN);
        if self.rational.is_positive() == self.surd.is_positive() {
            return r + s * root;
        }
        // opposite signs: divide the exact norm by the conjugate to avoid cancellation
        let norm = &self.rational * &self.rational
            - &self.surd * &self.surd * Rat::from_integer(self.radicand.into());
        norm.to_f64().unwrap_or(f64::NAN) / (r - s * root)
    }

    /// Integers `(a, b, c)` with value `(a + b*sqrt(D))/c`, `c > 0`, `gcd(a,b,c) = 1`.
    pub fn integer_form(&self) -> (BigInt, BigInt, BigInt) {
        let c = self.rational.denom().lcm(self.surd.denom());
        let a = (&self.rational * rat_int(c.clone())).to_integer();
        let b = (&self.surd * rat_int(c.clone())).to_integer();
        (a, b, c)
    }
}

impl PartialOrd for QuadReal {
    /// `None` for values in different quadratic fields.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_exact(other).ok()
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait for &QuadReal {
            type Output = QuadReal;

            fn $method(self, rhs: &QuadReal) -> QuadReal {
                self.$checked(rhs).expect(concat!("QuadReal ", stringify!($method)))
            }
        }

        impl $trait for QuadReal {
            type Output = QuadReal;

            fn $method(self, rhs: QuadReal) -> QuadReal {
                (&self).$method(&rhs)
            }
        }
    };
}

// Operators panic on radicand mismatch or division by zero; use `arith` or
// the `checked_*` methods where either can happen.
forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &QuadReal {
    type Output = QuadReal;

    fn neg(self) -> QuadReal {
        QuadReal {
            rational: -&self.rational,
            surd: -&self.surd,
            radicand: self.radicand,
        }
    }
}

impl Neg for QuadReal {
    type Output = QuadReal;

    fn neg(self) -> QuadReal {
        -&self
    }
}

impl From<Rat> for QuadReal {
    fn from(q: Rat) -> Self {
        QuadReal::from_rat(q)
    }
}

impl From<i64> for QuadReal {
    fn from(n: i64) -> Self {
        QuadReal::from_int(n)
    }
}

impl fmt::Display for QuadReal {
    /// `a/c` for rationals, `(a + b*sqrt(D))/c` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return if self.rational.denom().is_one() {
                write!(f, "{}", self.rational.numer())
            } else {
                write!(f, "{}/{}", self.rational.numer(), self.rational.denom())
            };
        }
        let (a, b, c) = self.integer_form();
        let sign = if b.is_negative() { '-' } else { '+' };
        write!(f, "({} {} {}*sqrt({}))/{}", a, sign, b.abs(), self.radicand, c)
    }
}

impl FromStr for QuadReal {
    type Err = ExactError;

    /// Accepts `(a + b*sqrt(D))/c`, `a + b*sqrt(D)`, `sqrt(D)/2`, `a/c`, ...
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let s: String = input
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| if c == '\u{2212}' { '-' } else { c })
            .collect();
        if s.is_empty() {
            return Err(ExactError::parse(input, "empty"));
        }
        if let Some(body) = s.strip_prefix('(') {
            let close = matching_paren(body).ok_or_else(|| ExactError::parse(input, "unbalanced"))?;
            let inner = &body[..close];
            let rest = &body[close + 1..];
            let value = parse_sum(inner, input)?;
            return match rest.strip_prefix('/') {
                None if rest.is_empty() => Ok(value),
                Some(den) => {
                    let den = QuadReal::from_rat(parse_rat(den)?);
                    value.checked_div(&den)
                }
                None => Err(ExactError::parse(input, "trailing characters")),
            };
        }
        parse_sum(&s, input)
    }
}

fn matching_paren(body: &str) -> Option<usize> {
    let mut depth = 1usize;
    for (i, ch) in body.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_sum(s: &str, input: &str) -> Result<QuadReal, ExactError> {
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' | '-' if depth == 0 && i > start => {
                terms.push(&s[start..i]);
                start = i;
            }
            _ => {}
        }
    }
    terms.push(&s[start..]);
    let mut total = QuadReal::zero();
    for term in terms {
        let term = term.strip_prefix('+').unwrap_or(term);
        if term.is_empty() {
            return Err(ExactError::parse(input, "empty term"));
        }
        total = total.checked_add(&parse_term(term, input)?)?;
    }
    Ok(total)
}

fn parse_term(term: &str, input: &str) -> Result<QuadReal, ExactError> {
    let Some(pos) = term.find("sqrt(") else {
        return Ok(QuadReal::from_rat(parse_rat(term)?));
    };
    let coeff = term[..pos].trim_end_matches('*');
    let coeff = match coeff {
        "" => Rat::one(),
        "-" => -Rat::one(),
        c => parse_rat(c)?,
    };
    let after = &term[pos + 5..];
    let close = after
        .find(')')
        .ok_or_else(|| ExactError::parse(input, "unclosed sqrt("))?;
    let radicand: u64 = after[..close]
        .parse()
        .map_err(|_| ExactError::parse(input, "bad radicand"))?;
    let tail = &after[close + 1..];
    let coeff = match tail.strip_prefix('/') {
        Some(den) => coeff / parse_rat(den)?,
        None if tail.is_empty() => coeff,
        None => return Err(ExactError::parse(input, "trailing characters after sqrt")),
    };
    QuadReal::new(Rat::zero(), coeff, radicand)
}
