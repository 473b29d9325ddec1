//! Parameter sequences `alpha = (alpha_n)` with `p alpha_{n+1} = alpha_n + x_n`.
//!
//! A sequence is stored through its generator: the initial value `theta`
//! and the digit stream `x`, so `alpha_n = (theta + sum_{j<n} x_j p^j) / p^n`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{is_prime, pow_u, ExactError, QuadReal, Rat};
use crate::padic::PAdic;

/// The digit stream `x_0, x_1, ...` of a sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Digits {
    /// Digits of a rational p-adic integer; known at every index.
    Periodic(PAdic),
    /// Explicit digits; indices past the list are unknown.
    Finite(Vec<u64>),
}

impl Digits {
    pub fn get(&self, j: u64) -> Option<u64> {
        match self {
            Digits::Periodic(x) => Some(x.digit(j as i64)),
            Digits::Finite(ds) => ds.get(j as usize).copied(),
        }
    }

    /// Number of known digits, `None` if unbounded.
    pub fn known(&self) -> Option<u64> {
        match self {
            Digits::Periodic(_) => None,
            Digits::Finite(ds) => Some(ds.len() as u64),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SolenoidSpec {
    p: u64,
    theta: QuadReal,
    digits: Digits,
}

impl SolenoidSpec {
    /// Spec with the digits of the p-adic integer `x`.
    pub fn new(p: u64, theta: QuadReal, x: PAdic) -> Result<Self> {
        if x.prime() != p {
            return Err(ExactError::PrimeMismatch(p, x.prime()).into());
        }
        if !x.is_integral() {
            return Err(Error::Hypothesis(format!("digit source {x} is not a p-adic integer")));
        }
        Ok(SolenoidSpec {
            p,
            theta,
            digits: Digits::Periodic(x),
        })
    }

    /// Spec with finitely many explicit digits, each in `0..p`.
    pub fn with_digits(p: u64, theta: QuadReal, digits: Vec<u64>) -> Result<Self> {
        if !is_prime(p) {
            return Err(ExactError::NotPrime(p).into());
        }
        if let Some(d) = digits.iter().find(|&&d| d >= p) {
            return Err(ExactError::InvalidDigits(format!("digit {d} not below p = {p}")).into());
        }
        Ok(SolenoidSpec {
            p,
            theta,
            digits: Digits::Finite(digits),
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn theta(&self) -> &QuadReal {
        &self.theta
    }

    pub fn digits(&self) -> &Digits {
        &self.digits
    }

    /// The generating p-adic integer, when the digits are periodic.
    pub fn x_alpha(&self) -> Option<&PAdic> {
        match &self.digits {
            Digits::Periodic(x) => Some(x),
            Digits::Finite(_) => None,
        }
    }

    pub fn digit(&self, j: u64) -> Result<u64> {
        self.digits.get(j).ok_or(Error::DigitsUnavailable(j))
    }

    /// `sum_{j=0}^{n-1} x_j p^j`.
    pub fn digit_sum(&self, n: u64) -> Result<BigInt> {
        let mut acc = BigInt::zero();
        for j in (0..n).rev() {
            acc = acc * self.p + BigInt::from(self.digit(j)?);
        }
        Ok(acc)
    }

    /// `alpha_n = (theta + sum_{j<n} x_j p^j) / p^n`.
    pub fn alpha_at(&self, n: u64) -> Result<QuadReal> {
        let s = QuadReal::from_int(self.digit_sum(n)?);
        let scale = Rat::new(BigInt::from(1), pow_u(self.p, n));
        Ok((&self.theta + &s).scale(&scale))
    }

    /// The sequence `(alpha_{n+k})_n`.
    pub fn shifted(&self, k: u64) -> Result<SolenoidSpec> {
        let theta = self.alpha_at(k)?;
        let digits = match &self.digits {
            Digits::Periodic(x) => {
                let head = Rat::from_integer(self.digit_sum(k)?);
                let scale = Rat::from_integer(pow_u(self.p, k));
                Digits::Periodic(PAdic::from_rational(
                    self.p,
                    &((x.to_rational() - head) / scale),
                )?)
            }
            Digits::Finite(ds) => Digits::Finite(ds.iter().skip(k as usize).copied().collect()),
        };
        Ok(SolenoidSpec {
            p: self.p,
            theta,
            digits,
        })
    }

    /// The class `h(alpha)`: entries `alpha_n mod 1`, `n <= N`.
    pub fn reduce_h(&self, n_max: u64) -> Result<SeqWindow> {
        let entries = (0..=n_max)
            .map(|n| Ok((n, self.alpha_at(n)?.fract())))
            .collect::<Result<Vec<_>>>()?;
        SeqWindow::new(entries)
    }

    /// Entries `alpha_n`, `n <= N`, without reduction.
    pub fn window(&self, n_max: u64) -> Result<SeqWindow> {
        let entries = (0..=n_max)
            .map(|n| Ok((n, self.alpha_at(n)?)))
            .collect::<Result<Vec<_>>>()?;
        SeqWindow::new(entries)
    }

    /// Even-index entries `alpha_{2n}`, `n <= N`.
    pub fn even_window(&self, n_max: u64) -> Result<SeqWindow> {
        let entries = (0..=n_max)
            .map(|n| Ok((2 * n, self.alpha_at(2 * n)?)))
            .collect::<Result<Vec<_>>>()?;
        SeqWindow::new(entries)
    }
}

/// A finite window of entries `(n, value)` with strictly increasing `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeqWindow {
    entries: Vec<(u64, QuadReal)>,
}

impl SeqWindow {
    pub fn new(entries: Vec<(u64, QuadReal)>) -> Result<Self> {
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::NotIncreasing);
        }
        Ok(SeqWindow { entries })
    }

    pub fn entries(&self) -> &[(u64, QuadReal)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: u64) -> Option<&QuadReal> {
        self.entries
            .binary_search_by_key(&n, |(i, _)| *i)
            .ok()
            .map(|k| &self.entries[k].1)
    }

    /// Entrywise `value mod 1`.
    pub fn reduce_mod1(&self) -> SeqWindow {
        SeqWindow {
            entries: self
                .entries
                .iter()
                .map(|(n, v)| (*n, v.fract()))
                .collect(),
        }
    }

    /// Entrywise sum; the index sets must coincide.
    pub fn add(&self, other: &SeqWindow) -> Result<SeqWindow> {
        if self.entries.len() != other.entries.len() {
            return Err(Error::BadWindow("index sets differ".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|((n, a), (m, b))| {
                if n != m {
                    return Err(Error::BadWindow("index sets differ".into()));
                }
                Ok((*n, a.checked_add(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SeqWindow { entries })
    }

    /// Entries at indices present in both windows that differ mod 1.
    pub fn mismatches_mod1(&self, other: &SeqWindow) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        for (n, a) in &self.entries {
            if let Some(b) = other.get(*n) {
                if !a.checked_sub(b)?.is_integer() {
                    out.push(*n);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for SeqWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in &self.entries {
            writeln!(f, "{n}: {v}")?;
        }
        Ok(())
    }
}

/// One adjacent pair of a coherence check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub from: u64,
    pub to: u64,
    /// `p^step w_to - w_from`.
    pub value: QuadReal,
}

impl Defect {
    pub fn integer(&self) -> Option<BigInt> {
        self.value.to_integer()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoherenceReport {
    pub step: u64,
    pub defects: Vec<Defect>,
}

impl CoherenceReport {
    /// Pairs whose defect is not an integer.
    pub fn violations(&self) -> Vec<&Defect> {
        self.defects.iter().filter(|d| d.integer().is_none()).collect()
    }

    pub fn is_coherent(&self) -> bool {
        self.violations().is_empty()
    }

    /// Coherent with every defect in `[0, p^step)`.
    pub fn defects_in_digit_range(&self, p: u64) -> bool {
        let bound = pow_u(p, self.step);
        self.defects.iter().all(|d| {
            d.integer()
                .is_some_and(|k| k >= BigInt::zero() && k < bound)
        })
    }

    pub fn first_violation(&self) -> Option<Error> {
        self.violations().first().map(|d| Error::Incoherent {
            from: d.from,
            to: d.to,
            defect: d.value.to_string(),
        })
    }
}

/// Defects `p^step w_{n+step} - w_n` over adjacent entries. The window must
/// have indices spaced exactly `step` apart.
pub fn coherence_check(window: &SeqWindow, p: u64, step: u64) -> Result<CoherenceReport> {
    if step == 0 {
        return Err(Error::BadWindow("step must be positive".into()));
    }
    let scale = Rat::from_integer(pow_u(p, step));
    let mut defects = Vec::new();
    for pair in window.entries().windows(2) {
        let ((n, a), (m, b)) = (&pair[0], &pair[1]);
        if m - n != step {
            return Err(Error::BadWindow(format!(
                "indices {n} and {m} are not {step} apart"
            )));
        }
        defects.push(Defect {
            from: *n,
            to: *m,
            value: b.scale(&scale).checked_sub(a)?,
        });
    }
    Ok(CoherenceReport { step, defects })
}

/// Rebuilds a spec from entries `beta_0, beta_2, ..., beta_{2K}` in `[0, 1)`:
/// odd entries are `beta_{2n+1} = p beta_{2n+2} mod 1` and the digits are
/// `x_m = p beta_{m+1} - beta_m`. Digits past index `2K - 1` are unknown.
pub fn from_even_entries(p: u64, even: &SeqWindow) -> Result<SolenoidSpec> {
    if !is_prime(p) {
        return Err(ExactError::NotPrime(p).into());
    }
    for (k, (n, v)) in even.entries().iter().enumerate() {
        if *n != 2 * k as u64 {
            return Err(Error::BadWindow("expected entries at indices 0, 2, 4, ...".into()));
        }
        if v.signum() == Ordering::Less || v.cmp_exact(&QuadReal::one())? != Ordering::Less {
            return Err(Error::BadWindow(format!("entry {n} = {v} is not in [0, 1)")));
        }
    }
    let Some((_, theta)) = even.entries().first() else {
        return Err(Error::BadWindow("empty window".into()));
    };
    let report = coherence_check(even, p, 2)?;
    if let Some(err) = report.first_violation() {
        return Err(err);
    }
    let pq = Rat::from_integer(BigInt::from(p));
    let mut full = vec![theta.clone()];
    for pair in even.entries().windows(2) {
        let next = &pair[1].1;
        full.push(next.scale(&pq).fract());
        full.push(next.clone());
    }
    let digits = full
        .windows(2)
        .map(|w| {
            let x = w[1].scale(&pq).checked_sub(&w[0])?;
            let x = x.to_integer().and_then(|x| x.to_u64()).filter(|&x| x < p);
            x.ok_or_else(|| Error::BadWindow("recovered digit out of range".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    SolenoidSpec::with_digits(p, theta.clone(), digits)
}

/// Whether `h(a)` and `h(b)` agree at every index `<= N`. Agreement on a
/// finite window is necessary for equality in `Xi_p`, not sufficient.
pub fn equal_in_xi(a: &SolenoidSpec, b: &SolenoidSpec, n_max: u64) -> Result<bool> {
    Ok(first_difference_in_xi(a, b, n_max)?.is_none())
}

/// The first index `<= N` where `h(a)` and `h(b)` differ.
pub fn first_difference_in_xi(a: &SolenoidSpec, b: &SolenoidSpec, n_max: u64) -> Result<Option<u64>> {
    if a.prime() != b.prime() {
        return Err(ExactError::PrimeMismatch(a.prime(), b.prime()).into());
    }
    for n in 0..=n_max {
        if !a.alpha_at(n)?.checked_sub(&b.alpha_at(n)?)?.is_integer() {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum DigitsJson {
    Periodic(PAdic),
    Finite(Vec<u64>),
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    p: u64,
    theta: String,
    digits: DigitsJson,
}

impl Serialize for SolenoidSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson {
            p: self.p,
            theta: self.theta.to_string(),
            digits: match &self.digits {
                Digits::Periodic(x) => DigitsJson::Periodic(x.clone()),
                Digits::Finite(ds) => DigitsJson::Finite(ds.clone()),
            },
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SolenoidSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SpecJson::deserialize(d)?;
        let theta: QuadReal = j.theta.parse().map_err(D::Error::custom)?;
        match j.digits {
            DigitsJson::Periodic(x) => SolenoidSpec::new(j.p, theta, x),
            DigitsJson::Finite(ds) => SolenoidSpec::with_digits(j.p, theta, ds),
        }
        .map_err(D::Error::custom)
    }
}

#[derive(Serialize)]
struct EntryJson {
    n: u64,
    value: String,
}

impl Serialize for SeqWindow {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<EntryJson> = self
            .entries
            .iter()
            .map(|(n, x)| EntryJson {
                n: *n,
                value: x.to_string(),
            })
            .collect();
        v.serialize(s)
    }
}
