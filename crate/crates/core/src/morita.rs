//! Partner sequences for Morita equivalent solenoids.
//!
//! Two constructions: the closed form coming from the Heisenberg module
//! (driven by the p-adic inverse of the digit source) and the stage-wise
//! Moebius construction driven by the trace `c0 theta + d0` of a projection.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::{ext_gcd, pow_u, QuadReal, Rat};
use crate::padic::PAdic;
use crate::solenoid::{equal_in_xi, from_even_entries, Digits, SeqWindow, SolenoidSpec};

/// Trace data `tau(P) = c0 theta + d0` of a projection `P` in `M_m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ProjectionData {
    pub m: u64,
    pub c0: i64,
    pub d0: i64,
}

impl ProjectionData {
    /// Checks `c0 != 0` and `0 < c0 theta + d0 < m` exactly.
    pub fn new(m: u64, c0: i64, d0: i64, theta: &QuadReal) -> Result<Self> {
        let proj = ProjectionData { m, c0, d0 };
        proj.validate(theta)?;
        Ok(proj)
    }

    /// Smallest admissible `m` for the given trace line, if the trace is positive.
    pub fn minimal(c0: i64, d0: i64, theta: &QuadReal) -> Option<Self> {
        if c0 == 0 {
            return None;
        }
        let tau = trace_value(c0, d0, theta);
        if tau.signum() != Ordering::Greater {
            return None;
        }
        let m = tau.floor() + 1;
        let m = u64::try_from(m).ok()?;
        Some(ProjectionData { m, c0, d0 })
    }

    pub fn validate(&self, theta: &QuadReal) -> Result<()> {
        if self.c0 == 0 {
            return Err(Error::Hypothesis("c0 must be nonzero".into()));
        }
        let tau = self.trace(theta);
        let upper = tau.cmp_exact(&QuadReal::from_int(self.m))?;
        if tau.signum() != Ordering::Greater || upper != Ordering::Less {
            return Err(Error::Hypothesis(format!(
                "trace {tau} is not in (0, {})",
                self.m
            )));
        }
        Ok(())
    }

    pub fn trace(&self, theta: &QuadReal) -> QuadReal {
        trace_value(self.c0, self.d0, theta)
    }
}

fn trace_value(c0: i64, d0: i64, theta: &QuadReal) -> QuadReal {
    &theta.scale(&Rat::from_integer(c0.into())) + &QuadReal::from_int(d0)
}

/// `gcd(c0 p, d0 - c0 x0) == 1`, with `gcd(a, 0) = |a|`.
pub fn condition_check(p: u64, proj: &ProjectionData, x0: u64) -> bool {
    let c0 = BigInt::from(proj.c0);
    let u = &c0 * p;
    let v = BigInt::from(proj.d0) - &c0 * x0;
    u.gcd(&v).is_one()
}

/// `(c_{2n}, d_{2n})` with `c_{2n} alpha_{2n} + d_{2n} = c0 alpha_0 + d0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct TraceLine {
    pub n: u64,
    #[serde(serialize_with = "ser_big")]
    pub c: BigInt,
    #[serde(serialize_with = "ser_big")]
    pub d: BigInt,
}

fn ser_big<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

impl TraceLine {
    pub fn gcd(&self) -> BigInt {
        self.c.gcd(&self.d)
    }
}

/// `c_{2n} = c0 p^{2n}`, `d_{2n} = d0 - c0 sum_{j<2n} x_j p^j`.
pub fn trace_line(spec: &SolenoidSpec, proj: &ProjectionData, n: u64) -> Result<TraceLine> {
    let c0 = BigInt::from(proj.c0);
    let c = &c0 * pow_u(spec.prime(), 2 * n);
    let d = BigInt::from(proj.d0) - &c0 * spec.digit_sum(2 * n)?;
    let line = TraceLine { n, c, d };
    let lhs = &spec.alpha_at(2 * n)?.scale(&Rat::from_integer(line.c.clone()))
        + &QuadReal::from_int(line.d.clone());
    debug_assert_eq!(lhs, proj.trace(spec.theta()));
    Ok(line)
}

/// Why a trace line fails the condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionWitness {
    /// `gcd(c_{2n}, d_{2n}) > 1` at stage `n`.
    TraceLine {
        n: u64,
        #[serde(serialize_with = "ser_big")]
        gcd: BigInt,
    },
    /// `gcd(c0, d0) > 1` already.
    Initial {
        #[serde(serialize_with = "ser_big")]
        gcd: BigInt,
    },
}

/// For a line failing the condition, the first stage `n <= max_n` whose
/// `(c_{2n}, d_{2n})` is not coprime, falling back to `gcd(c0, d0)`.
pub fn condition_witness(
    spec: &SolenoidSpec,
    proj: &ProjectionData,
    max_n: u64,
) -> Result<Option<ConditionWitness>> {
    for n in 0..=max_n {
        let line = trace_line(spec, proj, n)?;
        let g = line.gcd();
        if g > BigInt::one() {
            return Ok(Some(ConditionWitness::TraceLine { n, gcd: g }));
        }
    }
    let g = BigInt::from(proj.c0).gcd(&BigInt::from(proj.d0));
    Ok((g > BigInt::one()).then_some(ConditionWitness::Initial { gcd: g }))
}

/// Integers `a, b, c, d` acting by `alpha -> (a alpha + b)/(c alpha + d)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MobiusPair {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl MobiusPair {
    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn apply(&self, alpha: &QuadReal) -> Result<QuadReal> {
        let int = |x: &BigInt| Rat::from_integer(x.clone());
        let num = &alpha.scale(&int(&self.a)) + &QuadReal::from_int(self.b.clone());
        let den = &alpha.scale(&int(&self.c)) + &QuadReal::from_int(self.d.clone());
        Ok(num.checked_div(&den)?)
    }
}

/// The determinant-one pair over `(c, d)` with `beta = (a alpha + b)/(c alpha + d)`
/// in `[0, 1)`: a Bezout solution shifted by `l = -floor(beta)`.
pub fn ab_normalized(line: &TraceLine, alpha2n: &QuadReal) -> Result<MobiusPair> {
    let bz = ext_gcd(&line.d, &line.c)?;
    if !bz.g.is_one() {
        return Err(Error::NotCoprime {
            c: line.c.to_string(),
            d: line.d.to_string(),
        });
    }
    // s d + t c = 1, so a = s, b = -t has a d - b c = 1
    let mut pair = MobiusPair {
        a: bz.s,
        b: -bz.t,
        c: line.c.clone(),
        d: line.d.clone(),
    };
    let l = -pair.apply(alpha2n)?.floor();
    pair.a += &l * &pair.c;
    pair.b += &l * &pair.d;
    debug_assert!(pair.det().is_one());
    Ok(pair)
}

pub(crate) fn require_condition(spec: &SolenoidSpec, proj: &ProjectionData) -> Result<()> {
    proj.validate(spec.theta())?;
    let x0 = spec.digit(0)?;
    if condition_check(spec.prime(), proj, x0) {
        return Ok(());
    }
    let witness = condition_witness(spec, proj, 1)?;
    let detail = match witness {
        Some(ConditionWitness::TraceLine { n, gcd }) => {
            format!("gcd(c_{}, d_{}) = {gcd}", 2 * n, 2 * n)
        }
        Some(ConditionWitness::Initial { gcd }) => format!("gcd(c0, d0) = {gcd}"),
        None => format!("x0 = {x0}"),
    };
    Err(Error::ConditionFails(detail))
}

/// Entries `{2n: beta_{2n}}`, `n <= N`, from the normalized Moebius pairs.
pub fn projection_partner(spec: &SolenoidSpec, proj: &ProjectionData, n_max: u64) -> Result<SeqWindow> {
    require_condition(spec, proj)?;
    let entries = (0..=n_max)
        .map(|n| {
            let line = trace_line(spec, proj, n)?;
            let alpha = spec.alpha_at(2 * n)?;
            Ok((2 * n, ab_normalized(&line, &alpha)?.apply(&alpha)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SeqWindow::new(entries)
}

/// The projection partner as a spec with known digits below `2 N`.
pub fn projection_partner_spec(
    spec: &SolenoidSpec,
    proj: &ProjectionData,
    n_max: u64,
) -> Result<SolenoidSpec> {
    from_even_entries(spec.prime(), &projection_partner(spec, proj, n_max)?)
}

fn heisenberg_inputs(spec: &SolenoidSpec) -> Result<&PAdic> {
    let x = spec.x_alpha().ok_or_else(|| {
        Error::Hypothesis("the Heisenberg partner needs a periodic digit source".into())
    })?;
    if x.is_zero() {
        return Err(Error::Hypothesis("x_alpha must be nonzero".into()));
    }
    if spec.theta().is_zero() {
        return Err(Error::Hypothesis("theta must be nonzero".into()));
    }
    Ok(x)
}

/// `beta_n = 1/(theta p^n) + (sum_{j=-v}^{n-1} y_j p^j) / p^n` for `n <= N`,
/// with `y = x_alpha^-1` and `v = ord(x_alpha)`.
pub fn heisenberg_partner(spec: &SolenoidSpec, n_max: u64) -> Result<SeqWindow> {
    let x = heisenberg_inputs(spec)?;
    let y = x.invert()?;
    let v = x.ord().expect("nonzero");
    let p = spec.prime();
    let recip = spec.theta().checked_recip()?;
    let entries = (0..=n_max)
        .map(|n| {
            let scale = Rat::new(BigInt::one(), pow_u(p, n));
            let sum = QuadReal::from_rat(y.truncate_sum(-v, n as i64 - 1).to_rat());
            Ok((n, (&recip + &sum).scale(&scale)))
        })
        .collect::<Result<Vec<_>>>()?;
    SeqWindow::new(entries)
}

/// Unit case of the partner formula: `beta_n = 1/(theta p^n) + (sum_{j<n} y_j p^j)/p^n`.
/// Requires `x_0 != 0`.
pub fn heisenberg_partner_unit(spec: &SolenoidSpec, n_max: u64) -> Result<SeqWindow> {
    let x = heisenberg_inputs(spec)?;
    if x.ord() != Some(0) {
        return Err(Error::Hypothesis("x_0 must be nonzero".into()));
    }
    let y = x.invert()?;
    let partner = SolenoidSpec::new(spec.prime(), spec.theta().checked_recip()?, y)?;
    partner.window(n_max)
}

/// The Heisenberg partner as a spec: `theta' = 1/theta + {y}_p` with the
/// digits of `y - {y}_p`, so that its entries reproduce the closed form.
pub fn heisenberg_partner_spec(spec: &SolenoidSpec) -> Result<SolenoidSpec> {
    let x = heisenberg_inputs(spec)?;
    let y = x.invert()?;
    let frac = y.frac_part().to_rat();
    let theta = &spec.theta().checked_recip()? + &QuadReal::from_rat(frac.clone());
    let int_part = PAdic::from_rational(spec.prime(), &(y.to_rational() - frac))?;
    SolenoidSpec::new(spec.prime(), theta, int_part)
}

/// The class of `-alpha`: `theta -> -theta`, `x -> -x`.
pub fn negated_spec(spec: &SolenoidSpec) -> Result<SolenoidSpec> {
    match spec.digits() {
        Digits::Periodic(x) => SolenoidSpec::new(spec.prime(), -spec.theta(), x.neg()),
        Digits::Finite(_) => Err(Error::Hypothesis(
            "negation needs a periodic digit source".into(),
        )),
    }
}

/// One stage of the comparison between the two partner constructions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelateEntry {
    pub n: u64,
    /// Coefficients as displayed for the `tau(P) = theta` projection.
    pub displayed: MobiusPair,
    pub b_integral: bool,
    pub displayed_beta: QuadReal,
    pub heisenberg_beta: QuadReal,
    /// The determinant-one normalized pair over the same trace line.
    pub normalized: MobiusPair,
    pub normalized_beta: QuadReal,
}

impl RelateEntry {
    pub fn exact_agreement(&self) -> bool {
        self.displayed_beta == self.heisenberg_beta
    }

    pub fn normalized_matches_direct(&self) -> bool {
        (&self.normalized_beta - &self.heisenberg_beta).is_integer()
    }

    pub fn normalized_matches_negated(&self) -> bool {
        (&self.normalized_beta + &self.heisenberg_beta).is_integer()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelateReport {
    pub entries: Vec<RelateEntry>,
}

impl RelateReport {
    /// Displayed coefficients reproduce the Heisenberg entries exactly with
    /// integral `b`.
    pub fn holds(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.exact_agreement() && e.b_integral)
    }

    /// Determinants of the displayed coefficient sets, deduplicated.
    pub fn displayed_determinants(&self) -> Vec<BigInt> {
        let mut dets: Vec<BigInt> = self.entries.iter().map(|e| e.displayed.det()).collect();
        dets.sort();
        dets.dedup();
        dets
    }

    pub fn normalized_matches_direct(&self) -> bool {
        self.entries.iter().all(RelateEntry::normalized_matches_direct)
    }

    pub fn normalized_matches_negated(&self) -> bool {
        self.entries.iter().all(RelateEntry::normalized_matches_negated)
    }
}

/// Compares, for `n <= N`, the Moebius form with coefficients
/// `a = Y`, `b = (1 - Y X)/p^{2n}`, `c = p^{2n}`, `d = -X`
/// (`X`, `Y` the digit sums of `x_alpha` and its inverse below `2n`) against
/// the Heisenberg closed form, and records the determinant-one normalized
/// partner next to it.
pub fn relate_check(spec: &SolenoidSpec, n_max: u64) -> Result<RelateReport> {
    let x = heisenberg_inputs(spec)?;
    if spec.digit(0)? == 0 {
        return Err(Error::Hypothesis("x_0 must be nonzero".into()));
    }
    let theta = spec.theta();
    if theta.signum() != Ordering::Greater || theta.cmp_exact(&QuadReal::one())? != Ordering::Less {
        return Err(Error::Hypothesis("theta must lie in (0, 1)".into()));
    }
    let p = spec.prime();
    let y = x.invert()?;
    let proj = ProjectionData::new(1, 1, 0, theta)?;
    let heis = heisenberg_partner(spec, 2 * n_max)?;
    let mut entries = Vec::new();
    for n in 0..=n_max {
        let big_x = spec.digit_sum(2 * n)?;
        let big_y = y.truncate_sum(0, 2 * n as i64 - 1).numer().clone();
        let c = pow_u(p, 2 * n);
        let b_rat = Rat::new(BigInt::one() - &big_y * &big_x, c.clone());
        let b_integral = b_rat.is_integer();
        let displayed = MobiusPair {
            a: big_y,
            b: b_rat.floor().to_integer(),
            c,
            d: -big_x,
        };
        let alpha = spec.alpha_at(2 * n)?;
        let displayed_beta = if b_integral {
            displayed.apply(&alpha)?
        } else {
            let int = |v: &BigInt| Rat::from_integer(v.clone());
            let num = &alpha.scale(&int(&displayed.a)) + &QuadReal::from_rat(b_rat);
            let den = &alpha.scale(&int(&displayed.c)) + &QuadReal::from_int(displayed.d.clone());
            num.checked_div(&den)?
        };
        let line = trace_line(spec, &proj, n)?;
        let normalized = ab_normalized(&line, &alpha)?;
        let normalized_beta = normalized.apply(&alpha)?;
        entries.push(RelateEntry {
            n,
            displayed,
            b_integral,
            displayed_beta,
            heisenberg_beta: heis.get(2 * n).expect("window covers 2N").clone(),
            normalized,
            normalized_beta,
        });
    }
    Ok(RelateReport { entries })
}

/// Limits of the certificate enumeration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_c0: u64,
    pub max_d0: u64,
    /// Largest truncation index; only even values are tried.
    pub max_k: u64,
    /// Sequences are compared at indices `0..=entries`.
    pub entries: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_c0: 4,
            max_d0: 4,
            max_k: 4,
            entries: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub c0: i64,
    pub d0: i64,
    pub m: u64,
    pub k: u64,
    pub matched_entries: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SearchOutcome {
    /// A projection over the `k`-th stage whose partner matches.
    Found(Certificate),
    /// Different primes: the `K_1` groups differ.
    Impossible { p_a: u64, p_b: u64 },
    /// Nothing within the bounds; not evidence of non-equivalence.
    Inconclusive { candidates: u64 },
}

/// Candidate grid in the order `(k, |c0|, sign c0, |d0|, sign d0)`, positive
/// signs first.
fn candidates(bounds: &SearchBounds) -> Vec<(u64, i64, i64)> {
    let signed = |v: u64| -> Vec<i64> {
        if v == 0 {
            vec![0]
        } else {
            vec![v as i64, -(v as i64)]
        }
    };
    let mut out = Vec::new();
    for k in (0..=bounds.max_k).step_by(2) {
        for c in 1..=bounds.max_c0 {
            for c0 in signed(c) {
                for d in 0..=bounds.max_d0 {
                    for d0 in signed(d) {
                        out.push((k, c0, d0));
                    }
                }
            }
        }
    }
    out
}

/// Bounded search for a projection over some stage of `a` whose partner is
/// `b`. Distinct primes are rejected immediately.
pub fn certificate_search(a: &SolenoidSpec, b: &SolenoidSpec, bounds: &SearchBounds) -> Result<SearchOutcome> {
    if a.prime() != b.prime() {
        return Ok(SearchOutcome::Impossible {
            p_a: a.prime(),
            p_b: b.prime(),
        });
    }
    let half = bounds.entries.div_ceil(2);
    let grid = candidates(bounds);
    let found = grid.par_iter().find_map_first(|&(k, c0, d0)| {
        let shifted = a.shifted(k).ok()?;
        let proj = ProjectionData::minimal(c0, d0, shifted.theta())?;
        if !condition_check(a.prime(), &proj, shifted.digit(0).ok()?) {
            return None;
        }
        let partner = projection_partner_spec(&shifted, &proj, half).ok()?;
        equal_in_xi(&partner, b, bounds.entries)
            .ok()?
            .then_some(Certificate {
                c0,
                d0,
                m: proj.m,
                k,
                matched_entries: bounds.entries + 1,
            })
    });
    Ok(match found {
        Some(cert) => SearchOutcome::Found(cert),
        None => SearchOutcome::Inconclusive {
            candidates: grid.len() as u64,
        },
    })
}
