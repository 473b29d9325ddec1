//! Seeded property suites over random instances, shared by the `suite`
//! command. Every suite is a pure function of its seed.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bimodule::{gamma_self_test, identity_suite_with, Normalization, SamplePlan, SuiteOptions};
use crate::error::Result;
use crate::exactnum::{pow_u, PFrac, QuadReal, Rat};
use crate::morita::{
    certificate_search, condition_check, condition_witness, heisenberg_partner_spec, negated_spec,
    projection_partner, projection_partner_spec, relate_check, trace_line, ProjectionData,
    SearchBounds, SearchOutcome,
};
use crate::multiplier::{cocycle_defect, eta_bar, iota_embed, lambda_embed, psi_alpha, rho, GammaElem};
use crate::padic::{windowed_inverse_product, PAdic, TruncatedPAdic};
use crate::solenoid::{coherence_check, equal_in_xi, SolenoidSpec};

/// Result of one property suite.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub trials: u64,
    pub failures: u64,
    pub pass: bool,
    /// Summary values, exact ones as strings.
    pub detail: BTreeMap<String, String>,
    /// Inputs of the first failing trial.
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    fn new(name: &str) -> Self {
        CheckOutcome {
            name: name.to_string(),
            trials: 0,
            failures: 0,
            pass: true,
            detail: BTreeMap::new(),
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, inputs: impl FnOnce() -> String) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
            self.pass = false;
            if self.first_failure.is_none() {
                self.first_failure = Some(inputs());
            }
        }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.detail.insert(key.to_string(), value.to_string());
    }
}

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn coprime_to(rng: &mut impl Rng, p: u64, lo: i64, hi: i64) -> i64 {
    loop {
        let v = rng.random_range(lo..=hi);
        if v != 0 && v.rem_euclid(p as i64) != 0 {
            return v;
        }
    }
}

/// Irrational `theta` in `(0, 1)`: the fractional part of `(r + s sqrt(D))/c`.
pub fn random_theta(rng: &mut impl Rng) -> QuadReal {
    let d = [2u64, 3, 5, 6, 7, 10][rng.random_range(0..6)];
    let s = rng.random_range(1..=3_i64);
    let c = rng.random_range(1..=6_i64);
    let r = rng.random_range(0..c);
    let q = QuadReal::new(Rat::new(r.into(), c.into()), Rat::new(s.into(), c.into()), d)
        .expect("square-free radicand");
    q.fract()
}

/// Nonzero rational p-adic integer `a/b`; a unit when `unit` is set.
pub fn random_digit_source(rng: &mut impl Rng, p: u64, unit: bool) -> PAdic {
    let b = coprime_to(rng, p, 1, 12);
    let a = if unit {
        coprime_to(rng, p, -40, 40)
    } else {
        loop {
            let v = rng.random_range(-40..=40_i64);
            if v != 0 {
                break v;
            }
        }
    };
    PAdic::from_rational(p, &Rat::new(a.into(), b.into())).expect("prime")
}

pub fn random_spec(rng: &mut impl Rng, p: u64, unit: bool) -> SolenoidSpec {
    let theta = random_theta(rng);
    SolenoidSpec::new(p, theta, random_digit_source(rng, p, unit)).expect("integral digits")
}

fn random_prime(rng: &mut impl Rng, primes: &[u64]) -> u64 {
    primes[rng.random_range(0..primes.len())]
}

/// A spec and projection satisfying (`want = true`) or violating the condition.
pub fn condition_instance(rng: &mut impl Rng, want: bool) -> (SolenoidSpec, ProjectionData) {
    loop {
        let p = random_prime(rng, &[2, 3, 5]);
        let spec = random_spec(rng, p, false);
        let c0 = rng.random_range(1..=4_i64) * if rng.random_bool(0.5) { 1 } else { -1 };
        let d0 = rng.random_range(-4..=4_i64);
        let Some(proj) = ProjectionData::minimal(c0, d0, spec.theta()) else {
            continue;
        };
        let x0 = spec.digit(0).expect("periodic digits");
        if condition_check(p, &proj, x0) == want {
            return (spec, proj);
        }
    }
}

fn random_gamma(rng: &mut impl Rng, p: u64, kmax: u32) -> GammaElem {
    let mut part = || PFrac::new(p, rng.random_range(-60..=60_i64), rng.random_range(0..=kmax));
    let first = part();
    GammaElem::new(first, part()).expect("same prime")
}

/// Truncation of `x` against `{x s1 s2}_p`: the difference is an integer.
pub fn fraction_window(seed: u64, trials: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("padic.fraction_window");
    let mut r = rng(seed, 1);
    for _ in 0..trials {
        let p = random_prime(&mut r, &[2, 3, 5, 7]);
        let o = r.random_range(-6..=6_i32);
        let a = coprime_to(&mut r, p, -500, 500);
        let b = coprime_to(&mut r, p, 1, 500);
        let q = Rat::new(a.into(), b.into()) * Rat::from(BigInt::from(p)).pow(o);
        let x = PAdic::from_rational(p, &q).expect("prime");
        let s1 = PFrac::new(p, r.random_range(-99..=99_i64), r.random_range(0..=6));
        let s2 = PFrac::new(p, r.random_range(-99..=99_i64), r.random_range(0..=6));
        let v = x.ord().expect("nonzero");
        let k = (s1.exponent() + s2.exponent()) as i64;
        let prod = x.mul_pfrac(&s1).and_then(|y| y.mul_pfrac(&s2)).expect("same prime");
        let diff = prod.frac_part().to_rat() - x.truncate_sum(v, k - 1).to_rat() * s1.to_rat() * s2.to_rat();
        out.record(diff.is_integer(), || format!("p={p} x={q} s1={s1} s2={s2}"));
    }
    out
}

/// Windowed products of a truncated unit and its Newton inverse are `1 mod p^{k+1}`.
pub fn inverse_window(seed: u64, trials: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("padic.inverse_window");
    let mut r = rng(seed, 2);
    for _ in 0..trials {
        let p = random_prime(&mut r, &[2, 3, 5, 7]);
        let v = r.random_range(0..=5_i64);
        let k = r.random_range(0..=30_i64);
        let len = (k + 1) as usize + r.random_range(0..=4_usize);
        let mut digits: Vec<u64> = (0..len).map(|_| r.random_range(0..p)).collect();
        digits[0] = r.random_range(1..p);
        let x = TruncatedPAdic::new(p, v, digits.clone()).expect("digits below p");
        let ok = x
            .invert()
            .and_then(|y| windowed_inverse_product(&x, &y, k))
            .map(|w| (w - BigInt::one()).mod_floor(&pow_u(p, k as u64 + 1)).is_zero())
            .unwrap_or(false);
        out.record(ok, || format!("p={p} v={v} k={k} digits={digits:?}"));
    }
    out
}

/// Multiplier axioms for the sequence cocycle on six random specs.
pub fn cocycle(seed: u64, trials_per_spec: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("multiplier.cocycle");
    let mut r = rng(seed, 3);
    for _ in 0..6 {
        let p = random_prime(&mut r, &[2, 3, 5]);
        let spec = random_spec(&mut r, p, false);
        let psi = |a: &GammaElem, b: &GammaElem| psi_alpha(&spec, a, b);
        for _ in 0..trials_per_spec {
            let (a, b, c) = (random_gamma(&mut r, p, 5), random_gamma(&mut r, p, 5), random_gamma(&mut r, p, 5));
            let id = GammaElem::identity(p);
            let ok = cocycle_defect(psi, &a, &b, &c).map(|d| d.is_zero()).unwrap_or(false)
                && psi(&a, &id).map(|d| d.is_zero()).unwrap_or(false)
                && psi(&id, &a).map(|d| d.is_zero()).unwrap_or(false);
            out.record(ok, || format!("spec theta={} r={a} s={b} t={c}", spec.theta()));
        }
    }
    out
}

/// The lattice `lambda(Gamma)` pairs trivially with `iota(Gamma)`, and the
/// conjugate multiplier on it is the partner's sequence cocycle.
pub fn annihilator(seed: u64, trials: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("multiplier.annihilator");
    let mut r = rng(seed, 4);
    for _ in 0..trials {
        let p = random_prime(&mut r, &[2, 3, 5]);
        let spec = random_spec(&mut r, p, false);
        let x = spec.x_alpha().expect("periodic").clone();
        let theta = spec.theta().clone();
        let g = random_gamma(&mut r, p, 4);
        let s = random_gamma(&mut r, p, 4);
        let (s12, s34) = (random_gamma(&mut r, p, 4), random_gamma(&mut r, p, 4));
        let ok = (|| -> Result<bool> {
            let ann = rho(&iota_embed(&x, &theta, &g)?, &lambda_embed(&x, &theta, &s)?)?.is_zero();
            let partner = heisenberg_partner_spec(&spec)?;
            let lhs = eta_bar(&lambda_embed(&x, &theta, &s12)?, &lambda_embed(&x, &theta, &s34)?)?;
            Ok(ann && lhs == psi_alpha(&partner, &s12, &s34)?)
        })()
        .unwrap_or(false);
        out.record(ok, || format!("p={p} theta={theta} x={} r={g} s={s}", x.to_rational()));
    }
    out
}

/// Projection windows are coherent with integer defects in `[0, p^2)`.
pub fn projection_coherence(seed: u64, instances: u64, n_max: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("morita.projection_coherence");
    let mut r = rng(seed, 5);
    for _ in 0..instances {
        let (spec, proj) = condition_instance(&mut r, true);
        let ok = projection_partner(&spec, &proj, n_max)
            .and_then(|w| coherence_check(&w, spec.prime(), 2))
            .map(|rep| rep.is_coherent() && rep.defects_in_digit_range(spec.prime()))
            .unwrap_or(false);
        out.record(ok, || describe(&spec, &proj));
    }
    out
}

fn describe(spec: &SolenoidSpec, proj: &ProjectionData) -> String {
    let x = spec.x_alpha().map(|x| x.to_rational().to_string()).unwrap_or_default();
    format!("p={} theta={} x={x} c0={} d0={}", spec.prime(), spec.theta(), proj.c0, proj.d0)
}

/// Trace lines stay coprime under the condition; violators have witnesses.
pub fn trace_lines(seed: u64, instances: u64, n_max: u64, witness_n: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("morita.trace_lines");
    let mut r = rng(seed, 6);
    for _ in 0..instances {
        let (spec, proj) = condition_instance(&mut r, true);
        let ok = (0..=n_max).all(|n| trace_line(&spec, &proj, n).map(|l| l.gcd().is_one()).unwrap_or(false));
        out.record(ok, || describe(&spec, &proj));
    }
    for _ in 0..instances {
        let (spec, proj) = condition_instance(&mut r, false);
        let ok = matches!(condition_witness(&spec, &proj, witness_n), Ok(Some(_)));
        out.record(ok, || describe(&spec, &proj));
    }
    out
}

/// Stage instances with `c0 = 1`, `d0 = 0` and a unit digit source.
pub fn unit_instance(rng: &mut impl Rng) -> SolenoidSpec {
    let p = random_prime(rng, &[2, 3, 5]);
    random_spec(rng, p, true)
}

/// Displayed coefficients against the Heisenberg closed form, and the
/// normalized partner against the Heisenberg class.
pub fn relate(seed: u64, instances: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("morita.relate");
    let mut r = rng(seed, 7);
    let mut dets: Vec<BigInt> = Vec::new();
    let (mut direct, mut flipped) = (0u64, 0u64);
    for _ in 0..instances {
        let spec = unit_instance(&mut r);
        let ok = (|| -> Result<bool> {
            let rep = relate_check(&spec, 8)?;
            dets.extend(rep.displayed_determinants());
            let proj = ProjectionData::new(1, 1, 0, spec.theta())?;
            let normalized = projection_partner_spec(&spec, &proj, 8)?;
            let heis = heisenberg_partner_spec(&spec)?;
            if equal_in_xi(&normalized, &heis, 16)? {
                direct += 1;
            }
            let negated = equal_in_xi(&normalized, &negated_spec(&heis)?, 16)?;
            if negated {
                flipped += 1;
            }
            Ok(rep.holds() && negated)
        })()
        .unwrap_or(false);
        out.record(ok, || describe(&spec, &ProjectionData { m: 1, c0: 1, d0: 0 }));
    }
    dets.sort();
    dets.dedup();
    out.note("displayed_determinants", format!("{dets:?}"));
    out.note("normalized_equals_heisenberg", format!("{direct}/{instances}"));
    out.note("normalized_equals_negated_heisenberg", format!("{flipped}/{instances}"));
    out
}

/// Partner of the partner is the original class.
pub fn involution(seed: u64, instances: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("morita.involution");
    let mut r = rng(seed, 8);
    for _ in 0..instances {
        let spec = unit_instance(&mut r);
        let ok = heisenberg_partner_spec(&spec)
            .and_then(|b| heisenberg_partner_spec(&b))
            .and_then(|bb| equal_in_xi(&bb, &spec, 10))
            .unwrap_or(false);
        out.record(ok, || describe(&spec, &ProjectionData { m: 1, c0: 1, d0: 0 }));
    }
    out
}

/// Distinct primes are rejected; partners over the same prime are certified.
pub fn certificates(seed: u64, instances: u64) -> CheckOutcome {
    let mut out = CheckOutcome::new("morita.certificates");
    let mut r = rng(seed, 9);
    let bounds = SearchBounds::default();
    for _ in 0..instances {
        let spec = unit_instance(&mut r);
        let other_p = if spec.prime() == 2 { 3 } else { 2 };
        let other = random_spec(&mut r, other_p, true);
        let ok = (|| -> Result<bool> {
            let impossible = matches!(
                certificate_search(&spec, &other, &bounds)?,
                SearchOutcome::Impossible { .. }
            );
            let proj = ProjectionData::new(1, 1, 0, spec.theta())?;
            let target = projection_partner_spec(&spec, &proj, bounds.entries.div_ceil(2))?;
            let found = matches!(certificate_search(&spec, &target, &bounds)?, SearchOutcome::Found(_));
            Ok(impossible && found)
        })()
        .unwrap_or(false);
        out.record(ok, || describe(&spec, &ProjectionData { m: 1, c0: 1, d0: 0 }));
    }
    out
}

/// Stage-compatibility identities for `theta = sqrt(2) - 1`, `c0 = 1`, `d0 = 0`.
pub fn bimodule(seed: u64, tolerance: f64, norm: Normalization, points: usize) -> CheckOutcome {
    let mut out = CheckOutcome::new("bimodule.identities");
    let theta: QuadReal = "-1 + 1*sqrt(2)".parse().expect("literal");
    let plan = SamplePlan {
        seed,
        points,
        ..SamplePlan::default()
    };
    for (p, n) in [(2u64, 0u64), (2, 1), (2, 2), (3, 0), (3, 1)] {
        let run = (|| -> Result<(bool, String, f64)> {
            let spec = SolenoidSpec::new(p, theta.clone(), PAdic::from_integer(p, 1)?)?;
            let proj = ProjectionData::new(1, 1, 0, &theta)?;
            let opts = SuiteOptions {
                normalization: norm,
                ..SuiteOptions::default()
            };
            let rep = identity_suite_with(&spec, &proj, n, &plan, opts)?;
            let corrupted = gamma_self_test(&spec, &proj, n, &plan, 0.01)?;
            let summary = rep
                .identities
                .iter()
                .map(|(k, v)| format!("{k}={v:.3e}"))
                .collect::<Vec<_>>()
                .join(" ");
            Ok((rep.passes(tolerance) && corrupted > 1e-3, summary, corrupted))
        })();
        let (ok, summary) = match run {
            Ok((ok, s, corrupted)) => (ok, format!("{s} corrupted_gamma={corrupted:.3e}")),
            Err(e) => (false, e.to_string()),
        };
        out.note(&format!("p={p},n={n}"), &summary);
        out.record(ok, || format!("p={p} n={n}: {summary}"));
    }
    out.note("normalization", format!("{norm:?}").to_lowercase());
    out.note("tolerance", format!("{tolerance:e}"));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub bimodule_tolerance: f64,
    pub normalization: Normalization,
    pub points: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            bimodule_tolerance: 1e-9,
            normalization: Normalization::Literal,
            points: 200,
        }
    }
}

/// Every suite at the acceptance sizes.
pub fn run_all(cfg: &SuiteConfig) -> Vec<CheckOutcome> {
    let s = cfg.seed;
    vec![
        fraction_window(s, 1000),
        inverse_window(s, 500),
        cocycle(s, 1000),
        annihilator(s, 500),
        projection_coherence(s, 20, 20),
        trace_lines(s, 20, 50, 25),
        relate(s, 10),
        involution(s, 10),
        bimodule(s, cfg.bimodule_tolerance, cfg.normalization, cfg.points),
        certificates(s, 5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_respect_their_contracts() {
        let mut r = rng(1, 0);
        for _ in 0..50 {
            let t = random_theta(&mut r);
            assert!(!t.is_rational());
            assert!(t.signum().is_gt() && t.cmp_exact(&QuadReal::one()).unwrap().is_lt());
            let (spec, proj) = condition_instance(&mut r, true);
            assert!(condition_check(spec.prime(), &proj, spec.digit(0).unwrap()));
            assert_ne!(unit_instance(&mut r).digit(0).unwrap(), 0);
        }
    }

    #[test]
    fn small_suites_pass() {
        for out in [
            fraction_window(3, 100),
            inverse_window(3, 50),
            cocycle(3, 20),
            annihilator(3, 50),
            projection_coherence(3, 3, 6),
            trace_lines(3, 3, 10, 25),
            relate(3, 2),
            involution(3, 3),
        ] {
            assert!(out.pass, "{out:?}");
        }
    }

    #[test]
    fn suites_are_deterministic() {
        let a = serde_json::to_string(&relate(11, 2)).unwrap();
        let b = serde_json::to_string(&relate(11, 2)).unwrap();
        assert_eq!(a, b);
    }
}
