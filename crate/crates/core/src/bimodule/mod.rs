//! Numerical model of the stage-wise equivalence bimodules `X_{2n}` over
//! `A_{beta_{2n}}` (left) and `A_{alpha_{2n}}` (right), the embeddings between
//! consecutive stages, and the compatibility checks between them.
//!
//! Elements of `X_{2n}` are finite sums `sum_j f_j delta_j` on `R x Z_c` with
//! compactly supported `f_j`; algebra elements are finite Fourier-type sums
//! `sum_k a_k(r) delta_k` with 1-periodic `a_k`. All sums over `Z` appearing in
//! the action and inner-product formulas are cut to the exact finite range
//! forced by the supports.

mod algebra;
mod profile;
mod suite;

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::exactnum::QuadReal;
use crate::morita::{ab_normalized, require_condition, trace_line, ProjectionData};
use crate::solenoid::SolenoidSpec;

pub use algebra::{inner_left, inner_right, phi_embed, AlgElem, Component};
pub use profile::{cis, HatFn, Profile};
pub use suite::{
    gamma_self_test, identity_suite, identity_suite_with, random_alg_elem, random_mod_elem,
    IdentityReport, SamplePlan, SuiteOptions,
};

/// Generators of the rotation algebras.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Gen {
    U,
    V,
}

/// Scaling used by the stage embedding `iota_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The displayed factor `1/sqrt(p)`.
    #[default]
    Literal,
    /// No scaling.
    Unit,
}

impl Normalization {
    pub fn factor(self, p: u64) -> f64 {
        match self {
            Normalization::Literal => 1.0 / (p as f64).sqrt(),
            Normalization::Unit => 1.0,
        }
    }
}

/// Stage data for `X_{2n}`: the trace line, the normalized Moebius pair and
/// the parameters `alpha_{2n}`, `beta_{2n}` and `gamma = 1/(c alpha + d)`.
#[derive(Clone, Debug)]
pub struct BimCtx {
    spec: SolenoidSpec,
    proj: ProjectionData,
    n: u64,
    alpha: QuadReal,
    beta: QuadReal,
    gamma: QuadReal,
    p: u64,
    c: i64,
    d: i64,
    a: i64,
    b: i64,
    alpha_f: f64,
    beta_f: f64,
    gamma_f: f64,
    tau_f: f64,
}

fn small(x: &BigInt, what: &str) -> Result<i64> {
    x.to_i64()
        .filter(|v| v.unsigned_abs() < 1 << 40)
        .ok_or_else(|| Error::Hypothesis(format!("{what} = {x} is too large for the numeric kernels")))
}

impl BimCtx {
    pub fn new(spec: &SolenoidSpec, proj: &ProjectionData, n: u64) -> Result<Self> {
        require_condition(spec, proj)?;
        let line = trace_line(spec, proj, n)?;
        let alpha = spec.alpha_at(2 * n)?;
        let pair = ab_normalized(&line, &alpha)?;
        let beta = pair.apply(&alpha)?;
        let tau = proj.trace(spec.theta());
        let gamma = tau.checked_recip()?;
        let stage_tau = &alpha.scale(&line.c.clone().into()) + &QuadReal::from_int(line.d.clone());
        debug_assert_eq!(stage_tau, tau);
        Ok(BimCtx {
            spec: spec.clone(),
            proj: proj.clone(),
            n,
            p: spec.prime(),
            c: small(&pair.c, "c")?,
            d: small(&pair.d, "d")?,
            a: small(&pair.a, "a")?,
            b: small(&pair.b, "b")?,
            alpha_f: alpha.to_f64(),
            beta_f: beta.to_f64(),
            gamma_f: gamma.to_f64(),
            tau_f: tau.to_f64(),
            alpha,
            beta,
            gamma,
        })
    }

    /// Context for the next stage `n + 1`.
    pub fn next(&self) -> Result<Self> {
        BimCtx::new(&self.spec, &self.proj, self.n + 1)
    }

    /// Copy whose floating-point `gamma` is displaced by `delta`; for harness self-tests.
    pub fn with_gamma_offset(&self, delta: f64) -> Self {
        let mut ctx = self.clone();
        ctx.gamma_f += delta;
        ctx.tau_f = 1.0 / ctx.gamma_f;
        ctx
    }

    pub fn spec(&self) -> &SolenoidSpec {
        &self.spec
    }

    pub fn proj(&self) -> &ProjectionData {
        &self.proj
    }

    pub fn level(&self) -> u64 {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn alpha(&self) -> &QuadReal {
        &self.alpha
    }

    pub fn beta(&self) -> &QuadReal {
        &self.beta
    }

    pub fn gamma(&self) -> &QuadReal {
        &self.gamma
    }

    /// `(a, b, c, d)` at this stage.
    pub fn pair(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn modulus(&self) -> u64 {
        self.c.unsigned_abs()
    }

    pub fn alpha_f64(&self) -> f64 {
        self.alpha_f
    }

    pub fn beta_f64(&self) -> f64 {
        self.beta_f
    }

    pub fn gamma_f64(&self) -> f64 {
        self.gamma_f
    }

    fn check(&self, f: &ModElem) -> Result<()> {
        if f.modulus != self.modulus() {
            return Err(Error::ModulusMismatch {
                expected: self.modulus(),
                found: f.modulus,
            });
        }
        Ok(())
    }

    /// `x / c` reduced mod 1 for an integer `x`, computed exactly first.
    fn frac_over_c(&self, x: i128) -> f64 {
        let m = self.c.unsigned_abs() as i128;
        x.rem_euclid(m) as f64 / self.c as f64
    }

    /// `U^k . F` or `V^k . F` for the left algebra `A_beta`.
    pub fn act_left_gen(&self, gen: Gen, power: i64, f: &ModElem) -> Result<ModElem> {
        self.check(f)?;
        if power == 0 {
            return Ok(f.clone());
        }
        let out = match gen {
            // (U^k F)(t, m) = F(t - k gamma, m - k)
            Gen::U => f.map_terms(|j, prof| {
                (j as i64 + power, prof.clone().shift(power as f64 * self.gamma_f))
            }),
            // (V^k F)(t, m) = e^{2 pi i k (t - a m)/c} F(t, m)
            Gen::V => f.map_terms(|j, prof| {
                let phase = -self.frac_over_c(power as i128 * self.a as i128 * j as i128);
                let freq = power as f64 / self.c as f64;
                (j as i64, prof.clone().modulate(freq, phase))
            }),
        };
        Ok(out)
    }

    /// `F . U^k` or `F . V^k` for the right algebra `A_alpha`.
    pub fn act_right_gen(&self, gen: Gen, power: i64, f: &ModElem) -> Result<ModElem> {
        self.check(f)?;
        if power == 0 {
            return Ok(f.clone());
        }
        let out = match gen {
            // (F U^k)(t, m) = F(t - k, m - k d)
            Gen::U => f.map_terms(|j, prof| (j as i64 + power * self.d, prof.clone().shift(power as f64))),
            // (F V^k)(t, m) = e^{2 pi i k (t/gamma - m)/c} F(t, m)
            Gen::V => f.map_terms(|j, prof| {
                let phase = -self.frac_over_c(power as i128 * j as i128);
                let freq = power as f64 * self.tau_f / self.c as f64;
                (j as i64, prof.clone().modulate(freq, phase))
            }),
        };
        Ok(out)
    }

    /// `(A . F)(t, m) = sum_k A((t - a m)/c, k) F(t - k gamma, m - k)`.
    pub fn left_action_at(&self, alg: &AlgElem, f: &ModElem, t: f64, m: i64) -> Complex64 {
        let r = (t - (self.a as i128 * m as i128).rem_euclid(self.c.unsigned_abs() as i128) as f64)
            / self.c as f64;
        alg.components()
            .map(|(k, comp)| {
                let v = f.eval(t - k as f64 * self.gamma_f, m - k);
                if v == Complex64::ZERO {
                    return v;
                }
                comp(r) * v
            })
            .sum()
    }

    /// `(F . A)(t, m) = sum_k F(t - k, m - d k) A(((t - k)/gamma - (m - d k))/c, k)`.
    pub fn right_action_at(&self, f: &ModElem, alg: &AlgElem, t: f64, m: i64) -> Complex64 {
        alg.components()
            .map(|(k, comp)| {
                let mk = m - self.d * k;
                let v = f.eval(t - k as f64, mk);
                if v == Complex64::ZERO {
                    return v;
                }
                let m_red = mk.rem_euclid(self.c.abs()) as f64;
                let r = ((t - k as f64) * self.tau_f - m_red) / self.c as f64;
                v * comp(r)
            })
            .sum()
    }

    /// The stage embedding into `X_{2n+2}`: the term at `j` goes to the `p`
    /// indices `j p + i c p` mod `c p^2`, dilated by `p` and scaled.
    pub fn iota_embed(&self, f: &ModElem, norm: Normalization) -> Result<ModElem> {
        self.check(f)?;
        let p = self.p as i64;
        let c = self.modulus() as i64;
        let scale = Complex64::new(norm.factor(self.p), 0.0);
        let mut out = ModElem::zero(self.modulus() * self.p * self.p);
        for (&j, profs) in &f.terms {
            let image: Vec<Profile> = profs
                .iter()
                .map(|prof| prof.clone().dilate(self.p as f64).scale(scale))
                .collect();
            for i in 0..p {
                let idx = (j as i64 + i * c) * p;
                out.push_all(idx, image.iter().cloned());
            }
        }
        Ok(out)
    }
}

/// Finite sum `sum_j f_j delta_j` of compactly supported profiles on `R x Z_c`.
///
/// Each index keeps the list of its summands, so addition is concatenation and
/// maps defined termwise commute with it on the nose.
#[derive(Clone, Debug, PartialEq)]
pub struct ModElem {
    modulus: u64,
    terms: BTreeMap<u64, Vec<Profile>>,
}

impl ModElem {
    pub fn zero(modulus: u64) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        ModElem {
            modulus,
            terms: BTreeMap::new(),
        }
    }

    /// `f delta_j`.
    pub fn single(modulus: u64, j: i64, f: impl Into<Profile>) -> Self {
        let mut out = ModElem::zero(modulus);
        out.push(j, f.into());
        out
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn terms(&self) -> &BTreeMap<u64, Vec<Profile>> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn reduce(&self, j: i64) -> u64 {
        j.rem_euclid(self.modulus as i64) as u64
    }

    pub fn push(&mut self, j: i64, f: Profile) {
        let j = self.reduce(j);
        self.terms.entry(j).or_default().push(f);
    }

    fn push_all(&mut self, j: i64, fs: impl IntoIterator<Item = Profile>) {
        let j = self.reduce(j);
        self.terms.entry(j).or_default().extend(fs);
    }

    pub fn add(&self, other: &ModElem) -> Result<ModElem> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch {
                expected: self.modulus,
                found: other.modulus,
            });
        }
        let mut out = self.clone();
        for (&j, fs) in &other.terms {
            out.push_all(j as i64, fs.iter().cloned());
        }
        Ok(out)
    }

    pub fn scale(&self, by: Complex64) -> ModElem {
        self.map_terms(|j, f| (j as i64, f.clone().scale(by)))
    }

    fn map_terms(&self, mut g: impl FnMut(u64, &Profile) -> (i64, Profile)) -> ModElem {
        let mut out = ModElem::zero(self.modulus);
        for (&j, fs) in &self.terms {
            for f in fs {
                let (k, h) = g(j, f);
                out.push(k, h);
            }
        }
        out
    }

    /// `F(t, [m])`.
    pub fn eval(&self, t: f64, m: i64) -> Complex64 {
        match self.terms.get(&self.reduce(m)) {
            Some(fs) => fs.iter().map(|f| f.eval(t)).sum(),
            None => Complex64::ZERO,
        }
    }

    /// Hull of the supports of all summands; `None` for the zero element.
    pub fn support(&self) -> Option<(f64, f64)> {
        self.terms
            .values()
            .flatten()
            .map(Profile::support)
            .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
    }
}

impl fmt::Display for ModElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ModElem(Z_{}", self.modulus)?;
        for (j, fs) in &self.terms {
            write!(f, ", delta_{j} x{}", fs.len())?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::Rat;
    use crate::padic::PAdic;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sqrt2_minus_1() -> QuadReal {
        "-1 + 1*sqrt(2)".parse().unwrap()
    }

    pub(super) fn ctx(p: u64, n: u64) -> BimCtx {
        let theta = sqrt2_minus_1();
        let spec = SolenoidSpec::new(p, theta.clone(), PAdic::from_integer(p, 1).unwrap()).unwrap();
        let proj = ProjectionData::new(1, 1, 0, &theta).unwrap();
        BimCtx::new(&spec, &proj, n).unwrap()
    }

    fn tent(lo: f64, hi: f64) -> Profile {
        HatFn::tent(lo, hi, c(1.0)).unwrap().into()
    }

    #[test]
    fn gamma_is_stage_independent() {
        let c0 = ctx(2, 0);
        for n in 1..4 {
            let cn = BimCtx::new(c0.spec(), c0.proj(), n).unwrap();
            assert_eq!(cn.gamma(), c0.gamma());
            let (a, _, c, _) = cn.pair();
            // (a - gamma)/c = beta
            let lhs = (&QuadReal::from_int(a) - cn.gamma()).scale(&Rat::new(1.into(), c.into()));
            assert_eq!(&lhs, cn.beta());
        }
    }

    #[test]
    fn failing_condition_is_rejected() {
        let theta = sqrt2_minus_1();
        let spec = SolenoidSpec::new(2, theta.clone(), PAdic::from_integer(2, 2).unwrap()).unwrap();
        let proj = ProjectionData::new(1, 1, 0, &theta).unwrap();
        assert!(matches!(BimCtx::new(&spec, &proj, 0), Err(Error::ConditionFails(_))));
    }

    #[test]
    fn left_u_translates_and_shifts() {
        let cx = ctx(2, 1);
        let f = ModElem::single(cx.modulus(), 2, tent(0.0, 1.0));
        let g = cx.act_left_gen(Gen::U, 1, &f).unwrap();
        let gamma = cx.gamma_f64();
        let want = ModElem::single(cx.modulus(), 3, tent(0.0, 1.0).shift(gamma));
        assert_eq!(g, want);
        assert_eq!(cx.act_left_gen(Gen::V, 0, &f).unwrap(), f);
    }

    #[test]
    fn right_u_uses_d() {
        let cx = ctx(3, 1);
        let (_, _, _, d) = cx.pair();
        let f = ModElem::single(cx.modulus(), 1, tent(-0.5, 0.5));
        let g = cx.act_right_gen(Gen::U, 1, &f).unwrap();
        let want = ModElem::single(cx.modulus(), 1 + d, tent(-0.5, 0.5).shift(1.0));
        assert_eq!(g, want);
        assert_eq!(cx.act_right_gen(Gen::U, 0, &f).unwrap(), f);
    }

    #[test]
    fn generator_powers_compose() {
        let cx = ctx(2, 1);
        let f = ModElem::single(cx.modulus(), 0, tent(0.0, 2.0));
        for gen in [Gen::U, Gen::V] {
            let twice = cx
                .act_left_gen(gen, 1, &cx.act_left_gen(gen, 1, &f).unwrap())
                .unwrap();
            let square = cx.act_left_gen(gen, 2, &f).unwrap();
            let back = cx.act_left_gen(gen, -2, &square).unwrap();
            for i in 0..50 {
                let t = -1.0 + 0.1 * i as f64;
                for m in 0..cx.modulus() as i64 {
                    assert!((twice.eval(t, m) - square.eval(t, m)).norm() < 1e-12);
                    assert!((back.eval(t, m) - f.eval(t, m)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn iota_matches_worked_case() {
        // p = 2, n = 0, c0 = 1: f delta_0 -> (f(t/2) delta_0 + f(t/2) delta_2)/sqrt(2) in Z_4
        let cx = ctx(2, 0);
        let f = tent(0.0, 1.0);
        let g = cx
            .iota_embed(&ModElem::single(1, 0, f.clone()), Normalization::Literal)
            .unwrap();
        assert_eq!(g.modulus(), 4);
        assert_eq!(g.terms().keys().copied().collect::<Vec<_>>(), vec![0, 2]);
        let s = 1.0 / 2f64.sqrt();
        for i in 0..40 {
            let t = -0.5 + 0.07 * i as f64;
            let want = f.eval(t / 2.0) * s;
            assert!((g.eval(t, 0) - want).norm() < 1e-15);
            assert!((g.eval(t, 2) - want).norm() < 1e-15);
            assert_eq!(g.eval(t, 1), c(0.0));
            assert_eq!(g.eval(t, 3), c(0.0));
        }
        assert_eq!(g.support(), Some((0.0, 2.0)));
        let zero = cx.iota_embed(&ModElem::zero(1), Normalization::Literal).unwrap();
        assert!(zero.is_zero());
    }

    #[test]
    fn iota_is_linear_structurally() {
        let cx = ctx(3, 1);
        let m = cx.modulus();
        let f = ModElem::single(m, 4, tent(0.0, 1.0));
        let mut g = ModElem::single(m, 4, tent(0.5, 2.0));
        g.push(7, tent(-1.0, 0.0));
        let lhs = cx.iota_embed(&f.add(&g).unwrap(), Normalization::Literal).unwrap();
        let rhs = cx
            .iota_embed(&f, Normalization::Literal)
            .unwrap()
            .add(&cx.iota_embed(&g, Normalization::Literal).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn modulus_mismatch_is_an_error() {
        let cx = ctx(2, 1);
        let f = ModElem::single(3, 0, tent(0.0, 1.0));
        assert!(matches!(
            cx.act_left_gen(Gen::U, 1, &f),
            Err(Error::ModulusMismatch { expected: 4, found: 3 })
        ));
        assert!(cx.iota_embed(&f, Normalization::Unit).is_err());
    }
}
