use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::profile::cis;
use super::{BimCtx, ModElem};
use crate::error::Result;

/// A 1-periodic coefficient function `r -> a_k(r)`.
pub type Component = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Finite sum `sum_k a_k(r) delta_k` in the rotation algebra with parameter
/// `rotation`, multiplied by `(a * b)(r, k) = sum_l a(r, l) b(r + l rotation, k - l)`.
#[derive(Clone)]
pub struct AlgElem {
    rotation: f64,
    comps: BTreeMap<i64, Component>,
}

impl fmt::Debug for AlgElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AlgElem")
            .field("rotation", &self.rotation)
            .field("k", &self.comps.keys().collect::<Vec<_>>())
            .finish()
    }
}

fn sum_of(parts: Vec<Component>) -> Component {
    if parts.len() == 1 {
        return parts.into_iter().next().unwrap();
    }
    Arc::new(move |r| parts.iter().map(|c| c(r)).sum())
}

impl AlgElem {
    pub fn zero(rotation: f64) -> Self {
        AlgElem {
            rotation,
            comps: BTreeMap::new(),
        }
    }

    pub fn from_components(rotation: f64, comps: BTreeMap<i64, Component>) -> Self {
        AlgElem { rotation, comps }
    }

    pub fn one(rotation: f64) -> Self {
        AlgElem::monomial(rotation, 0, 0, Complex64::ONE)
    }

    pub fn u(rotation: f64) -> Self {
        AlgElem::monomial(rotation, 1, 0, Complex64::ONE)
    }

    pub fn v(rotation: f64) -> Self {
        AlgElem::monomial(rotation, 0, 1, Complex64::ONE)
    }

    /// `coeff e^{2 pi i freq r} delta_k`.
    pub fn monomial(rotation: f64, k: i64, freq: i64, coeff: Complex64) -> Self {
        let comp: Component = Arc::new(move |r| coeff * cis(freq as f64 * r));
        AlgElem {
            rotation,
            comps: BTreeMap::from([(k, comp)]),
        }
    }

    /// Components given as trigonometric polynomials `k -> [(freq, coeff)]`.
    pub fn trig(rotation: f64, terms: BTreeMap<i64, Vec<(i64, Complex64)>>) -> Self {
        let comps = terms
            .into_iter()
            .map(|(k, poly)| {
                let comp: Component = Arc::new(move |r| {
                    poly.iter().map(|&(j, a)| a * cis(j as f64 * r)).sum()
                });
                (k, comp)
            })
            .collect();
        AlgElem { rotation, comps }
    }

    pub fn rotation(&self) -> f64 {
        self.rotation
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = i64> + '_ {
        self.comps.keys().copied()
    }

    pub fn components(&self) -> impl Iterator<Item = (i64, &Component)> + '_ {
        self.comps.iter().map(|(&k, c)| (k, c))
    }

    pub fn component(&self, k: i64) -> Option<&Component> {
        self.comps.get(&k)
    }

    pub fn eval(&self, r: f64, k: i64) -> Complex64 {
        self.comps.get(&k).map_or(Complex64::ZERO, |c| c(r))
    }

    pub fn add(&self, other: &AlgElem) -> AlgElem {
        let mut parts: BTreeMap<i64, Vec<Component>> = BTreeMap::new();
        for (k, c) in self.comps.iter().chain(&other.comps) {
            parts.entry(*k).or_default().push(c.clone());
        }
        AlgElem {
            rotation: self.rotation,
            comps: parts.into_iter().map(|(k, v)| (k, sum_of(v))).collect(),
        }
    }

    pub fn scale(&self, by: Complex64) -> AlgElem {
        let comps = self
            .comps
            .iter()
            .map(|(&k, c)| {
                let c = c.clone();
                let out: Component = Arc::new(move |r| by * c(r));
                (k, out)
            })
            .collect();
        AlgElem {
            rotation: self.rotation,
            comps,
        }
    }

    /// Twisted convolution; uses the rotation of `self`.
    pub fn convolve(&self, other: &AlgElem) -> AlgElem {
        let theta = self.rotation;
        let mut parts: BTreeMap<i64, Vec<Component>> = BTreeMap::new();
        for (&l, f) in &self.comps {
            for (&j, g) in &other.comps {
                let (f, g) = (f.clone(), g.clone());
                let shift = l as f64 * theta;
                let prod: Component = Arc::new(move |r| f(r) * g(r + shift));
                parts.entry(l + j).or_default().push(prod);
            }
        }
        AlgElem {
            rotation: theta,
            comps: parts.into_iter().map(|(k, v)| (k, sum_of(v))).collect(),
        }
    }
}

/// Connecting map between consecutive stages: `a delta_k -> a(p r) delta_{p k}`.
/// The same formula serves both the left and the right algebras.
pub fn phi_embed(p: u64, a: &AlgElem, target_rotation: f64) -> AlgElem {
    let pf = p as f64;
    let comps = a
        .comps
        .iter()
        .map(|(&k, c)| {
            let c = c.clone();
            let out: Component = Arc::new(move |r| c(pf * r));
            (k * p as i64, out)
        })
        .collect();
    AlgElem {
        rotation: target_rotation,
        comps,
    }
}

/// Integers in `[lo, hi]` with a little slack for rounding in the bounds.
fn int_range(lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
    const SLACK: f64 = 1e-9;
    ((lo - SLACK).ceil() as i64)..=((hi + SLACK).floor() as i64)
}

/// `<F1, F2>_beta(r, k) = sum_m F1(c r + m, [d m]) conj F2(c r + m - k gamma, [d m - k])`.
pub fn inner_left(ctx: &BimCtx, f1: &ModElem, f2: &ModElem) -> Result<AlgElem> {
    ctx.check(f1)?;
    ctx.check(f2)?;
    let rotation = ctx.beta_f64();
    let (Some((lo1, hi1)), Some((lo2, hi2))) = (f1.support(), f2.support()) else {
        return Ok(AlgElem::zero(rotation));
    };
    let gamma = ctx.gamma_f64();
    let (c, d) = (ctx.c as f64, ctx.d);
    let f1 = Arc::new(f1.clone());
    let f2 = Arc::new(f2.clone());
    let mut comps = BTreeMap::new();
    for k in int_range((lo1 - hi2) / gamma, (hi1 - lo2) / gamma) {
        let (f1, f2) = (f1.clone(), f2.clone());
        let comp: Component = Arc::new(move |r| {
            let cr = c * r;
            // F1(cr + m, .) vanishes unless lo1 <= cr + m <= hi1; one spare index each side
            let ms = int_range(lo1 - cr - 1.0, hi1 - cr + 1.0);
            ms.map(|m| {
                let x = f1.eval(cr + m as f64, d * m);
                if x == Complex64::ZERO {
                    return x;
                }
                x * f2.eval(cr + m as f64 - k as f64 * gamma, d * m - k).conj()
            })
            .sum()
        });
        comps.insert(k, comp);
    }
    Ok(AlgElem::from_components(rotation, comps))
}

/// `<F1, F2>_alpha(r, k) = sum_m conj F1((c r - m) gamma, [-m]) F2((c r - m) gamma + k, [d k - m])`.
pub fn inner_right(ctx: &BimCtx, f1: &ModElem, f2: &ModElem) -> Result<AlgElem> {
    ctx.check(f1)?;
    ctx.check(f2)?;
    let rotation = ctx.alpha_f64();
    let (Some((lo1, hi1)), Some((lo2, hi2))) = (f1.support(), f2.support()) else {
        return Ok(AlgElem::zero(rotation));
    };
    let gamma = ctx.gamma_f64();
    let (c, d) = (ctx.c as f64, ctx.d);
    let f1 = Arc::new(f1.clone());
    let f2 = Arc::new(f2.clone());
    let mut comps = BTreeMap::new();
    for k in int_range(lo2 - hi1, hi2 - lo1) {
        let (f1, f2) = (f1.clone(), f2.clone());
        let comp: Component = Arc::new(move |r| {
            let cr = c * r;
            // (cr - m) gamma in [lo1, hi1]
            let ms = int_range(cr - hi1 / gamma - 1.0, cr - lo1 / gamma + 1.0);
            ms.map(|m| {
                let s = (cr - m as f64) * gamma;
                let x = f1.eval(s, -m);
                if x == Complex64::ZERO {
                    return x;
                }
                x.conj() * f2.eval(s + k as f64, d * k - m)
            })
            .sum()
        });
        comps.insert(k, comp);
    }
    Ok(AlgElem::from_components(rotation, comps))
}
