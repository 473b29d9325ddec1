use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::algebra::{inner_left, inner_right, phi_embed, AlgElem};
use super::profile::{cis, HatFn};
use super::{BimCtx, Gen, ModElem, Normalization};
use crate::error::{Error, Result};
use crate::morita::ProjectionData;
use crate::solenoid::SolenoidSpec;

/// Sizes and seed of a randomized verification run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    /// Random module elements (each a sum of one to three random hats).
    pub functions: usize,
    /// Evaluation points per function and check.
    pub points: usize,
    /// Uniform grid points per period included among the `r`-samples.
    pub grid: usize,
}

impl Default for SamplePlan {
    fn default() -> Self {
        SamplePlan {
            seed: 0x5eed,
            functions: 20,
            points: 200,
            grid: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SuiteOptions {
    pub normalization: Normalization,
    /// Added to the floating-point `gamma` of stage `n + 1` only.
    pub gamma_offset: f64,
}

/// Maximum absolute deviations found by [`identity_suite`].
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub p: u64,
    pub n: u64,
    pub seed: u64,
    pub functions: usize,
    pub points: usize,
    pub normalization: Normalization,
    /// `a_left_action`, `b_right_action`, `c_left_inner`, `d_right_inner`,
    /// `e_compatibility`: each the maximum over its checks.
    pub identities: BTreeMap<String, f64>,
    /// Every individual check.
    pub checks: BTreeMap<String, f64>,
    /// Algebra-level checks: connecting maps are homomorphisms, inner products are periodic.
    pub extras: BTreeMap<String, f64>,
    /// Least-squares ratio of `<iota F, iota G>` to the image of `<F, G>`.
    pub inner_scale: BTreeMap<String, f64>,
    /// Deviation of `<iota F, iota G>` from `s^2` times the image of `<F, G>`,
    /// `s` the embedding factor.
    pub rescaled: BTreeMap<String, f64>,
}

impl IdentityReport {
    pub fn max_deviation(&self) -> f64 {
        self.identities.values().fold(0.0, |a, &b| a.max(b))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.identities.values().all(|&v| v <= tol)
    }

    /// Identities above `tol`.
    pub fn failures(&self, tol: f64) -> Vec<&str> {
        self.identities
            .iter()
            .filter(|(_, &v)| v.is_nan() || v > tol)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

const IDENTITIES: [(&str, &[&str]); 5] = [
    ("a_left_action", &["a_left_u", "a_left_v"]),
    ("b_right_action", &["b_right_u", "b_right_v"]),
    ("c_left_inner", &["c_left_inner"]),
    ("d_right_inner", &["d_right_inner"]),
    (
        "e_compatibility",
        &[
            "e_imprimitivity",
            "e_imprimitivity_next",
            "e_commute_left",
            "e_commute_right",
            "e_commute_left_next",
            "e_commute_right_next",
        ],
    ),
];

/// Running maxima and least-squares sums for one worker.
#[derive(Default)]
struct Acc {
    max: BTreeMap<&'static str, f64>,
    fit: BTreeMap<&'static str, (f64, f64)>,
}

impl Acc {
    fn note(&mut self, name: &'static str, dev: f64) {
        let e = self.max.entry(name).or_insert(0.0);
        // NaN must surface as a failure
        if dev.is_nan() || dev > *e {
            *e = if e.is_nan() { *e } else { dev };
        }
    }

    fn fit(&mut self, name: &'static str, model: Complex64, observed: Complex64) {
        let e = self.fit.entry(name).or_insert((0.0, 0.0));
        e.0 += (model.conj() * observed).re;
        e.1 += model.norm_sqr();
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (k, v) in other.max {
            self.note(k, v);
        }
        for (k, (a, b)) in other.fit {
            let e = self.fit.entry(k).or_insert((0.0, 0.0));
            e.0 += a;
            e.1 += b;
        }
        self
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_value(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
}

/// Random continuous hat with 3 to 5 dyadic knots, start in `[-2, 2]`, width in `[1/4, 5/2]`.
pub fn random_hat(rng: &mut impl Rng) -> HatFn {
    let lo = rng.random_range(-128..=128_i64);
    let width = rng.random_range(16..=160_i64);
    let inner = rng.random_range(1..=3_usize);
    let mut cuts: Vec<i64> = Vec::with_capacity(inner);
    while cuts.len() < inner {
        let x = rng.random_range(1..width);
        if !cuts.contains(&x) {
            cuts.push(x);
        }
    }
    cuts.sort_unstable();
    let mut knots = vec![lo as f64 / 64.0];
    knots.extend(cuts.iter().map(|&x| (lo + x) as f64 / 64.0));
    knots.push((lo + width) as f64 / 64.0);
    let mut values = vec![Complex64::ZERO];
    values.extend((0..inner).map(|_| random_value(rng)));
    values.push(Complex64::ZERO);
    HatFn::new(knots, values).expect("random hat is well formed")
}

/// Sum of one to three random hats at random indices of `Z_modulus`.
pub fn random_mod_elem(rng: &mut impl Rng, modulus: u64) -> ModElem {
    let mut f = ModElem::zero(modulus);
    for _ in 0..rng.random_range(1..=3) {
        let j = rng.random_range(0..modulus) as i64;
        f.push(j, random_hat(rng).into());
    }
    f
}

/// Up to `max_comps` components with `|k| <= 3`, each a trigonometric
/// polynomial of degree at most 2.
pub fn random_alg_elem(rng: &mut impl Rng, rotation: f64, max_comps: usize) -> AlgElem {
    let count = rng.random_range(1..=max_comps.clamp(1, 7));
    let mut terms = BTreeMap::new();
    while terms.len() < count {
        let k = rng.random_range(-3..=3_i64);
        let poly: Vec<(i64, Complex64)> = (0..rng.random_range(1..=3))
            .map(|_| (rng.random_range(-2..=2_i64), random_value(rng)))
            .collect();
        terms.insert(k, poly);
    }
    AlgElem::trig(rotation, terms)
}

/// `(t, m)` samples for comparing two module elements: half on a uniform
/// grid across the joint support, half random; indices mostly where either
/// side has terms.
fn mod_points(rng: &mut impl Rng, sides: &[&ModElem], modulus: u64, count: usize, pad: f64) -> Vec<(f64, i64)> {
    let hull = sides
        .iter()
        .filter_map(|f| f.support())
        .reduce(|(a, b), (c, d)| (a.min(c), b.max(d)))
        .unwrap_or((0.0, 1.0));
    let (lo, hi) = (hull.0 - pad, hull.1 + pad);
    let mut keys: Vec<i64> = sides
        .iter()
        .flat_map(|f| f.terms().keys().map(|&j| j as i64))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    let half = count / 2;
    (0..count)
        .map(|i| {
            if i < half {
                let t = lo + (hi - lo) * (2 * i + 1) as f64 / (2 * half) as f64;
                let m = if keys.is_empty() {
                    (i as u64 % modulus) as i64
                } else {
                    keys[i % keys.len()]
                };
                (t, m)
            } else {
                let t = rng.random_range(lo..=hi);
                let m = match keys.choose(rng) {
                    Some(&k) if rng.random_bool(0.75) => k,
                    _ => rng.random_range(0..modulus) as i64,
                };
                (t, m)
            }
        })
        .collect()
}

fn r_points(rng: &mut impl Rng, count: usize, grid: usize) -> Vec<f64> {
    let g = grid.min(count);
    let mut rs: Vec<f64> = (0..g).map(|i| i as f64 / g as f64).collect();
    rs.extend((g..count).map(|_| rng.random_range(0.0..1.0)));
    rs
}

fn max_diff_mod(lhs: &ModElem, rhs: &ModElem, pts: &[(f64, i64)]) -> f64 {
    max_over(pts.iter().map(|&(t, m)| (lhs.eval(t, m) - rhs.eval(t, m)).norm()))
}

fn max_over(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

fn keys_of(a: &AlgElem, b: &AlgElem) -> Vec<i64> {
    let mut ks: Vec<i64> = a.keys().chain(b.keys()).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// Runs the stage-compatibility checks between `X_{2n}` and `X_{2n+2}` with the
/// literal embedding factor.
pub fn identity_suite(
    spec: &SolenoidSpec,
    proj: &ProjectionData,
    n: u64,
    plan: &SamplePlan,
) -> Result<IdentityReport> {
    identity_suite_with(spec, proj, n, plan, SuiteOptions::default())
}

pub fn identity_suite_with(
    spec: &SolenoidSpec,
    proj: &ProjectionData,
    n: u64,
    plan: &SamplePlan,
    opts: SuiteOptions,
) -> Result<IdentityReport> {
    if plan.functions == 0 || plan.points == 0 {
        return Err(Error::EmptyPlan);
    }
    let ctx0 = BimCtx::new(spec, proj, n)?;
    let ctx1 = ctx0.next()?.with_gamma_offset(opts.gamma_offset);
    let elems: Vec<ModElem> = (0..plan.functions)
        .map(|i| random_mod_elem(&mut rng_for(plan.seed, i as u64), ctx0.modulus()))
        .collect();
    suite_on(&ctx0, &ctx1, &elems, plan, opts.normalization)
}

/// Deviation of identity (a) when `gamma` at stage `n + 1` is displaced by `offset`.
pub fn gamma_self_test(
    spec: &SolenoidSpec,
    proj: &ProjectionData,
    n: u64,
    plan: &SamplePlan,
    offset: f64,
) -> Result<f64> {
    let opts = SuiteOptions {
        gamma_offset: offset,
        ..SuiteOptions::default()
    };
    let report = identity_suite_with(spec, proj, n, plan, opts)?;
    Ok(report.identities["a_left_action"])
}

pub(crate) fn suite_on(
    ctx0: &BimCtx,
    ctx1: &BimCtx,
    elems: &[ModElem],
    plan: &SamplePlan,
    norm: Normalization,
) -> Result<IdentityReport> {
    if elems.is_empty() || plan.points == 0 {
        return Err(Error::EmptyPlan);
    }
    let p = ctx0.prime();
    let s2 = norm.factor(p).powi(2);
    let count = elems.len();
    let acc = (0..count)
        .into_par_iter()
        .map(|i| -> Result<Acc> {
            let mut rng = rng_for(plan.seed, (1 << 32) + i as u64);
            let f = &elems[i];
            let g = &elems[(i + 1) % count];
            let h = &elems[(i + 2) % count];
            let mut acc = Acc::default();
            check_actions(ctx0, ctx1, f, norm, plan, &mut rng, &mut acc)?;
            check_inner(ctx0, ctx1, f, g, norm, s2, plan, &mut rng, &mut acc)?;
            check_compat(ctx0, f, g, h, "", plan, &mut rng, &mut acc)?;
            let (fi, gi, hi) = (
                ctx0.iota_embed(f, norm)?,
                ctx0.iota_embed(g, norm)?,
                ctx0.iota_embed(h, norm)?,
            );
            check_compat(ctx1, &fi, &gi, &hi, "_next", plan, &mut rng, &mut acc)?;
            check_algebra(ctx0, ctx1, plan, &mut rng, &mut acc);
            Ok(acc)
        })
        .collect::<Result<Vec<Acc>>>()?
        .into_iter()
        // sequential merge keeps the floating-point sums reproducible
        .fold(Acc::default(), Acc::merge);

    let checks: BTreeMap<String, f64> = acc
        .max
        .iter()
        .filter(|(k, _)| k.starts_with(['a', 'b', 'c', 'd', 'e']) && !k.ends_with("_rescaled"))
        .map(|(k, &v)| (k.to_string(), v))
        .collect();
    let identities = IDENTITIES
        .iter()
        .map(|(name, parts)| {
            let v = max_over(parts.iter().map(|q| checks.get(*q).copied().unwrap_or(0.0)));
            (name.to_string(), v)
        })
        .collect();
    let extras = acc
        .max
        .iter()
        .filter(|(k, _)| k.starts_with("x_"))
        .map(|(k, &v)| (k.trim_start_matches("x_").to_string(), v))
        .collect();
    let rescaled = acc
        .max
        .iter()
        .filter(|(k, _)| k.ends_with("_rescaled"))
        .map(|(k, &v)| (k.trim_end_matches("_rescaled").to_string(), v))
        .collect();
    let inner_scale = acc
        .fit
        .iter()
        .map(|(k, &(num, den))| (k.to_string(), if den > 0.0 { num / den } else { f64::NAN }))
        .collect();
    Ok(IdentityReport {
        p,
        n: ctx0.level(),
        seed: plan.seed,
        functions: count,
        points: plan.points,
        normalization: norm,
        identities,
        checks,
        extras,
        inner_scale,
        rescaled,
    })
}

/// (a) and (b): the embedding intertwines the generators with their `p`-th powers.
fn check_actions(
    ctx0: &BimCtx,
    ctx1: &BimCtx,
    f: &ModElem,
    norm: Normalization,
    plan: &SamplePlan,
    rng: &mut ChaCha8Rng,
    acc: &mut Acc,
) -> Result<()> {
    let p = ctx0.prime() as i64;
    let fi = ctx0.iota_embed(f, norm)?;
    let cases: [(&'static str, Gen, bool); 4] = [
        ("a_left_u", Gen::U, true),
        ("a_left_v", Gen::V, true),
        ("b_right_u", Gen::U, false),
        ("b_right_v", Gen::V, false),
    ];
    for (name, gen, left) in cases {
        let (lhs, rhs) = if left {
            (
                ctx0.iota_embed(&ctx0.act_left_gen(gen, 1, f)?, norm)?,
                ctx1.act_left_gen(gen, p, &fi)?,
            )
        } else {
            (
                ctx0.iota_embed(&ctx0.act_right_gen(gen, 1, f)?, norm)?,
                ctx1.act_right_gen(gen, p, &fi)?,
            )
        };
        let pts = mod_points(rng, &[&lhs, &rhs], ctx1.modulus(), plan.points, 0.5);
        acc.note(name, max_diff_mod(&lhs, &rhs, &pts));
    }
    Ok(())
}

/// (c) and (d): the embedding carries inner products to the images of inner products.
#[allow(clippy::too_many_arguments)]
fn check_inner(
    ctx0: &BimCtx,
    ctx1: &BimCtx,
    f: &ModElem,
    g: &ModElem,
    norm: Normalization,
    s2: f64,
    plan: &SamplePlan,
    rng: &mut ChaCha8Rng,
    acc: &mut Acc,
) -> Result<()> {
    let p = ctx0.prime();
    let (fi, gi) = (ctx0.iota_embed(f, norm)?, ctx0.iota_embed(g, norm)?);
    let sides: [(&'static str, &'static str, AlgElem, AlgElem); 2] = [
        (
            "c_left_inner",
            "c_left_inner_rescaled",
            phi_embed(p, &inner_left(ctx0, f, g)?, ctx1.beta_f64()),
            inner_left(ctx1, &fi, &gi)?,
        ),
        (
            "d_right_inner",
            "d_right_inner_rescaled",
            phi_embed(p, &inner_right(ctx0, f, g)?, ctx1.alpha_f64()),
            inner_right(ctx1, &fi, &gi)?,
        ),
    ];
    let rs = r_points(rng, plan.points, plan.grid);
    for (name, rescaled, image, direct) in sides {
        let ks = keys_of(&image, &direct);
        for &r in &rs {
            for &k in &ks {
                let (x, y) = (image.eval(r, k), direct.eval(r, k));
                acc.note(name, (x - y).norm());
                acc.note(rescaled, (x * s2 - y).norm());
                acc.fit(name, x, y);
            }
        }
    }
    Ok(())
}

/// (e): imprimitivity `<F, G>_beta . H = F . <G, H>_alpha` and the commutation
/// relations of both generator pairs, at one stage.
#[allow(clippy::too_many_arguments)]
fn check_compat(
    ctx: &BimCtx,
    f: &ModElem,
    g: &ModElem,
    h: &ModElem,
    suffix: &str,
    plan: &SamplePlan,
    rng: &mut ChaCha8Rng,
    acc: &mut Acc,
) -> Result<()> {
    let name = |base: &'static str| -> &'static str {
        match (base, suffix.is_empty()) {
            ("imp", true) => "e_imprimitivity",
            ("imp", false) => "e_imprimitivity_next",
            ("cl", true) => "e_commute_left",
            ("cl", false) => "e_commute_left_next",
            ("cr", true) => "e_commute_right",
            _ => "e_commute_right_next",
        }
    };
    let left = inner_left(ctx, f, g)?;
    let right = inner_right(ctx, g, h)?;
    let pad = left.keys().chain(right.keys()).map(|k| k.unsigned_abs() as f64).fold(1.0, f64::max)
        * ctx.gamma_f64().max(1.0);
    let pts = mod_points(rng, &[f, h], ctx.modulus(), plan.points, pad);
    let dev = max_over(pts.iter().map(|&(t, m)| {
        (ctx.left_action_at(&left, h, t, m) - ctx.right_action_at(f, &right, t, m)).norm()
    }));
    acc.note(name("imp"), dev);

    let (pb, pa) = (cis(ctx.beta_f64()), cis(ctx.alpha_f64()));
    let uv = ctx.act_left_gen(Gen::U, 1, &ctx.act_left_gen(Gen::V, 1, h)?)?;
    let vu = ctx.act_left_gen(Gen::V, 1, &ctx.act_left_gen(Gen::U, 1, h)?)?.scale(pb);
    let pts = mod_points(rng, &[&uv, &vu], ctx.modulus(), plan.points, 0.5);
    acc.note(name("cl"), max_diff_mod(&uv, &vu, &pts));
    let uv = ctx.act_right_gen(Gen::V, 1, &ctx.act_right_gen(Gen::U, 1, h)?)?;
    let vu = ctx.act_right_gen(Gen::U, 1, &ctx.act_right_gen(Gen::V, 1, h)?)?.scale(pa);
    let pts = mod_points(rng, &[&uv, &vu], ctx.modulus(), plan.points, 0.5);
    acc.note(name("cr"), max_diff_mod(&uv, &vu, &pts));
    Ok(())
}

/// Connecting maps are homomorphisms; inner products are 1-periodic.
fn check_algebra(ctx0: &BimCtx, ctx1: &BimCtx, plan: &SamplePlan, rng: &mut ChaCha8Rng, acc: &mut Acc) {
    let p = ctx0.prime();
    let sides: [(&'static str, f64, f64); 2] = [
        ("x_phi_left", ctx0.beta_f64(), ctx1.beta_f64()),
        ("x_phi_right", ctx0.alpha_f64(), ctx1.alpha_f64()),
    ];
    let rs = r_points(rng, plan.points, plan.grid);
    for (name, rot0, rot1) in sides {
        let a = random_alg_elem(rng, rot0, 5);
        let b = random_alg_elem(rng, rot0, 5);
        let lhs = phi_embed(p, &a.convolve(&b), rot1);
        let rhs = phi_embed(p, &a, rot1).convolve(&phi_embed(p, &b, rot1));
        let ks = keys_of(&lhs, &rhs);
        let dev = max_over(rs.iter().flat_map(|&r| ks.iter().map(move |&k| (r, k))).map(|(r, k)| {
            (lhs.eval(r, k) - rhs.eval(r, k)).norm()
        }));
        acc.note(name, dev);
    }
    let f = random_mod_elem(rng, ctx0.modulus());
    let g = random_mod_elem(rng, ctx0.modulus());
    for ip in [inner_left(ctx0, &f, &g), inner_right(ctx0, &f, &g)].into_iter().flatten() {
        let ks: Vec<i64> = ip.keys().collect();
        let dev = max_over(rs.iter().flat_map(|&r| ks.iter().map(move |&k| (r, k))).map(|(r, k)| {
            (ip.eval(r, k) - ip.eval(r + 1.0, k)).norm()
        }));
        acc.note("x_periodicity", dev);
    }
}
