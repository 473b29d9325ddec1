use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Continuous piecewise-linear function, zero outside `[first, last]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HatFn {
    knots: Vec<f64>,
    values: Vec<Complex64>,
}

impl HatFn {
    /// `values[i]` is the value at `knots[i]`; the end values must vanish.
    pub fn new(knots: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::Hypothesis("hat needs matching knots and values, at least two".into()));
        }
        if knots.iter().any(|k| !k.is_finite()) || knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NotIncreasing);
        }
        if values[0] != Complex64::ZERO || values[values.len() - 1] != Complex64::ZERO {
            return Err(Error::Hypothesis("hat must vanish at its end knots".into()));
        }
        Ok(HatFn { knots, values })
    }

    /// Tent of height `h` on `[lo, hi]` peaking at the midpoint.
    pub fn tent(lo: f64, hi: f64, h: Complex64) -> Result<Self> {
        HatFn::new(vec![lo, 0.5 * (lo + hi), hi], vec![Complex64::ZERO, h, Complex64::ZERO])
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn support(&self) -> (f64, f64) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let (lo, hi) = self.support();
        if !(t > lo && t < hi) {
            return Complex64::ZERO;
        }
        // first knot strictly greater than t
        let i = self.knots.partition_point(|&k| k <= t);
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let w = (t - k0) / (k1 - k0);
        self.values[i - 1] * (1.0 - w) + self.values[i] * w
    }
}

/// A hat function after finitely many translations, dilations, scalings and
/// modulations. Still compactly supported, no longer piecewise linear.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Hat(HatFn),
    /// `t -> f(t - by)`
    Shift { inner: Box<Profile>, by: f64 },
    /// `t -> f(t / factor)`, `factor > 0`
    Dilate { inner: Box<Profile>, factor: f64 },
    /// `t -> by * f(t)`
    Scale { inner: Box<Profile>, by: Complex64 },
    /// `t -> e^{2 pi i (freq t + phase)} f(t)`
    Modulate { inner: Box<Profile>, freq: f64, phase: f64 },
}

impl From<HatFn> for Profile {
    fn from(h: HatFn) -> Self {
        Profile::Hat(h)
    }
}

impl Profile {
    pub fn shift(self, by: f64) -> Profile {
        if by == 0.0 {
            return self;
        }
        Profile::Shift { inner: Box::new(self), by }
    }

    pub fn dilate(self, factor: f64) -> Profile {
        assert!(factor > 0.0, "dilation factor must be positive");
        Profile::Dilate { inner: Box::new(self), factor }
    }

    pub fn scale(self, by: Complex64) -> Profile {
        Profile::Scale { inner: Box::new(self), by }
    }

    pub fn modulate(self, freq: f64, phase: f64) -> Profile {
        if freq == 0.0 && phase == 0.0 {
            return self;
        }
        Profile::Modulate { inner: Box::new(self), freq, phase }
    }

    /// Closed interval outside which the profile vanishes.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Profile::Hat(h) => h.support(),
            Profile::Shift { inner, by } => {
                let (lo, hi) = inner.support();
                (lo + by, hi + by)
            }
            Profile::Dilate { inner, factor } => {
                let (lo, hi) = inner.support();
                (lo * factor, hi * factor)
            }
            Profile::Scale { inner, .. } | Profile::Modulate { inner, .. } => inner.support(),
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        match self {
            Profile::Hat(h) => h.eval(t),
            Profile::Shift { inner, by } => inner.eval(t - by),
            Profile::Dilate { inner, factor } => inner.eval(t / factor),
            Profile::Scale { inner, by } => by * inner.eval(t),
            Profile::Modulate { inner, freq, phase } => {
                let v = inner.eval(t);
                if v == Complex64::ZERO {
                    return v;
                }
                v * cis(freq * t + phase)
            }
        }
    }
}

/// `e^{2 pi i x}`, with `x` reduced first to keep the argument small.
pub fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, TAU * (x - x.round()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn hat_interpolates() {
        let h = HatFn::new(vec![0.0, 1.0, 3.0], vec![c(0.0), c(2.0), c(0.0)]).unwrap();
        assert_eq!(h.eval(0.5), c(1.0));
        assert_eq!(h.eval(2.0), c(1.0));
        assert_eq!(h.eval(1.0), c(2.0));
        assert_eq!(h.eval(-1.0), c(0.0));
        assert_eq!(h.eval(3.0), c(0.0));
    }

    #[test]
    fn hat_rejects_bad_input() {
        assert!(HatFn::new(vec![0.0, 0.0], vec![c(0.0), c(0.0)]).is_err());
        assert!(HatFn::new(vec![0.0, 1.0], vec![c(1.0), c(0.0)]).is_err());
        assert!(HatFn::new(vec![0.0], vec![c(0.0)]).is_err());
    }

    #[test]
    fn transforms_track_support() {
        let p: Profile = HatFn::tent(0.0, 1.0, c(1.0)).unwrap().into();
        let q = p.clone().dilate(2.0).shift(-0.5).scale(c(3.0)).modulate(0.25, 0.1);
        assert_eq!(q.support(), (-0.5, 1.5));
        let t = 0.7;
        let expect = p.eval((t + 0.5) / 2.0) * 3.0 * cis(0.25 * t + 0.1);
        assert!((q.eval(t) - expect).norm() < 1e-15);
    }
}
