//! Phase arithmetic for the 2-cocycles on `Z[1/p]^2` and on `(M x M^)^2`.
//!
//! Phases `e^{2 pi i t}` are represented by their argument `t` reduced into
//! `[0, 1)`, so every identity is checked exactly.

use std::fmt;

use crate::error::{Error, Result};
use crate::exactnum::{ExactError, PFrac, QuadReal};
use crate::padic::PAdic;
use crate::solenoid::SolenoidSpec;

/// An element `(s_1, s_2)` of `Z[1/p] x Z[1/p]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GammaElem {
    pub first: PFrac,
    pub second: PFrac,
}

impl GammaElem {
    pub fn new(first: PFrac, second: PFrac) -> Result<Self> {
        if first.prime() != second.prime() {
            return Err(ExactError::PrimeMismatch(first.prime(), second.prime()).into());
        }
        Ok(GammaElem { first, second })
    }

    pub fn identity(p: u64) -> Self {
        GammaElem {
            first: PFrac::zero(p),
            second: PFrac::zero(p),
        }
    }

    pub fn prime(&self) -> u64 {
        self.first.prime()
    }

    pub fn add(&self, other: &GammaElem) -> GammaElem {
        GammaElem {
            first: &self.first + &other.first,
            second: &self.second + &other.second,
        }
    }

    pub fn neg(&self) -> GammaElem {
        GammaElem {
            first: -&self.first,
            second: -&self.second,
        }
    }
}

impl fmt::Display for GammaElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

/// The argument of a phase, kept in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhaseArg(QuadReal);

impl PhaseArg {
    pub fn new(t: QuadReal) -> Self {
        PhaseArg(t.fract())
    }

    pub fn zero() -> Self {
        PhaseArg(QuadReal::zero())
    }

    pub fn value(&self) -> &QuadReal {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &PhaseArg) -> Result<PhaseArg> {
        Ok(PhaseArg::new(self.0.checked_add(&other.0)?))
    }

    pub fn sub(&self, other: &PhaseArg) -> Result<PhaseArg> {
        Ok(PhaseArg::new(self.0.checked_sub(&other.0)?))
    }

    pub fn neg(&self) -> PhaseArg {
        PhaseArg::new(-&self.0)
    }
}

impl fmt::Display for PhaseArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `Psi_alpha(g, h) = alpha_{k1+k4} j1 j4 mod 1` for `g = (j1/p^k1, .)`,
/// `h = (., j4/p^k4)` in reduced form.
pub fn psi_alpha(spec: &SolenoidSpec, g: &GammaElem, h: &GammaElem) -> Result<PhaseArg> {
    let p = spec.prime();
    if g.prime() != p || h.prime() != p {
        return Err(ExactError::PrimeMismatch(p, g.prime().max(h.prime())).into());
    }
    let n = g.first.exponent() as u64 + h.second.exponent() as u64;
    let jj = g.first.numer() * h.second.numer();
    let alpha = spec.alpha_at(n)?;
    Ok(PhaseArg::new(alpha.checked_mul(&QuadReal::from_int(jj))?))
}

/// `arg s(r,s) + arg s(r+s,t) - arg s(r,s+t) - arg s(s,t) mod 1`; zero for a
/// multiplier.
pub fn cocycle_defect<F>(sigma: F, r: &GammaElem, s: &GammaElem, t: &GammaElem) -> Result<PhaseArg>
where
    F: Fn(&GammaElem, &GammaElem) -> Result<PhaseArg>,
{
    let lhs = sigma(r, s)?.add(&sigma(&r.add(s), t)?)?;
    let rhs = sigma(r, &s.add(t))?.add(&sigma(s, t)?)?;
    lhs.sub(&rhs)
}

/// A point `(q, r)` of `M = Q_p x R`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MPoint {
    pub q: PAdic,
    pub r: QuadReal,
}

/// A point `[(q1, r1), (q2, r2)]` of `M x M^`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LatticePoint(pub MPoint, pub MPoint);

impl LatticePoint {
    pub fn zero(p: u64) -> Result<Self> {
        let z = MPoint {
            q: PAdic::zero(p)?,
            r: QuadReal::zero(),
        };
        Ok(LatticePoint(z.clone(), z))
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[({}, {}), ({}, {})]",
            self.0.q.to_rational(),
            self.0.r,
            self.1.q.to_rational(),
            self.1.r
        )
    }
}

fn real(s: &PFrac) -> QuadReal {
    QuadReal::from_rat(s.to_rat())
}

fn check_params(x: &PAdic, theta: &QuadReal) -> Result<()> {
    if x.is_zero() {
        return Err(Error::Hypothesis("x must be nonzero".into()));
    }
    if theta.is_zero() {
        return Err(Error::Hypothesis("theta must be nonzero".into()));
    }
    Ok(())
}

/// `iota(r1, r2) = [(x r1, theta r1), (r2, r2)]`.
pub fn iota_embed(x: &PAdic, theta: &QuadReal, g: &GammaElem) -> Result<LatticePoint> {
    check_params(x, theta)?;
    Ok(LatticePoint(
        MPoint {
            q: x.mul_pfrac(&g.first)?,
            r: theta.scale(&g.first.to_rat()),
        },
        MPoint {
            q: PAdic::from_pfrac(&g.second),
            r: real(&g.second),
        },
    ))
}

/// `lambda(s1, s2) = [(s1, -s1), (-x^-1 s2, s2 / theta)]`.
pub fn lambda_embed(x: &PAdic, theta: &QuadReal, s: &GammaElem) -> Result<LatticePoint> {
    check_params(x, theta)?;
    let x_inv = x.invert()?;
    Ok(LatticePoint(
        MPoint {
            q: PAdic::from_pfrac(&s.first),
            r: -real(&s.first),
        },
        MPoint {
            q: x_inv.mul_pfrac(&s.second)?.neg(),
            r: real(&s.second).checked_div(theta)?,
        },
    ))
}

/// Heisenberg multiplier argument `r1 r4 + {q1 q4}_p mod 1` for
/// `P1 = [(q1, r1), .]`, `P2 = [., (q4, r4)]`.
pub fn eta(p1: &LatticePoint, p2: &LatticePoint) -> Result<PhaseArg> {
    let real_part = p1.0.r.checked_mul(&p2.1.r)?;
    let adic = p1.0.q.mul(&p2.1.q)?.frac_part();
    Ok(PhaseArg::new(
        real_part.checked_add(&QuadReal::from_rat(adic.to_rat()))?,
    ))
}

/// Argument of the conjugate multiplier.
pub fn eta_bar(p1: &LatticePoint, p2: &LatticePoint) -> Result<PhaseArg> {
    Ok(eta(p1, p2)?.neg())
}

/// Antisymmetrization `arg eta(P1, P2) - arg eta(P2, P1) mod 1`.
pub fn rho(p1: &LatticePoint, p2: &LatticePoint) -> Result<PhaseArg> {
    eta(p1, p2)?.sub(&eta(p2, p1)?)
}
