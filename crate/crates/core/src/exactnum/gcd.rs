use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::ExactError;

/// Result of the extended Euclidean algorithm: `s*u + t*v = g`, `g >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bezout {
    pub g: BigInt,
    pub s: BigInt,
    pub t: BigInt,
}

/// Bezout coefficients for `(u, v)`. `gcd(u, 0) = |u|`.
pub fn ext_gcd(u: &BigInt, v: &BigInt) -> Result<Bezout, ExactError> {
    if u.is_zero() && v.is_zero() {
        return Err(ExactError::BothZero);
    }
    let (mut old_r, mut r) = (u.clone(), v.clone());
    let (mut old_s, mut s) = (BigInt::from(1), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::from(1));
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    debug_assert_eq!(&old_s * u + &old_t * v, old_r);
    debug_assert_eq!(old_r, u.gcd(v));
    Ok(Bezout {
        g: old_r,
        s: old_s,
        t: old_t,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bz(u: i64, v: i64) -> Bezout {
        ext_gcd(&BigInt::from(u), &BigInt::from(v)).unwrap()
    }

    #[test]
    fn listed_cases() {
        let r = bz(4, -1);
        assert_eq!((r.g, r.s, r.t), (1.into(), 0.into(), (-1).into()));
        assert_eq!(bz(6, 1).g, BigInt::from(1));
        assert_eq!(bz(2, 0).g, BigInt::from(2));
        assert_eq!(bz(-2, 0).g, BigInt::from(2));
        assert_eq!(bz(0, -9).g, BigInt::from(9));
    }

    #[test]
    fn both_zero_rejected() {
        assert_eq!(
            ext_gcd(&BigInt::zero(), &BigInt::zero()),
            Err(ExactError::BothZero)
        );
    }

    proptest! {
        #[test]
        fn bezout_identity(u in -10_000i64..10_000, v in -10_000i64..10_000) {
            prop_assume!(u != 0 || v != 0);
            let r = bz(u, v);
            prop_assert!(r.g > BigInt::zero());
            prop_assert_eq!(&r.s * u + &r.t * v, r.g.clone());
            prop_assert_eq!(r.g, BigInt::from(u).gcd(&BigInt::from(v)));
        }
    }
}
