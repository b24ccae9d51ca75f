//! Big-float helpers: directed-rounding error bounds and a minimal complex type.
//!
//! Values are `rug::Float` (MPFR). Every basic MPFR operation is correctly
//! rounded, so an operation at precision `p` contributes a relative error of
//! at most `2^-p`. Error bounds are accumulated in [`Bound`], whose arithmetic
//! rounds towards +infinity so that a computed bound never understates the
//! quantity it bounds.

use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::AssignRound;
use rug::Float;

/// Guard bits added on top of the bits a result needs.
pub const GUARD_BITS: u32 = 16;

/// Hard cap for precision escalation.
pub const MAX_PRECISION: u32 = 1 << 20;

const BOUND_PREC: u32 = 64;

/// A non-negative upper bound, with arithmetic rounded upwards.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Bound(Float);

impl Bound {
    pub fn zero() -> Self {
        Bound(Float::new(BOUND_PREC))
    }

    pub fn infinity() -> Self {
        Bound(Float::with_val(BOUND_PREC, rug::float::Special::Infinity))
    }

    /// Upper bound for `|x|`.
    pub fn from_f64(x: f64) -> Self {
        assert!(!x.is_nan(), "NaN bound");
        Bound(Float::with_val(BOUND_PREC, x.abs()))
    }

    /// Upper bound for `|x|`.
    pub fn from_float(x: &Float) -> Self {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&*x.as_abs(), Round::Up);
        Bound(f)
    }

    /// Upper bound for `|q|`.
    pub fn from_rational(q: &rug::Rational) -> Self {
        let mut g = Float::new(BOUND_PREC);
        g.assign_round(&*q.as_abs(), Round::Up);
        Bound(g)
    }

    /// Upper bound for `|n|`.
    pub fn from_integer(n: &rug::Integer) -> Self {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&*n.as_abs(), Round::Up);
        Bound(f)
    }

    /// Upper bound for `|x|` where `x` carries at most `2^20` correctly
    /// rounded operations at precision >= 96 bits.
    pub fn from_computed(x: &Float) -> Self {
        Bound::from_float(x).mul(&Bound::from_f64(1.0).add(&Bound::pow2(-70)))
    }

    /// `2^exp`, exactly.
    pub fn pow2(exp: i32) -> Self {
        Bound(Float::with_val(BOUND_PREC, Float::i_exp(1, exp)))
    }

    /// Unit roundoff of precision `prec`.
    pub fn unit_roundoff(prec: u32) -> Self {
        Self::pow2(-(prec as i32))
    }

    pub fn as_float(&self) -> &Float {
        &self.0
    }

    pub fn add(&self, other: &Bound) -> Bound {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&self.0 + &other.0, Round::Up);
        Bound(f)
    }

    pub fn mul(&self, other: &Bound) -> Bound {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&self.0 * &other.0, Round::Up);
        Bound(f)
    }

    pub fn mul_f64(&self, x: f64) -> Bound {
        self.mul(&Bound::from_f64(x))
    }

    pub fn mul_u64(&self, x: u64) -> Bound {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&self.0 * x, Round::Up);
        Bound(f)
    }

    /// `self / lower`, where `lower > 0` is a lower bound of the divisor.
    pub fn div_by_lower(&self, lower: &Float) -> Bound {
        assert!(*lower > 0, "divisor lower bound must be positive");
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(&self.0 / lower, Round::Up);
        Bound(f)
    }

    pub fn div_f64(&self, lower: f64) -> Bound {
        self.div_by_lower(&Float::with_val(BOUND_PREC, lower))
    }

    /// `exp(self)` rounded up; `self` is taken as an upper bound of the argument.
    pub fn exp(&self) -> Bound {
        let mut f = Float::new(BOUND_PREC);
        f.assign_round(self.0.exp_ref(), Round::Up);
        Bound(f)
    }

    /// `self^e` for `self >= 1` or `e >= 0`, rounded up.
    pub fn powf(&self, e: f64) -> Bound {
        let mut f = Float::new(BOUND_PREC);
        let e = Float::with_val(BOUND_PREC, e);
        f.assign_round(rug::ops::Pow::pow(&self.0, &e), Round::Up);
        Bound(f)
    }

    pub fn max(&self, other: &Bound) -> Bound {
        if self.0 >= other.0 {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// Nearest f64 at or above the bound (may be `inf`).
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64_round(Round::Up)
    }

    pub fn le_f64(&self, x: f64) -> bool {
        self.0 <= x
    }

    pub fn lt_f64(&self, x: f64) -> bool {
        self.0 < x
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a Bound>>(items: I) -> Bound {
        items.into_iter().fold(Bound::zero(), |acc, b| acc.add(b))
    }
}

impl fmt::Debug for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Bound({:.6e})", self.to_f64())
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6e}", self.to_f64())
    }
}

impl PartialEq<f64> for Bound {
    fn eq(&self, other: &f64) -> bool {
        self.0 == *other
    }
}

impl PartialOrd<f64> for Bound {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.0.partial_cmp(other)
    }
}

/// Complex number with MPFR components.
#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn zero(prec: u32) -> Self {
        BigComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        BigComplex { re, im: Float::new(prec) }
    }

    /// `exp(i pi x)` computed via correctly rounded `cos(pi x)` and `sin(pi x)`.
    pub fn exp_i_pi(x: &Float, prec: u32) -> Self {
        let re = Float::with_val(prec, x).cos_pi();
        let im = Float::with_val(prec, x).sin_pi();
        BigComplex { re, im }
    }

    pub fn add_assign(&mut self, other: &BigComplex) {
        self.re += &other.re;
        self.im += &other.im;
    }

    pub fn mul(&self, other: &BigComplex) -> BigComplex {
        let prec = self.re.prec().max(other.re.prec());
        let re = Float::with_val(prec, &self.re * &other.re) - Float::with_val(prec, &self.im * &other.im);
        let im = Float::with_val(prec, &self.re * &other.im) + Float::with_val(prec, &self.im * &other.re);
        BigComplex { re, im }
    }

    pub fn scale(&self, x: &Float) -> BigComplex {
        let prec = self.re.prec().max(x.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re * x),
            im: Float::with_val(prec, &self.im * x),
        }
    }

    pub fn abs(&self) -> Float {
        let prec = self.re.prec();
        Float::with_val(prec, self.re.hypot_ref(&self.im))
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Bits needed to represent `|x|` (its binary exponent), 0 for `|x| < 1`.
pub fn magnitude_bits(x: &Float) -> u32 {
    match x.get_exp() {
        Some(e) if e > 0 => e as u32,
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_arithmetic_rounds_up() {
        let third = Bound::from_f64(1.0).div_f64(3.0);
        assert!(third.as_float().clone() * 3u32 >= 1.0);
        let s = Bound::from_f64(0.1).add(&Bound::from_f64(0.2));
        assert!(s.to_f64() >= 0.1 + 0.2 - 1e-17);
        assert_eq!(Bound::pow2(-3).to_f64(), 0.125);
        assert!(Bound::from_f64(1.0).exp().to_f64() >= std::f64::consts::E);
    }

    #[test]
    fn exp_i_pi_is_unit() {
        let x = Float::with_val(128, 1) / 7u32;
        let z = BigComplex::exp_i_pi(&x, 128);
        let r = z.abs() - 1u32;
        assert!(r.abs() < 1e-36);
    }
}
