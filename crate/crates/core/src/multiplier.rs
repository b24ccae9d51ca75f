//! Modular data for `f = j^m * eta^r` on SL2(Z): the automorphy factor
//! `j(gamma, z) = eps(gamma) ((cz + d)/i)^k`, the unit phases
//! `alpha_x(lambda, mu) = eps(gamma) e^{-2 pi i (lambda a + mu d)/c}` and
//! their sums `A_c(lambda, mu)` over `a mod c` coprime to `c`.
//!
//! For `c > 0` the eta multiplier in this normalization is
//! `eps(gamma) = exp(pi i r ((a + d)/(12c) - s(d, c)))`, with `s` the
//! Dedekind sum; `j` contributes nothing. Since `6c s(d, c)` and `24 lambda`
//! are integers, every phase is `exp(pi i N / (12c))` for an integer
//! `N mod 24c`, which is computed exactly.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::exactq::{eta_j_product, QSeries};
pub use crate::fordfarey::Sl2z;
use crate::fordfarey::{gcd, mod_inverse, FareyFraction};
use crate::numeric::{BigComplex, Bound};

/// `f = j^m * eta^r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModularSpec {
    eta_exponent: i64,
    j_power: u32,
    weight: Rational,
    lambda_min: Rational,
    polar_part: Vec<(Rational, Integer)>,
}

impl ModularSpec {
    /// `eta^r`, `r != 0`.
    pub fn eta_power(r: i64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInput("eta exponent must be non-zero".into()));
        }
        Self::eta_j(r, 0)
    }

    /// The modular invariant `j`.
    pub fn j_invariant() -> Self {
        Self::eta_j(0, 1).expect("j is valid")
    }

    pub fn eta_j(r: i64, j_power: u32) -> Result<Self> {
        if r == 0 && j_power == 0 {
            return Err(Error::InvalidInput("constant function".into()));
        }
        if r.abs() > 10_000 || j_power > 100 {
            return Err(Error::InvalidInput("exponent out of supported range".into()));
        }
        let lambda_min = Rational::from((r, 24)) - j_power;
        let n_polar = if lambda_min < 0 {
            (-lambda_min.clone()).ceil().numer().to_u32().unwrap_or(0) as usize
        } else {
            0
        };
        let mut polar_part = Vec::new();
        if n_polar > 0 {
            let s = eta_j_product(r, j_power, n_polar)?;
            for n in 0..n_polar {
                let mu = s.exponent(n);
                let a = s.coeff(n).unwrap();
                if mu < 0 && !a.is_zero() {
                    polar_part.push((mu, a.clone()));
                }
            }
        }
        Ok(ModularSpec {
            eta_exponent: r,
            j_power,
            weight: Rational::from((r, 2)),
            lambda_min,
            polar_part,
        })
    }

    pub fn eta_exponent(&self) -> i64 {
        self.eta_exponent
    }

    pub fn j_power(&self) -> u32 {
        self.j_power
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn weight_f64(&self) -> f64 {
        self.weight.to_f64()
    }

    pub fn lambda_min(&self) -> &Rational {
        &self.lambda_min
    }

    /// `lambda_min + n`.
    pub fn lambda(&self, n: i64) -> Rational {
        Rational::from(&self.lambda_min + n)
    }

    /// Pairs `(mu, a(mu))` with `mu < 0` and `a(mu) != 0`, `mu` increasing.
    pub fn polar_part(&self) -> &[(Rational, Integer)] {
        &self.polar_part
    }

    /// Index `n` with `lambda_min + n = mu`.
    pub fn index_of(&self, mu: &Rational) -> i64 {
        Rational::from(mu - &self.lambda_min).to_f64().round() as i64
    }

    pub fn is_cusp_finite(&self) -> bool {
        self.polar_part.is_empty()
    }

    /// Exact expansion truncated at `order`.
    pub fn oracle(&self, order: usize) -> Result<QSeries> {
        eta_j_product(self.eta_exponent, self.j_power, order)
    }

    /// `f(z + 1) = u f(z)` with `u = exp(2 pi i r/24)`; returned as the
    /// exponent `r/12` of `exp(pi i x)`.
    pub fn u_phase(&self) -> Rational {
        Rational::from((self.eta_exponent, 12))
    }

    pub fn u(&self, prec: u32) -> UnitComplex {
        UnitComplex::from_phase(&self.u_phase(), prec)
    }

    /// The sign `eps = eps((0 -1; 1 0))`, equal to `A_1(lambda, mu)`.
    pub fn epsilon(&self) -> i32 {
        let p = epsilon_phase(self, &Sl2z::S).expect("c = 1");
        if p.is_integer() && p.numer().is_even() {
            1
        } else {
            -1
        }
    }

    pub fn describe(&self) -> String {
        match (self.eta_exponent, self.j_power) {
            (0, 1) => "j".into(),
            (r, 0) => format!("eta^{r}"),
            (0, m) => format!("j^{m}"),
            (r, 1) => format!("j*eta^{r}"),
            (r, m) => format!("j^{m}*eta^{r}"),
        }
    }
}

/// A complex number of modulus one, with an error bound on each component.
#[derive(Clone, Debug)]
pub struct UnitComplex {
    pub value: BigComplex,
    pub abs_error: Bound,
}

impl UnitComplex {
    /// `exp(pi i x)` for exact rational `x`.
    pub fn from_phase(x: &Rational, prec: u32) -> Self {
        // reduce to [0, 2) exactly so that the float argument is small
        let two = Integer::from(2);
        let q = Rational::from(x / &two).floor();
        let reduced = x - (q * &two);
        let xf = Float::with_val(prec, &reduced);
        // |x - xf| <= 2u, d/dx cos(pi x) <= pi, plus one rounding
        UnitComplex {
            value: BigComplex::exp_i_pi(&xf, prec),
            abs_error: Bound::unit_roundoff(prec).mul_u64(8),
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        self.value.to_f64_pair()
    }
}

fn sawtooth(x: &Rational) -> Rational {
    if x.is_integer() {
        Rational::new()
    } else {
        (x - x.clone().floor()) - Rational::from((1, 2))
    }
}

/// `s(d, c) = sum_{j=1}^{c-1} ((j/c)) ((jd/c))` by reciprocity.
pub fn dedekind_sum(d: i64, c: i64) -> Result<Rational> {
    if c < 1 {
        return Err(Error::InvalidInput(format!("c = {c} must be positive")));
    }
    if gcd(d, c) != 1 {
        return Err(Error::NotCoprime(d, c));
    }
    Ok(dedekind_reciprocity(d.rem_euclid(c), c))
}

fn dedekind_reciprocity(d: i64, c: i64) -> Rational {
    if c == 1 || d == 0 {
        return Rational::new();
    }
    // s(d,c) + s(c,d) = -1/4 + (d/c + c/d + 1/(cd))/12
    let rhs = Rational::from((d * d + c * c + 1, 12 * c * d)) - Rational::from((1, 4));
    rhs - dedekind_reciprocity(c % d, d)
}

/// `s(d, c)` by its definition, O(c); used to cross-check reciprocity.
pub fn dedekind_sum_direct(d: i64, c: i64) -> Rational {
    let mut s = Rational::new();
    for j in 1..c {
        s += sawtooth(&Rational::from((j, c))) * sawtooth(&Rational::from((j * d, c)));
    }
    s
}

/// `6 c s(d, c)`, an integer.
pub fn dedekind_sum_scaled(d: i64, c: i64) -> Result<Integer> {
    let s = dedekind_sum(d, c)? * Integer::from(6 * c);
    debug_assert!(s.is_integer());
    Ok(s.numer().clone())
}

/// The exponent `x` with `eps(gamma) = exp(pi i x)`, for `c > 0`.
pub fn epsilon_phase(spec: &ModularSpec, gamma: &Sl2z) -> Result<Rational> {
    if gamma.c <= 0 {
        return Err(Error::InvalidInput(format!("eps(gamma) needs c > 0, got c = {}", gamma.c)));
    }
    let r = spec.eta_exponent;
    let s = dedekind_sum(gamma.d, gamma.c)?;
    let x = Rational::from((gamma.a + gamma.d, 12 * gamma.c)) - s;
    Ok(x * Integer::from(r))
}

/// `eps(gamma)` for `c > 0`.
pub fn epsilon_gamma(spec: &ModularSpec, gamma: &Sl2z, prec: u32) -> Result<UnitComplex> {
    Ok(UnitComplex::from_phase(&epsilon_phase(spec, gamma)?, prec))
}

fn scaled(spec: &ModularSpec, x: &Rational) -> Result<i64> {
    let s = Rational::from(x * 24u32);
    if !s.is_integer() || !Rational::from(x - &spec.lambda_min).is_integer() {
        return Err(Error::InvalidInput(format!("{x} is not in lambda_min + Z")));
    }
    s.numer().to_i64().ok_or_else(|| Error::InvalidInput(format!("{x} too large")))
}

/// Integer `N mod 24c` with `alpha_x(lambda, mu) = exp(pi i N/(12c))`,
/// where `(lambda24, mu24) = (24 lambda, 24 mu)` and `gamma` has first
/// column `(a, c)`, `c > 0`.
pub fn alpha_numerator(r: i64, lambda24: i64, mu24: i64, gamma: &Sl2z) -> i64 {
    let c = gamma.c as i128;
    let m = 24 * c;
    let s6 = dedekind_reciprocity(gamma.d.rem_euclid(gamma.c), gamma.c) * Integer::from(6 * gamma.c);
    let s6 = s6.numer().to_i128().expect("6c s(d,c) fits");
    let r = r as i128;
    let n = r * (gamma.a + gamma.d) as i128 - 2 * r * s6
        - (lambda24 as i128 * gamma.a as i128 + mu24 as i128 * gamma.d as i128);
    n.rem_euclid(m) as i64
}

/// `alpha_x(lambda, mu)` for the canonical matrix of `x`.
pub fn alpha_x(spec: &ModularSpec, lambda: &Rational, mu: &Rational, x: &FareyFraction, prec: u32) -> Result<UnitComplex> {
    alpha_x_with(spec, lambda, mu, &Sl2z::canonical(x), prec)
}

/// `alpha_x(lambda, mu)` computed from an arbitrary `gamma` with `gamma(inf) = x`.
pub fn alpha_x_with(spec: &ModularSpec, lambda: &Rational, mu: &Rational, gamma: &Sl2z, prec: u32) -> Result<UnitComplex> {
    if gamma.c <= 0 {
        return Err(Error::InvalidInput("alpha_x needs c > 0".into()));
    }
    let n = alpha_numerator(spec.eta_exponent, scaled(spec, lambda)?, scaled(spec, mu)?, gamma);
    Ok(UnitComplex::from_phase(&Rational::from((n, 12 * gamma.c)), prec))
}

/// `A_c(lambda, mu)` together with a bound on its absolute error.
#[derive(Clone, Debug)]
pub struct KloostermanSum {
    pub value: BigComplex,
    pub abs_error: Bound,
    pub terms: u64,
}

/// `A_c(lambda, mu) = sum_{0 <= a < c, gcd(a, c) = 1} alpha_{a/c}(lambda, mu)`.
pub fn kloosterman_a(spec: &ModularSpec, lambda: &Rational, mu: &Rational, c: i64, prec: u32) -> Result<KloostermanSum> {
    kloosterman_a_shifted(spec, lambda, mu, c, 0, prec)
}

/// As [`kloosterman_a`] with representatives `a` taken in `[shift c, (shift+1) c)`.
pub fn kloosterman_a_shifted(
    spec: &ModularSpec,
    lambda: &Rational,
    mu: &Rational,
    c: i64,
    shift: i64,
    prec: u32,
) -> Result<KloostermanSum> {
    if c < 1 {
        return Err(Error::InvalidInput(format!("c = {c} must be positive")));
    }
    let (l24, m24) = (scaled(spec, lambda)?, scaled(spec, mu)?);
    Ok(kloosterman_scaled(spec.eta_exponent, l24, m24, c, shift, prec))
}

/// Core of [`kloosterman_a`] on the integers `24 lambda`, `24 mu`.
pub fn kloosterman_scaled(r: i64, l24: i64, m24: i64, c: i64, shift: i64, prec: u32) -> KloostermanSum {
    let mut sum = BigComplex::zero(prec);
    let mut terms = 0u64;
    let twelve_c = Integer::from(12 * c);
    for a0 in 0..c {
        if gcd(a0, c) != 1 {
            continue;
        }
        let a = a0 + shift * c;
        let d = if c == 1 { 0 } else { mod_inverse(a, c) };
        let b = ((a as i128 * d as i128 - 1) / c as i128) as i64;
        let n = alpha_numerator(r, l24, m24, &Sl2z { a, b, c, d });
        let phase = Rational::from((Integer::from(n), twelve_c.clone()));
        let x = Float::with_val(prec, &phase);
        sum.add_assign(&BigComplex::exp_i_pi(&x, prec));
        terms += 1;
    }
    // each phase is within 8u per component; recursive summation of
    // `terms` numbers of modulus <= 1 adds at most terms^2 u per component
    let u = Bound::unit_roundoff(prec);
    let abs_error = u.mul_u64(8 * terms + terms * terms).mul_f64(1.5);
    KloostermanSum { value: sum, abs_error, terms }
}

/// Euler's totient.
pub fn euler_phi(c: i64) -> i64 {
    (1..=c).filter(|&a| gcd(a, c) == 1).count() as i64
}

/// Rounds `x` up to `prec` bits, for bounds.
pub fn round_up(x: &Float, prec: u32) -> Float {
    Float::with_val_round(prec, x, Round::Up).0
}
