//! The entire function `L_nu(t) = sum_{n >= 0} t^n / (n! Gamma(n + nu + 1))`
//! with certified error, together with the zeta and gamma values the error
//! analysis needs.
//!
//! `L_nu` is related to the modified Bessel function by
//! `I_nu(t) = (t/2)^nu L_nu(t^2/4)`, and `L_nu' = L_{nu+1}`.
//!
//! Evaluation sums the defining series with the recurrence
//! `term_{n+1} = term_n * t / ((n+1)(n+nu+1))`. Once `n + nu + 1 > 0` and the
//! ratio `r_n = t/((n+1)(n+nu+1))` is at most 1/2, the ratios decrease and the
//! tail after `term_n` is at most `2 r_n |term_n|`.
//!
//! Rounding is accounted a priori: the computed `term_n` has relative error
//! at most `(4n + 8) u` (plus the propagated error of `t`), and recursive
//! summation of `K` terms adds at most `K u sum |term_n|`.

use rug::ops::Pow;
use rug::float::{Constant, Round};
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::numeric::{Bound, GUARD_BITS, MAX_PRECISION};

/// Result of a certified evaluation.
#[derive(Clone, Debug)]
pub struct LEvalResult {
    pub value: Float,
    /// Upper bound for `|value - L(t)|`, truncation and rounding included.
    pub abs_error: Bound,
    pub terms_used: usize,
    pub precision: u32,
    /// Upper bound for `sum |term_n|`, i.e. for the `L~` value at `t`.
    pub abs_sum: Bound,
}

/// The argument `t`, given in a form that can be rounded to any precision.
#[derive(Clone, Debug)]
pub enum LArg {
    F64(f64),
    Exact(Rational),
    /// `t = pi^2 * q`.
    PiSquaredTimes(Rational),
}

impl LArg {
    /// `t` at precision `prec` and a bound on its relative error in units
    /// of `2^-prec`.
    fn at(&self, prec: u32) -> (Float, u32) {
        match self {
            LArg::F64(t) => (Float::with_val(prec, *t), 0),
            LArg::Exact(q) => (Float::with_val(prec, q), 1),
            LArg::PiSquaredTimes(q) => {
                let pi = Float::with_val(prec, Constant::Pi);
                let mut t = Float::with_val(prec, pi.square_ref());
                t *= Float::with_val(prec, q);
                (t, 5)
            }
        }
    }

    fn approx(&self) -> f64 {
        match self {
            LArg::F64(t) => *t,
            LArg::Exact(q) => q.to_f64(),
            LArg::PiSquaredTimes(q) => std::f64::consts::PI.powi(2) * q.to_f64(),
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            LArg::F64(t) => *t < 0.0 || t.is_nan(),
            LArg::Exact(q) | LArg::PiSquaredTimes(q) => *q < 0,
        }
    }
}

/// Requested accuracy.
#[derive(Clone, Copy, Debug)]
pub enum Target {
    Abs(f64),
    /// Relative to `sum |term_n|` (for `nu >= 0` this is `L_nu(t)` itself).
    Rel(f64),
}

/// Default working precision for argument `t` and absolute target `target`.
pub fn working_precision(t: f64, target: f64) -> u32 {
    let growth = (2.0 * t.max(0.0).sqrt() * std::f64::consts::LOG2_E).ceil();
    let accuracy = (1.0 / target).log2().ceil().max(0.0);
    let bits = growth + accuracy + 32.0 + GUARD_BITS as f64;
    (bits.min(MAX_PRECISION as f64) as u32).max(64)
}

/// `L_nu(t)` with `|value - L_nu(t)| <= abs_error <= target_abs_err`.
pub fn eval_l(nu: f64, t: f64, target_abs_err: f64) -> Result<LEvalResult> {
    eval_series(nu, &LArg::F64(t), Target::Abs(target_abs_err), false, 64)
}

/// The majorant `L~_nu(t) = sum t^n / (n! |Gamma(n + nu + 1)|)`.
pub fn eval_l_tilde(nu: f64, t: f64, target_abs_err: f64) -> Result<LEvalResult> {
    eval_series(nu, &LArg::F64(t), Target::Abs(target_abs_err), true, 64)
}

/// General entry point: any argument form, absolute or relative target,
/// `tilde` selects the majorant, `min_prec` is a floor for the precision.
pub fn eval_l_arg(nu: f64, t: &LArg, target: Target, tilde: bool, min_prec: u32) -> Result<LEvalResult> {
    eval_series(nu, t, target, tilde, min_prec)
}

fn eval_series(nu: f64, t: &LArg, target: Target, tilde: bool, min_prec: u32) -> Result<LEvalResult> {
    if !nu.is_finite() {
        return Err(Error::InvalidInput(format!("nu = {nu}")));
    }
    if t.is_negative() {
        return Err(Error::InvalidInput("t must be >= 0".into()));
    }
    let goal = match target {
        Target::Abs(x) | Target::Rel(x) => x,
    };
    if goal.is_nan() || goal <= 0.0 {
        return Err(Error::InvalidInput(format!("target {goal} must be positive")));
    }
    let t_approx = t.approx();
    let mut prec = match target {
        Target::Abs(x) => working_precision(t_approx, x),
        Target::Rel(x) => working_precision(0.0, x) + 16,
    }
    .max(min_prec);
    loop {
        let res = attempt(nu, t, target, tilde, prec)?;
        let limit = match target {
            Target::Abs(x) => Bound::from_f64(x),
            Target::Rel(x) => res.abs_sum.mul_f64(x),
        };
        if res.abs_error <= limit {
            return Ok(res);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::TargetUnreachable {
                target: goal,
                reason: format!("L_{nu}({t_approx}) error {} at {prec} bits", res.abs_error),
            });
        }
        prec = (prec * 2).min(MAX_PRECISION);
    }
}

fn attempt(nu: f64, t_arg: &LArg, target: Target, tilde: bool, prec: u32) -> Result<LEvalResult> {
    let (t, t_ulps) = t_arg.at(prec);
    let u = Bound::unit_roundoff(prec);
    // index of the first non-vanishing term: 1/Gamma vanishes at the poles
    let n0: u64 = if nu < 0.0 && nu.fract() == 0.0 { (-nu) as u64 } else { 0 };
    let mut term = if t.is_zero() && n0 > 0 {
        Float::new(prec)
    } else {
        let mut g = Float::with_val(prec, n0 as f64 + nu + 1.0);
        g.gamma_mut();
        if tilde {
            g.abs_mut();
        }
        let mut fact = Float::with_val(prec, rug::Integer::from(rug::Integer::factorial(n0 as u32)));
        fact *= &g;
        let mut tp = Float::with_val(prec, (&t).pow(n0 as u32));
        tp /= &fact;
        tp
    };
    let mut sum = Float::with_val(prec, &term);
    let mut abs_sum = Bound::from_float(&term);
    let mut weighted = Bound::zero();
    let mut n = n0;
    let mut terms = 1usize;
    let tail;
    loop {
        let denom_shift = n as f64 + nu + 1.0;
        let mut ratio = Float::with_val(prec, &t);
        let d = Float::with_val(prec, denom_shift) * Float::with_val(prec, n + 1);
        ratio /= &d;
        if tilde {
            ratio.abs_mut();
        }
        // geometric tail once ratios are positive, decreasing and <= 1/2
        if denom_shift > 0.0 && ratio <= 0.5 {
            let r_up = Bound::from_float(&ratio).mul(&Bound::from_f64(1.0).add(&u.mul_u64(8)));
            let t_up = Bound::from_float(&term).mul_f64(1.001);
            let candidate = t_up.mul(&r_up).mul_u64(2);
            let allowed = match target {
                Target::Abs(x) => Bound::from_f64(x / 2.0),
                Target::Rel(x) => abs_sum.mul_f64(x / 2.0),
            };
            if candidate <= allowed || t.is_zero() {
                tail = if t.is_zero() { Bound::zero() } else { candidate };
                break;
            }
        }
        if terms > 50_000_000 {
            return Err(Error::IterationLimit(terms));
        }
        term *= &ratio;
        n += 1;
        terms += 1;
        sum += &term;
        let a = Bound::from_float(&term);
        abs_sum = abs_sum.add(&a);
        weighted = weighted.add(&a.mul_u64(n - n0));
    }
    let n_last = n - n0;
    // per-term relative error: (4j + 8)u + j * t_ulps * u for j steps of the
    // recurrence, to first order; the factor 1.01 covers higher orders
    let eta = u.mul_u64(t_ulps as u64);
    assert!(u.mul_u64(4 * n_last + 8).add(&eta.mul_u64(n_last)).lt_f64(1e-3));
    let per_step = u.mul_u64(4).add(&eta);
    let base = u.mul_u64(8).add(&eta.mul_u64(n0));
    let term_err = weighted.mul(&per_step).add(&abs_sum.mul(&base)).mul_f64(1.01);
    let sum_err = abs_sum.mul(&u.mul_u64(terms as u64 + 1)).mul_f64(1.01);
    let abs_error = tail.add(&term_err).add(&sum_err);
    Ok(LEvalResult {
        value: sum,
        abs_error,
        terms_used: terms,
        precision: prec,
        abs_sum: abs_sum.mul_f64(1.001).add(&tail),
    })
}

/// Leading asymptotic `t^{-(2 nu + 1)/4} e^{2 sqrt t} / sqrt(4 pi)`; carries
/// no error bound and is only used for diagnostics.
pub fn asymptotic_l(nu: f64, t: f64) -> Float {
    assert!(t > 0.0, "asymptotic_l needs t > 0");
    let prec = 128;
    let tf = Float::with_val(prec, t);
    let mut e = Float::with_val(prec, tf.sqrt_ref()) * 2u32;
    e.exp_mut();
    let p = Float::with_val(prec, tf.ln_ref()) * (-(2.0 * nu + 1.0) / 4.0);
    let four_pi = Float::with_val(prec, Constant::Pi) * 4u32;
    e * p.exp() / four_pi.sqrt()
}

/// Smallest `t0` (up to bisection resolution) at which the certified ratio
/// `L_nu(t0 alpha') / L_nu(t0 alpha)` is below `target`. For `nu >= 0` the
/// ratio is non-increasing in `t`, so the inequality then holds for all
/// `t >= t0`.
pub fn ratio_threshold(nu: f64, alpha: &Rational, alpha_prime: &Rational, target: f64) -> Result<f64> {
    if nu < 0.0 {
        return Err(Error::InvalidInput("ratio_threshold needs nu >= 0".into()));
    }
    if !(*alpha_prime > 0 && alpha_prime < alpha) {
        return Err(Error::InvalidInput("need 0 < alpha' < alpha".into()));
    }
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidInput(format!("target {target} must lie in (0, 1)")));
    }
    let below = |t: f64| -> Result<bool> { Ok(certified_ratio(nu, alpha, alpha_prime, t)? < target) };
    let mut hi = 1.0 / 1024.0;
    let mut lo = 0.0;
    let mut doublings = 0;
    while !below(hi)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 200 {
            return Err(Error::IterationLimit(doublings));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Upper bound for `L_nu(t alpha') / L_nu(t alpha)` (`nu >= 0`).
pub fn certified_ratio(nu: f64, alpha: &Rational, alpha_prime: &Rational, t: f64) -> Result<f64> {
    let tq = Rational::from_f64(t).ok_or_else(|| Error::InvalidInput(format!("t = {t}")))?;
    let num = eval_l_arg(nu, &LArg::Exact(Rational::from(&tq * alpha_prime)), Target::Rel(1e-12), false, 64)?;
    let den = eval_l_arg(nu, &LArg::Exact(tq * alpha), Target::Rel(1e-12), false, 64)?;
    let mut num_up = Float::with_val(64, &num.value);
    num_up += num.abs_error.as_float();
    let den_lo = Float::with_val_round(64, &den.value - den.abs_error.as_float(), Round::Down).0;
    if den_lo <= 0 {
        return Ok(f64::INFINITY);
    }
    Ok(Bound::from_float(&num_up).div_by_lower(&den_lo).to_f64())
}

/// `zeta(s)` for `s > 1`, correctly rounded at precision `prec`.
pub fn zeta_value(s: f64, prec: u32) -> Result<Float> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Pole { function: "zeta", at: s.to_string() });
    }
    Ok(Float::with_val(prec, s).zeta())
}

/// Upper bound for `zeta(s)`, `s > 1`.
pub fn zeta_upper(s: f64) -> Result<Bound> {
    if s.is_nan() || s <= 1.0 {
        return Err(Error::Pole { function: "zeta", at: s.to_string() });
    }
    let mut z = Float::with_val(64, s);
    z.zeta_round(Round::Up);
    Ok(Bound::from_float(&z))
}

/// `Gamma(s)` for `s` not a non-positive integer, correctly rounded.
pub fn gamma_value(s: f64, prec: u32) -> Result<Float> {
    if s <= 0.0 && s.fract() == 0.0 {
        return Err(Error::Pole { function: "gamma", at: s.to_string() });
    }
    Ok(Float::with_val(prec, s).gamma())
}

/// Upper bound for `|Gamma(s)|`.
pub fn gamma_abs_upper(s: f64) -> Result<Bound> {
    let g = gamma_value(s, 96)?;
    Ok(Bound::from_float(&g).mul_f64(1.0 + 1e-20))
}
