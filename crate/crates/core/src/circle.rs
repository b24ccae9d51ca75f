//! The coefficient engine.
//!
//! For `f` with polar part `P = sum_{mu < 0} a(mu) q^mu` and weight `k`,
//!
//! ```text
//! a(lambda) = (2 pi)^{2-k} sum_{c >= 1} c^{k-2} sum_mu a(mu) |mu|^{1-k}
//!             A_c(lambda, mu) L_{1-k}(4 pi^2 lambda |mu| / c^2)
//! ```
//!
//! converges for `k < 0`. It is summed up to a cutoff `C` whose tail is
//! bounded with `|A_c| <= c`, monotonicity of `L_{1-k}` and
//! `sum_{c > C} c^{k-1} <= C^k / (-k)`. For `k >= 0` the same double sum is
//! truncated at `c <= N` and the error is bounded by
//!
//! ```text
//! e^{4 pi lambda/(N+1)^2} (pi M1 K(N) + M2 N^k)
//! ```
//!
//! with `K(N)` equal to `(2N^2)^{k-1} zeta(k-1)`, `2N^2 (1 + log N)` or
//! `4 N^k / (2 - k)` for `k > 2`, `k = 2`, `0 <= k < 2`. Here
//! `M1 = sup_{Im z >= 1} |f - P|` and `M2 = sum |a(mu)| g_k(mu)`.
//!
//! Every budget adds the numerical error of the evaluation (the `L`
//! values, the phases and the summation) on top of the analytic bounds.
//! The sum over `c` runs in parallel; partial results are merged in
//! increasing `c`, so budgets are bit-identical for any thread count.

use rug::ops::Pow;
use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::multiplier::{kloosterman_scaled, ModularSpec};
use crate::numeric::{magnitude_bits, pi, BigComplex, Bound, MAX_PRECISION};
use crate::par::{self, Parallelism};
use crate::specfun::{eval_l_arg, gamma_value, ratio_threshold, zeta_upper, LArg, Target};

#[derive(Clone, Debug)]
pub struct CircleOptions {
    pub parallelism: Parallelism,
    /// Floor for the working precision in bits.
    pub min_precision: u32,
    /// Fixed cutoff `C` (negative weight) instead of the automatic choice.
    pub max_c: Option<i64>,
}

impl Default for CircleOptions {
    fn default() -> Self {
        CircleOptions { parallelism: Parallelism::Auto, min_precision: 64, max_c: None }
    }
}

/// A certified value: `|main - a(lambda)| <= bound`.
#[derive(Clone, Debug)]
pub struct ErrorBudget {
    pub lambda: Rational,
    pub main: Float,
    pub bound: Bound,
    /// Named non-negative contributions; their sum is `bound`.
    pub breakdown: Vec<(&'static str, Bound)>,
    /// Largest `c` in the truncated sum.
    pub cutoff: i64,
    pub precision: u32,
}

impl ErrorBudget {
    fn assemble(lambda: Rational, main: Float, breakdown: Vec<(&'static str, Bound)>, cutoff: i64, precision: u32) -> Self {
        let bound = Bound::sum(breakdown.iter().map(|(_, b)| b));
        ErrorBudget { lambda, main, bound, breakdown, cutoff, precision }
    }

    pub fn main_f64(&self) -> f64 {
        self.main.to_f64()
    }

    /// The nearest integer to `main`, when `bound < 1/2` makes it unique.
    pub fn snapped(&self) -> Option<Integer> {
        if self.bound.lt_f64(0.5) {
            self.main.to_integer()
        } else {
            None
        }
    }

    /// Exact test of `|main - v| <= bound`.
    pub fn encloses(&self, v: &Integer) -> bool {
        let (Some(m), Some(b)) = (self.main.to_rational(), self.bound.as_float().to_rational()) else {
            return false;
        };
        (m - v).abs() <= b
    }

    pub fn entry(&self, name: &str) -> Option<&Bound> {
        self.breakdown.iter().find(|(n, _)| *n == name).map(|(_, b)| b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominanceData {
    pub mu0: Rational,
    pub a_mu0: Integer,
    /// `|mu0|`, the largest `|mu|` with `a(mu) != 0`.
    pub delta: Rational,
    /// Second largest value of `|mu| / c^2` over `a(mu) != 0`, `c >= 1`.
    pub delta_prime: Rational,
    /// `M = sum |a(mu)|`.
    pub m: Integer,
    /// Several pairs `(mu, c)` attain `delta_prime`.
    pub tie_at_delta_prime: bool,
}

pub fn dominance_data(spec: &ModularSpec) -> Result<DominanceData> {
    let polar = spec.polar_part();
    if polar.is_empty() {
        return Err(Error::NoPolarPart);
    }
    let (mu0, a_mu0) = polar
        .iter()
        .max_by(|x, y| x.0.clone().abs().cmp(&y.0.clone().abs()))
        .cloned()
        .expect("non-empty");
    let delta = mu0.clone().abs();
    // every |mu|/c^2 with c >= 2 is at most delta/4, attained at (mu0, 2),
    // so c <= 2 settles the second largest value
    let mut candidates: Vec<Rational> = Vec::new();
    for (mu, _) in polar {
        for c in 1..=2u32 {
            candidates.push(mu.clone().abs() / (c * c));
        }
    }
    candidates.sort_by(|a, b| b.cmp(a));
    let delta_prime = candidates.into_iter().find(|v| *v < delta).expect("delta/4 < delta");
    // count the pairs attaining delta_prime; c is at most sqrt(delta/delta')
    let c_max = Rational::from(&delta / &delta_prime).to_f64().sqrt().floor() as u32 + 1;
    let mut hits = 0;
    for (mu, _) in polar {
        for c in 1..=c_max {
            if mu.clone().abs() / (c * c) == delta_prime {
                hits += 1;
            }
        }
    }
    let m = polar.iter().map(|(_, a)| a.clone().abs()).sum();
    Ok(DominanceData { mu0, a_mu0, delta, delta_prime, m, tie_at_delta_prime: hits > 1 })
}

struct PolarTerm {
    abs_mu: Rational,
    mu24: i64,
    a: Integer,
}

struct Prepared {
    r: i64,
    k: f64,
    polar: Vec<PolarTerm>,
}

impl Prepared {
    fn new(spec: &ModularSpec) -> Self {
        let polar = spec
            .polar_part()
            .iter()
            .map(|(mu, a)| PolarTerm {
                abs_mu: mu.clone().abs(),
                mu24: Rational::from(mu * 24u32).numer().to_i64().expect("small exponent"),
                a: a.clone(),
            })
            .collect();
        Prepared { r: spec.eta_exponent(), k: spec.weight_f64(), polar }
    }

    fn nu(&self) -> f64 {
        1.0 - self.k
    }

    /// `W = sum |a(mu)| |mu|^{1-k}`.
    fn weight_sum(&self) -> Bound {
        let mut w = Bound::zero();
        for t in &self.polar {
            let p = Bound::from_rational(&t.abs_mu).powf(1.0 - self.k);
            let p = if 1.0 - self.k < 0.0 {
                // |mu| was rounded up, so a negative power needs a fresh bound
                let f = Float::with_val(128, &t.abs_mu);
                Bound::from_computed(&f.pow(1.0 - self.k))
            } else {
                p
            };
            w = w.add(&Bound::from_integer(&t.a).mul(&p));
        }
        w
    }
}

/// Upper bound for `(2 pi)^{2-k}`.
fn two_pi_power(k: f64) -> Bound {
    let two_pi = pi(128) * 2u32;
    Bound::from_computed(&two_pi.pow(2.0 - k))
}

/// Upper bound for `L_nu(pi^2 q)` (or `L~_nu` when `tilde`).
fn l_upper(nu: f64, q: Rational, tilde: bool) -> Result<Bound> {
    let r = eval_l_arg(nu, &LArg::PiSquaredTimes(q), Target::Rel(1e-10), tilde, 64)?;
    Ok(Bound::from_float(&r.value).add(&r.abs_error))
}

/// Lower bound for `L_nu(pi^2 q)`; may be negative for `nu < 0`.
fn l_lower(nu: f64, q: Rational) -> Result<f64> {
    let r = eval_l_arg(nu, &LArg::PiSquaredTimes(q), Target::Rel(1e-10), false, 64)?;
    let lo = Float::with_val_round(64, &r.value - r.abs_error.as_float(), Round::Down).0;
    Ok(lo.to_f64_round(Round::Down))
}

#[derive(Clone, Debug)]
struct CTerm {
    value: BigComplex,
    l_err: Bound,
    phase_err: Bound,
    round_err: Bound,
    abs: Bound,
}

/// Contribution of one `c` to the double sum, at precision `prec`.
/// `l_budget` is the allowance for `kappa phi(c) |L error|` per polar term.
fn c_term(prep: &Prepared, lambda: &Rational, l24: i64, c: i64, prec: u32, l_budget: f64) -> Result<CTerm> {
    let k = prep.k;
    let u = Bound::unit_roundoff(prec);
    let two_pi = pi(prec) * 2u32;
    let two_pi_pow = Float::with_val(prec, (&two_pi).pow(2.0 - k));
    let c_pow = Float::with_val(prec, c).pow(k - 2.0);
    let rel_coef = u.mul_f64((2.0 - k).abs() + (1.0 - k).abs() + 10.0);
    let mut out = CTerm {
        value: BigComplex::zero(prec),
        l_err: Bound::zero(),
        phase_err: Bound::zero(),
        round_err: Bound::zero(),
        abs: Bound::zero(),
    };
    let c_sq = Integer::from(c) * c;
    for t in &prep.polar {
        let mut kappa = Float::with_val(prec, &t.abs_mu).pow(1.0 - k);
        kappa *= &two_pi_pow;
        kappa *= Float::with_val(prec, &t.a);
        kappa *= &c_pow;
        let kappa_up = Bound::from_float(&kappa).mul(&Bound::from_f64(1.0).add(&rel_coef));

        let big_a = kloosterman_scaled(prep.r, l24, t.mu24, c, 0, prec);
        let phi = Bound::from_f64(big_a.terms as f64);

        let q = Rational::from(lambda * &t.abs_mu) * 4u32 / c_sq.clone();
        let budget = l_budget / (kappa_up.to_f64() * big_a.terms as f64).max(f64::MIN_POSITIVE);
        let budget = budget.clamp(1e-300, 1e300);
        let l = eval_l_arg(prep.nu(), &LArg::PiSquaredTimes(q), Target::Abs(budget), false, prec)?;
        let lv = Float::with_val(prec, &l.value);
        let e_l = l.abs_error.add(&Bound::from_float(&lv).mul(&u));
        let l_up = Bound::from_float(&lv).add(&e_l);

        let scale = Float::with_val(prec, &kappa * &lv);
        let term = big_a.value.scale(&scale);

        let abs_term = kappa_up.mul(&phi.add(&big_a.abs_error)).mul(&l_up);
        out.l_err = out.l_err.add(&kappa_up.mul(&phi).mul(&e_l));
        out.phase_err = out.phase_err.add(&kappa_up.mul(&big_a.abs_error).mul(&l_up));
        out.round_err = out.round_err.add(&abs_term.mul(&rel_coef.add(&u.mul_u64(4))));
        out.abs = out.abs.add(&abs_term);
        out.value.add_assign(&term);
        out.round_err = out.round_err.add(&out.abs.mul(&u.mul_u64(2)));
    }
    Ok(out)
}

struct SumResult {
    main: Float,
    l_err: Bound,
    phase_err: Bound,
    round_err: Bound,
}

impl SumResult {
    fn numeric(&self) -> Bound {
        self.l_err.add(&self.phase_err).add(&self.round_err)
    }
}

fn circle_sum(prep: &Prepared, spec: &ModularSpec, n: i64, cutoff: i64, prec: u32, l_budget: f64, par: Parallelism) -> Result<SumResult> {
    let lambda = spec.lambda(n);
    let l24 = Rational::from(&lambda * 24u32)
        .numer()
        .to_i64()
        .ok_or_else(|| Error::InvalidInput("index too large".into()))?;
    let terms = par::map_range(par, 1, cutoff as u64 + 1, |c| c_term(prep, &lambda, l24, c as i64, prec, l_budget));
    let u = Bound::unit_roundoff(prec);
    let mut total = BigComplex::zero(prec);
    let mut res = SumResult { main: Float::new(prec), l_err: Bound::zero(), phase_err: Bound::zero(), round_err: Bound::zero() };
    let mut abs = Bound::zero();
    for t in terms {
        let t = t?;
        total.add_assign(&t.value);
        abs = abs.add(&t.abs);
        res.l_err = res.l_err.add(&t.l_err);
        res.phase_err = res.phase_err.add(&t.phase_err);
        res.round_err = res.round_err.add(&t.round_err).add(&abs.mul(&u.mul_u64(2)));
    }
    res.main = total.re;
    Ok(res)
}

/// Working precision for a sum whose terms are bounded in absolute value
/// by roughly `2^log2_abs` with `count` phases, to reach `target`.
fn sum_precision(log2_abs: f64, count: f64, target: f64, floor: u32) -> u32 {
    let bits = log2_abs + (4.0 * count * count + 100.0).log2() + (64.0 / target).log2() + 16.0;
    (bits.ceil().max(64.0) as u32).max(floor).min(MAX_PRECISION)
}

/// Rough `log2` of `(2 pi)^{2-k} W L_nu(4 pi^2 lambda delta)`.
fn log2_magnitude(prep: &Prepared, lambda: &Rational) -> f64 {
    let delta = prep.polar.iter().map(|t| t.abs_mu.to_f64()).fold(0.0, f64::max);
    let t = 4.0 * std::f64::consts::PI.powi(2) * lambda.to_f64().max(0.0) * delta;
    let w: f64 = prep.polar.iter().map(|p| p.a.to_f64().abs() * p.abs_mu.to_f64().powf(prep.nu())).sum();
    (2.0 - prep.k) * (2.0 * std::f64::consts::PI).log2() + w.log2() + 2.0 * t.sqrt() * std::f64::consts::LOG2_E + 4.0
}

/// Below `lambda = 0` the coefficient belongs to the polar part, which is
/// input data; it is returned exactly.
fn polar_budget(spec: &ModularSpec, n: i64) -> Result<ErrorBudget> {
    if n < 0 {
        return Err(Error::InvalidInput(format!("index {n} is negative")));
    }
    let lambda = spec.lambda(n);
    let a = spec
        .polar_part()
        .iter()
        .find(|(mu, _)| *mu == lambda)
        .map(|(_, a)| a.clone())
        .unwrap_or_default();
    let main = Float::with_val(magnitude_bits(&Float::with_val(64, &a)).max(64), &a);
    Ok(ErrorBudget::assemble(lambda, main, vec![("polar_part", Bound::zero())], 0, 64))
}

/// Tail bound over `c > cutoff` for negative weight.
fn negative_weight_tail(prep: &Prepared, lambda: &Rational, delta: &Rational, w: &Bound, cutoff: i64) -> Result<Bound> {
    let k = prep.k;
    let q = Rational::from(lambda * delta) * 4u32 / (Integer::from(cutoff + 1).square());
    let l = l_upper(prep.nu(), q, false)?;
    let c_k = Bound::from_f64(cutoff as f64).powf(k).div_f64(-k);
    Ok(two_pi_power(k).mul(w).mul(&l).mul(&c_k))
}

/// `a(lambda_min + n)` for negative weight, with `bound <= target_abs_err`
/// unless a fixed cutoff is requested.
pub fn coefficient_negative_weight(spec: &ModularSpec, n: i64, target_abs_err: f64, opts: &CircleOptions) -> Result<ErrorBudget> {
    let k = spec.weight_f64();
    if k >= 0.0 {
        return Err(Error::WeightNotNegative(spec.weight().to_string()));
    }
    if target_abs_err.is_nan() || target_abs_err <= 0.0 {
        return Err(Error::InvalidInput(format!("target {target_abs_err} must be positive")));
    }
    let lambda = spec.lambda(n);
    if lambda < 0 {
        return polar_budget(spec, n);
    }
    let dom = dominance_data(spec)?;
    let prep = Prepared::new(spec);
    let w = prep.weight_sum();
    let tail_goal = target_abs_err * 7.0 / 8.0;
    let tail_of = |c: i64| negative_weight_tail(&prep, &lambda, &dom.delta, &w, c);

    let cutoff = match opts.max_c {
        Some(c) if c >= 1 => c,
        Some(c) => return Err(Error::InvalidInput(format!("cutoff {c} must be >= 1"))),
        None => {
            let mut hi = 1i64;
            while !tail_of(hi)?.le_f64(tail_goal) {
                hi *= 2;
                if hi > 1 << 24 {
                    return Err(Error::TargetUnreachable {
                        target: target_abs_err,
                        reason: "series tail does not fall below the target".into(),
                    });
                }
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if tail_of(mid)?.le_f64(tail_goal) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        }
    };
    let tail = tail_of(cutoff)?;

    let numeric_goal = target_abs_err / 8.0;
    let count = (cutoff as f64) * prep.polar.len() as f64;
    let mut prec = sum_precision(log2_magnitude(&prep, &lambda), cutoff as f64, numeric_goal, opts.min_precision);
    loop {
        let l_budget = numeric_goal / 4.0 / count;
        let s = circle_sum(&prep, spec, n, cutoff, prec, l_budget, opts.parallelism)?;
        if s.numeric().le_f64(numeric_goal) || prec >= MAX_PRECISION {
            let budget = ErrorBudget::assemble(
                lambda,
                s.main,
                vec![
                    ("series_tail", tail),
                    ("l_evaluation", s.l_err),
                    ("phase_rounding", s.phase_err),
                    ("summation_rounding", s.round_err),
                ],
                cutoff,
                prec,
            );
            if opts.max_c.is_none() && !budget.bound.le_f64(target_abs_err) {
                return Err(Error::TargetUnreachable {
                    target: target_abs_err,
                    reason: format!("bound {} at precision cap", budget.bound),
                });
            }
            return Ok(budget);
        }
        prec = (prec * 2).min(MAX_PRECISION);
    }
}

/// The factor multiplying `pi M1` in the truncation bound at order `N`.
fn m1_factor(k: f64, order: i64) -> Result<Bound> {
    let nf = Float::with_val(128, order);
    if k > 2.0 {
        let base = Float::with_val(128, nf.square_ref()) * 2u32;
        Ok(Bound::from_computed(&base.pow(k - 1.0)).mul(&zeta_upper(k - 1.0)?))
    } else if k == 2.0 {
        let v = Float::with_val(128, nf.square_ref()) * 2u32 * (Float::with_val(128, nf.ln_ref()) + 1u32);
        Ok(Bound::from_computed(&v))
    } else {
        let v = nf.pow(k) * 4u32 / (2.0 - k);
        Ok(Bound::from_computed(&v))
    }
}

/// Upper bound for `e^{4 pi lambda / (N+1)^2}`.
fn exp_factor(lambda: &Rational, order: i64) -> Bound {
    let q = Rational::from(lambda * 4u32) / Integer::from(order + 1).square();
    let x = Float::with_val(128, &q) * pi(128);
    Bound::from_computed(&x.exp())
}

/// `a(lambda_min + n)` for weight `k >= 0` from the sum over `c <= N`.
/// `order = None` selects `N = floor(sqrt(lambda))`, which needs `lambda >= 1`.
pub fn coefficient_nonneg_weight(spec: &ModularSpec, n: i64, order: Option<i64>, opts: &CircleOptions) -> Result<ErrorBudget> {
    let k = spec.weight_f64();
    if k < 0.0 {
        return Err(Error::WeightNegative(spec.weight().to_string()));
    }
    if spec.is_cusp_finite() {
        return Err(Error::NoPolarPart);
    }
    let lambda = spec.lambda(n);
    if lambda < 0 {
        return polar_budget(spec, n);
    }
    let big_n = match order {
        Some(v) if v >= 1 => v,
        Some(v) => return Err(Error::InvalidInput(format!("order N = {v} must be >= 1"))),
        None => {
            if lambda < 1 {
                return Err(Error::InvalidInput(format!("automatic N needs lambda >= 1, got {lambda}")));
            }
            Rational::from(&lambda).floor().numer().to_f64().sqrt().floor() as i64
        }
    };
    let big_n = if order.is_none() {
        // correct a possible off-by-one of the float square root
        let mut v = big_n;
        while Integer::from(v + 1).square() <= lambda {
            v += 1;
        }
        while Integer::from(v).square() > lambda {
            v -= 1;
        }
        v
    } else {
        big_n
    };
    let m1 = constant_m1(spec)?;
    let m2 = constant_m2(spec)?;
    let e = exp_factor(&lambda, big_n);
    let pi_up = Bound::from_computed(&pi(128));
    let first = e.mul(&pi_up).mul(&m1).mul(&m1_factor(k, big_n)?);
    let second = e.mul(&m2).mul(&Bound::from_computed(&Float::with_val(128, big_n).pow(k)));

    let prep = Prepared::new(spec);
    let analytic = first.add(&second).to_f64();
    let numeric_goal = (analytic * 1e-12).max(1e-30);
    let count = big_n as f64 * prep.polar.len() as f64;
    let mut prec = sum_precision(log2_magnitude(&prep, &lambda), big_n as f64, numeric_goal, opts.min_precision);
    loop {
        let s = circle_sum(&prep, spec, n, big_n, prec, numeric_goal / 4.0 / count, opts.parallelism)?;
        if s.numeric().le_f64(numeric_goal) || prec >= MAX_PRECISION {
            return Ok(ErrorBudget::assemble(
                lambda,
                s.main,
                vec![
                    ("first_error_m1", first),
                    ("second_error_m2", second),
                    ("l_evaluation", s.l_err),
                    ("phase_rounding", s.phase_err),
                    ("summation_rounding", s.round_err),
                ],
                big_n,
                prec,
            ));
        }
        prec = (prec * 2).min(MAX_PRECISION);
    }
}

/// Dispatch on the sign of the weight: negative weight uses `target`,
/// non-negative weight uses `order` (or `N = floor(sqrt(lambda))`, and
/// `N = 1` below `lambda = 1`).
pub fn coefficient(spec: &ModularSpec, n: i64, target: f64, order: Option<i64>, opts: &CircleOptions) -> Result<ErrorBudget> {
    if spec.weight_f64() < 0.0 {
        coefficient_negative_weight(spec, n, target, opts)
    } else {
        let order = order.or_else(|| if spec.lambda(n) < 1 { Some(1) } else { None });
        coefficient_nonneg_weight(spec, n, order, opts)
    }
}

/// Components of the certified bound for `M1 = sup_{Im z >= 1} |f - P|`.
#[derive(Clone, Debug)]
pub struct M1Report {
    /// Largest `|f - P|` found on the grid `x + i`, `x = j/grid`.
    pub grid_max: f64,
    /// Derivative bound times half the grid spacing.
    pub lipschitz_pad: Bound,
    /// Bound for the terms beyond the truncation order.
    pub tail: Bound,
    /// Floating-point error of the grid evaluation.
    pub rounding: Bound,
    pub total: Bound,
    pub grid: usize,
    pub order: usize,
}

/// Upper bound for `sum g_n rho^n`, where `g_n >= |a(n)|` is a coefficient
/// majorant of `j^m eta^r / q^{lambda_min}`.
fn majorant_at(spec: &ModularSpec, rho: f64) -> f64 {
    let r = spec.eta_exponent();
    let m = spec.j_power() as f64;
    let zeta3 = 1.2020569031595942;
    let e4 = 1.0 + 240.0 * zeta3 * rho * (1.0 + 4.0 * rho + rho * rho) / (1.0 - rho).powi(4);
    let mut log_inv_euler = 0.0;
    for n in 1..=60 {
        log_inv_euler -= (1.0 - rho.powi(n)).ln();
    }
    log_inv_euler += 2.0 * rho.powi(61) / (1.0 - rho);
    let log_plus = rho / (1.0 - rho);
    let mut log_g = 3.0 * m * e4.ln() + 24.0 * m * log_inv_euler;
    if r < 0 {
        log_g += (-r) as f64 * log_inv_euler;
    } else {
        log_g += r as f64 * log_plus;
    }
    (log_g * (1.0 + 1e-12) + 1e-12).exp()
}

pub fn constant_m1(spec: &ModularSpec) -> Result<Bound> {
    Ok(constant_m1_detail(spec, 1024, 80)?.total)
}

/// `M1` from `grid` samples on `Im z = 1` and the expansion truncated at `order`.
///
/// `f - P` is `q^{lambda_1}` times a power series convergent on
/// `|q| <= e^{-2 pi}`, with `lambda_1 >= 0` the first non-polar exponent, so
/// its supremum over `Im z >= 1` is attained on `Im z = 1`.
pub fn constant_m1_detail(spec: &ModularSpec, grid: usize, order: usize) -> Result<M1Report> {
    if grid == 0 || order < 8 {
        return Err(Error::InvalidInput("grid >= 1 and order >= 8 required".into()));
    }
    let series = spec.oracle(order)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let lmin = spec.lambda_min().to_f64();
    let mut lams = Vec::new();
    let mut ws = Vec::new();
    for (n, a) in series.coeffs().iter().enumerate() {
        let lam = series.exponent(n);
        if lam < 0 || a.is_zero() {
            continue;
        }
        let lam = lam.to_f64();
        lams.push(lam);
        ws.push(a.to_f64() * (-two_pi * lam).exp());
    }
    let abs_sum: f64 = ws.iter().map(|w| w.abs()).sum();
    let deriv: f64 = ws.iter().zip(&lams).map(|(w, l)| two_pi * l * w.abs()).sum();
    let mut grid_max: f64 = 0.0;
    for j in 0..grid {
        let x = j as f64 / grid as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (w, l) in ws.iter().zip(&lams) {
            let (s, c) = (two_pi * l * x).sin_cos();
            re += w * c;
            im += w * s;
        }
        grid_max = grid_max.max(re.hypot(im));
    }
    let g = majorant_at(spec, (-std::f64::consts::PI).exp());
    let decay = Bound::from_f64((-std::f64::consts::PI * order as f64 - two_pi * lmin).exp()).mul_f64(1.0 + 1e-12);
    let tail = decay.mul_f64(g).mul_f64(1.0 + 1e-9);
    let tail_deriv = tail.mul_f64(two_pi * (lmin.abs() + order as f64));
    let lipschitz_pad = Bound::from_f64(deriv).mul_f64(1.0 + 1e-9).add(&tail_deriv).div_f64(2.0 * grid as f64);
    let eps = f64::EPSILON;
    let rounding = Bound::from_f64(abs_sum * eps * (two_pi * (order as f64 + lmin.abs()) + order as f64 + 20.0) * 2.0);
    let total = Bound::from_f64(grid_max).mul_f64(1.0 + 4.0 * eps).add(&lipschitz_pad).add(&tail).add(&rounding);
    Ok(M1Report { grid_max, lipschitz_pad, tail, rounding, total, grid, order })
}

/// `g_k(mu)` (upper bound); for `k < 0` the `0 <= k <= 2` branch is used.
pub fn g_k(k: f64, abs_mu: &Rational) -> Result<Bound> {
    let prec = 128;
    let m = Float::with_val(prec, abs_mu);
    let two_pi_mu = pi(prec) * 2u32 * &m;
    let e = Float::with_val(prec, two_pi_mu.exp_ref());
    let low = {
        let pi_mu = pi(prec) * &m;
        Bound::from_computed(&(Float::with_val(prec, &e) * (pi_mu.recip() + 4u32)))
    };
    if k < 2.0 {
        return Ok(low);
    }
    let gamma = gamma_value(k - 1.0, prec)?;
    let first = Float::with_val(prec, &e) * (Float::with_val(prec, two_pi_mu.recip_ref()) + 1u32);
    let second = gamma / Float::with_val(prec, two_pi_mu.pow(k - 1.0));
    let scale = Float::with_val(prec, 2).pow(k / 2.0);
    let high = Bound::from_computed(&(scale * (first + second)));
    // at k = 2 both formulas are valid bounds
    if k == 2.0 {
        Ok(if high < low { high } else { low })
    } else {
        Ok(high)
    }
}

/// `M2 = sum |a(mu)| g_k(mu)` over the polar part.
pub fn constant_m2(spec: &ModularSpec) -> Result<Bound> {
    let k = spec.weight_f64();
    let mut total = Bound::zero();
    for (mu, a) in spec.polar_part() {
        total = total.add(&Bound::from_integer(a).mul(&g_k(k, &mu.clone().abs())?));
    }
    Ok(total)
}

/// The single term `(2 pi)^{2-k} a(mu0) delta^{1-k} eps L_{1-k}(4 pi^2 lambda delta)`.
#[derive(Clone, Debug)]
pub struct MainTerm {
    pub value: Float,
    pub abs_error: Bound,
}

pub fn main_term(spec: &ModularSpec, n: i64) -> Result<MainTerm> {
    let dom = dominance_data(spec)?;
    let lambda = spec.lambda(n);
    if lambda < 0 {
        return Err(Error::InvalidInput(format!("lambda = {lambda} is negative")));
    }
    let k = spec.weight_f64();
    let q = Rational::from(&lambda * &dom.delta) * 4u32;
    let l = eval_l_arg(1.0 - k, &LArg::PiSquaredTimes(q), Target::Rel(1e-30), false, 128)?;
    let prec = l.precision.max(128);
    let mut v = (pi(prec) * 2u32).pow(2.0 - k);
    v *= Float::with_val(prec, &dom.delta).pow(1.0 - k);
    v *= Float::with_val(prec, &dom.a_mu0);
    v *= spec.epsilon();
    let abs_coef = Bound::from_float(&v).mul_f64(1.0 + 1e-20);
    let value = Float::with_val(prec, &v * &l.value);
    let abs_error = abs_coef
        .mul(&l.abs_error)
        .add(&Bound::from_float(&value).mul(&Bound::unit_roundoff(prec).mul_f64(4.0 * (3.0 - k).abs() + 16.0)));
    Ok(MainTerm { value, abs_error })
}

/// For negative weight: `(2 pi)^{2-k} zeta(1-k) M delta^{1-k} L_{1-k}(4 pi^2 lambda delta')`,
/// a bound for `|a(lambda) - main_term|`.
pub fn single_term_bound(spec: &ModularSpec, n: i64) -> Result<Bound> {
    let k = spec.weight_f64();
    if k >= 0.0 {
        return Err(Error::WeightNotNegative(spec.weight().to_string()));
    }
    let dom = dominance_data(spec)?;
    let lambda = spec.lambda(n);
    let q = Rational::from(&lambda * &dom.delta_prime) * 4u32;
    let l = l_upper(1.0 - k, q, false)?;
    let d = Bound::from_computed(&Float::with_val(128, &dom.delta).pow(1.0 - k));
    Ok(two_pi_power(k).mul(&zeta_upper(1.0 - k)?).mul(&Bound::from_integer(&dom.m)).mul(&d).mul(&l))
}

/// How a threshold was certified.
#[derive(Clone, Debug, PartialEq)]
pub enum Lambda0Method {
    /// `L(4 pi^2 lambda0 delta') / L(4 pi^2 lambda0 delta) < target`, with
    /// `target = |a(mu0)| / (zeta(1-k) M)`; the ratio is non-increasing.
    RatioThreshold { ratio: f64, target: f64 },
    /// The main term exceeds the truncation bound plus the majorant of all
    /// other terms; `checked_to` is the end of the exponent sweep after `lambda0`.
    BoundDominance { main_lower: f64, rest_upper: f64, checked_to: f64 },
}

/// A threshold `lambda0` with `a(lambda) != 0` for every `lambda >= lambda0` in
/// `lambda_min + Z`.
#[derive(Clone, Debug)]
pub struct Lambda0Certificate {
    pub lambda0: f64,
    /// Smallest `n` with `lambda_min + n >= lambda0`.
    pub first_index: i64,
    pub dominance: DominanceData,
    pub method: Lambda0Method,
}

fn first_index_at_or_above(spec: &ModularSpec, lambda0: f64) -> i64 {
    let lmin = spec.lambda_min().to_f64();
    let mut n = (lambda0 - lmin).floor() as i64 - 1;
    let target = Rational::from_f64(lambda0).expect("finite");
    while spec.lambda(n) < target {
        n += 1;
    }
    n.max(0)
}

pub fn effective_lambda0(spec: &ModularSpec) -> Result<Lambda0Certificate> {
    let dom = dominance_data(spec)?;
    let k = spec.weight_f64();
    if k < 0.0 {
        lambda0_negative(spec, dom)
    } else {
        lambda0_nonneg(spec, dom)
    }
}

fn lambda0_negative(spec: &ModularSpec, dom: DominanceData) -> Result<Lambda0Certificate> {
    let k = spec.weight_f64();
    let zeta = zeta_upper(1.0 - k)?;
    let ratio_target = Bound::from_integer(&dom.m).mul(&zeta);
    let target = (dom.a_mu0.to_f64().abs() / ratio_target.to_f64()) * (1.0 - 1e-12);
    // ratio_threshold works in s = 4 pi^2 lambda
    let s0 = ratio_threshold(1.0 - k, &dom.delta, &dom.delta_prime, target)?;
    let lambda0 = s0 / (4.0 * std::f64::consts::PI.powi(2)) * (1.0 + 1e-12);
    let ratio = crate::specfun::certified_ratio(1.0 - k, &dom.delta, &dom.delta_prime, s0)?;
    Ok(Lambda0Certificate {
        lambda0,
        first_index: first_index_at_or_above(spec, lambda0),
        dominance: dom,
        method: Lambda0Method::RatioThreshold { ratio, target },
    })
}

/// Increasing upper bound for `sum_{c <= floor(sqrt(lambda))} c^{k-1}`.
fn c_power_sum(k: f64, lambda: f64) -> f64 {
    let v = if k >= 1.0 {
        lambda.powf(k / 2.0)
    } else if k == 0.0 {
        1.0 + 0.5 * lambda.ln()
    } else {
        1.0 + (lambda.powf(k / 2.0) - 1.0) / k
    };
    v * (1.0 + 1e-12)
}

struct NonnegParts {
    m1: f64,
    m2: f64,
    zeta_k1: f64,
    w: f64,
    two_pi_pow: f64,
}

/// `(main lower bound, everything-else upper bound)` at real `lambda >= 1`.
fn dominance_at(spec: &ModularSpec, dom: &DominanceData, parts: &NonnegParts, lambda: f64) -> Result<(f64, f64)> {
    let k = spec.weight_f64();
    let lam = Rational::from_f64(lambda).expect("finite");
    let main_l = l_lower(1.0 - k, Rational::from(&lam * &dom.delta) * 4u32)?;
    let coef = parts.two_pi_pow * dom.a_mu0.to_f64().abs() * dom.delta.to_f64().powf(1.0 - k);
    let main_lower = coef * main_l * (1.0 - 1e-12);
    let cor1 = if k > 2.0 {
        std::f64::consts::PI * parts.m1 * (2.0 * lambda).powf(k - 1.0) * parts.zeta_k1
    } else if k == 2.0 {
        std::f64::consts::PI * parts.m1 * lambda * (2.0 + lambda.ln())
    } else {
        std::f64::consts::PI * parts.m1 * 4.0 / (2.0 - k) * lambda.powf(k / 2.0)
    } + parts.m2 * lambda.powf(k / 2.0);
    let cor1 = cor1 * (4.0 * std::f64::consts::PI).exp();
    let off = l_upper(1.0 - k, Rational::from(&lam * &dom.delta_prime) * 4u32, true)?.to_f64();
    let rest = (cor1 + parts.two_pi_pow * c_power_sum(k, lambda) * parts.w * off) * (1.0 + 1e-10);
    Ok((main_lower, rest))
}

fn lambda0_nonneg(spec: &ModularSpec, dom: DominanceData) -> Result<Lambda0Certificate> {
    let k = spec.weight_f64();
    let prep = Prepared::new(spec);
    let parts = NonnegParts {
        m1: constant_m1(spec)?.to_f64(),
        m2: constant_m2(spec)?.to_f64(),
        zeta_k1: if k > 2.0 { zeta_upper(k - 1.0)?.to_f64() } else { 0.0 },
        w: prep.weight_sum().to_f64(),
        two_pi_pow: two_pi_power(k).to_f64(),
    };
    let holds = |lambda: f64| -> Result<bool> {
        let (main, rest) = dominance_at(spec, &dom, &parts, lambda)?;
        Ok(main > rest)
    };
    let mut hi = 1.0;
    let mut lo = 1.0;
    let mut steps = 0;
    while !holds(hi)? {
        lo = hi;
        hi *= 2.0;
        steps += 1;
        if steps > 60 {
            return Err(Error::IterationLimit(steps));
        }
    }
    if hi > 1.0 {
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            if holds(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    let lambda0 = hi;
    // the search assumes the main term dominates monotonically; re-check
    // the inequality on every exponent of the lattice in a window above lambda0
    let first = first_index_at_or_above(spec, lambda0);
    let last = first + 200;
    for n in first..=last {
        let lam = spec.lambda(n).to_f64();
        if lam >= 1.0 && !holds(lam)? {
            return Err(Error::TargetUnreachable {
                target: 0.0,
                reason: format!("dominance fails at lambda = {lam} above the threshold {lambda0}"),
            });
        }
    }
    let (main_lower, rest_upper) = dominance_at(spec, &dom, &parts, lambda0)?;
    Ok(Lambda0Certificate {
        lambda0,
        first_index: first,
        dominance: dom,
        method: Lambda0Method::BoundDominance {
            main_lower,
            rest_upper,
            checked_to: spec.lambda(last).to_f64(),
        },
    })
}

/// Bits of `|x|`, used for diagnostics.
pub fn budget_magnitude_bits(b: &ErrorBudget) -> u32 {
    magnitude_bits(&b.main)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq() -> CircleOptions {
        CircleOptions { parallelism: Parallelism::Sequential, ..Default::default() }
    }

    #[test]
    fn dominance_examples() {
        let d = dominance_data(&ModularSpec::eta_power(-1).unwrap()).unwrap();
        assert_eq!(d.delta, Rational::from((1, 24)));
        assert_eq!(d.delta_prime, Rational::from((1, 96)));
        let d = dominance_data(&ModularSpec::eta_power(-25).unwrap()).unwrap();
        assert_eq!(d.delta, Rational::from((25, 24)));
        assert_eq!(d.delta_prime, Rational::from((25, 96)));
        assert_eq!(d.m, 26);
        let d = dominance_data(&ModularSpec::eta_power(-24).unwrap()).unwrap();
        assert_eq!((d.delta, d.delta_prime), (Rational::from(1), Rational::from((1, 4))));
        assert!(dominance_data(&ModularSpec::eta_power(3).unwrap()).is_err());
    }

    #[test]
    fn small_partitions() {
        let spec = ModularSpec::eta_power(-1).unwrap();
        for (n, p) in [(0, 1), (1, 1), (5, 7), (10, 42)] {
            let b = coefficient_negative_weight(&spec, n, 0.25, &seq()).unwrap();
            assert!(b.bound.le_f64(0.25));
            assert_eq!(b.snapped().unwrap(), p, "n = {n}");
            assert!(b.encloses(&Integer::from(p)));
        }
    }

    #[test]
    fn inverse_discriminant_constant_term() {
        let spec = ModularSpec::eta_power(-24).unwrap();
        let b = coefficient_negative_weight(&spec, 1, 0.25, &seq()).unwrap();
        assert_eq!(b.snapped().unwrap(), 24);
    }

    #[test]
    fn tail_is_monotone_in_cutoff() {
        let spec = ModularSpec::eta_power(-1).unwrap();
        let mut last = None;
        for c in [1, 2, 5, 10, 20, 40] {
            let opts = CircleOptions { max_c: Some(c), ..seq() };
            let b = coefficient_negative_weight(&spec, 30, 0.25, &opts).unwrap();
            let t = b.entry("series_tail").unwrap().to_f64();
            if let Some(prev) = last {
                assert!(t <= prev);
            }
            last = Some(t);
        }
    }

    #[test]
    fn j_small_coefficients() {
        let j = ModularSpec::j_invariant();
        let b = coefficient_nonneg_weight(&j, 2, None, &seq()).unwrap();
        assert_eq!(b.cutoff, 1);
        assert!(b.encloses(&Integer::from(196884)));
        let b = coefficient_nonneg_weight(&j, 1, Some(1), &seq()).unwrap();
        assert!(b.encloses(&Integer::from(744)));
        assert!(coefficient_nonneg_weight(&j, 1, None, &seq()).is_err());
    }

    #[test]
    fn m1_factor_at_weight_zero() {
        for n in [1, 3, 17] {
            assert!((m1_factor(0.0, n).unwrap().to_f64() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn m2_values() {
        let j = ModularSpec::j_invariant();
        let m2 = constant_m2(&j).unwrap().to_f64();
        let expect = (2.0 * std::f64::consts::PI).exp() * (4.0 + 1.0 / std::f64::consts::PI);
        assert!((m2 - expect).abs() < 1e-9 * expect);
        assert!((m2 - 2312.5).abs() < 0.5);
        let g3 = g_k(3.0, &Rational::from(1)).unwrap().to_f64();
        let tp = 2.0 * std::f64::consts::PI;
        let expect = 2f64.powf(1.5) * (tp.exp() * (1.0 + 1.0 / tp) + 1.0 / (tp * tp));
        assert!((g3 - expect).abs() < 1e-9 * expect);
    }

    #[test]
    fn m1_lower_and_upper_checks() {
        let j = ModularSpec::j_invariant();
        assert!(constant_m1(&j).unwrap().to_f64() >= 744.0);
        let p = ModularSpec::eta_power(-1).unwrap();
        let r = constant_m1_detail(&p, 1024, 80).unwrap();
        let majorant: f64 = crate::exactq::partition_numbers(79)
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, v)| v.to_f64() * (-2.0 * std::f64::consts::PI * (n as f64 - 1.0 / 24.0)).exp())
            .sum();
        let total = r.total.to_f64();
        assert!(total >= majorant * (1.0 - 1e-12));
        assert!(total <= majorant * 1.1, "total {total} majorant {majorant} {:?}", r);
        let fine = constant_m1_detail(&j, 2048, 80).unwrap();
        let coarse = constant_m1_detail(&j, 1024, 80).unwrap();
        assert!((fine.grid_max - coarse.grid_max).abs() <= coarse.lipschitz_pad.to_f64());
    }

    #[test]
    fn polar_indices_are_exact() {
        let spec = ModularSpec::eta_power(-25).unwrap();
        let b = coefficient_negative_weight(&spec, 1, 0.25, &seq()).unwrap();
        assert_eq!(b.snapped().unwrap(), 25);
        assert_eq!(b.bound.to_f64(), 0.0);
        assert!(main_term(&spec, 0).is_err());
    }

    #[test]
    fn lambda_zero_main_term_closed_form() {
        let spec = ModularSpec::eta_power(-24).unwrap();
        let m = main_term(&spec, 1).unwrap().value.to_f64();
        let tp = 2.0 * std::f64::consts::PI;
        let expect = tp.powi(14) / gamma_value(14.0, 64).unwrap().to_f64();
        assert!((m - expect).abs() < 1e-12 * expect);
    }
}
