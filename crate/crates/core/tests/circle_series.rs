use proptest::prelude::*;
use rademacher::circle::{coefficient, single_term_bound, Lambda0Method};
use rademacher::exactq::partition_numbers;
use rademacher::{
    coefficient_negative_weight, coefficient_nonneg_weight, effective_lambda0, eta_quotient, j_expansion,
    main_term, CircleOptions, ModularSpec, Parallelism,
};
use rug::{Float, Integer};

fn seq() -> CircleOptions {
    CircleOptions { parallelism: Parallelism::Sequential, ..CircleOptions::default() }
}

#[test]
fn partitions_snap_to_oracle() {
    let spec = ModularSpec::eta_power(-1).unwrap();
    let p = partition_numbers(300);
    for n in (0..=300).step_by(7).chain([299, 300]) {
        let b = coefficient_negative_weight(&spec, n as i64, 0.25, &CircleOptions::default()).unwrap();
        assert_eq!(b.snapped().as_ref(), Some(&p[n]), "n = {n}");
        assert!(b.bound.le_f64(0.25));
    }
}

#[test]
fn enclosure_for_eta_powers() {
    for r in [-2i64, -3, -24, -25] {
        let spec = ModularSpec::eta_power(r).unwrap();
        let oracle = eta_quotient(r, 61).unwrap();
        for n in 0..=60 {
            let b = coefficient_negative_weight(&spec, n, 0.25, &CircleOptions::default()).unwrap();
            assert!(b.encloses(oracle.coeff(n as usize).unwrap()), "r = {r}, n = {n}");
        }
    }
}

#[test]
fn sequential_and_parallel_agree_bitwise() {
    let spec = ModularSpec::eta_power(-25).unwrap();
    for n in [3, 40, 150] {
        let a = coefficient_negative_weight(&spec, n, 0.25, &seq()).unwrap();
        let b = coefficient_negative_weight(&spec, n, 0.25, &CircleOptions::default()).unwrap();
        assert_eq!(a.main, b.main);
        assert_eq!(a.bound, b.bound);
        assert_eq!(a.cutoff, b.cutoff);
    }
}

#[test]
fn j_coefficients_enclosed() {
    let j = ModularSpec::j_invariant();
    let oracle = j_expansion(60).unwrap();
    for n in 2..=51i64 {
        // lambda = n - 1, truncation N = floor(sqrt(lambda))
        let b = coefficient_nonneg_weight(&j, n, None, &CircleOptions::default()).unwrap();
        let exact = oracle.coeff(n as usize).unwrap();
        assert!(b.encloses(exact), "n = {n}: main {} bound {}", b.main_f64(), b.bound);
        if n >= 21 {
            let rel = (b.main_f64() / exact.to_f64() - 1.0).abs();
            assert!(rel <= 1e-6, "n = {n}: {rel}");
        }
    }
}

#[test]
fn j_constant_term_enclosed_with_one_term() {
    let j = ModularSpec::j_invariant();
    let b = coefficient(&j, 1, 0.25, Some(1), &seq()).unwrap();
    assert!(b.encloses(&Integer::from(744)));
    assert_eq!(b.cutoff, 1);
}

#[test]
fn single_term_inequality_for_partitions() {
    let spec = ModularSpec::eta_power(-1).unwrap();
    let p = partition_numbers(1000);
    for i in 0..20 {
        let n = 1 + i * 50;
        let m = main_term(&spec, n as i64).unwrap();
        let diff = Float::with_val(m.value.prec(), &m.value - &p[n]).abs();
        let bound = single_term_bound(&spec, n as i64).unwrap();
        let slack = m.abs_error.as_float().clone();
        assert!(diff <= Float::with_val(128, bound.as_float() + &slack), "n = {n}");
    }
}

fn relative_gap(exact: &Integer, spec: &ModularSpec, n: i64) -> f64 {
    let m = main_term(spec, n).unwrap().value;
    let prec = m.prec();
    (Float::with_val(prec, exact) / m - 1u32).abs().to_f64()
}

#[test]
fn equivalence_trend() {
    let eta = ModularSpec::eta_power(-1).unwrap();
    let p = partition_numbers(400);
    let g: Vec<f64> = [25usize, 100, 400].iter().map(|&n| relative_gap(&p[n], &eta, n as i64)).collect();
    assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    assert!(g[1] < 1e-2);
    let j = ModularSpec::j_invariant();
    let oracle = j_expansion(402).unwrap();
    // lambda = 25, 100, 400
    let g: Vec<f64> =
        [26usize, 101, 401].iter().map(|&n| relative_gap(oracle.coeff(n).unwrap(), &j, n as i64)).collect();
    assert!(g[0] > g[1] && g[1] > g[2], "{g:?}");
    assert!(g[1] < 1e-2);
}

#[test]
fn main_term_accuracy_examples() {
    let eta = ModularSpec::eta_power(-1).unwrap();
    let r = 1.0 - relative_gap(&partition_numbers(100)[100], &eta, 100);
    assert!((r - 1.0).abs() <= 1e-3);
    let j = ModularSpec::j_invariant();
    let oracle = j_expansion(12).unwrap();
    assert!(relative_gap(oracle.coeff(11).unwrap(), &j, 11) <= 1e-3);
}

#[test]
fn thresholds_and_sweeps() {
    for spec in [ModularSpec::eta_power(-1).unwrap(), ModularSpec::eta_power(-24).unwrap(), ModularSpec::j_invariant()] {
        let cert = effective_lambda0(&spec).unwrap();
        assert!(cert.lambda0.is_finite() && cert.lambda0 > 0.0);
        let upto = cert.lambda0.max(200.0);
        let last = (upto - spec.lambda_min().to_f64()).floor() as usize;
        let oracle = spec.oracle(last + 1).unwrap();
        for n in 0..=last {
            if spec.lambda(n as i64) >= 0 {
                assert!(!oracle.coeff(n).unwrap().is_zero(), "{} n = {n}", spec.describe());
            }
        }
        if let Lambda0Method::RatioThreshold { ratio, target } = cert.method {
            assert!(ratio < target);
        }
    }
    let eta = effective_lambda0(&ModularSpec::eta_power(-1).unwrap()).unwrap();
    match eta.method {
        Lambda0Method::RatioThreshold { target, .. } => assert!((target - 1.0 / 2.612375348685488).abs() < 1e-9),
        other => panic!("unexpected method {other:?}"),
    }
    assert!(effective_lambda0(&ModularSpec::eta_power(1).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tail_never_grows_with_cutoff(n in 0i64..400, c in 1i64..30) {
        let spec = ModularSpec::eta_power(-1).unwrap();
        let at = |cut: i64| {
            let opts = CircleOptions { max_c: Some(cut), ..seq() };
            coefficient_negative_weight(&spec, n, 1e300, &opts).unwrap().entry("series_tail").unwrap().clone()
        };
        prop_assert!(at(c + 1) <= at(c));
    }

    #[test]
    fn snapped_values_are_oracle_values(r in prop::sample::select(vec![-1i64, -2, -4, -8, -12, -26]), n in 0i64..80) {
        let spec = ModularSpec::eta_power(r).unwrap();
        let b = coefficient_negative_weight(&spec, n, 0.25, &seq()).unwrap();
        let oracle = eta_quotient(r, 81).unwrap();
        let snapped = b.snapped();
        prop_assert_eq!(snapped.as_ref(), oracle.coeff(n as usize));
    }
}
