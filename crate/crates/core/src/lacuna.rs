//! Density of non-zero coefficients and lacunarity verdicts.
//!
//! `f = sum a(lambda) q^lambda` is lacunary when
//! `#{lambda <= x : a(lambda) != 0} = o(x)`, and strongly non-lacunary when
//! some non-constant arithmetic progression of exponents carries only
//! non-zero coefficients. Finite data can only suggest the former; a
//! threshold `lambda0` from [`crate::circle::effective_lambda0`] together
//! with an exact check below it proves non-vanishing of every coefficient.

use std::fmt::Write as _;

use rug::Rational;

use crate::circle::Lambda0Certificate;
use crate::error::{Error, Result};
use crate::exactq::QSeries;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    ApparentlyLacunary,
    ApparentlyNonLacunary,
    /// Every coefficient from `lambda_min` on is non-zero: exactly below
    /// `lambda0`, by the certificate above it.
    CertifiedNonLacunary { lambda0: f64 },
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::ApparentlyLacunary => write!(f, "apparently-lacunary"),
            Verdict::ApparentlyNonLacunary => write!(f, "apparently-non-lacunary"),
            Verdict::CertifiedNonLacunary { lambda0 } => write!(f, "certified-non-lacunary(lambda0={lambda0})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct DensityReport {
    pub xs: Vec<Rational>,
    pub counts: Vec<u64>,
    /// `counts / x`, exact.
    pub densities: Vec<Rational>,
    pub verdict: Verdict,
}

/// Density below which the last cut counts as lacunary-looking.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

/// Exact counts `#{lambda_min + n <= x : a(n) != 0}` at each cut `x > 0`.
pub fn density_profile(series: &QSeries, cuts: &[Rational]) -> Result<DensityReport> {
    density_profile_with(series, cuts, DEFAULT_THRESHOLD)
}

pub fn density_profile_with(series: &QSeries, cuts: &[Rational], threshold: f64) -> Result<DensityReport> {
    let mut xs: Vec<Rational> = cuts.to_vec();
    xs.sort();
    xs.dedup();
    let mut counts = Vec::with_capacity(xs.len());
    let mut densities = Vec::with_capacity(xs.len());
    for x in &xs {
        if *x <= 0 {
            return Err(Error::InvalidInput(format!("cut {x} must be positive")));
        }
        // largest n with lambda_min + n <= x
        let span = Rational::from(x - series.offset()).floor();
        let last = span.numer().to_i64().unwrap_or(i64::MAX);
        if last >= series.order() as i64 {
            return Err(Error::CutBeyondTruncation { cut: x.to_string(), order: series.order() });
        }
        let count = if last < 0 {
            0
        } else {
            series.coeffs()[..=last as usize].iter().filter(|c| !c.is_zero()).count() as u64
        };
        counts.push(count);
        densities.push(Rational::from(count) / x.clone());
    }
    let verdict = heuristic_verdict(&densities, threshold);
    Ok(DensityReport { xs, counts, densities, verdict })
}

fn heuristic_verdict(densities: &[Rational], threshold: f64) -> Verdict {
    let Some(last) = densities.last() else {
        return Verdict::ApparentlyNonLacunary;
    };
    let decreasing = densities.windows(2).all(|w| w[1] <= w[0]);
    if last.to_f64() < threshold && decreasing {
        Verdict::ApparentlyLacunary
    } else {
        Verdict::ApparentlyNonLacunary
    }
}

impl DensityReport {
    /// RFC 4180 CSV with the verdict as a leading comment line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# verdict: {}", self.verdict);
        s.push_str("x,count,density\n");
        for ((x, c), d) in self.xs.iter().zip(&self.counts).zip(&self.densities) {
            let _ = writeln!(s, "{},{},{:.12}", x, c, d.to_f64());
        }
        s
    }

    /// Upgrades the verdict when `cert` holds and `series` shows every
    /// coefficient up to `lambda0` to be non-zero.
    pub fn certify(&mut self, series: &QSeries, cert: &Lambda0Certificate) -> bool {
        match exact_sweep(series, cert.first_index) {
            Some(true) => {
                self.verdict = Verdict::CertifiedNonLacunary { lambda0: cert.lambda0 };
                true
            }
            _ => false,
        }
    }
}

/// `Some(true)` when every coefficient with index `< upto` is non-zero,
/// `Some(false)` on a zero, `None` when the series is too short.
pub fn exact_sweep(series: &QSeries, upto: i64) -> Option<bool> {
    let upto = upto.max(0) as usize;
    if upto > series.order() {
        return None;
    }
    Some(series.coeffs()[..upto].iter().all(|c| !c.is_zero()))
}

/// First index with a zero coefficient, if any.
pub fn first_zero(series: &QSeries) -> Option<usize> {
    series.coeffs().iter().position(|c| c.is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionScan {
    pub residue: u64,
    pub modulus: u64,
    /// First index `n = residue + j * modulus` with `a(n) = 0`.
    pub first_miss: Option<u64>,
}

/// For every modulus `m <= max_modulus` and residue `0 <= r < m`, the first
/// index `n = r (mod m)` in range with a zero coefficient.
pub fn arithmetic_progression_scan(series: &QSeries, max_modulus: u64) -> Vec<ProgressionScan> {
    let mut out = Vec::new();
    let coeffs = series.coeffs();
    for m in 1..=max_modulus {
        for r in 0..m {
            let first_miss = (r as usize..coeffs.len())
                .step_by(m as usize)
                .find(|&n| coeffs[n].is_zero())
                .map(|n| n as u64);
            out.push(ProgressionScan { residue: r, modulus: m, first_miss });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactq::eta_quotient;

    fn cuts(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from(x)).collect()
    }

    #[test]
    fn partitions_have_full_density() {
        let s = eta_quotient(-1, 200).unwrap();
        let r = density_profile(&s, &cuts(&[10, 50, 100])).unwrap();
        for (x, d) in r.xs.iter().zip(&r.densities) {
            // lambda = n - 1/24 <= x for n <= x, i.e. x + 1 exponents
            assert_eq!(*d, (x + Rational::from(1)) / x.clone());
        }
        assert_eq!(r.verdict, Verdict::ApparentlyNonLacunary);
    }

    #[test]
    fn eta_is_sparse() {
        let s = eta_quotient(1, 20_001).unwrap();
        let r = density_profile(&s, &cuts(&[1000, 10_000, 20_000])).unwrap();
        for (x, d) in r.xs.iter().zip(&r.densities) {
            let scaled = d.to_f64() * x.to_f64().sqrt();
            assert!((1.0..=4.0).contains(&scaled), "{scaled}");
        }
        assert_eq!(r.verdict, Verdict::ApparentlyLacunary);
    }

    #[test]
    fn cut_beyond_truncation() {
        let s = eta_quotient(1, 10).unwrap();
        // the last retained exponent is 9 + 1/24, so every lambda <= 10 is known
        assert!(matches!(density_profile(&s, &cuts(&[11])), Err(Error::CutBeyondTruncation { .. })));
        assert!(density_profile(&s, &cuts(&[10])).is_ok());
    }

    #[test]
    fn csv_layout() {
        let s = eta_quotient(1, 100).unwrap();
        let r = density_profile(&s, &cuts(&[10, 50])).unwrap();
        let csv = r.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert!(lines[0].starts_with("# verdict: "));
        assert_eq!(lines[1], "x,count,density");
        assert_eq!(lines.len(), 4);
    }

    #[test]
    fn progression_scan() {
        let p = eta_quotient(-1, 100).unwrap();
        assert!(arithmetic_progression_scan(&p, 1)[0].first_miss.is_none());
        let e = eta_quotient(1, 100).unwrap();
        assert_eq!(arithmetic_progression_scan(&e, 1)[0].first_miss, Some(3));
        let scan = arithmetic_progression_scan(&e, 3);
        assert_eq!(scan.len(), 1 + 2 + 3);
    }
}
