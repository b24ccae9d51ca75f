//! Exact q-series with arbitrary-size integer coefficients.
//!
//! A [`QSeries`] stores `sum_{n < T} a(n) q^(offset + n)`. Arithmetic is
//! truncated at the smaller order of its operands. These series are the
//! oracle against which every analytically computed coefficient is checked.

use std::fmt::Write as _;
use std::io::{self, Write};

use rug::ops::Pow;
use rug::Assign;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    offset: Rational,
    coeffs: Vec<Integer>,
}

impl QSeries {
    pub fn new(offset: Rational, coeffs: Vec<Integer>) -> Self {
        QSeries { offset, coeffs }
    }

    /// The constant series 1 truncated at `order`.
    pub fn one(order: usize) -> Self {
        let mut coeffs = vec![Integer::new(); order];
        if order > 0 {
            coeffs[0] = Integer::from(1);
        }
        QSeries { offset: Rational::new(), coeffs }
    }

    pub fn offset(&self) -> &Rational {
        &self.offset
    }

    pub fn coeffs(&self) -> &[Integer] {
        &self.coeffs
    }

    /// Exclusive truncation bound on the index `n`.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `q^(offset + n)`; `None` beyond the truncation order.
    pub fn coeff(&self, n: usize) -> Option<&Integer> {
        self.coeffs.get(n)
    }

    /// The exponent `offset + n`.
    pub fn exponent(&self, n: usize) -> Rational {
        Rational::from(&self.offset + Integer::from(n))
    }

    pub fn truncated(&self, order: usize) -> QSeries {
        let order = order.min(self.order());
        QSeries { offset: self.offset.clone(), coeffs: self.coeffs[..order].to_vec() }
    }

    fn nonzero_indices(&self) -> Vec<usize> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, _)| i)
            .collect()
    }

    fn leading_unit(&self) -> Result<i32> {
        match self.coeffs.first() {
            Some(c) if *c == 1 => Ok(1),
            Some(c) if *c == -1 => Ok(-1),
            Some(c) => Err(Error::InvalidInput(format!(
                "leading coefficient {c} is not a unit"
            ))),
            None => Err(Error::InvalidInput("empty series".into())),
        }
    }

    /// Multiplicative inverse; the coefficient at `n = 0` must be +-1.
    pub fn inverse(&self) -> Result<QSeries> {
        let lead = self.leading_unit()?;
        let order = self.order();
        let support: Vec<usize> = self.nonzero_indices().into_iter().filter(|&k| k > 0).collect();
        let mut out = vec![Integer::new(); order];
        out[0] = Integer::from(lead);
        let mut acc = Integer::new();
        for n in 1..order {
            acc.assign(0);
            for &k in support.iter().take_while(|&&k| k <= n) {
                acc += &self.coeffs[k] * &out[n - k];
            }
            if lead == 1 {
                acc = -acc;
            }
            std::mem::swap(&mut out[n], &mut acc);
        }
        Ok(QSeries { offset: Rational::from(-&self.offset), coeffs: out })
    }

    /// `self^e`. Non-negative powers use the J.C.P. Miller recurrence,
    /// negative powers invert the positive power.
    pub fn pow(&self, e: i64) -> Result<QSeries> {
        if e < 0 {
            return self.pow(-e)?.inverse();
        }
        let lead = self.leading_unit()?;
        let order = self.order();
        let support: Vec<usize> = self.nonzero_indices().into_iter().filter(|&k| k > 0).collect();
        let mut out = vec![Integer::new(); order];
        if order == 0 {
            return Ok(QSeries { offset: Rational::from(&self.offset * e), coeffs: out });
        }
        out[0] = Integer::from(if lead == -1 && e % 2 == 1 { -1 } else { 1 });
        let mut acc = Integer::new();
        let mut prod = Integer::new();
        for n in 1..order {
            acc.assign(0);
            for &k in support.iter().take_while(|&&k| k <= n) {
                let w = (e + 1) * k as i64 - n as i64;
                if w == 0 {
                    continue;
                }
                prod.assign(&self.coeffs[k] * &out[n - k]);
                acc += &prod * w;
            }
            acc.div_exact_u_mut(n as u32);
            if lead == -1 {
                acc = -acc;
            }
            std::mem::swap(&mut out[n], &mut acc);
        }
        Ok(QSeries { offset: Rational::from(&self.offset * e), coeffs: out })
    }

    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        Ok(series_mul(self, &other.inverse()?))
    }

    /// Coefficient-wise difference of two series with equal offsets.
    pub fn sub(&self, other: &QSeries) -> Result<QSeries> {
        if self.offset != other.offset {
            return Err(Error::InvalidInput("offsets differ".into()));
        }
        let order = self.order().min(other.order());
        let coeffs = (0..order).map(|n| Integer::from(&self.coeffs[n] - &other.coeffs[n])).collect();
        Ok(QSeries { offset: self.offset.clone(), coeffs })
    }

    pub fn scale(&self, k: &Integer) -> QSeries {
        let coeffs = self.coeffs.iter().map(|c| Integer::from(c * k)).collect();
        QSeries { offset: self.offset.clone(), coeffs }
    }

    /// Line-oriented text: a header `offset p/q`, then `n<TAB>coefficient`.
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "offset {}/{}", self.offset.numer(), self.offset.denom())?;
        for (n, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{n}\t{c}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "offset {}/{}", self.offset.numer(), self.offset.denom());
        for (n, c) in self.coeffs.iter().enumerate() {
            let _ = writeln!(s, "{n}\t{c}");
        }
        s
    }
}

/// Cauchy product truncated at the smaller order.
pub fn series_mul(a: &QSeries, b: &QSeries) -> QSeries {
    let order = a.order().min(b.order());
    let mut out = vec![Integer::new(); order];
    let (sparse, dense) = if a.nonzero_indices().len() <= b.nonzero_indices().len() {
        (a, b)
    } else {
        (b, a)
    };
    for i in sparse.nonzero_indices().into_iter().take_while(|&i| i < order) {
        let ai = &sparse.coeffs[i];
        for j in 0..order - i {
            if !dense.coeffs[j].is_zero() {
                out[i + j] += ai * &dense.coeffs[j];
            }
        }
    }
    QSeries { offset: Rational::from(&a.offset + &b.offset), coeffs: out }
}

/// `prod_{n >= 1} (1 - q^n)` by Euler's pentagonal number theorem.
pub fn pentagonal_product(order: usize) -> QSeries {
    let mut coeffs = vec![Integer::new(); order];
    if order > 0 {
        coeffs[0] = Integer::from(1);
    }
    for k in 1.. {
        let sign = if k % 2 == 1 { -1 } else { 1 };
        let p1 = k * (3 * k - 1) / 2;
        let p2 = k * (3 * k + 1) / 2;
        if p1 >= order {
            break;
        }
        coeffs[p1] = Integer::from(sign);
        if p2 < order {
            coeffs[p2] = Integer::from(sign);
        }
    }
    QSeries { offset: Rational::new(), coeffs }
}

/// `eta^r = q^(r/24) prod (1 - q^n)^r`, truncated at `order`.
pub fn eta_quotient(r: i64, order: usize) -> Result<QSeries> {
    if order == 0 {
        return Err(Error::InvalidInput("truncation order must be >= 1".into()));
    }
    let base = pentagonal_product(order);
    let mut s = match r {
        0 => QSeries::one(order),
        1 => base,
        r if r > 0 => base.pow(r)?,
        r => base.pow(-r)?.inverse()?,
    };
    s.offset = Rational::from((r, 24));
    Ok(s)
}

/// Partition numbers `p(0..=n_max)` by the pentagonal recurrence.
pub fn partition_numbers(n_max: usize) -> Vec<Integer> {
    let mut p = vec![Integer::new(); n_max + 1];
    p[0] = Integer::from(1);
    for n in 1..=n_max {
        let mut acc = Integer::new();
        for k in 1.. {
            let g1 = k * (3 * k - 1) / 2;
            if g1 > n {
                break;
            }
            let g2 = k * (3 * k + 1) / 2;
            let add = k % 2 == 1;
            if add {
                acc += &p[n - g1];
            } else {
                acc -= &p[n - g1];
            }
            if g2 <= n {
                if add {
                    acc += &p[n - g2];
                } else {
                    acc -= &p[n - g2];
                }
            }
        }
        p[n] = acc;
    }
    p
}

/// Exact `p(n)`.
pub fn partition_oracle(n: u64) -> Integer {
    partition_numbers(n as usize).pop().expect("non-empty table")
}

fn divisor_power_sums(order: usize, power: u32) -> Vec<Integer> {
    let mut s = vec![Integer::new(); order];
    for d in 1..order {
        let dp = Integer::from(d).pow(power);
        let mut m = d;
        while m < order {
            s[m] += &dp;
            m += d;
        }
    }
    s
}

/// `E4 = 1 + 240 sum sigma_3(n) q^n`.
pub fn eisenstein_e4(order: usize) -> QSeries {
    let mut c = divisor_power_sums(order, 3);
    for x in c.iter_mut() {
        *x *= 240;
    }
    if order > 0 {
        c[0] = Integer::from(1);
    }
    QSeries { offset: Rational::new(), coeffs: c }
}

/// `E6 = 1 - 504 sum sigma_5(n) q^n`.
pub fn eisenstein_e6(order: usize) -> QSeries {
    let mut c = divisor_power_sums(order, 5);
    for x in c.iter_mut() {
        *x *= -504;
    }
    if order > 0 {
        c[0] = Integer::from(1);
    }
    QSeries { offset: Rational::new(), coeffs: c }
}

/// `Delta = eta^24`, offset 1.
pub fn discriminant(order: usize) -> Result<QSeries> {
    eta_quotient(24, order)
}

/// `j = E4^3 / Delta`, offset -1.
pub fn j_expansion(order: usize) -> Result<QSeries> {
    if order < 2 {
        return Err(Error::InvalidInput("j expansion needs order >= 2".into()));
    }
    let e4 = eisenstein_e4(order);
    let e4_cubed = series_mul(&series_mul(&e4, &e4), &e4);
    Ok(series_mul(&e4_cubed, &eta_quotient(24, order)?.inverse()?))
}

/// `j^m * eta^r`, offset `r/24 - m`.
pub fn eta_j_product(r: i64, j_power: u32, order: usize) -> Result<QSeries> {
    let mut s = eta_quotient(r, order)?;
    if j_power > 0 {
        let j = j_expansion(order.max(2))?.truncated(order);
        for _ in 0..j_power {
            s = series_mul(&s, &j);
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    /// Brute-force count of partitions of `n` into parts `<= max`.
    fn count_partitions(n: u64, max: u64) -> u64 {
        if n == 0 {
            return 1;
        }
        (1..=max.min(n)).map(|part| count_partitions(n - part, part)).sum()
    }

    /// Expands the finite product `prod_{k < order} (1 - q^k)^e` term by term.
    fn finite_product(order: usize, e: u32) -> Vec<i64> {
        let mut c = vec![0i64; order];
        c[0] = 1;
        for k in 1..order {
            for _ in 0..e {
                for n in (k..order).rev() {
                    c[n] -= c[n - k];
                }
            }
        }
        c
    }

    #[test]
    fn geometric_series_identity() {
        let one_minus_q = QSeries::new(Rational::new(), ints(&[1, -1, 0, 0, 0, 0, 0, 0]));
        let geo = QSeries::new(Rational::new(), ints(&[1; 8]));
        assert_eq!(series_mul(&one_minus_q, &geo), QSeries::one(8));
        assert_eq!(one_minus_q.inverse().unwrap(), geo);
    }

    #[test]
    fn identity_element() {
        let a = eta_quotient(5, 20).unwrap();
        let one = QSeries::one(20);
        assert_eq!(series_mul(&a, &one), a);
    }

    #[test]
    fn eta_squared_matches_finite_product() {
        let eta = QSeries::new(Rational::new(), pentagonal_product(50).coeffs);
        let sq = series_mul(&eta, &eta);
        assert_eq!(sq.coeffs(), &ints(&finite_product(50, 2))[..]);
        assert_eq!(eta.pow(2).unwrap(), sq);
    }

    #[test]
    fn eta_first_coefficients() {
        let eta = eta_quotient(1, 8).unwrap();
        assert_eq!(*eta.offset(), Rational::from((1, 24)));
        assert_eq!(eta.coeffs(), &ints(&[1, -1, -1, 0, 0, 1, 0, 1])[..]);
        assert_eq!(eta.coeffs(), &ints(&finite_product(8, 1))[..]);
    }

    #[test]
    fn eta_inverse_gives_partitions() {
        let inv = eta_quotient(-1, 40).unwrap();
        assert_eq!(*inv.coeff(5).unwrap(), 7);
        for n in 0..25 {
            assert_eq!(*inv.coeff(n).unwrap(), count_partitions(n as u64, n as u64));
        }
    }

    #[test]
    fn tau_from_eta_24() {
        let delta = eta_quotient(24, 12).unwrap();
        let direct = finite_product(12, 24);
        assert_eq!(delta.coeffs(), &ints(&direct)[..]);
        assert_eq!(*delta.coeff(1).unwrap(), -24);
        // index n holds tau(n + 1)
        assert_eq!(*delta.coeff(9).unwrap(), -115920);
        assert_eq!(*delta.coeff(10).unwrap(), 534612);
    }

    #[test]
    fn partition_values() {
        assert_eq!(partition_oracle(0), 1);
        assert_eq!(partition_oracle(5), 7);
        for n in 0..=30 {
            assert_eq!(partition_oracle(n), count_partitions(n, n));
        }
        assert_eq!(partition_oracle(100), 190569292u64);
        assert_eq!(
            partition_oracle(1000).to_string(),
            "24061467864032622473692149727991"
        );
    }

    #[test]
    fn partitions_agree_with_eta_inverse() {
        let inv = eta_quotient(-1, 300).unwrap();
        let table = partition_numbers(299);
        assert_eq!(inv.coeffs(), &table[..]);
    }

    #[test]
    fn j_coefficients() {
        let j = j_expansion(5).unwrap();
        assert_eq!(*j.offset(), -1);
        assert_eq!(*j.coeff(0).unwrap(), 1);
        assert_eq!(*j.coeff(1).unwrap(), 744);
        assert_eq!(*j.coeff(2).unwrap(), 196884);
        assert_eq!(*j.coeff(3).unwrap(), 21493760);
        assert_eq!(*j.coeff(4).unwrap(), 864299970);
    }

    #[test]
    fn e4_cubed_minus_e6_squared_is_1728_delta() {
        let t = 60;
        let e4 = eisenstein_e4(t);
        let e6 = eisenstein_e6(t);
        let lhs = series_mul(&series_mul(&e4, &e4), &e4).sub(&series_mul(&e6, &e6)).unwrap();
        let delta = discriminant(t - 1).unwrap();
        assert!(lhs.coeff(0).unwrap().is_zero());
        for n in 1..t {
            assert_eq!(*lhs.coeff(n).unwrap(), Integer::from(delta.coeff(n - 1).unwrap() * 1728));
        }
    }

    #[test]
    fn eta_inverse_pairs_cancel() {
        for r in -26..=26 {
            let a = eta_quotient(r, 40).unwrap();
            let b = eta_quotient(-r, 40).unwrap();
            let p = series_mul(&a, &b);
            assert_eq!(p, QSeries::one(40), "r = {r}");
        }
    }

    #[test]
    fn non_unit_division_is_rejected() {
        let s = QSeries::new(Rational::new(), ints(&[2, 1]));
        assert!(s.inverse().is_err());
    }

    #[test]
    fn text_emission() {
        let s = eta_quotient(-1, 3).unwrap();
        assert_eq!(s.to_text(), "offset -1/24\n0\t1\n1\t1\n2\t2\n");
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), s.to_text());
    }

    fn small_series() -> impl Strategy<Value = QSeries> {
        (prop::collection::vec(-50i64..50, 12), -30i64..30).prop_map(|(c, off)| {
            QSeries::new(Rational::from((off, 24)), c.into_iter().map(Integer::from).collect())
        })
    }

    proptest! {
        #[test]
        fn mul_is_commutative_and_associative(a in small_series(), b in small_series(), c in small_series()) {
            prop_assert_eq!(series_mul(&a, &b), series_mul(&b, &a));
            prop_assert_eq!(series_mul(&series_mul(&a, &b), &c), series_mul(&a, &series_mul(&b, &c)));
        }

        #[test]
        fn pow_agrees_with_repeated_mul(r in 1i64..6, e in 0i64..5) {
            let base = eta_quotient(r, 25).unwrap();
            let mut acc = QSeries::one(25);
            for _ in 0..e { acc = series_mul(&acc, &base); }
            let p = base.pow(e).unwrap();
            prop_assert_eq!(p.coeffs(), acc.coeffs());
        }
    }
}
