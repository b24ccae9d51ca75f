//! Farey sequences and Ford-circle geometry of the integration path, in exact
//! rational arithmetic.
//!
//! For `x = a/c` and an order `N >= c` the path `c_N` crosses the Ford circle
//! `C_x` along an arc from `R` (tangency with the predecessor's circle) to
//! `S` (tangency with the successor's circle). [`FordArcData`] records that
//! arc together with the matrix `gamma` mapping `i + R` onto `C_x`.

use std::fmt::Write as _;
use std::path::Path;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// An element of SL2(Z).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sl2z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2z {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        if a as i128 * d as i128 - b as i128 * c as i128 != 1 {
            return Err(Error::InvalidInput(format!("det of ({a} {b}; {c} {d}) is not 1")));
        }
        Ok(Sl2z { a, b, c, d })
    }

    pub const IDENTITY: Sl2z = Sl2z { a: 1, b: 0, c: 0, d: 1 };
    pub const S: Sl2z = Sl2z { a: 0, b: -1, c: 1, d: 0 };
    pub const T: Sl2z = Sl2z { a: 1, b: 1, c: 0, d: 1 };

    pub fn mul(&self, o: &Sl2z) -> Sl2z {
        Sl2z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn inverse(&self) -> Sl2z {
        Sl2z { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn neg(&self) -> Sl2z {
        Sl2z { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }

    /// The canonical matrix with first column `(a, c)`, `c > 0`:
    /// `d` is the inverse of `a` modulo `c` in `[0, c)` and `b = (ad - 1)/c`.
    pub fn canonical(x: &FareyFraction) -> Sl2z {
        let d = if x.c == 1 { 0 } else { mod_inverse(x.a, x.c) };
        let b = (x.a as i128 * d as i128 - 1) / x.c as i128;
        Sl2z { a: x.a, b: b as i64, c: x.c, d }
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Inverse of `a` modulo `m` in `[0, m)`; requires `gcd(a, m) = 1`.
pub fn mod_inverse(a: i64, m: i64) -> i64 {
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    debug_assert_eq!(g, 1);
    x.rem_euclid(m)
}

/// Irreducible fraction `a/c` with `c >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FareyFraction {
    pub a: i64,
    pub c: i64,
}

impl FareyFraction {
    pub fn new(a: i64, c: i64) -> Result<Self> {
        if c < 1 {
            return Err(Error::InvalidInput(format!("denominator {c} < 1")));
        }
        if gcd(a, c) != 1 {
            return Err(Error::NotCoprime(a, c));
        }
        Ok(FareyFraction { a, c })
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from((self.a, self.c))
    }

    pub fn shifted(&self, t: i64) -> FareyFraction {
        FareyFraction { a: self.a + t * self.c, c: self.c }
    }
}

impl std::fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.a, self.c)
    }
}

/// Farey sequence of order `n` in `[0, 1]`, ascending.
pub fn farey_sequence(n: i64) -> Vec<FareyFraction> {
    assert!(n >= 1, "Farey order must be >= 1");
    let mut out = vec![FareyFraction { a: 0, c: 1 }];
    let (mut a, mut b, mut c, mut d) = (0i64, 1i64, 1i64, n);
    while c <= n {
        let k = (n + b) / d;
        (a, b, c, d) = (c, d, k * c - a, k * d - b);
        out.push(FareyFraction { a, c: b });
    }
    out
}

/// A complex number with exact rational parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexRational {
    pub re: Rational,
    pub im: Rational,
}

impl ComplexRational {
    /// `(p + iq) / (r + is)` for integers.
    fn quotient(p: i64, q: i64, r: i64, s: i64) -> ComplexRational {
        let den = Integer::from(r) * r + Integer::from(s) * s;
        let re = Integer::from(p) * r + Integer::from(q) * s;
        let im = Integer::from(q) * r - Integer::from(p) * s;
        ComplexRational {
            re: Rational::from((re, den.clone())),
            im: Rational::from((im, den)),
        }
    }

    pub fn sub_real(&self, x: &Rational) -> ComplexRational {
        ComplexRational { re: Rational::from(&self.re - x), im: self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FordArcData {
    pub x: FareyFraction,
    pub order: i64,
    pub predecessor: FareyFraction,
    pub successor: FareyFraction,
    pub gamma: Sl2z,
    pub n: i64,
    pub m: i64,
    pub r: ComplexRational,
    pub s: ComplexRational,
}

/// Arc data for `x` at order `order` with the canonical matrix.
pub fn ford_arc_data(x: FareyFraction, order: i64) -> FordArcData {
    ford_arc_data_with(x, order, Sl2z::canonical(&x))
}

/// Arc data computed from a caller-supplied `gamma` with first column `(a, c)`.
pub fn ford_arc_data_with(x: FareyFraction, order: i64, gamma: Sl2z) -> FordArcData {
    assert!(x.c <= order, "denominator {} exceeds order {}", x.c, order);
    assert!(gamma.a == x.a && gamma.c == x.c, "gamma does not map infinity to x");
    let Sl2z { a, b, c, d } = gamma;
    let n = (order - d).div_euclid(c);
    let m = (order + d).div_euclid(c);
    let (a1, c1) = (b + n * a, d + n * c);
    let (a2, c2) = (-b + m * a, -d + m * c);
    FordArcData {
        x,
        order,
        predecessor: FareyFraction { a: a1, c: c1 },
        successor: FareyFraction { a: a2, c: c2 },
        gamma,
        n,
        m,
        r: ComplexRational::quotient(a1, a, c1, c),
        s: ComplexRational::quotient(a2, -a, c2, -c),
    }
}

/// The corollary bounds: `2/(cN)^2` for the squared distance of `R`, `S`
/// to `x`, and `N^2/c^2` for the radius of the image of the chord `[R, S]`
/// under `gamma^-1`.
pub fn chord_bounds(d: &FordArcData) -> (Rational, Rational) {
    let cn = Integer::from(d.x.c) * d.order;
    let dist = Rational::from((Integer::from(2), cn.square()));
    let radius = Rational::from((Integer::from(d.order).square(), Integer::from(d.x.c).square()));
    (dist, radius)
}

/// Squared distance from `x` to the line through `R` and `S`.
pub fn chord_line_distance_sqr(d: &FordArcData) -> Rational {
    let x = d.x.to_rational();
    let (rx, ry) = (Rational::from(&d.r.re - &x), d.r.im.clone());
    let (dx, dy) = (Rational::from(&d.s.re - &d.r.re), Rational::from(&d.s.im - &d.r.im));
    let cross = Rational::from(&rx * &dy) - Rational::from(&ry * &dx);
    let len = Rational::from(&dx * &dx) + Rational::from(&dy * &dy);
    cross.square() / len
}

/// Squared radius `1/(4 c^4 delta^2)` of the circle containing
/// `gamma^-1 [R, S]`, where `delta` is the distance from `x` to line `RS`.
pub fn chord_image_radius_sqr(d: &FordArcData) -> Rational {
    let c4 = Integer::from(d.x.c).pow(4);
    (chord_line_distance_sqr(d) * c4 * 4u32).recip()
}

/// Checks every identity and inequality for one arc exactly; returns the
/// list of violated statements (empty on success).
pub fn check_arc(d: &FordArcData) -> Vec<String> {
    let mut bad = Vec::new();
    let big_n = d.order;
    let (a, c) = (d.x.a, d.x.c);
    let (a1, c1) = (d.predecessor.a, d.predecessor.c);
    let (a2, c2) = (d.successor.a, d.successor.c);
    let g = d.gamma;
    if g.a as i128 * g.d as i128 - g.b as i128 * g.c as i128 != 1 || g.c <= 0 {
        bad.push("gamma not in SL2(Z) with c > 0".into());
    }
    if !(1..=big_n).contains(&c1) || !(1..=big_n).contains(&c2) {
        bad.push("neighbour denominator outside [1, N]".into());
    }
    if c + c1 < big_n + 1 || c + c2 < big_n + 1 {
        bad.push("c + c' or c + c'' below N + 1".into());
    }
    if a * c1 - a1 * c != 1 || a2 * c - a * c2 != 1 {
        bad.push("neighbour determinant not 1".into());
    }
    let re_r = Rational::from((Integer::from(a) * c + Integer::from(a1) * c1, Integer::from(c) * c + Integer::from(c1) * c1));
    let im_r = Rational::from((1, Integer::from(c) * c + Integer::from(c1) * c1));
    let re_s = Rational::from((Integer::from(a) * c + Integer::from(a2) * c2, Integer::from(c) * c + Integer::from(c2) * c2));
    let im_s = Rational::from((1, Integer::from(c) * c + Integer::from(c2) * c2));
    if d.r.re != re_r || d.r.im != im_r {
        bad.push("R differs from the barycentric formula".into());
    }
    if d.s.re != re_s || d.s.im != im_s {
        bad.push("S differs from the barycentric formula".into());
    }
    let lo = Rational::from((1, 2 * big_n * big_n));
    let hi = Rational::from((2, (big_n + 1) * (big_n + 1)));
    for (name, im) in [("R", &d.r.im), ("S", &d.s.im)] {
        if *im < lo || *im > hi {
            bad.push(format!("Im {name} outside [1/(2N^2), 2/(N+1)^2]"));
        }
    }
    let x = d.x.to_rational();
    let (dist_bound, radius_bound) = chord_bounds(d);
    let dr = d.r.sub_real(&x).norm_sqr();
    let ds = d.s.sub_real(&x).norm_sqr();
    if dr != Rational::from((1, Integer::from(c) * c * (Integer::from(c) * c + Integer::from(c1) * c1))) {
        bad.push("|R - x|^2 differs from 1/(c^2(c^2 + c'^2))".into());
    }
    if dr > dist_bound || ds > dist_bound {
        bad.push("distance bound violated".into());
    }
    if chord_image_radius_sqr(d) > radius_bound.square() {
        bad.push("chord image radius bound violated".into());
    }
    bad
}

fn arc_command(out: &mut String, d: &FordArcData) {
    let r = 1.0 / (2.0 * (d.x.c as f64).powi(2));
    let (sx, sy) = (d.s.re.to_f64(), d.s.im.to_f64());
    // the arc runs over the top of C_x; it is the longer arc when the
    // centre lies above the chord
    let centre = Rational::from((1, 2 * d.x.c * d.x.c));
    let large = centre > d.r.im.clone().max(d.s.im.clone());
    let _ = write!(
        out,
        " A {r:.9} {r:.9} 0 {} 0 {:.9} {:.9}",
        large as u8,
        sx,
        0.6 - sy
    );
}

/// SVG rendering of the Ford circles of order `order` in `[0, 1]` and of the
/// path `c_N` through them.
pub fn render_ford_svg(order: i64) -> Result<String> {
    if !(1..=200).contains(&order) {
        return Err(Error::InvalidInput(format!("order {order} outside [1, 200]")));
    }
    let seq = farey_sequence(order);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 1 0.6\">\n");
    s.push_str("<g fill=\"none\" stroke=\"#444\" stroke-width=\"0.0005\">\n");
    for x in &seq {
        let r = 1.0 / (2.0 * (x.c as f64).powi(2));
        let _ = writeln!(
            s,
            "<circle cx=\"{:.9}\" cy=\"{:.9}\" r=\"{:.9}\"/>",
            x.a as f64 / x.c as f64,
            0.6 - r,
            r
        );
    }
    s.push_str("</g>\n");
    let first = ford_arc_data(seq[0], order);
    let mut path = format!("M {:.9} {:.9}", first.r.re.to_f64(), 0.6 - first.r.im.to_f64());
    for x in &seq[..seq.len() - 1] {
        arc_command(&mut path, &ford_arc_data(*x, order));
    }
    let _ = writeln!(s, "<path d=\"{path}\" fill=\"none\" stroke=\"#c00\" stroke-width=\"0.002\"/>");
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`render_ford_svg`] to `out`.
pub fn render_ford_path(order: i64, out: &Path) -> Result<()> {
    let svg = render_ford_svg(order)?;
    std::fs::write(out, svg)?;
    Ok(())
}
