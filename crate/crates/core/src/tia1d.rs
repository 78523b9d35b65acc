//! Closed-form boundary and transverse product of the one-dimensional algebra.
//!
//! All products are first evaluated for cells on the line. On a periodic
//! lattice the second factor is lifted to the universal cover and every
//! translate that can touch the first factor contributes; results are then
//! reduced modulo the period.

use num_bigint::BigInt;
use num_traits::One;

use crate::error::Result;
use crate::exactnum::{binomial, factorial, ratio, Rational};
use crate::lattice::{CellKind, Chain, Gen1D, Lattice1D};

/// Product table variant. Only [`Table::Standard`] is the algebra; the others
/// are deliberately wrong and exist to exercise the verification harness.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Table {
    #[default]
    Standard,
    /// Point against infinitesimal with primed and unprimed decorations
    /// exchanged in the binomials.
    SwappedPointInfinitesimal,
    /// Stick meeting stick at a shared endpoint with the reciprocal coefficient.
    CorruptStickEndpoint,
}

fn f(n: u32) -> BigInt {
    factorial(n)
}

/// `∅_a^{m,n} ⋔ x_{a,b}^{m',n'}`, point at the left end.
pub fn point_at_left_end(m: u32, n: u32, m2: u32) -> Rational {
    ratio(f(m + m2 + 1) * f(m + n + 1), f(m) * f(m + n + m2 + 2))
}

/// `∅_b^{m,n} ⋔ x_{a,b}^{m',n'}`, point at the right end.
pub fn point_at_right_end(m: u32, n: u32, n2: u32) -> Rational {
    ratio(f(n + n2 + 1) * f(m + n + 1), f(n) * f(m + n + n2 + 2))
}

/// `∅_a^{m,n} ⋔ x_{a,a}^{m',n'}`.
pub fn point_on_infinitesimal(m: u32, n: u32, m2: u32, n2: u32) -> Rational {
    ratio(
        binomial(m + m2 + 1, m) * binomial(n + n2 + 1, n),
        binomial(m + n + m2 + n2 + 3, m + n + 1),
    )
}

fn point_on_infinitesimal_swapped(m: u32, n: u32, m2: u32, n2: u32) -> Rational {
    ratio(
        binomial(m + m2 + 1, m2) * binomial(n + n2 + 1, n2),
        binomial(m + n + m2 + n2 + 3, m2 + n2 + 1),
    )
}

/// `x_{a,b}^{m,n} ⋔ x_{b,c}^{m',n'}`; depends on the right decoration `n` of the
/// left stick and the left decoration `m'` of the right stick.
pub fn sticks_sharing_endpoint(n_left: u32, m_right: u32) -> Rational {
    ratio(f(m_right + 1) * f(n_left + 1), f(m_right + n_left + 2))
}

/// `x_{a,a}^{m,n} ⋔ x_{a,b}^{k,l}`, infinitesimal at the left end of a stick.
pub fn infinitesimal_at_left_end(m: u32, n: u32, k: u32) -> Rational {
    ratio(f(m + n + 2) * f(m + k + 2), f(m + 1) * f(m + n + k + 3))
}

/// `x_{b,b}^{m,n} ⋔ x_{a,b}^{k,l}`, infinitesimal at the right end of a stick.
pub fn infinitesimal_at_right_end(m: u32, n: u32, l: u32) -> Rational {
    ratio(f(m + n + 2) * f(n + l + 2), f(n + 1) * f(m + n + l + 3))
}

/// `x_{a,a}^{m,n} ⋔ x_{a,a}^{m',n'}`.
pub fn infinitesimals_coincide(m: u32, n: u32, m2: u32, n2: u32) -> Rational {
    ratio(
        binomial(m + n + 2, m + 1) * binomial(m2 + n2 + 2, m2 + 1),
        binomial(m + n + m2 + n2 + 4, m + m2 + 2),
    )
}

/// Product of two cells on the line, as a list of `(coefficient, generator)`.
pub fn intersect_on_line(table: Table, g: &Gen1D, h: &Gen1D) -> Vec<(Rational, Gen1D)> {
    use CellKind::*;
    match (g.kind, h.kind) {
        (Point, Point) => vec![],
        (Point, Interval) => point_interval(g, h),
        (Interval, Point) => point_interval(h, g),
        (Point, Infinitesimal) => point_infinitesimal(table, g, h),
        (Infinitesimal, Point) => point_infinitesimal(table, h, g),
        (Interval, Interval) => interval_interval(table, g, h),
        (Infinitesimal, Interval) => infinitesimal_interval(g, h),
        (Interval, Infinitesimal) => infinitesimal_interval(h, g),
        (Infinitesimal, Infinitesimal) => {
            if g.a != h.a {
                return vec![];
            }
            let (d, e) = (g.dec, h.dec);
            vec![(
                infinitesimals_coincide(d.m, d.n, e.m, e.n),
                Gen1D::infinitesimal(g.a, d.m + e.m + 1, d.n + e.n + 1),
            )]
        }
    }
}

fn point_interval(p: &Gen1D, x: &Gen1D) -> Vec<(Rational, Gen1D)> {
    let (c, (m, n)) = (p.a, (p.dec.m, p.dec.n));
    let (m2, n2) = (x.dec.m, x.dec.n);
    if c < x.a || c > x.b {
        vec![]
    } else if c > x.a && c < x.b {
        vec![(Rational::one(), *p)]
    } else if c == x.a {
        vec![(point_at_left_end(m, n, m2), Gen1D::point(c, m + m2 + 1, n))]
    } else {
        vec![(point_at_right_end(m, n, n2), Gen1D::point(c, m, n + n2 + 1))]
    }
}

fn point_infinitesimal(table: Table, p: &Gen1D, x: &Gen1D) -> Vec<(Rational, Gen1D)> {
    if p.a != x.a {
        return vec![];
    }
    let (d, e) = (p.dec, x.dec);
    let coeff = match table {
        Table::SwappedPointInfinitesimal => point_on_infinitesimal_swapped(d.m, d.n, e.m, e.n),
        _ => point_on_infinitesimal(d.m, d.n, e.m, e.n),
    };
    vec![(coeff, Gen1D::point(p.a, d.m + e.m + 1, d.n + e.n + 1))]
}

fn interval_interval(table: Table, g: &Gen1D, h: &Gen1D) -> Vec<(Rational, Gen1D)> {
    let lo = g.a.max(h.a);
    let hi = g.b.min(h.b);
    if lo > hi {
        return vec![];
    }
    if lo == hi {
        // shared endpoint: one stick ends where the other starts
        let (left, right) = if g.b == lo { (g, h) } else { (h, g) };
        let mut coeff = sticks_sharing_endpoint(left.dec.n, right.dec.m);
        if table == Table::CorruptStickEndpoint {
            coeff = Rational::one() / coeff;
        }
        return vec![(coeff, Gen1D::infinitesimal(lo, right.dec.m, left.dec.n))];
    }
    // the surviving left end is the larger one; coincident ends merge decorations
    let m = match g.a.cmp(&h.a) {
        std::cmp::Ordering::Less => h.dec.m,
        std::cmp::Ordering::Greater => g.dec.m,
        std::cmp::Ordering::Equal => g.dec.m + h.dec.m + 1,
    };
    let n = match g.b.cmp(&h.b) {
        std::cmp::Ordering::Less => g.dec.n,
        std::cmp::Ordering::Greater => h.dec.n,
        std::cmp::Ordering::Equal => g.dec.n + h.dec.n + 1,
    };
    vec![(Rational::one(), Gen1D::interval(lo, hi, m, n))]
}

fn infinitesimal_interval(i: &Gen1D, x: &Gen1D) -> Vec<(Rational, Gen1D)> {
    let (m, n) = (i.dec.m, i.dec.n);
    if i.a > x.a && i.a < x.b {
        vec![(Rational::one(), *i)]
    } else if i.a == x.a {
        let k = x.dec.m;
        vec![(infinitesimal_at_left_end(m, n, k), Gen1D::infinitesimal(i.a, m + k + 1, n))]
    } else if i.a == x.b {
        let l = x.dec.n;
        vec![(infinitesimal_at_right_end(m, n, l), Gen1D::infinitesimal(i.a, m, n + l + 1))]
    } else {
        vec![]
    }
}

/// Closed hull of the unwiggled support.
pub fn support(g: &Gen1D) -> (i64, i64) {
    (g.a, g.b)
}

/// Translates `k` such that `h + kN` can touch `g` on the universal cover.
pub fn touching_translates(g: &Gen1D, h: &Gen1D, period: u32) -> std::ops::RangeInclusive<i64> {
    let n = period as i64;
    let (glo, ghi) = support(g);
    let (hlo, hhi) = support(h);
    let kmin = (glo - hhi).div_euclid(n) + i64::from((glo - hhi).rem_euclid(n) != 0);
    let kmax = (ghi - hlo).div_euclid(n);
    kmin..=kmax
}

/// Product of two generators on `lattice` (both assumed canonical).
pub fn intersect_gen_with(table: Table, lattice: &Lattice1D, g: &Gen1D, h: &Gen1D) -> Chain {
    let mut out = Chain::zero(lattice);
    let mut emit = |terms: Vec<(Rational, Gen1D)>| {
        for (c, r) in terms {
            let r = lattice.canonical(r).expect("products shrink supports");
            out.push(r, c);
        }
    };
    match lattice.period() {
        None => emit(intersect_on_line(table, g, h)),
        Some(n) => {
            for k in touching_translates(g, h, n) {
                emit(intersect_on_line(table, g, &h.translate(k * n as i64)));
            }
        }
    }
    out
}

pub fn intersect_gen(lattice: &Lattice1D, g: &Gen1D, h: &Gen1D) -> Chain {
    intersect_gen_with(Table::Standard, lattice, g, h)
}

pub fn intersect_with(table: Table, x: &Chain, y: &Chain) -> Result<Chain> {
    x.check_lattice(y)?;
    let mut out = Chain::zero(x.lattice());
    for (g, a) in x.terms() {
        for (h, b) in y.terms() {
            out.push_chain(&intersect_gen_with(table, x.lattice(), g, h), &(a * b));
        }
    }
    Ok(out)
}

/// Bilinear transverse product.
pub fn intersect(x: &Chain, y: &Chain) -> Result<Chain> {
    intersect_with(Table::Standard, x, y)
}

/// Boundary of a single generator as `(coefficient, generator)` terms on the line.
pub fn boundary_gen(g: &Gen1D) -> Vec<(Rational, Gen1D)> {
    let one = Rational::one();
    let (m, n) = (g.dec.m, g.dec.n);
    match g.kind {
        CellKind::Point => vec![],
        CellKind::Interval => vec![(one.clone(), Gen1D::point(g.b, 0, n)), (-one, Gen1D::point(g.a, m, 0))],
        CellKind::Infinitesimal => {
            vec![(one.clone(), Gen1D::point(g.a, m + 1, n)), (-one, Gen1D::point(g.a, m, n + 1))]
        }
    }
}

pub fn boundary(x: &Chain) -> Chain {
    let lattice = x.lattice();
    let mut out = Chain::zero(lattice);
    for (g, c) in x.terms() {
        for (s, p) in boundary_gen(g) {
            out.push(lattice.canonical(p).expect("points are always canonical"), c * s);
        }
    }
    out
}

/// Whether `g` lies in the span of generators with both decorations at least `k`.
pub fn in_ideal(g: &Gen1D, k: u32) -> bool {
    g.dec.smaller() >= k
}

/// Drops every term whose generator has both decorations at least `k`.
pub fn truncate(x: &Chain, k: u32) -> Chain {
    x.filter(|g| !in_ideal(g, k))
}
