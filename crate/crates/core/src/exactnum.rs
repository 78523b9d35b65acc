//! Exact rational numbers and small dense polynomials in one and two variables.
//!
//! Everything the wiggling oracle does reduces to multiplying and integrating
//! polynomials with rational coefficients over `[-1, 1]` or over the simplex
//! `-1 <= z1 < z2 <= 1`, so this module only provides what that needs.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::TiaError;

/// Arbitrary precision rational, always in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `num / den` for factorial-style products.
pub fn ratio(num: BigInt, den: BigInt) -> Rational {
    Rational::new(num, den)
}

pub fn pow(base: &Rational, exp: u32) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Formats as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"` or `"p"`. Decimal notation is rejected.
pub fn parse_rational(s: &str) -> Result<Rational, TiaError> {
    let bad = || TiaError::Parse(format!("invalid rational {s:?}, expected \"p/q\""));
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// Dense univariate polynomial, `coeffs[k]` multiplies `z^k`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly1 {
    coeffs: Vec<Rational>,
}

impl Poly1 {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly1 { coeffs }
    }

    pub fn zero() -> Self {
        Poly1 { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly1::new(vec![c])
    }

    pub fn one() -> Self {
        Poly1::constant(Rational::one())
    }

    /// `1 + z`
    pub fn one_plus_z() -> Self {
        Poly1::new(vec![int(1), int(1)])
    }

    /// `1 - z`
    pub fn one_minus_z() -> Self {
        Poly1::new(vec![int(1), int(-1)])
    }

    /// `(1 + z)^m (1 - z)^n`
    pub fn beta_kernel(m: u32, n: u32) -> Self {
        Poly1::one_plus_z().pow(m).mul(&Poly1::one_minus_z().pow(n))
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Poly1::zero();
        }
        Poly1::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Poly1) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly1::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly1::new(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Poly1::one(), |acc, _| acc.mul(self))
    }

    pub fn eval(&self, z: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * z + c)
    }

    pub fn eval_f64(&self, z: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(Rational::zero());
        for (k, c) in self.coeffs.iter().enumerate() {
            out.push(c / int(k as i64 + 1));
        }
        Poly1::new(out)
    }

    pub fn integrate_definite(&self, lo: &Rational, hi: &Rational) -> Rational {
        let p = self.antiderivative();
        p.eval(hi) - p.eval(lo)
    }

    /// `x -> ∫_{lo}^{x} p`.
    pub fn integrate_from(&self, lo: &Rational) -> Poly1 {
        let p = self.antiderivative();
        let c = p.eval(lo);
        p.sub(&Poly1::constant(c))
    }

    /// `x -> ∫_{x}^{hi} p`.
    pub fn integrate_to(&self, hi: &Rational) -> Poly1 {
        let p = self.antiderivative();
        Poly1::constant(p.eval(hi)).sub(&p)
    }

    /// Exact division by the monic linear factor `z - root`; `None` if it does not divide.
    pub fn divide_linear(&self, root: &Rational) -> Option<Poly1> {
        if self.is_zero() {
            return Some(Poly1::zero());
        }
        let n = self.coeffs.len();
        let mut quot = vec![Rational::zero(); n - 1];
        let mut carry = Rational::zero();
        for k in (0..n).rev() {
            let v = &self.coeffs[k] + &carry * root;
            if k == 0 {
                return v.is_zero().then(|| Poly1::new(quot));
            }
            quot[k - 1] = v.clone();
            carry = v;
        }
        unreachable!()
    }

    /// Multiplicity of `root` as a zero. The zero polynomial reports `usize::MAX`.
    pub fn root_multiplicity(&self, root: &Rational) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        let mut k = 0;
        while let Some(q) = p.divide_linear(root) {
            p = q;
            k += 1;
        }
        k
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }
}

impl Add for &Poly1 {
    type Output = Poly1;
    fn add(self, other: &Poly1) -> Poly1 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        Poly1::new(
            (0..n)
                .map(|k| self.coeffs.get(k).unwrap_or(&zero) + other.coeffs.get(k).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl Poly1 {
    pub fn add(&self, other: &Poly1) -> Poly1 {
        self + other
    }

    pub fn sub(&self, other: &Poly1) -> Poly1 {
        self + &other.neg()
    }

    pub fn neg(&self) -> Poly1 {
        Poly1::new(self.coeffs.iter().map(Neg::neg).collect())
    }
}

impl fmt::Debug for Poly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Poly1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "{}", format_rational(c))?,
                1 => write!(f, "{}·z", format_rational(c))?,
                _ => write!(f, "{}·z^{k}", format_rational(c))?,
            }
        }
        Ok(())
    }
}

/// Integration limit for [`Poly2::integrate_partial`]: a constant or the other variable.
#[derive(Clone, Debug)]
pub enum Bound {
    Const(Rational),
    Other,
}

/// Dense bivariate polynomial, `coeffs[i][j]` multiplies `z1^i z2^j`.
///
/// Trailing all-zero rows and columns are trimmed so equality is structural.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly2 {
    coeffs: Vec<Vec<Rational>>,
}

impl Poly2 {
    pub fn new(rows: Vec<Vec<Rational>>) -> Self {
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        let mut rows: Vec<Vec<Rational>> = rows
            .into_iter()
            .map(|mut r| {
                r.resize(width, Rational::zero());
                r
            })
            .collect();
        while rows.last().is_some_and(|r| r.iter().all(Zero::is_zero)) {
            rows.pop();
        }
        let mut width = width;
        while width > 0 && rows.iter().all(|r| r[width - 1].is_zero()) {
            width -= 1;
        }
        for r in &mut rows {
            r.truncate(width);
        }
        if width == 0 {
            rows.clear();
        }
        Poly2 { coeffs: rows }
    }

    pub fn zero() -> Self {
        Poly2 { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Poly2::new(vec![vec![c]])
    }

    /// `p(z1) q(z2)`
    pub fn outer(p: &Poly1, q: &Poly1) -> Self {
        Poly2::new(
            p.coeffs()
                .iter()
                .map(|a| q.coeffs().iter().map(|b| a * b).collect())
                .collect(),
        )
    }

    /// Embeds a polynomial in one variable (`var` 0 is `z1`, 1 is `z2`).
    pub fn from_poly1(p: &Poly1, var: usize) -> Self {
        match var {
            0 => Poly2::outer(p, &Poly1::one()),
            _ => Poly2::outer(&Poly1::one(), p),
        }
    }

    pub fn coeffs(&self) -> &[Vec<Rational>] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, i: usize, j: usize) -> Rational {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Poly2::new(
            self.coeffs
                .iter()
                .map(|r| r.iter().map(|a| a * c).collect())
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly2) -> Self {
        let rows = self.coeffs.len().max(other.coeffs.len());
        let cols = self
            .coeffs
            .first()
            .map_or(0, Vec::len)
            .max(other.coeffs.first().map_or(0, Vec::len));
        Poly2::new(
            (0..rows)
                .map(|i| (0..cols).map(|j| self.coeff(i, j) + other.coeff(i, j)).collect())
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly2) -> Self {
        if self.is_zero() || other.is_zero() {
            return Poly2::zero();
        }
        let (r1, c1) = (self.coeffs.len(), self.coeffs[0].len());
        let (r2, c2) = (other.coeffs.len(), other.coeffs[0].len());
        let mut out = vec![vec![Rational::zero(); c1 + c2 - 1]; r1 + r2 - 1];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (k, row2) in other.coeffs.iter().enumerate() {
                    for (l, b) in row2.iter().enumerate() {
                        if !b.is_zero() {
                            out[i + k][j + l] += a * b;
                        }
                    }
                }
            }
        }
        Poly2::new(out)
    }

    /// Antiderivative in `var` with zero constant of integration.
    pub fn antiderivative(&self, var: usize) -> Self {
        let rows = self.coeffs.len();
        let cols = self.coeffs.first().map_or(0, Vec::len);
        match var {
            0 => {
                let mut out = vec![vec![Rational::zero(); cols]; rows + 1];
                for i in 0..rows {
                    for j in 0..cols {
                        out[i + 1][j] = &self.coeffs[i][j] / int(i as i64 + 1);
                    }
                }
                Poly2::new(out)
            }
            _ => {
                let mut out = vec![vec![Rational::zero(); cols + 1]; rows];
                for i in 0..rows {
                    for j in 0..cols {
                        out[i][j + 1] = &self.coeffs[i][j] / int(j as i64 + 1);
                    }
                }
                Poly2::new(out)
            }
        }
    }

    /// Fixes `var` to a constant, leaving a polynomial in the other variable.
    pub fn eval_var(&self, var: usize, value: &Rational) -> Poly1 {
        match var {
            0 => {
                let cols = self.coeffs.first().map_or(0, Vec::len);
                Poly1::new(
                    (0..cols)
                        .map(|j| {
                            self.coeffs
                                .iter()
                                .rev()
                                .fold(Rational::zero(), |acc, r| acc * value + &r[j])
                        })
                        .collect(),
                )
            }
            _ => Poly1::new(
                self.coeffs
                    .iter()
                    .map(|r| Poly1::new(r.clone()).eval(value))
                    .collect(),
            ),
        }
    }

    /// Restriction to `z1 = z2 = t`.
    pub fn diagonal(&self) -> Poly1 {
        let mut out: Vec<Rational> = Vec::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if out.len() <= i + j {
                    out.resize(i + j + 1, Rational::zero());
                }
                out[i + j] += c;
            }
        }
        Poly1::new(out)
    }

    /// Integrates out `var` between `lo` and `hi`; each limit is a constant
    /// or the remaining variable. The result is a polynomial in the remaining variable.
    pub fn integrate_partial(&self, var: usize, lo: &Bound, hi: &Bound) -> Poly1 {
        let anti = self.antiderivative(var);
        let at = |b: &Bound| match b {
            Bound::Const(c) => anti.eval_var(var, c),
            Bound::Other => anti.diagonal(),
        };
        at(hi).sub(&at(lo))
    }

    /// Integrates `z2` from `z1` up to a fresh free variable `x`, returning a
    /// polynomial in `(z1, x)`.
    pub fn integrate_second_from_first(&self) -> Poly2 {
        let anti = self.antiderivative(1);
        anti.add(&Poly2::from_poly1(&anti.diagonal(), 0).scale(&int(-1)))
    }

    /// Mass over the simplex `-1 <= z1 < z2 <= 1`.
    pub fn simplex_mass(&self) -> Rational {
        self.integrate_partial(1, &Bound::Other, &Bound::Const(int(1)))
            .integrate_definite(&int(-1), &int(1))
    }

    /// Mass over the square `[-1,1]^2`.
    pub fn square_mass(&self) -> Rational {
        self.integrate_partial(1, &Bound::Const(int(-1)), &Bound::Const(int(1)))
            .integrate_definite(&int(-1), &int(1))
    }

    /// Splits into `p(z1) q(z2)` when the coefficient matrix has rank one.
    pub fn factor_rank_one(&self) -> Option<(Poly1, Poly1)> {
        let (i0, j0) = self.coeffs.iter().enumerate().find_map(|(i, r)| {
            r.iter().position(|c| !c.is_zero()).map(|j| (i, j))
        })?;
        let pivot = self.coeffs[i0][j0].clone();
        let p = Poly1::new(self.coeffs.iter().map(|r| r[j0].clone()).collect());
        let q = Poly1::new(self.coeffs[i0].iter().map(|c| c / &pivot).collect());
        (Poly2::outer(&p, &q) == *self).then_some((p, q))
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, r) in self.coeffs.iter().enumerate() {
            for (j, c) in r.iter().enumerate() {
                if !c.is_zero() {
                    terms.push(format!("{}·z1^{i}·z2^{j}", format_rational(c)));
                }
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Mul for &Poly1 {
    type Output = Poly1;
    fn mul(self, rhs: &Poly1) -> Poly1 {
        Poly1::mul(self, rhs)
    }
}

impl Sub for &Poly1 {
    type Output = Poly1;
    fn sub(self, rhs: &Poly1) -> Poly1 {
        Poly1::sub(self, rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> Poly1 {
        Poly1::new(c.iter().map(|&x| int(x)).collect())
    }

    #[test]
    fn difference_of_squares() {
        assert_eq!(Poly1::one_plus_z().mul(&Poly1::one_minus_z()), p(&[1, 0, -1]));
    }

    #[test]
    fn multiplying_by_one_is_identity() {
        let q = p(&[3, -2, 7]);
        assert_eq!(q.mul(&Poly1::one()), q);
    }

    #[test]
    fn square_times_linear() {
        let lhs = Poly1::one_plus_z().pow(2).mul(&Poly1::one_minus_z());
        assert_eq!(lhs, p(&[1, 1, -1, -1]));
    }

    #[test]
    fn definite_integrals() {
        let (lo, hi) = (int(-1), int(1));
        assert_eq!(Poly1::one().integrate_definite(&lo, &hi), int(2));
        assert_eq!(Poly1::beta_kernel(1, 1).integrate_definite(&lo, &hi), rat(4, 3));
        assert_eq!(Poly1::beta_kernel(2, 1).integrate_definite(&lo, &hi), rat(4, 3));
    }

    #[test]
    fn beta_integral_closed_form() {
        for m in 0..=8u32 {
            for n in 0..=8u32 {
                let got = Poly1::beta_kernel(m, n).integrate_definite(&int(-1), &int(1));
                let want = ratio(
                    factorial(m) * factorial(n) * BigInt::from(2).pow(m + n + 1),
                    factorial(m + n + 1),
                );
                assert_eq!(got, want, "m={m} n={n}");
            }
        }
    }

    #[test]
    fn partial_integration_with_variable_limits() {
        // ∫_{-1}^{z2} 1 dz1 = z2 + 1
        let one = Poly2::constant(int(1));
        let got = one.integrate_partial(0, &Bound::Const(int(-1)), &Bound::Other);
        assert_eq!(got, p(&[1, 1]));
        // ∫_{z1}^{1} (1 - z2) dz2 = (1 - z1)^2 / 2
        let f = Poly2::from_poly1(&Poly1::one_minus_z(), 1);
        let got = f.integrate_partial(1, &Bound::Other, &Bound::Const(int(1)));
        assert_eq!(got, Poly1::one_minus_z().pow(2).scale(&rat(1, 2)));
        // ∫_{-1}^{z} (1 + z1) dz1 = (1 + z)^2 / 2
        let f = Poly2::from_poly1(&Poly1::one_plus_z(), 0);
        let got = f.integrate_partial(0, &Bound::Const(int(-1)), &Bound::Other);
        assert_eq!(got, Poly1::one_plus_z().pow(2).scale(&rat(1, 2)));
    }

    #[test]
    fn root_multiplicities() {
        let k = Poly1::beta_kernel(3, 2);
        assert_eq!(k.root_multiplicity(&int(-1)), 3);
        assert_eq!(k.root_multiplicity(&int(1)), 2);
        assert_eq!(p(&[1, 0, 1]).root_multiplicity(&int(-1)), 0);
    }

    #[test]
    fn rank_one_factorization() {
        let f = Poly2::outer(&Poly1::beta_kernel(2, 0), &Poly1::beta_kernel(0, 3));
        let (a, b) = f.factor_rank_one().unwrap();
        assert_eq!(Poly2::outer(&a, &b), f);
        let g = f.add(&Poly2::constant(int(1)));
        assert!(g.factor_rank_one().is_none());
    }

    #[test]
    fn rational_text_round_trip() {
        for s in ["-1/6", "2", "0", "10/4"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&parse_rational("10/4").unwrap()), "5/2");
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    fn small_poly() -> impl Strategy<Value = Poly1> {
        prop::collection::vec((-5i64..=5, 1i64..=4), 0..5)
            .prop_map(|v| Poly1::new(v.into_iter().map(|(a, b)| rat(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn mul_commutes_and_associates(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }

        #[test]
        fn integral_is_linear_and_additive(a in small_poly(), b in small_poly(), k in -4i64..=4, mid in -3i64..=3) {
            let (lo, hi, mid) = (int(-1), int(1), rat(mid, 3));
            let lin = a.scale(&int(k)).add(&b).integrate_definite(&lo, &hi);
            prop_assert_eq!(lin, int(k) * a.integrate_definite(&lo, &hi) + b.integrate_definite(&lo, &hi));
            let split = a.integrate_definite(&lo, &mid) + a.integrate_definite(&mid, &hi);
            prop_assert_eq!(split, a.integrate_definite(&lo, &hi));
        }
    }
}
