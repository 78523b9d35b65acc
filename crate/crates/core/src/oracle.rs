//! Independent recomputation of boundaries and products by integrating the
//! wiggling densities exactly.
//!
//! Every generator is a handful of random endpoints, each living in `[-1, 1]`
//! around a lattice anchor, with a joint density that is a product of
//! univariate polynomials (plus the ordering constraint of an infinitesimal
//! interval). Endpoints at different anchors never compare non-trivially, so
//! the oracle enumerates the orderings of endpoints that share an anchor,
//! decides which endpoints bound the intersection in each ordering, and
//! integrates everything else out over the ordered region. The resulting
//! polynomial is then matched against the basis densities.
//!
//! Nothing here uses the closed-form coefficient tables; normalisations are
//! obtained by integration.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Dirichlet, Distribution};

use crate::error::{Result, TiaError};
use crate::exactnum::{int, Poly1, Poly2, Rational};
use crate::lattice::{CellKind, Chain, Gen1D, Lattice1D};

/// Distribution of a wiggled generator in local coordinates around its anchors.
#[derive(Clone, Debug, PartialEq)]
pub enum Density {
    /// Single point on `[-1, 1]` around `anchor`.
    Point { anchor: i64, poly: Poly1 },
    /// Independent endpoints around two distinct anchors.
    Interval { left_anchor: i64, left: Poly1, right_anchor: i64, right: Poly1 },
    /// Joint endpoint density supported on `-1 <= z1 < z2 <= 1` around `anchor`.
    Simplex { anchor: i64, poly: Poly2 },
}

impl Density {
    pub fn mass(&self) -> Rational {
        let (lo, hi) = (int(-1), int(1));
        match self {
            Density::Point { poly, .. } => poly.integrate_definite(&lo, &hi),
            Density::Interval { left, right, .. } => {
                left.integrate_definite(&lo, &hi) * right.integrate_definite(&lo, &hi)
            }
            Density::Simplex { poly, .. } => poly.simplex_mass(),
        }
    }

    /// Density of each endpoint on its own, lowest first, with its anchor.
    pub fn endpoint_marginals(&self) -> Vec<(i64, Poly1)> {
        use crate::exactnum::Bound;
        match self {
            Density::Point { anchor, poly } => vec![(*anchor, poly.clone())],
            Density::Interval { left_anchor, left, right_anchor, right } => {
                vec![(*left_anchor, left.clone()), (*right_anchor, right.clone())]
            }
            Density::Simplex { anchor, poly } => vec![
                (*anchor, poly.integrate_partial(1, &Bound::Other, &Bound::Const(int(1)))),
                (*anchor, poly.integrate_partial(0, &Bound::Const(int(-1)), &Bound::Other)),
            ],
        }
    }
}

fn normalized(p: Poly1) -> Poly1 {
    let mass = p.integrate_definite(&int(-1), &int(1));
    p.scale(&(Rational::one() / mass))
}

fn point_basis(m: u32, n: u32) -> Poly1 {
    normalized(Poly1::beta_kernel(m, n))
}

fn simplex_basis(m: u32, n: u32) -> Poly2 {
    let k = Poly2::outer(&Poly1::one_plus_z().pow(m), &Poly1::one_minus_z().pow(n));
    let mass = k.simplex_mass();
    k.scale(&(Rational::one() / mass))
}

pub fn density_of(g: &Gen1D) -> Density {
    let (m, n) = (g.dec.m, g.dec.n);
    match g.kind {
        CellKind::Point => Density::Point { anchor: g.a, poly: point_basis(m, n) },
        CellKind::Interval => Density::Interval {
            left_anchor: g.a,
            left: point_basis(m, 0),
            right_anchor: g.b,
            right: point_basis(0, n),
        },
        CellKind::Infinitesimal => Density::Simplex { anchor: g.a, poly: simplex_basis(m, n) },
    }
}

/// Reads off `c` and the generator whose normalised density, times `c`, equals `d`.
pub fn express_in_basis(d: &Density) -> Result<(Rational, Gen1D)> {
    let not_in_basis = || TiaError::NotInBasis(format!("{d:?}"));
    let (minus, plus) = (int(-1), int(1));
    match d {
        Density::Point { anchor, poly } => {
            if poly.is_zero() {
                return Err(not_in_basis());
            }
            let m = poly.root_multiplicity(&minus) as u32;
            let n = poly.root_multiplicity(&plus) as u32;
            let c = d.mass();
            (*poly == point_basis(m, n).scale(&c))
                .then_some((c, Gen1D::point(*anchor, m, n)))
                .ok_or_else(not_in_basis)
        }
        Density::Interval { left_anchor, left, right_anchor, right } => {
            if left.is_zero() || right.is_zero() || left_anchor >= right_anchor {
                return Err(not_in_basis());
            }
            let m = left.degree().unwrap_or(0) as u32;
            let n = right.degree().unwrap_or(0) as u32;
            let cl = left.integrate_definite(&minus, &plus);
            let cr = right.integrate_definite(&minus, &plus);
            let ok = *left == point_basis(m, 0).scale(&cl) && *right == point_basis(0, n).scale(&cr);
            ok.then(|| (cl * cr, Gen1D::interval(*left_anchor, *right_anchor, m, n)))
                .ok_or_else(not_in_basis)
        }
        Density::Simplex { anchor, poly } => {
            let (p, q) = poly.factor_rank_one().ok_or_else(not_in_basis)?;
            let m = p.degree().unwrap_or(0) as u32;
            let n = q.degree().unwrap_or(0) as u32;
            let c = poly.simplex_mass();
            (*poly == simplex_basis(m, n).scale(&c))
                .then_some((c, Gen1D::infinitesimal(*anchor, m, n)))
                .ok_or_else(not_in_basis)
        }
    }
}

/// One random endpoint: its anchor and its factor of the joint density.
#[derive(Clone, Debug)]
struct Endpoint {
    anchor: i64,
    factor: Poly1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    Point(usize),
    Segment(usize, usize),
}

/// Joint law of the endpoints of one or more wiggled generators.
#[derive(Clone, Debug, Default)]
struct Wiggle {
    endpoints: Vec<Endpoint>,
    shapes: Vec<Shape>,
    /// `(i, j)`: endpoint `i` lies strictly below endpoint `j`.
    ordered: Vec<(usize, usize)>,
}

impl Wiggle {
    fn of(g: &Gen1D) -> Wiggle {
        let (m, n) = (g.dec.m, g.dec.n);
        let ep = |anchor, factor| Endpoint { anchor, factor };
        match g.kind {
            CellKind::Point => Wiggle {
                endpoints: vec![ep(g.a, point_basis(m, n))],
                shapes: vec![Shape::Point(0)],
                ordered: vec![],
            },
            CellKind::Interval => Wiggle {
                endpoints: vec![ep(g.a, point_basis(m, 0)), ep(g.b, point_basis(0, n))],
                shapes: vec![Shape::Segment(0, 1)],
                ordered: vec![],
            },
            CellKind::Infinitesimal => {
                let lower = Poly1::one_plus_z().pow(m);
                let upper = Poly1::one_minus_z().pow(n);
                let mass = Poly2::outer(&lower, &upper).simplex_mass();
                Wiggle {
                    endpoints: vec![ep(g.a, lower.scale(&(Rational::one() / mass))), ep(g.a, upper)],
                    shapes: vec![Shape::Segment(0, 1)],
                    ordered: vec![(0, 1)],
                }
            }
        }
    }

    fn join(mut self, other: Wiggle) -> Wiggle {
        let off = self.endpoints.len();
        self.endpoints.extend(other.endpoints);
        self.shapes.extend(other.shapes.into_iter().map(|s| match s {
            Shape::Point(i) => Shape::Point(i + off),
            Shape::Segment(i, j) => Shape::Segment(i + off, j + off),
        }));
        self.ordered.extend(other.ordered.into_iter().map(|(i, j)| (i + off, j + off)));
        self
    }

    /// Endpoint indices grouped by anchor, anchors ascending.
    fn groups(&self) -> Vec<(i64, Vec<usize>)> {
        let mut by_anchor: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (i, e) in self.endpoints.iter().enumerate() {
            by_anchor.entry(e.anchor).or_default().push(i);
        }
        by_anchor.into_iter().collect()
    }

    /// Every admissible total order, as one permutation per anchor group.
    fn orderings(&self) -> Vec<Vec<Vec<usize>>> {
        let groups = self.groups();
        let mut out: Vec<Vec<Vec<usize>>> = vec![vec![]];
        for (_, members) in &groups {
            let perms: Vec<Vec<usize>> = permutations(members)
                .into_iter()
                .filter(|p| self.respects_constraints(p))
                .collect();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    perms.iter().map(move |p| {
                        let mut v = prefix.clone();
                        v.push(p.clone());
                        v
                    })
                })
                .collect();
        }
        out
    }

    fn respects_constraints(&self, perm: &[usize]) -> bool {
        let pos = |i: usize| perm.iter().position(|&x| x == i);
        self.ordered.iter().all(|&(i, j)| match (pos(i), pos(j)) {
            (Some(pi), Some(pj)) => pi < pj,
            _ => true,
        })
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Result of integrating one anchor group with 0, 1 or 2 free endpoints.
enum GroupValue {
    Constant(Rational),
    One(Poly1),
    Two(Poly2),
}

/// Integrates the ordered endpoints `factors` (lowest first) over
/// `-1 < v_0 < v_1 < ... < 1`, leaving the endpoints at `free` positions as variables.
fn integrate_ordered(factors: &[&Poly1], free: &[usize]) -> GroupValue {
    let (minus, plus) = (int(-1), int(1));
    let from_left = |upto: usize| {
        factors[..upto]
            .iter()
            .fold(Poly1::one(), |acc, f| acc.mul(f).integrate_from(&minus))
    };
    let from_right = |after: usize| {
        factors[after + 1..]
            .iter()
            .rev()
            .fold(Poly1::one(), |acc, f| acc.mul(f).integrate_to(&plus))
    };
    match *free {
        [] => GroupValue::Constant(from_left(factors.len()).eval(&plus)),
        [s] => GroupValue::One(from_left(s).mul(factors[s]).mul(&from_right(s))),
        [s, t] => {
            let lower = from_left(s).mul(factors[s]);
            let upper = factors[t].mul(&from_right(t));
            let middle = factors[s + 1..t].iter().fold(Poly2::constant(Rational::one()), |acc, f| {
                acc.mul(&Poly2::from_poly1(f, 1)).integrate_second_from_first()
            });
            GroupValue::Two(
                Poly2::from_poly1(&lower, 0)
                    .mul(&middle)
                    .mul(&Poly2::from_poly1(&upper, 1)),
            )
        }
        _ => unreachable!("at most two free endpoints"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum OutcomeKey {
    Point(i64),
    Segment(i64, i64),
}

enum Accum {
    One(Poly1),
    Two(Poly2),
}

/// Sums, over all admissible orderings, the density of the free endpoints
/// selected by `pick`.
fn accumulate<F>(w: &Wiggle, pick: F) -> BTreeMap<OutcomeKey, Accum>
where
    F: Fn(&dyn Fn(usize) -> (i64, usize)) -> Option<Vec<usize>>,
{
    let mut acc: BTreeMap<OutcomeKey, Accum> = BTreeMap::new();
    let groups = w.groups();
    for ordering in w.orderings() {
        let rank = |i: usize| -> (i64, usize) {
            for ((anchor, _), perm) in groups.iter().zip(&ordering) {
                if let Some(p) = perm.iter().position(|&x| x == i) {
                    return (*anchor, p);
                }
            }
            unreachable!()
        };
        let Some(free) = pick(&rank) else { continue };
        let key = match free.as_slice() {
            [p] => OutcomeKey::Point(w.endpoints[*p].anchor),
            [lo, hi] => OutcomeKey::Segment(w.endpoints[*lo].anchor, w.endpoints[*hi].anchor),
            _ => unreachable!(),
        };
        let mut scalar = Rational::one();
        let mut ones: Vec<Poly1> = Vec::new();
        let mut two: Option<Poly2> = None;
        for (_, perm) in groups.iter().zip(&ordering) {
            let factors: Vec<&Poly1> = perm.iter().map(|&i| &w.endpoints[i].factor).collect();
            let positions: Vec<usize> = free
                .iter()
                .filter_map(|f| perm.iter().position(|x| x == f))
                .collect();
            let mut positions = positions;
            positions.sort_unstable();
            match integrate_ordered(&factors, &positions) {
                GroupValue::Constant(c) => scalar *= c,
                GroupValue::One(p) => ones.push(p),
                GroupValue::Two(p) => two = Some(p),
            }
        }
        let value = match (ones.as_slice(), two) {
            ([p], None) => Accum::One(p.scale(&scalar)),
            ([], Some(q)) => Accum::Two(q.scale(&scalar)),
            // free endpoints in two groups; the lower anchor comes first
            ([p, q], None) => Accum::Two(Poly2::outer(p, q).scale(&scalar)),
            _ => unreachable!(),
        };
        match (acc.remove(&key), value) {
            (None, v) => {
                acc.insert(key, v);
            }
            (Some(Accum::One(a)), Accum::One(b)) => {
                acc.insert(key, Accum::One(a.add(&b)));
            }
            (Some(Accum::Two(a)), Accum::Two(b)) => {
                acc.insert(key, Accum::Two(a.add(&b)));
            }
            _ => unreachable!(),
        }
    }
    acc
}

fn to_chain(acc: BTreeMap<OutcomeKey, Accum>, sign: &Rational, out: &mut Chain) -> Result<()> {
    let lattice = out.lattice().clone();
    for (key, value) in acc {
        let density = match (key, value) {
            (OutcomeKey::Point(anchor), Accum::One(poly)) => Density::Point { anchor, poly },
            (OutcomeKey::Segment(a, b), Accum::Two(poly)) if a == b => Density::Simplex { anchor: a, poly },
            (OutcomeKey::Segment(a, b), Accum::Two(poly)) => {
                let (left, right) = poly
                    .factor_rank_one()
                    .ok_or_else(|| TiaError::NotInBasis(format!("endpoints at {a},{b} are correlated: {poly:?}")))?;
                Density::Interval { left_anchor: a, left, right_anchor: b, right }
            }
            _ => unreachable!(),
        };
        if density.mass().is_zero() {
            continue;
        }
        let (c, g) = express_in_basis(&density)?;
        out.push(lattice.canonical(g)?, c * sign);
    }
    Ok(())
}

/// Product of two generators on the line, by integration.
pub fn intersect_via_integration(g: &Gen1D, h: &Gen1D) -> Result<Chain> {
    let w = Wiggle::of(g).join(Wiggle::of(h));
    let (s0, s1) = (w.shapes[0], w.shapes[1]);
    let acc = accumulate(&w, |rank| match (s0, s1) {
        (Shape::Point(_), Shape::Point(_)) => None,
        (Shape::Point(z), Shape::Segment(l, r)) | (Shape::Segment(l, r), Shape::Point(z)) => {
            (rank(l) < rank(z) && rank(z) < rank(r)).then(|| vec![z])
        }
        (Shape::Segment(l1, r1), Shape::Segment(l2, r2)) => {
            let lo = if rank(l1) > rank(l2) { l1 } else { l2 };
            let hi = if rank(r1) < rank(r2) { r1 } else { r2 };
            (rank(lo) < rank(hi)).then(|| vec![lo, hi])
        }
    });
    let mut out = Chain::zero(&Lattice1D::line());
    to_chain(acc, &Rational::one(), &mut out)?;
    Ok(out)
}

/// Boundary by marginalising each endpoint: right end positive, left end negative.
pub fn boundary_via_integration(g: &Gen1D) -> Result<Chain> {
    let w = Wiggle::of(g);
    let mut out = Chain::zero(&Lattice1D::line());
    if let Shape::Segment(l, r) = w.shapes[0] {
        for (end, sign) in [(r, Rational::one()), (l, -Rational::one())] {
            let acc = accumulate(&w, |_| Some(vec![end]));
            to_chain(acc, &sign, &mut out)?;
        }
    }
    Ok(out)
}

/// Combinatorial type of one sampled intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum McOutcome {
    Point { at: i64 },
    Interval { a: i64, b: i64 },
    Infinitesimal { at: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub samples: u64,
    pub counts: BTreeMap<McOutcome, u64>,
}

impl McEstimate {
    pub fn frequency(&self, o: &McOutcome) -> f64 {
        *self.counts.get(o).unwrap_or(&0) as f64 / self.samples as f64
    }

    pub fn nonempty_frequency(&self) -> f64 {
        self.counts.values().sum::<u64>() as f64 / self.samples as f64
    }

    /// Binomial standard error of an estimated frequency `p`.
    pub fn standard_error(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }
}

/// Anchors are spread this far apart when sampling so wiggle ranges never overlap.
const MC_SPACING: f64 = 4.0;

enum Sampled {
    Point(f64),
    Segment(f64, f64),
}

struct Sampler {
    kind: CellKind,
    a: f64,
    b: f64,
    beta_lo: Option<Beta<f64>>,
    beta_hi: Option<Beta<f64>>,
    dirichlet: Option<Dirichlet<f64, 3>>,
}

impl Sampler {
    fn new(g: &Gen1D) -> Sampler {
        let (m, n) = (g.dec.m as f64, g.dec.n as f64);
        let beta = |a: f64, b: f64| Beta::new(a, b).expect("positive shape parameters");
        let mut s = Sampler {
            kind: g.kind,
            a: g.a as f64 * MC_SPACING,
            b: g.b as f64 * MC_SPACING,
            beta_lo: None,
            beta_hi: None,
            dirichlet: None,
        };
        match g.kind {
            // (1+z)/2 ~ Beta(m+1, n+1)
            CellKind::Point => s.beta_lo = Some(beta(m + 1.0, n + 1.0)),
            CellKind::Interval => {
                s.beta_lo = Some(beta(m + 1.0, 1.0));
                s.beta_hi = Some(beta(1.0, n + 1.0));
            }
            // ((1+z1)/2, (1-z2)/2) is Dirichlet(m+1, n+1, 1) restricted to two coordinates
            CellKind::Infinitesimal => {
                s.dirichlet = Some(Dirichlet::new([m + 1.0, n + 1.0, 1.0]).expect("positive weights"))
            }
        }
        s
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Sampled {
        match self.kind {
            CellKind::Point => Sampled::Point(self.a + 2.0 * self.beta_lo.as_ref().unwrap().sample(rng) - 1.0),
            CellKind::Interval => Sampled::Segment(
                self.a + 2.0 * self.beta_lo.as_ref().unwrap().sample(rng) - 1.0,
                self.b + 2.0 * self.beta_hi.as_ref().unwrap().sample(rng) - 1.0,
            ),
            CellKind::Infinitesimal => {
                let [u, v, _] = self.dirichlet.as_ref().unwrap().sample(rng);
                Sampled::Segment(self.a + 2.0 * u - 1.0, self.a + 1.0 - 2.0 * v)
            }
        }
    }
}

fn site(x: f64) -> i64 {
    (x / MC_SPACING).round() as i64
}

/// Monte-Carlo estimate of the product of two generators on the line: samples
/// wiggled versions, intersects them literally and bins the result by type.
pub fn mc_estimate(g: &Gen1D, h: &Gen1D, samples: u64, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sg, sh) = (Sampler::new(g), Sampler::new(h));
    let mut counts = BTreeMap::new();
    for _ in 0..samples.max(1) {
        let outcome = match (sg.sample(&mut rng), sh.sample(&mut rng)) {
            (Sampled::Point(_), Sampled::Point(_)) => None,
            (Sampled::Point(z), Sampled::Segment(l, r)) | (Sampled::Segment(l, r), Sampled::Point(z)) => {
                (l <= z && z <= r).then(|| McOutcome::Point { at: site(z) })
            }
            (Sampled::Segment(l1, r1), Sampled::Segment(l2, r2)) => {
                let (lo, hi) = (l1.max(l2), r1.min(r2));
                (lo < hi).then(|| {
                    let (a, b) = (site(lo), site(hi));
                    if a == b {
                        McOutcome::Infinitesimal { at: a }
                    } else {
                        McOutcome::Interval { a, b }
                    }
                })
            }
        };
        if let Some(o) = outcome {
            *counts.entry(o).or_insert(0) += 1;
        }
    }
    McEstimate { samples: samples.max(1), counts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rat;

    fn line_chain(terms: &[(Rational, Gen1D)]) -> Chain {
        Chain::from_terms(&Lattice1D::line(), terms.iter().cloned()).unwrap()
    }

    #[test]
    fn basis_densities() {
        match density_of(&Gen1D::point(0, 0, 0)) {
            Density::Point { poly, .. } => assert_eq!(poly, Poly1::constant(rat(1, 2))),
            _ => panic!(),
        }
        match density_of(&Gen1D::point(0, 1, 0)) {
            Density::Point { poly, .. } => assert_eq!(poly, Poly1::one_plus_z().scale(&rat(1, 2))),
            _ => panic!(),
        }
        match density_of(&Gen1D::infinitesimal(0, 0, 0)) {
            Density::Simplex { poly, .. } => assert_eq!(poly, Poly2::constant(rat(1, 2))),
            _ => panic!(),
        }
        for m in 0..4 {
            for n in 0..4 {
                for g in [Gen1D::point(0, m, n), Gen1D::interval(0, 1, m, n), Gen1D::infinitesimal(0, m, n)] {
                    assert_eq!(density_of(&g).mass(), Rational::one(), "{g}");
                }
            }
        }
    }

    #[test]
    fn infinitesimal_marginals_are_boundary_densities() {
        // the lower end of x_{0,0}^{m,n} is distributed as the point ∅^{m,n+1}
        let d = density_of(&Gen1D::infinitesimal(0, 2, 1));
        let marg = d.endpoint_marginals();
        assert_eq!(marg[0].1, point_basis(2, 2));
        assert_eq!(marg[1].1, point_basis(3, 1));
    }

    #[test]
    fn reading_off_basis_elements() {
        let d = Density::Point { anchor: 3, poly: Poly1::one_plus_z().scale(&rat(1, 4)) };
        assert_eq!(express_in_basis(&d).unwrap(), (rat(1, 2), Gen1D::point(3, 1, 0)));
        // the unnormalised c = a point/interval output
        let (m, n, m2) = (1u32, 2u32, 1u32);
        let raw = Poly1::beta_kernel(m + m2 + 1, n);
        let (c, g) = express_in_basis(&Density::Point { anchor: 0, poly: raw.clone() }).unwrap();
        assert_eq!(g, Gen1D::point(0, m + m2 + 1, n));
        assert_eq!(c, raw.integrate_definite(&int(-1), &int(1)));
        let bad = Density::Point { anchor: 0, poly: Poly1::new(vec![int(1), int(0), int(1)]) };
        assert!(matches!(express_in_basis(&bad), Err(TiaError::NotInBasis(_))));
    }

    #[test]
    fn products_by_integration() {
        assert_eq!(
            intersect_via_integration(&Gen1D::interval(0, 1, 0, 0), &Gen1D::interval(1, 2, 0, 0)).unwrap(),
            line_chain(&[(rat(1, 2), Gen1D::infinitesimal(1, 0, 0))])
        );
        // shared left end: the shorter stick survives, not the longer one
        let got = intersect_via_integration(&Gen1D::interval(0, 1, 2, 1), &Gen1D::interval(0, 2, 1, 3)).unwrap();
        assert_eq!(got, line_chain(&[(int(1), Gen1D::interval(0, 1, 4, 1))]));
        assert!(intersect_via_integration(&Gen1D::point(0, 0, 0), &Gen1D::point(0, 0, 0)).unwrap().is_zero());
        assert_eq!(
            intersect_via_integration(&Gen1D::point(0, 1, 1), &Gen1D::infinitesimal(0, 2, 3)).unwrap(),
            line_chain(&[(rat(1, 6), Gen1D::point(0, 4, 5))])
        );
    }

    #[test]
    fn boundaries_by_integration() {
        assert_eq!(
            boundary_via_integration(&Gen1D::interval(0, 2, 1, 3)).unwrap(),
            line_chain(&[(int(1), Gen1D::point(2, 0, 3)), (int(-1), Gen1D::point(0, 1, 0))])
        );
        for (m, n) in [(0, 0), (2, 1), (3, 4)] {
            assert_eq!(
                boundary_via_integration(&Gen1D::infinitesimal(0, m, n)).unwrap(),
                line_chain(&[(int(1), Gen1D::point(0, m + 1, n)), (int(-1), Gen1D::point(0, m, n + 1))])
            );
        }
        assert!(boundary_via_integration(&Gen1D::point(0, 1, 1)).unwrap().is_zero());
    }

    #[test]
    fn product_mass_is_a_probability() {
        let gens = [Gen1D::point(1, 1, 2), Gen1D::interval(0, 1, 2, 0), Gen1D::interval(1, 2, 0, 1), Gen1D::infinitesimal(1, 1, 1)];
        for g in &gens {
            for h in &gens {
                let total: Rational = intersect_via_integration(g, h).unwrap().terms().map(|(_, c)| c.clone()).sum();
                assert!(total >= Rational::zero() && total <= Rational::one(), "{g} {h}: {total}");
            }
        }
    }

    #[test]
    fn monte_carlo_stick_endpoint() {
        let est = mc_estimate(&Gen1D::interval(0, 1, 0, 0), &Gen1D::interval(1, 2, 0, 0), 200_000, 7);
        let p = est.frequency(&McOutcome::Infinitesimal { at: 1 });
        assert!((p - 0.5).abs() < 4.0 * est.standard_error(0.5), "{p}");
        assert_eq!(est.counts.len(), 1);
    }

    #[test]
    fn monte_carlo_disjoint_and_deterministic() {
        let est = mc_estimate(&Gen1D::point(0, 0, 0), &Gen1D::interval(2, 3, 0, 0), 10_000, 1);
        assert_eq!(est.nonempty_frequency(), 0.0);
        let a = mc_estimate(&Gen1D::point(0, 1, 0), &Gen1D::infinitesimal(0, 0, 0), 10_000, 42);
        let b = mc_estimate(&Gen1D::point(0, 1, 0), &Gen1D::infinitesimal(0, 0, 0), 10_000, 42);
        assert_eq!(a, b);
    }
}
