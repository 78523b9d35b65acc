//! The zero-decoration product list behind the fluid structure constants,
//! checked against both the closed forms and the integration oracle.

use tia::exactnum::rat;
use tia::oracle::{boundary_via_integration, intersect_via_integration};
use tia::tia1d::{boundary, intersect, intersect_gen};
use tia::{Chain, Gen1D, Lattice1D, Rational};

fn line() -> Lattice1D {
    Lattice1D::line()
}

fn single(c: Rational, g: Gen1D) -> Chain {
    Chain::from_terms(&line(), [(c, g)]).unwrap()
}

fn chain(terms: &[(Rational, Gen1D)]) -> Chain {
    Chain::from_terms(&line(), terms.iter().cloned()).unwrap()
}

fn both_ways(g: Gen1D, h: Gen1D, expected: Chain) {
    assert_eq!(intersect_gen(&line(), &g, &h), expected, "closed form {g} ⋔ {h}");
    assert_eq!(intersect_via_integration(&g, &h).unwrap(), expected, "oracle {g} ⋔ {h}");
}

const A: i64 = 0;
const B: i64 = 1;
const C: i64 = 2;

#[test]
fn points_at_stick_ends() {
    let stick = Gen1D::interval(A, B, 0, 0);
    both_ways(Gen1D::point(A, 0, 0), stick, single(rat(1, 2), Gen1D::point(A, 1, 0)));
    both_ways(Gen1D::point(B, 0, 0), stick, single(rat(1, 2), Gen1D::point(B, 0, 1)));
}

#[test]
fn stick_stick_products() {
    let ab = Gen1D::interval(A, B, 0, 0);
    let ac = Gen1D::interval(A, C, 0, 0);
    let bc = Gen1D::interval(B, C, 0, 0);
    both_ways(ab, ac, single(rat(1, 1), Gen1D::interval(A, B, 1, 0)));
    both_ways(ac, bc, single(rat(1, 1), Gen1D::interval(B, C, 0, 1)));
    both_ways(ab, ab, single(rat(1, 1), Gen1D::interval(A, B, 1, 1)));
    both_ways(ab, bc, single(rat(1, 2), Gen1D::infinitesimal(B, 0, 0)));
}

#[test]
fn zero_infinitesimal_has_a_boundary() {
    let g = Gen1D::infinitesimal(A, 0, 0);
    let expected = chain(&[(rat(1, 1), Gen1D::point(A, 1, 0)), (rat(-1, 1), Gen1D::point(A, 0, 1))]);
    assert_eq!(boundary(&single(rat(1, 1), g)), expected);
    assert_eq!(boundary_via_integration(&g).unwrap(), expected);
}

#[test]
fn decorated_points_at_stick_ends() {
    let stick = Gen1D::interval(A, B, 0, 0);
    both_ways(Gen1D::point(A, 1, 0), stick, single(rat(2, 3), Gen1D::point(A, 2, 0)));
    both_ways(Gen1D::point(A, 0, 1), stick, single(rat(1, 3), Gen1D::point(A, 1, 1)));
    // The product is supported where the point sits, at the right end.
    both_ways(Gen1D::point(B, 1, 0), stick, single(rat(1, 3), Gen1D::point(B, 1, 1)));
    both_ways(Gen1D::point(B, 0, 1), stick, single(rat(2, 3), Gen1D::point(B, 0, 2)));
}

#[test]
fn point_at_decorated_left_end() {
    for n in 0..=3 {
        both_ways(Gen1D::point(A, 0, 0), Gen1D::interval(A, B, 1, n), single(rat(1, 3), Gen1D::point(A, 2, 0)));
    }
}

#[test]
fn point_on_zero_infinitesimal() {
    both_ways(Gen1D::point(A, 0, 0), Gen1D::infinitesimal(A, 0, 0), single(rat(1, 3), Gen1D::point(A, 1, 1)));
}

#[test]
fn general_position_and_disjoint_cases() {
    both_ways(Gen1D::point(1, 0, 0), Gen1D::interval(0, 2, 0, 0), single(rat(1, 1), Gen1D::point(1, 0, 0)));
    both_ways(Gen1D::point(0, 0, 0), Gen1D::point(5, 0, 0), Chain::zero(&line()));
    both_ways(Gen1D::point(0, 0, 0), Gen1D::point(0, 0, 0), Chain::zero(&line()));
    both_ways(Gen1D::point(0, 1, 1), Gen1D::infinitesimal(0, 2, 3), single(rat(1, 6), Gen1D::point(0, 4, 5)));
}

#[test]
fn shared_left_end_keeps_the_shorter_stick() {
    for (m, n, m2, n2) in [(0, 0, 0, 0), (1, 2, 0, 3), (2, 0, 1, 1)] {
        both_ways(
            Gen1D::interval(0, 1, m, n),
            Gen1D::interval(0, 2, m2, n2),
            single(rat(1, 1), Gen1D::interval(0, 1, m + m2 + 1, n)),
        );
    }
}

#[test]
fn periodic_double_contact() {
    let ring = Lattice1D::periodic(3).unwrap();
    let x = Chain::from_gen(&ring, Gen1D::interval(0, 2, 0, 0)).unwrap();
    let y = Chain::from_gen(&ring, Gen1D::interval(1, 3, 0, 0)).unwrap();
    let expected = Chain::from_terms(
        &ring,
        [(rat(1, 1), Gen1D::interval(1, 2, 0, 0)), (rat(1, 2), Gen1D::infinitesimal(0, 0, 0))],
    )
    .unwrap();
    assert_eq!(intersect(&x, &y).unwrap(), expected);
}
