use std::sync::OnceLock;

use nalgebra::DVector;
use tia::exactnum::{int, rat};
use tia::fluid::{
    augment, build_2h_complex, build_fluid_algebra, integrate, self_convergence_ratio, Augmentation, FluidAlgebra,
    FluidFlow, Method,
};
use tia::tensor::{ChainD, GenD};
use tia::{Gen1D, Lattice1D, Rational, TiaError};

fn n3() -> &'static FluidAlgebra {
    static ALG: OnceLock<FluidAlgebra> = OnceLock::new();
    ALG.get_or_init(|| build_fluid_algebra(3, &Augmentation::new(int(1)).unwrap()).unwrap())
}

fn point3(m: u32, n: u32) -> GenD {
    GenD::new(vec![Gen1D::point(0, m, n); 3])
}

#[test]
fn augmentation_counts_decorated_points() {
    let ls = vec![Lattice1D::line(); 3];
    let delta = rat(1, 2);
    let aug = Augmentation::new(delta.clone()).unwrap();
    assert_eq!(augment(&ChainD::from_gen(&ls, point3(0, 0)).unwrap(), &aug).unwrap(), int(1));
    let x = ChainD::from_terms(&ls, [(rat(-1, 6), point3(1, 1))]).unwrap();
    let d6: Rational = (0..6).fold(int(1), |acc, _| acc * &delta);
    assert_eq!(augment(&x, &aug).unwrap(), -d6 / int(6));
    let stick = GenD::new(vec![Gen1D::interval(0, 1, 0, 0), Gen1D::point(0, 0, 0), Gen1D::point(0, 0, 0)]);
    assert!(matches!(augment(&ChainD::from_gen(&ls, stick).unwrap(), &aug), Err(TiaError::NotAPointChain(_))));
}

#[test]
fn augmentation_parameter_range() {
    assert!(Augmentation::new(int(1)).is_ok());
    assert!(matches!(Augmentation::new(int(0)), Err(TiaError::Config(_))));
    assert!(matches!(Augmentation::new(rat(3, 2)), Err(TiaError::Config(_))));
}

#[test]
fn complex_cell_counts() {
    let cx = build_2h_complex(3).unwrap();
    assert_eq!((cx.points.len(), cx.sticks.len(), cx.squares.len(), cx.cubes.len()), (27, 81, 81, 27));
    assert!(matches!(build_2h_complex(2), Err(TiaError::Config(_))));
}

#[test]
fn n3_forms_are_consistent() {
    let f = n3();
    assert_eq!(f.dim(), 52);
    assert!(f.dim() < f.complex.squares.len());
    assert!(f.checks.gram_symmetric);
    assert!(f.checks.linking_symmetric);
    assert!(f.checks.triple_alternating);
    assert!(f.checks.triple_entries_checked > 0);
    assert_eq!(f.checks.boundary_condition_violations, 0);
    assert!(f.definiteness.positive_definite, "{:?}", f.definiteness);
    assert!(f.d.is_some());
}

#[test]
fn zero_state_stays_at_rest() {
    let flow = FluidFlow::new(n3()).unwrap();
    let zero = DVector::zeros(flow.dim());
    assert_eq!(flow.rhs(&zero), zero);
    let t = integrate(&flow, &zero, 0.1, 5, Method::Rk4).unwrap();
    assert!(t.samples.iter().all(|s| s.energy == 0.0 && s.helicity == 0.0));
    assert_eq!(t.state, zero);
}

#[test]
fn vector_field_is_tangent_to_both_invariants() {
    let flow = FluidFlow::new(n3()).unwrap();
    for seed in 0..20 {
        let x = flow.random_state(seed);
        let v = flow.rhs(&x);
        assert!(x.dot(&(&flow.gram * &v)).abs() < 1e-12);
        assert!(x.dot(&(&flow.linking * &v)).abs() < 1e-12);
    }
}

#[test]
fn midpoint_conserves_energy_and_helicity() {
    let flow = FluidFlow::new(n3()).unwrap();
    let t = integrate(&flow, &flow.random_state(7), 0.01, 100, Method::ImplicitMidpoint).unwrap();
    assert!(t.max_relative_energy_drift() < 1e-10);
    assert!(t.max_relative_helicity_drift() < 1e-10);
    let csv = t.to_csv();
    assert!(csv.starts_with("step,time,energy,helicity\n"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn rk4_is_fourth_order() {
    let flow = FluidFlow::new(n3()).unwrap();
    let ratio = self_convergence_ratio(&flow, &flow.random_state(0), 0.1, 10, Method::Rk4).unwrap();
    assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn integration_is_deterministic() {
    let flow = FluidFlow::new(n3()).unwrap();
    let run = || integrate(&flow, &flow.random_state(3), 0.05, 20, Method::ImplicitMidpoint).unwrap();
    assert_eq!(run(), run());
    assert!(matches!(integrate(&flow, &flow.random_state(3), 0.0, 1, Method::Rk4), Err(TiaError::Config(_))));
}

#[test]
fn summary_reports_checksums() {
    let s = n3().summary();
    assert_eq!(s.dim_v, 52);
    assert_eq!(s.cells.squares, 81);
    assert_eq!(s.checksums.gram.len(), 64);
    assert!(s.checksums.d.is_some());
}
