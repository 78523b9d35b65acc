//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_traits::ToPrimitive;
use tia::exactnum::{format_rational, int, rat};
use tia::fluid::{build_fluid_algebra, integrate, self_convergence_ratio, Augmentation, FluidAlgebra, FluidFlow, Method};
use tia::oracle::{intersect_via_integration, mc_estimate, McOutcome};
use tia::tensor::{intersect_d, star_w, ChainD, GenD};
use tia::tia1d::{boundary, intersect_gen, Table};
use tia::verify::{oracle_check, star_closure, verify, verify_ideal, SweepConfig};
use tia::{Chain, Gen1D, Lattice1D, Rational};

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

struct Outcome {
    passed: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { passed: true, lines: Vec::new() }
    }

    fn expect(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }
}

fn oracle_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let report = oracle_check(Table::Standard, 4, 5);
    for c in &report.checks {
        o.expect(c.passed(), c.to_string());
    }
    o
}

fn dga_axioms() -> Outcome {
    let mut o = Outcome::new();
    let axioms = ["commutativity", "associativity", "leibniz", "boundary squared"];
    let line = verify(&SweepConfig { dims: 1, dec_bound: 2, window: 4, ..Default::default() }).unwrap();
    for name in axioms {
        let c = line.check(name).unwrap();
        o.expect(c.passed(), format!("d=1 B=2 W=4 {c}"));
    }
    let space = verify(&SweepConfig { dims: 3, dec_bound: 1, window: 3, ..Default::default() }).unwrap();
    for c in &space.checks {
        o.expect(c.passed(), format!("d=3 B=1 W=3 {c}"));
    }
    o
}

fn product(g: Gen1D, h: Gen1D) -> Chain {
    intersect_gen(&Lattice1D::line(), &g, &h)
}

fn single(c: Rational, g: Gen1D) -> Chain {
    Chain::from_terms(&Lattice1D::line(), [(c, g)]).unwrap()
}

fn pin(o: &mut Outcome, label: &str, g: Gen1D, h: Gen1D, expected: Chain) {
    let closed = product(g, h);
    let integrated = intersect_via_integration(&g, &h).unwrap();
    o.expect(closed == expected && integrated == expected, format!("{label}: {g} ⋔ {h} = {closed}"));
}

fn pinned_coefficients() -> Outcome {
    let mut o = Outcome::new();
    let stick = Gen1D::interval(0, 1, 0, 0);
    pin(&mut o, "½ point at stick end", Gen1D::point(0, 0, 0), stick, single(rat(1, 2), Gen1D::point(0, 1, 0)));
    pin(&mut o, "½ sticks sharing an end", stick, Gen1D::interval(1, 2, 0, 0), single(rat(1, 2), Gen1D::infinitesimal(1, 0, 0)));
    pin(&mut o, "⅔", Gen1D::point(0, 1, 0), stick, single(rat(2, 3), Gen1D::point(0, 2, 0)));
    pin(&mut o, "⅓", Gen1D::point(0, 0, 1), stick, single(rat(1, 3), Gen1D::point(0, 1, 1)));
    pin(&mut o, "⅓", Gen1D::point(0, 0, 0), Gen1D::infinitesimal(0, 0, 0), single(rat(1, 3), Gen1D::point(0, 1, 1)));

    let inf = Chain::from_gen(&Lattice1D::line(), Gen1D::infinitesimal(0, 0, 0)).unwrap();
    let expected = Chain::from_terms(
        &Lattice1D::line(),
        [(int(1), Gen1D::point(0, 1, 0)), (int(-1), Gen1D::point(0, 0, 1))],
    )
    .unwrap();
    let d = boundary(&inf);
    o.expect(d == expected, format!("∂{} = {d}", Gen1D::infinitesimal(0, 0, 0)));

    let l = vec![Lattice1D::line(); 3];
    let (p, s) = (Gen1D::point(0, 0, 0), Gen1D::interval(-1, 1, 0, 0));
    let cell = |f: [Gen1D; 3]| ChainD::from_gen(&l, GenD::new(f.to_vec())).unwrap();
    let a = cell([p, s, s]);
    let b = cell([Gen1D::interval(0, 2, 0, 0), p, s]);
    let c = cell([Gen1D::interval(-2, 0, 0, 0), s, p]);
    let abc = intersect_d(&intersect_d(&a, &b).unwrap(), &c).unwrap();
    let coefficients: Vec<Rational> = abc.terms().map(|(_, c)| c.clone()).collect();
    o.expect(coefficients == vec![rat(-1, 6)], format!("triple product of three 2h-squares = {abc}"));
    // The second and third factors meet a point strictly inside both sticks, so
    // their decorations cannot grow; the first axis carries the whole product.
    let forced = [Gen1D::point(0, 1, 1), p, p];
    o.expect(
        abc.coeff(&GenD::new(forced.to_vec())) == rat(-1, 6),
        format!("the point is {} on every axis but the first", p),
    );
    o
}

fn ideal_property() -> Outcome {
    let mut o = Outcome::new();
    let report = verify_ideal(&SweepConfig { dims: 1, dec_bound: 4, window: 5, ..Default::default() }).unwrap();
    for c in &report.checks {
        o.expect(c.passed(), format!("B=4 W=5 {c}"));
    }
    o
}

fn star_and_closure() -> Outcome {
    let mut o = Outcome::new();
    let l = vec![Lattice1D::periodic(5).unwrap(); 3];
    let mut axis = Vec::new();
    for a in 0..5 {
        for m in 0..=2 {
            for n in 0..=2 {
                axis.push(Gen1D::point(a, m, n));
                axis.push(Gen1D::interval(a - 1, a + 1, m, n));
            }
        }
    }
    let (mut checked, mut failures) = (0usize, Vec::new());
    for f0 in &axis {
        for f1 in &axis {
            for f2 in &axis {
                let x = ChainD::from_gen(&l, GenD::new(vec![*f0, *f1, *f2])).unwrap();
                let back = star_w(&star_w(&x).unwrap()).unwrap();
                checked += 1;
                if back != x {
                    failures.push(format!("{f0}⊗{f1}⊗{f2}"));
                }
            }
        }
    }
    let first = failures.first().map(|f| format!(", first {f}")).unwrap_or_default();
    o.expect(
        failures.is_empty(),
        format!("** = id on {checked} generators of W⊗W⊗W (period 5, decorations ≤ 2), {} failed{first}", failures.len()),
    );

    let closure = star_closure(7, 3).unwrap();
    o.expect(
        closure.unreached.is_empty(),
        format!("every stated basis shape is reached ({} unreached)", closure.unreached.len()),
    );
    let sample: Vec<String> = closure.unexpected.iter().take(4).map(|g| g.to_string()).collect();
    o.expect(
        closure.unexpected.is_empty(),
        format!(
            "closure of {} members has {} generators outside the stated basis, e.g. {}",
            closure.members.len(),
            closure.unexpected.len(),
            sample.join(", ")
        ),
    );
    o
}

fn fluid_checks(o: &mut Outcome, f: &FluidAlgebra, label: &str) {
    let c = &f.checks;
    o.expect(c.gram_symmetric, format!("{label}: gram symmetric"));
    o.expect(
        f.definiteness.positive_definite,
        format!("{label}: dim V = {}, {} (min pivot {})", f.dim(), f.definiteness.verdict(), f.definiteness.min_pivot),
    );
    o.expect(c.linking_symmetric, format!("{label}: linking symmetric"));
    o.expect(c.triple_alternating, format!("{label}: triple alternating on {} entries", c.triple_entries_checked));
    o.expect(
        c.boundary_condition_violations == 0,
        format!(
            "{label}: #∂(a⋔b) = 0 on {} pairs, {} violations",
            c.boundary_condition_pairs, c.boundary_condition_violations
        ),
    );
}

fn fluid_algebra(n3: &FluidAlgebra) -> Outcome {
    let mut o = Outcome::new();
    fluid_checks(&mut o, n3, "N=3 δ=1");
    let n4 = build_fluid_algebra(4, &Augmentation::new(rat(1, 2)).unwrap()).unwrap();
    fluid_checks(&mut o, &n4, "N=4 δ=1/2");
    o
}

fn conservation(n3: &FluidAlgebra) -> Outcome {
    let mut o = Outcome::new();
    let flow = FluidFlow::new(n3).unwrap();
    let x0 = flow.random_state(0);
    let run = integrate(&flow, &x0, 0.01, 100, Method::ImplicitMidpoint).unwrap();
    let (e, h) = (run.max_relative_energy_drift(), run.max_relative_helicity_drift());
    o.expect(e < 1e-10, format!("midpoint, 100 steps of 0.01: energy drift {e:.2e}"));
    o.expect(h < 1e-10, format!("midpoint, 100 steps of 0.01: helicity drift {h:.2e}"));
    let ratio = self_convergence_ratio(&flow, &x0, 0.1, 10, Method::Rk4).unwrap();
    o.expect((12.0..=20.0).contains(&ratio), format!("rk4 self-convergence ratio {ratio:.3} at T=1, dt=0.1/0.05/0.025"));
    o
}

fn monte_carlo() -> Outcome {
    let mut o = Outcome::new();
    let stick = Gen1D::interval(0, 1, 0, 0);
    let cases = [
        ("½", Gen1D::point(0, 0, 0), stick, McOutcome::Point { at: 0 }),
        ("½", stick, Gen1D::interval(1, 2, 0, 0), McOutcome::Infinitesimal { at: 1 }),
        ("⅓", Gen1D::point(0, 0, 1), stick, McOutcome::Point { at: 0 }),
        ("⅔", Gen1D::point(0, 1, 0), stick, McOutcome::Point { at: 0 }),
    ];
    for (i, (label, g, h, outcome)) in cases.into_iter().enumerate() {
        let exact: Rational = product(g, h).terms().map(|(_, c)| c.clone()).sum();
        let exact_f = exact.to_f64().unwrap();
        let est = mc_estimate(&g, &h, 1_000_000, 11 + i as u64);
        let p = est.frequency(&outcome);
        let se = est.standard_error(exact_f);
        let z = (p - exact_f) / se;
        o.expect(
            z.abs() < 4.0,
            format!("{label} {g} ⋔ {h}: frequency {p:.5} vs {} (z = {z:+.2})", format_rational(&exact)),
        );
    }
    o
}

fn main() -> ExitCode {
    let n3 = std::cell::OnceCell::new();
    let n3 = || n3.get_or_init(|| build_fluid_algebra(3, &Augmentation::new(int(1)).unwrap()).unwrap());
    let criteria: Vec<Criterion> = vec![
        ("oracle equivalence, decorations ≤ 4 on a 5-site window", Box::new(oracle_equivalence)),
        ("dga axioms, 1-D B=2 W=4 and 3-D B=1 W=3", Box::new(dga_axioms)),
        ("pinned coefficients", Box::new(pinned_coefficients)),
        ("truncation ideal, decorations ≤ 4, and a boundary witness", Box::new(ideal_property)),
        ("star involution and the closure basis", Box::new(star_and_closure)),
        ("fluid algebra forms", Box::new(|| fluid_algebra(n3()))),
        ("conservation and rk4 order", Box::new(|| conservation(n3()))),
        ("Monte-Carlo sanity, 10^6 samples within 4 standard errors", Box::new(monte_carlo)),
    ];
    let mut all = true;
    let mut summary = Vec::new();
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        for line in &outcome.lines {
            println!("    {line}");
        }
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        let line = format!("criterion {}: {status} {title} ({secs:.1}s)", i + 1);
        println!("{line}");
        summary.push(line);
        all &= outcome.passed;
    }
    println!();
    for line in &summary {
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
