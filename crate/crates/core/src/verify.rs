//! Exhaustive identity sweeps over finite alphabets of generators.
//!
//! One-dimensional sweeps evaluate every pair or triple literally. In `d`
//! dimensions the product is a signed tensor product of axis products, so a
//! d-tuple identity holds exactly when every axis satisfies the matching
//! one-dimensional relation and the Koszul signs agree. Axis items are grouped
//! into classes by codimensions and by that relation; the signs are constant on
//! a class, so each product of classes is settled by evaluating one
//! representative with the full d-dimensional code. Classes in which an axis
//! relation already fails are counted as failures without further argument.
//! A seeded sample of literal d-dimensional checks runs alongside.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TiaError};
use crate::exactnum::Rational;
use crate::lattice::{Chain, Gen1D, Lattice1D};
use crate::oracle;
use crate::tensor::{boundary_d_with, intersect_d_with, ChainD, Convention, GenD};
use crate::tia1d::{self, Table};

/// Outcome of one identity over one alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub checked: u128,
    pub failures: u128,
    pub counterexample: Option<String>,
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str) -> Self {
        Check { name: name.to_string(), checked: 0, failures: 0, counterexample: None, note: None }
    }

    fn record(&mut self, weight: u128, failure: Option<String>) {
        self.checked += weight;
        if let Some(msg) = failure {
            self.failures += weight;
            self.counterexample.get_or_insert(msg);
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "ok" } else { "FAIL" };
        write!(f, "{:<22} {status:<4} {} checked, {} failed", self.name, self.checked, self.failures)?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        if let Some(c) = &self.counterexample {
            write!(f, "\n    first counterexample: {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

/// Every generator whose positions lie in `0..window`, with both decorations
/// at most `dec_bound`, in canonical form and without repeats.
pub fn generators_1d(lattice: &Lattice1D, window: i64, dec_bound: u32) -> Vec<Gen1D> {
    let mut out = BTreeSet::new();
    for m in 0..=dec_bound {
        for n in 0..=dec_bound {
            for a in 0..window {
                for g in [Gen1D::point(a, m, n), Gen1D::infinitesimal(a, m, n)] {
                    out.insert(lattice.canonical(g).expect("points are canonical"));
                }
                for b in a + 1..window {
                    if let Ok(g) = lattice.canonical(Gen1D::interval(a, b, m, n)) {
                        out.insert(g);
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Memoised products and boundaries of single generators.
struct Algebra1D {
    table: Table,
    lattice: Lattice1D,
    products: HashMap<(Gen1D, Gen1D), Chain>,
}

impl Algebra1D {
    fn new(table: Table, lattice: &Lattice1D) -> Self {
        Algebra1D { table, lattice: lattice.clone(), products: HashMap::new() }
    }

    fn gen(&mut self, g: &Gen1D, h: &Gen1D) -> Chain {
        let (table, lattice) = (self.table, &self.lattice);
        self.products
            .entry((*g, *h))
            .or_insert_with(|| tia1d::intersect_gen_with(table, lattice, g, h))
            .clone()
    }

    fn chain(&mut self, x: &Chain, y: &Chain) -> Chain {
        let mut out = Chain::zero(&self.lattice);
        for (g, a) in x.terms() {
            for (h, b) in y.terms() {
                let p = self.gen(g, h);
                out.push_chain(&p, &(a * b));
            }
        }
        out
    }

    fn single(&self, g: &Gen1D) -> Chain {
        Chain::from_gen(&self.lattice, *g).expect("canonical generator")
    }
}

fn parity(e: u32) -> Rational {
    if e.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// How two sides of a one-dimensional identity compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Relation {
    BothZero,
    Equal,
    Negated,
    Other,
}

fn relate(lhs: &Chain, rhs: &Chain) -> Relation {
    if lhs == rhs {
        if lhs.is_zero() {
            Relation::BothZero
        } else {
            Relation::Equal
        }
    } else if lhs.add(rhs).map(|s| s.is_zero()).unwrap_or(false) {
        Relation::Negated
    } else {
        Relation::Other
    }
}

fn commutator(alg: &mut Algebra1D, g: &Gen1D, h: &Gen1D) -> (Chain, Chain) {
    let lhs = alg.gen(g, h);
    let rhs = alg.gen(h, g).scale(&parity(g.codim() * h.codim()));
    (lhs, rhs)
}

fn associator(alg: &mut Algebra1D, a: &Gen1D, b: &Gen1D, c: &Gen1D) -> (Chain, Chain) {
    let ab = alg.gen(a, b);
    let lhs = alg.chain(&ab, &alg.single(c));
    let bc = alg.gen(b, c);
    let rhs = alg.chain(&alg.single(a), &bc);
    (lhs, rhs)
}

/// `∂(g⋔h)` against `∂g⋔h + (-1)^{codim g} g⋔∂h`, with the two right-hand pieces.
fn leibniz_parts(alg: &mut Algebra1D, g: &Gen1D, h: &Gen1D) -> (Chain, Chain, Chain) {
    let lhs = tia1d::boundary(&alg.gen(g, h));
    let dg = tia1d::boundary(&alg.single(g));
    let dh = tia1d::boundary(&alg.single(h));
    let first = alg.chain(&dg, &alg.single(h));
    let second = alg.chain(&alg.single(g), &dh).scale(&parity(g.codim()));
    (lhs, first, second)
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub dims: usize,
    pub dec_bound: u32,
    pub window: i64,
    pub period: Option<u32>,
    pub table: Table,
    pub convention: Convention,
    /// Literal d-dimensional pairs (and a quarter as many triples) drawn at random.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            dims: 1,
            dec_bound: 2,
            window: 4,
            period: None,
            table: Table::Standard,
            convention: Convention::default(),
            samples: 2000,
            seed: 0,
        }
    }
}

impl SweepConfig {
    fn lattice(&self) -> Result<Lattice1D> {
        match self.period {
            Some(n) => Lattice1D::periodic(n),
            None => Ok(Lattice1D::line()),
        }
    }
}

pub fn verify(cfg: &SweepConfig) -> Result<Report> {
    if cfg.dims == 0 || cfg.window < 1 {
        return Err(TiaError::Config("need at least one axis and one lattice site".into()));
    }
    let lattice = cfg.lattice()?;
    let alphabet = generators_1d(&lattice, cfg.window, cfg.dec_bound);
    log::info!("{} generators per axis", alphabet.len());
    if cfg.dims == 1 {
        Ok(verify_line(cfg, &lattice, &alphabet))
    } else {
        Ok(verify_tensor(cfg, &lattice, &alphabet))
    }
}

fn verify_line(cfg: &SweepConfig, lattice: &Lattice1D, alphabet: &[Gen1D]) -> Report {
    let mut alg = Algebra1D::new(cfg.table, lattice);
    let mut comm = Check::new("commutativity");
    let mut leib = Check::new("leibniz");
    for g in alphabet {
        for h in alphabet {
            let (l, r) = commutator(&mut alg, g, h);
            comm.record(1, (l != r).then(|| format!("{g} ⋔ {h} = {l} but swapped gives {r}")));
            let (l, r1, r2) = leibniz_parts(&mut alg, g, h);
            let r = r1.add(&r2).expect("same lattice");
            leib.record(1, (l != r).then(|| format!("∂({g} ⋔ {h}) = {l} but Leibniz side is {r}")));
        }
    }
    let mut assoc = Check::new("associativity");
    for a in alphabet {
        for b in alphabet {
            for c in alphabet {
                let (l, r) = associator(&mut alg, a, b, c);
                assoc.record(1, (l != r).then(|| format!("({a} ⋔ {b}) ⋔ {c} = {l} but {a} ⋔ ({b} ⋔ {c}) = {r}")));
            }
        }
    }
    let mut dd = Check::new("boundary squared");
    for g in alphabet {
        let ddg = tia1d::boundary(&tia1d::boundary(&alg.single(g)));
        dd.record(1, (!ddg.is_zero()).then(|| format!("∂∂{g} = {ddg}")));
    }
    let (ideal, witness) = ideal_checks(&mut alg, alphabet, cfg.dec_bound);
    Report { checks: vec![comm, assoc, leib, dd, ideal, witness] }
}

/// Only the truncation-ideal checks of a one-dimensional sweep.
pub fn verify_ideal(cfg: &SweepConfig) -> Result<Report> {
    if cfg.window < 1 {
        return Err(TiaError::Config("need at least one lattice site".into()));
    }
    let lattice = cfg.lattice()?;
    let alphabet = generators_1d(&lattice, cfg.window, cfg.dec_bound);
    let mut alg = Algebra1D::new(cfg.table, &lattice);
    let (ideal, witness) = ideal_checks(&mut alg, &alphabet, cfg.dec_bound);
    Ok(Report { checks: vec![ideal, witness] })
}

/// Products with a factor whose decorations are all at least `k` stay in that
/// span, for every `k` in `1..=dec_bound`; and the boundary leaves it.
fn ideal_checks(alg: &mut Algebra1D, alphabet: &[Gen1D], dec_bound: u32) -> (Check, Check) {
    let mut ideal = Check::new("ideal closure");
    let mut witness = Check::new("ideal boundary escape");
    for k in 1..=dec_bound {
        for g in alphabet.iter().filter(|g| tia1d::in_ideal(g, k)) {
            for h in alphabet {
                for p in [alg.gen(g, h), alg.gen(h, g)] {
                    let outside = p.terms().find(|(t, _)| !tia1d::in_ideal(t, k)).map(|(t, _)| *t);
                    ideal.record(1, outside.map(|t| format!("K={k}: {g} ⋔ {h} has the term {t} (product {p})")));
                }
            }
        }
        let escape = alphabet
            .iter()
            .filter(|g| tia1d::in_ideal(g, k))
            .find_map(|g| {
                let dg = tia1d::boundary(&alg.single(g));
                let t = dg.terms().map(|(t, _)| *t).find(|t| !tia1d::in_ideal(t, k));
                t.map(|t| format!("K={k}: ∂{g} ∋ {t}"))
            });
        witness.record(1, escape.is_none().then(|| format!("K={k}: boundary preserves the ideal on this alphabet")));
        if let Some(e) = escape {
            witness.note.get_or_insert(e);
        }
    }
    (ideal, witness)
}

/// Class-indexed view of one axis: per key, how many items and a representative.
type Classes<K, I> = BTreeMap<K, (u128, I)>;

/// Runs `decide` on one representative for every d-fold product of classes,
/// weighting the verdict by the number of d-tuples in that product.
fn sweep_classes<K: Clone, I: Clone>(
    check: &mut Check,
    dims: usize,
    classes: &Classes<K, I>,
    mut decide: impl FnMut(&[K], &[I]) -> Option<String>,
) {
    let entries: Vec<(&K, &(u128, I))> = classes.iter().collect();
    if entries.is_empty() {
        return;
    }
    let mut idx = vec![0usize; dims];
    loop {
        let keys: Vec<K> = idx.iter().map(|&i| entries[i].0.clone()).collect();
        let reps: Vec<I> = idx.iter().map(|&i| entries[i].1 .1.clone()).collect();
        let weight: u128 = idx.iter().map(|&i| entries[i].1 .0).product();
        check.record(weight, decide(&keys, &reps));
        let mut axis = 0;
        loop {
            if axis == dims {
                return;
            }
            idx[axis] += 1;
            if idx[axis] < entries.len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

fn tensor_of(factors: Vec<Gen1D>) -> GenD {
    GenD::new(factors)
}

struct TensorCtx<'a> {
    cfg: &'a SweepConfig,
    lattices: Vec<Lattice1D>,
}

impl TensorCtx<'_> {
    fn single(&self, g: &GenD) -> ChainD {
        ChainD::from_gen(&self.lattices, g.clone()).expect("canonical generator")
    }

    fn mul(&self, x: &ChainD, y: &ChainD) -> ChainD {
        intersect_d_with(self.cfg.convention, self.cfg.table, x, y).expect("same lattices")
    }

    fn boundary(&self, x: &ChainD) -> ChainD {
        boundary_d_with(self.cfg.convention, x)
    }

    fn commutativity(&self, g: &GenD, h: &GenD) -> Option<String> {
        let (gc, hc) = (self.single(g), self.single(h));
        let l = self.mul(&gc, &hc);
        let r = self.mul(&hc, &gc).scale(&parity(g.codim() * h.codim()));
        (l != r).then(|| format!("{g} ⋔ {h} = {l} but swapped gives {r}"))
    }

    fn associativity(&self, a: &GenD, b: &GenD, c: &GenD) -> Option<String> {
        let (ac, bc, cc) = (self.single(a), self.single(b), self.single(c));
        let l = self.mul(&self.mul(&ac, &bc), &cc);
        let r = self.mul(&ac, &self.mul(&bc, &cc));
        (l != r).then(|| format!("({a} ⋔ {b}) ⋔ {c} = {l} but {a} ⋔ ({b} ⋔ {c}) = {r}"))
    }

    fn leibniz(&self, g: &GenD, h: &GenD) -> Option<String> {
        let (gc, hc) = (self.single(g), self.single(h));
        let l = self.boundary(&self.mul(&gc, &hc));
        let r = self
            .mul(&self.boundary(&gc), &hc)
            .add(&self.mul(&gc, &self.boundary(&hc)).scale(&parity(g.codim())))
            .expect("same lattices");
        (l != r).then(|| format!("∂({g} ⋔ {h}) = {l} but Leibniz side is {r}"))
    }
}

fn verify_tensor(cfg: &SweepConfig, lattice: &Lattice1D, alphabet: &[Gen1D]) -> Report {
    let d = cfg.dims;
    let ctx = TensorCtx { cfg, lattices: vec![lattice.clone(); d] };
    let mut alg = Algebra1D::new(cfg.table, lattice);
    let note = format!("all {d}-tuples, by axis classes");

    // commutativity: key (codim g, codim h, relation)
    let mut classes: Classes<(u32, u32, Relation), (Gen1D, Gen1D)> = BTreeMap::new();
    for g in alphabet {
        for h in alphabet {
            let (l, r) = commutator(&mut alg, g, h);
            let e = classes.entry((g.codim(), h.codim(), relate(&l, &r))).or_insert((0, (*g, *h)));
            e.0 += 1;
        }
    }
    let mut comm = Check::new("commutativity");
    comm.note = Some(note.clone());
    sweep_classes(&mut comm, d, &classes, |keys, reps| {
        let g = tensor_of(reps.iter().map(|p| p.0).collect());
        let h = tensor_of(reps.iter().map(|p| p.1).collect());
        let literal = ctx.commutativity(&g, &h);
        if keys.iter().any(|k| k.2 == Relation::BothZero) {
            return literal;
        }
        match keys.iter().position(|k| k.2 == Relation::Other) {
            Some(_) => Some(literal.unwrap_or_else(|| format!("axis relation fails in the class of {g}, {h}"))),
            None => literal,
        }
    });

    // associativity: key (codims, relation)
    let mut classes: Classes<(u32, u32, u32, Relation), (Gen1D, Gen1D, Gen1D)> = BTreeMap::new();
    for a in alphabet {
        for b in alphabet {
            for c in alphabet {
                let (l, r) = associator(&mut alg, a, b, c);
                let key = (a.codim(), b.codim(), c.codim(), relate(&l, &r));
                classes.entry(key).or_insert((0, (*a, *b, *c))).0 += 1;
            }
        }
    }
    let mut assoc = Check::new("associativity");
    assoc.note = Some(note.clone());
    sweep_classes(&mut assoc, d, &classes, |keys, reps| {
        let a = tensor_of(reps.iter().map(|t| t.0).collect());
        let b = tensor_of(reps.iter().map(|t| t.1).collect());
        let c = tensor_of(reps.iter().map(|t| t.2).collect());
        let literal = ctx.associativity(&a, &b, &c);
        let zero = keys.iter().any(|k| k.3 == Relation::BothZero);
        if !zero && keys.iter().any(|k| k.3 == Relation::Other) {
            return Some(literal.unwrap_or_else(|| format!("axis relation fails in the class of {a}, {b}, {c}")));
        }
        literal
    });

    // Leibniz: key (codims, which pieces vanish, whether the axis identity holds)
    type LeibKey = (u32, u32, bool, bool, bool, bool, bool);
    let mut classes: Classes<LeibKey, (Gen1D, Gen1D)> = BTreeMap::new();
    for g in alphabet {
        for h in alphabet {
            let p = alg.gen(g, h);
            let (l, r1, r2) = leibniz_parts(&mut alg, g, h);
            let holds = l == r1.add(&r2).expect("same lattice");
            let key = (g.codim(), h.codim(), p.is_zero(), l.is_zero(), r1.is_zero(), r2.is_zero(), holds);
            classes.entry(key).or_insert((0, (*g, *h))).0 += 1;
        }
    }
    let mut leib = Check::new("leibniz");
    leib.note = Some(note);
    sweep_classes(&mut leib, d, &classes, |keys, reps| {
        let g = tensor_of(reps.iter().map(|p| p.0).collect());
        let h = tensor_of(reps.iter().map(|p| p.1).collect());
        let literal = ctx.leibniz(&g, &h);
        if keys.iter().any(|k| !k.6) {
            return Some(literal.unwrap_or_else(|| format!("axis identity fails in the class of {g}, {h}")));
        }
        literal
    });

    // literal sample over the full alphabet
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pick = |rng: &mut ChaCha8Rng| tensor_of((0..d).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect());
    let mut sample = Check::new("random literal");
    sample.note = Some(format!("seed {}", cfg.seed));
    for _ in 0..cfg.samples {
        let (g, h) = (pick(&mut rng), pick(&mut rng));
        sample.record(1, ctx.commutativity(&g, &h));
        sample.record(1, ctx.leibniz(&g, &h));
    }
    for _ in 0..cfg.samples / 4 {
        let (a, b, c) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
        sample.record(1, ctx.associativity(&a, &b, &c));
    }

    // boundary squared, literally over every d-tuple
    let mut dd = Check::new("boundary squared");
    let mut idx = vec![0usize; d];
    'tuples: loop {
        let g = tensor_of(idx.iter().map(|&i| alphabet[i]).collect());
        let ddg = ctx.boundary(&ctx.boundary(&ctx.single(&g)));
        dd.record(1, (!ddg.is_zero()).then(|| format!("∂∂({g}) = {ddg}")));
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < alphabet.len() {
                continue 'tuples;
            }
            *slot = 0;
        }
        break;
    }
    Report { checks: vec![comm, assoc, leib, dd, sample] }
}

/// Closed forms against the integration oracle on the line.
pub fn oracle_check(table: Table, dec_bound: u32, window: i64) -> Report {
    let line = Lattice1D::line();
    let alphabet = generators_1d(&line, window, dec_bound);
    let mut products = Check::new("products");
    let mut mass = Check::new("product mass");
    for g in &alphabet {
        for h in &alphabet {
            let closed = tia1d::intersect_gen_with(table, &line, g, h);
            match oracle::intersect_via_integration(g, h) {
                Ok(integrated) => {
                    products.record(
                        1,
                        (closed != integrated)
                            .then(|| format!("{g} ⋔ {h}: closed form {closed}, integration {integrated}")),
                    );
                    let total: Rational = integrated.terms().map(|(_, c)| c.clone()).sum();
                    mass.record(1, (total > Rational::one()).then(|| format!("{g} ⋔ {h} has mass {total}")));
                }
                Err(e) => products.record(1, Some(format!("{g} ⋔ {h}: {e}"))),
            }
        }
    }
    let mut boundaries = Check::new("boundaries");
    for g in &alphabet {
        let closed = tia1d::boundary(&Chain::from_gen(&line, *g).expect("canonical"));
        let failure = match oracle::boundary_via_integration(g) {
            Ok(integrated) if integrated == closed => None,
            Ok(integrated) => Some(format!("∂{g}: closed form {closed}, integration {integrated}")),
            Err(e) => Some(format!("∂{g}: {e}")),
        };
        boundaries.record(1, failure);
    }
    Report { checks: vec![products, boundaries, mass] }
}

/// Generators reached by closing the zero-decorated points and 2h-intervals of
/// a circle under the product, keeping decorations at most `max_dec`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub members: BTreeSet<Gen1D>,
    /// Members that are not a point, a unit interval, or a 2h-interval with `m = n`.
    pub unexpected: Vec<Gen1D>,
    /// Generators of those three shapes, within the bound, that were never reached.
    pub unreached: Vec<Gen1D>,
}

fn expected_shape(g: &Gen1D) -> bool {
    match g.kind {
        crate::lattice::CellKind::Point => true,
        crate::lattice::CellKind::Interval => g.b - g.a == 1 || (g.b - g.a == 2 && g.dec.m == g.dec.n),
        crate::lattice::CellKind::Infinitesimal => false,
    }
}

pub fn star_closure(period: u32, max_dec: u32) -> Result<Closure> {
    let lattice = Lattice1D::periodic(period)?;
    let n = period as i64;
    let mut members: BTreeSet<Gen1D> = BTreeSet::new();
    for a in 0..n {
        members.insert(Gen1D::point(a, 0, 0));
        members.insert(lattice.canonical(Gen1D::interval(a - 1, a + 1, 0, 0))?);
    }
    let mut frontier: Vec<Gen1D> = members.iter().copied().collect();
    while !frontier.is_empty() {
        let snapshot: Vec<Gen1D> = members.iter().copied().collect();
        let mut fresh = BTreeSet::new();
        for g in &frontier {
            for h in &snapshot {
                for p in [tia1d::intersect_gen(&lattice, g, h), tia1d::intersect_gen(&lattice, h, g)] {
                    for (t, _) in p.terms() {
                        if t.dec.m <= max_dec && t.dec.n <= max_dec && !members.contains(t) {
                            fresh.insert(*t);
                        }
                    }
                }
            }
        }
        members.extend(fresh.iter().copied());
        frontier = fresh.into_iter().collect();
    }
    let unexpected = members.iter().copied().filter(|g| !expected_shape(g)).collect();
    let mut unreached = Vec::new();
    for a in 0..n {
        for m in 0..=max_dec {
            for k in 0..=max_dec {
                let mut shapes = vec![Gen1D::point(a, m, k), lattice.canonical(Gen1D::interval(a, a + 1, m, k))?];
                if m == k {
                    shapes.push(lattice.canonical(Gen1D::interval(a - 1, a + 1, m, m))?);
                }
                unreached.extend(shapes.into_iter().filter(|g| !members.contains(g)));
            }
        }
    }
    Ok(Closure { members, unexpected, unreached })
}
