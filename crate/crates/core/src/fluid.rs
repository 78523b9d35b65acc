//! The fluid algebra on a periodic cubic lattice and its Euler flow.
//!
//! `V` is spanned by the vectors `*(∂b)` for zero-decorated 2h-squares `b`.
//! On `V` the algebra supplies an inner product `(a,b) = #(*a ⋔ b)`, a linking
//! form `<a,b> = #(a ⋔ ∂b)` and a triple form `{a,b,c} = #(a ⋔ b ⋔ c)`. All of
//! these are assembled exactly; the flow `G Ẋ = T(X, DX, ·)` with `G D = L`
//! is then integrated in double precision.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, TiaError};
use crate::exactnum::{format_rational, pow, Rational};
use crate::lattice::{CellKind, Gen1D, Lattice1D};
use crate::tensor::{boundary_d, intersect_d, star_w, ChainD, GenD};

/// Weight `δ^{m+n}` per decorated point factor, `0 < δ <= 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Augmentation {
    delta: Rational,
}

impl Augmentation {
    pub fn new(delta: Rational) -> Result<Self> {
        if delta <= Rational::zero() || delta > Rational::one() {
            return Err(TiaError::Config(format!("delta must lie in (0, 1], got {}", format_rational(&delta))));
        }
        Ok(Augmentation { delta })
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn weight(&self, g: &GenD) -> Rational {
        pow(&self.delta, g.decoration_total())
    }
}

/// Sum of `coeff · δ^{decorations}` over a chain of decorated points.
pub fn augment(x: &ChainD, aug: &Augmentation) -> Result<Rational> {
    let mut total = Rational::zero();
    for (g, c) in x.terms() {
        if g.factors.iter().any(|f| f.kind != CellKind::Point) {
            return Err(TiaError::NotAPointChain(g.to_string()));
        }
        total += c * aug.weight(g);
    }
    Ok(total)
}

/// Zero-decorated 2h-cells of the periodic cubic lattice, one family per
/// dimension, each listed vertex-major.
#[derive(Clone, Debug)]
pub struct Complex2h {
    pub n: u32,
    pub lattices: Vec<Lattice1D>,
    pub points: Vec<GenD>,
    /// `sticks[3v + k]` is the stick through vertex `v` along axis `k`.
    pub sticks: Vec<GenD>,
    /// `squares[3v + k]` is the square through vertex `v` normal to axis `k`.
    pub squares: Vec<GenD>,
    pub cubes: Vec<GenD>,
}

fn vertex(n: u32, v: usize) -> [i64; 3] {
    let n = n as usize;
    [(v / (n * n)) as i64, ((v / n) % n) as i64, (v % n) as i64]
}

pub fn build_2h_complex(n: u32) -> Result<Complex2h> {
    if n < 3 {
        return Err(TiaError::Config(format!("lattice size must be at least 3, got {n}")));
    }
    let lattice = Lattice1D::periodic(n)?;
    let lattices = vec![lattice.clone(); 3];
    let point = |a: i64| Gen1D::point(a, 0, 0);
    let stick = |a: i64| lattice.canonical(Gen1D::interval(a - 1, a + 1, 0, 0)).expect("2h fits the period");
    let cell = |c: [i64; 3], open: [bool; 3]| {
        GenD::new((0..3).map(|k| if open[k] { stick(c[k]) } else { point(c[k]) }).collect())
    };
    let mut cx = Complex2h {
        n,
        lattices,
        points: vec![],
        sticks: vec![],
        squares: vec![],
        cubes: vec![],
    };
    for v in 0..(n as usize).pow(3) {
        let c = vertex(n, v);
        cx.points.push(cell(c, [false; 3]));
        for k in 0..3 {
            let mut open = [false; 3];
            open[k] = true;
            cx.sticks.push(cell(c, open));
        }
        for k in 0..3 {
            let mut open = [true; 3];
            open[k] = false;
            cx.squares.push(cell(c, open));
        }
        cx.cubes.push(cell(c, [true; 3]));
    }
    Ok(cx)
}

/// Sparse vector over the square list.
pub type SquareVector = Vec<(usize, Rational)>;

fn to_square_vector(x: &ChainD, index: &HashMap<GenD, usize>) -> SquareVector {
    let mut v: Vec<(usize, Rational)> = x
        .terms()
        .map(|(g, c)| (*index.get(g).expect("zero-decorated square"), c.clone()))
        .collect();
    v.sort_by_key(|e| e.0);
    v
}

fn square_index(cx: &Complex2h) -> HashMap<GenD, usize> {
    cx.squares.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect()
}

/// Independent vectors among `*(∂b)`, `b` running over the squares in order.
pub fn coexact_basis(cx: &Complex2h) -> Vec<SquareVector> {
    let index = square_index(cx);
    let mut echelon = Echelon::new(cx.squares.len());
    let mut basis = Vec::new();
    for b in &cx.squares {
        let db = boundary_d(&ChainD::from_gen(&cx.lattices, b.clone()).expect("canonical"));
        let v = to_square_vector(&star_w(&db).expect("2h sticks lie in W"), &index);
        if echelon.insert(&v) {
            basis.push(v);
        }
    }
    basis
}

/// Row-echelon accumulator used to select independent vectors exactly.
struct Echelon {
    len: usize,
    rows: Vec<(usize, Vec<Rational>)>,
}

impl Echelon {
    fn new(len: usize) -> Self {
        Echelon { len, rows: Vec::new() }
    }

    fn insert(&mut self, v: &SquareVector) -> bool {
        let mut dense = vec![Rational::zero(); self.len];
        for (i, c) in v {
            dense[*i] = c.clone();
        }
        for (pivot, row) in &self.rows {
            if dense[*pivot].is_zero() {
                continue;
            }
            let f = dense[*pivot].clone();
            for (d, r) in dense.iter_mut().zip(row) {
                if !r.is_zero() {
                    *d -= &f * r;
                }
            }
        }
        let Some(pivot) = dense.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / &dense[pivot];
        for d in dense.iter_mut() {
            *d *= &inv;
        }
        self.rows.push((pivot, dense));
        true
    }
}

/// Inertia of a symmetric matrix from an exact LDLᵀ with diagonal pivoting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definiteness {
    pub positive_definite: bool,
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
    /// Smallest pivot, exact.
    pub min_pivot: String,
    pub pivots: Vec<String>,
}

impl Definiteness {
    pub fn verdict(&self) -> &'static str {
        match (self.negative, self.zero) {
            (0, 0) => "positive definite",
            (0, _) => "positive semidefinite, singular",
            _ => "indefinite",
        }
    }
}

/// Symmetric elimination choosing the largest remaining diagonal entry. When
/// every remaining diagonal entry vanishes, a nonzero off-diagonal entry means
/// the form is indefinite; a 2x2 block is then counted as one positive and one
/// negative direction.
pub fn ldl_inertia(m: &[Vec<Rational>]) -> Definiteness {
    let mut a: Vec<Vec<Rational>> = m.to_vec();
    let mut alive: Vec<usize> = (0..a.len()).collect();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    let mut pivots = Vec::new();
    while !alive.is_empty() {
        let best = alive
            .iter()
            .copied()
            .max_by(|&i, &j| a[i][i].abs().cmp(&a[j][j].abs()).then(j.cmp(&i)))
            .expect("nonempty");
        let p = a[best][best].clone();
        if p.is_zero() {
            let off = alive
                .iter()
                .flat_map(|&i| alive.iter().map(move |&j| (i, j)))
                .find(|&(i, j)| i != j && !a[i][j].is_zero());
            match off {
                None => {
                    zero += alive.len();
                    pivots.extend(std::iter::repeat_n("0".to_string(), alive.len()));
                    break;
                }
                Some((i, j)) => {
                    // a 2x2 block [[0, b], [b, 0]] with b != 0 has inertia (1, 1)
                    pos += 1;
                    neg += 1;
                    let b = a[i][j].clone();
                    pivots.push(format_rational(&b));
                    pivots.push(format_rational(&-b.clone()));
                    let rest: Vec<usize> = alive.iter().copied().filter(|&k| k != i && k != j).collect();
                    let det = -(&b * &b);
                    for &r in &rest {
                        for &c in &rest {
                            // Schur complement of the block
                            let (ri, rj) = (a[r][i].clone(), a[r][j].clone());
                            let (ic, jc) = (a[i][c].clone(), a[j][c].clone());
                            let corr = (&ri * &jc * &b + &rj * &ic * &b) / &det;
                            a[r][c] = &a[r][c] + corr;
                        }
                    }
                    alive = rest;
                    continue;
                }
            }
        }
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        pivots.push(format_rational(&p));
        alive.retain(|&k| k != best);
        let col: Vec<(usize, Rational)> = alive.iter().map(|&r| (r, a[r][best].clone() / &p)).collect();
        for (r, f) in &col {
            if f.is_zero() {
                continue;
            }
            for &c in &alive {
                let t = f * &a[best][c];
                if !t.is_zero() {
                    a[*r][c] -= t;
                }
            }
        }
    }
    let min_pivot = pivots
        .iter()
        .map(|s| crate::exactnum::parse_rational(s).expect("formatted rational"))
        .min()
        .map(|r| format_rational(&r))
        .unwrap_or_else(|| "none".into());
    Definiteness { positive_definite: neg == 0 && zero == 0, positive: pos, negative: neg, zero, min_pivot, pivots }
}

/// Solves `a x = b` column by column by exact Gauss–Jordan elimination.
pub fn solve_exact(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = a.len();
    let k = b.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<Rational>> = a.iter().zip(b).map(|(r, s)| r.iter().chain(s).cloned().collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| TiaError::SingularGram(format!("no pivot in column {col}")))?;
        m.swap(col, pivot);
        let inv = Rational::one() / &m[col][col];
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        let prow = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(&prow).skip(col) {
                if !p.is_zero() {
                    *x -= &f * p;
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..n + k].to_vec()).collect())
}

/// `Bᵀ M B` for a sparse basis `B` over the squares.
fn congruence(basis: &[SquareVector], m: &BTreeMap<(usize, usize), Rational>) -> Vec<Vec<Rational>> {
    let dim = basis.len();
    // rows of M by first index, then contract
    let mut rows: HashMap<usize, Vec<(usize, Rational)>> = HashMap::new();
    for ((i, j), v) in m {
        rows.entry(*i).or_default().push((*j, v.clone()));
    }
    let mut mb: Vec<HashMap<usize, Rational>> = vec![HashMap::new(); dim];
    for (b, vb) in basis.iter().enumerate() {
        for (i, row) in &rows {
            let mut acc = Rational::zero();
            for (j, v) in row {
                if let Ok(pos) = vb.binary_search_by_key(j, |e| e.0) {
                    acc += v * &vb[pos].1;
                }
            }
            if !acc.is_zero() {
                mb[b].insert(*i, acc);
            }
        }
    }
    let mut out = vec![vec![Rational::zero(); dim]; dim];
    for (a, va) in basis.iter().enumerate() {
        for (b, col) in mb.iter().enumerate() {
            let mut acc = Rational::zero();
            for (i, c) in va {
                if let Some(v) = col.get(i) {
                    acc += c * v;
                }
            }
            out[a][b] = acc;
        }
    }
    out
}

/// Exact checks on the assembled forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FluidChecks {
    pub gram_symmetric: bool,
    pub linking_symmetric: bool,
    pub triple_alternating: bool,
    pub triple_entries_checked: usize,
    /// Pairs `(a, b)` of basis vectors with `#∂(a ⋔ b) != 0`.
    pub boundary_condition_violations: usize,
    pub boundary_condition_pairs: usize,
    /// `G D` equals its transpose.
    pub d_self_adjoint: bool,
}

#[derive(Clone, Debug)]
pub struct FluidAlgebra {
    pub n: u32,
    pub aug: Augmentation,
    pub complex: Complex2h,
    pub basis: Vec<SquareVector>,
    pub gram: Vec<Vec<Rational>>,
    pub linking: Vec<Vec<Rational>>,
    /// Nonzero entries `{e_a, e_b, e_c}` keyed by `(a, b, c)`.
    pub triple: BTreeMap<(usize, usize, usize), Rational>,
    /// `None` when the inner product is singular.
    pub d: Option<Vec<Vec<Rational>>>,
    pub definiteness: Definiteness,
    pub checks: FluidChecks,
}

fn is_transpose_symmetric(m: &[Vec<Rational>]) -> bool {
    (0..m.len()).all(|i| (0..i).all(|j| m[i][j] == m[j][i]))
}

/// Alternation on every stored entry: each transposition flips the sign.
fn alternation_holds(t: &BTreeMap<(usize, usize, usize), Rational>) -> bool {
    let get = |k: (usize, usize, usize)| t.get(&k).cloned().unwrap_or_else(Rational::zero);
    t.iter().all(|(&(a, b, c), v)| {
        a != b && b != c && a != c && get((b, a, c)) == -v && get((a, c, b)) == -v && get((c, b, a)) == -v
    })
}

pub fn build_fluid_algebra(n: u32, aug: &Augmentation) -> Result<FluidAlgebra> {
    let complex = build_2h_complex(n)?;
    let basis = coexact_basis(&complex);
    log::info!("N={n}: dim V = {} of {} squares", basis.len(), complex.squares.len());
    let lat = &complex.lattices;
    let single = |g: &GenD| ChainD::from_gen(lat, g.clone()).expect("canonical");
    let squares: Vec<ChainD> = complex.squares.iter().map(single).collect();
    let starred: Vec<ChainD> = squares.iter().map(|s| star_w(s).expect("squares lie in W")).collect();
    let boundaries: Vec<ChainD> = squares.iter().map(boundary_d).collect();
    let count = |x: &ChainD| augment(x, aug).expect("codimension three products are points");
    let point_axis = |i: usize| i % 3;

    // pairwise forms on squares
    let mut gram_sq = BTreeMap::new();
    let mut link_sq = BTreeMap::new();
    let mut bdry_sq = BTreeMap::new();
    let mut pairs: HashMap<(usize, usize), ChainD> = HashMap::new();
    for i in 0..squares.len() {
        for j in 0..squares.len() {
            let g = count(&intersect_d(&starred[i], &squares[j])?);
            if !g.is_zero() {
                gram_sq.insert((i, j), g);
            }
            let l = count(&intersect_d(&squares[i], &boundaries[j])?);
            if !l.is_zero() {
                link_sq.insert((i, j), l);
            }
            if point_axis(i) != point_axis(j) {
                let p = intersect_d(&squares[i], &squares[j])?;
                if !p.is_zero() {
                    let b = count(&boundary_d(&p));
                    if !b.is_zero() {
                        bdry_sq.insert((i, j), b);
                    }
                    pairs.insert((i, j), p);
                }
            }
        }
    }
    let gram = congruence(&basis, &gram_sq);
    let linking = congruence(&basis, &link_sq);
    let bdry = congruence(&basis, &bdry_sq);

    // triple form on squares: point axes must be pairwise distinct
    let mut triple_sq: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    let mut keys: Vec<&(usize, usize)> = pairs.keys().collect();
    keys.sort_unstable();
    for &(i, j) in keys {
        let p = &pairs[&(i, j)];
        let axis = 3 - point_axis(i) - point_axis(j);
        for k in (axis..squares.len()).step_by(3) {
            let t = count(&intersect_d(p, &squares[k])?);
            if !t.is_zero() {
                triple_sq.insert((i, j, k), t);
            }
        }
    }
    let triple = contract_triple(&basis, &triple_sq);
    log::info!("{} nonzero square triples, {} on V", triple_sq.len(), triple.len());

    let definiteness = ldl_inertia(&gram);
    let d = match solve_exact(&gram, &linking) {
        Ok(d) => Some(d),
        Err(e) => {
            log::warn!("inner product is singular: {e}");
            None
        }
    };
    let d_self_adjoint = match &d {
        Some(d) => is_transpose_symmetric(&mat_mul(&gram, d)),
        None => false,
    };
    let dim = basis.len();
    let checks = FluidChecks {
        gram_symmetric: is_transpose_symmetric(&gram),
        linking_symmetric: is_transpose_symmetric(&linking),
        triple_alternating: alternation_holds(&triple),
        triple_entries_checked: triple.len(),
        boundary_condition_violations: bdry.iter().flatten().filter(|v| !v.is_zero()).count(),
        boundary_condition_pairs: dim * dim,
        d_self_adjoint,
    };
    Ok(FluidAlgebra { n, aug: aug.clone(), complex, basis, gram, linking, triple, d, definiteness, checks })
}

fn mat_mul(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let (n, m) = (a.len(), b.first().map_or(0, Vec::len));
    let mut out = vec![vec![Rational::zero(); m]; n];
    for i in 0..n {
        for (k, bk) in b.iter().enumerate() {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..m {
                if !bk[j].is_zero() {
                    out[i][j] += &a[i][k] * &bk[j];
                }
            }
        }
    }
    out
}

/// `T_V[a,b,c] = Σ B_ia B_jb B_kc T[i,j,k]`, one index at a time.
fn contract_triple(
    basis: &[SquareVector],
    t: &BTreeMap<(usize, usize, usize), Rational>,
) -> BTreeMap<(usize, usize, usize), Rational> {
    // which basis vectors touch each square
    let mut touching: HashMap<usize, Vec<(usize, Rational)>> = HashMap::new();
    for (a, v) in basis.iter().enumerate() {
        for (i, c) in v {
            touching.entry(*i).or_default().push((a, c.clone()));
        }
    }
    let empty = Vec::new();
    let through = |i: &usize| touching.get(i).unwrap_or(&empty);
    let mut stage: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    for ((i, j, k), v) in t {
        for (c, bc) in through(k) {
            *stage.entry((*i, *j, *c)).or_insert_with(Rational::zero) += v * bc;
        }
    }
    let mut stage2: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    for ((i, j, c), v) in stage.into_iter().filter(|(_, v)| !v.is_zero()) {
        for (b, bb) in through(&j) {
            *stage2.entry((i, *b, c)).or_insert_with(Rational::zero) += &v * bb;
        }
    }
    let mut out: BTreeMap<(usize, usize, usize), Rational> = BTreeMap::new();
    for ((i, b, c), v) in stage2.into_iter().filter(|(_, v)| !v.is_zero()) {
        for (a, ba) in through(&i) {
            *out.entry((*a, b, c)).or_insert_with(Rational::zero) += &v * ba;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn digest_matrix(m: &[Vec<Rational>]) -> String {
    let mut h = Sha256::new();
    for row in m {
        for v in row {
            h.update(format_rational(v).as_bytes());
            h.update(b",");
        }
        h.update(b"\n");
    }
    hex(&h.finalize())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub points: usize,
    pub sticks: usize,
    pub squares: usize,
    pub cubes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checksums {
    pub gram: String,
    pub linking: String,
    pub triple: String,
    pub d: Option<String>,
}

/// Summary written by `fluid build`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub n: u32,
    pub delta: String,
    pub cells: CellCounts,
    pub dim_v: usize,
    pub triple_nonzero: usize,
    pub definiteness: Definiteness,
    pub checks: FluidChecks,
    pub checksums: Checksums,
}

impl FluidAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Basis vectors of `V` as chains of squares.
    pub fn basis_chains(&self) -> Vec<ChainD> {
        self.basis
            .iter()
            .map(|v| {
                ChainD::from_terms(
                    &self.complex.lattices,
                    v.iter().map(|(i, c)| (c.clone(), self.complex.squares[*i].clone())),
                )
                .expect("canonical squares")
            })
            .collect()
    }

    pub fn summary(&self) -> BuildSummary {
        let mut th = Sha256::new();
        for ((a, b, c), v) in &self.triple {
            th.update(format!("{a},{b},{c}:{}\n", format_rational(v)).as_bytes());
        }
        BuildSummary {
            n: self.n,
            delta: format_rational(self.aug.delta()),
            cells: CellCounts {
                points: self.complex.points.len(),
                sticks: self.complex.sticks.len(),
                squares: self.complex.squares.len(),
                cubes: self.complex.cubes.len(),
            },
            dim_v: self.dim(),
            triple_nonzero: self.triple.len(),
            definiteness: self.definiteness.clone(),
            checks: self.checks.clone(),
            checksums: Checksums {
                gram: digest_matrix(&self.gram),
                linking: digest_matrix(&self.linking),
                triple: hex(&th.finalize()),
                d: self.d.as_deref().map(digest_matrix),
            },
        }
    }
}

fn to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().expect("finite rational")
}

fn dense(m: &[Vec<Rational>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| to_f64(&m[i][j]))
}

enum Factor {
    Cholesky(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

/// Floating-point view of a fluid algebra, ready for time stepping.
pub struct FluidFlow {
    pub gram: DMatrix<f64>,
    pub linking: DMatrix<f64>,
    pub d: DMatrix<f64>,
    triple: Vec<(usize, usize, usize, f64)>,
    factor: Factor,
}

impl FluidFlow {
    pub fn new(f: &FluidAlgebra) -> Result<Self> {
        let d = f
            .d
            .as_ref()
            .ok_or_else(|| TiaError::SingularGram(format!("N={} delta={}", f.n, format_rational(f.aug.delta()))))?;
        let gram = dense(&f.gram);
        let factor = match gram.clone().cholesky() {
            Some(c) => Factor::Cholesky(c),
            None => Factor::Lu(gram.clone().lu()),
        };
        Ok(FluidFlow {
            linking: dense(&f.linking),
            d: dense(d),
            triple: f.triple.iter().map(|((a, b, c), v)| (*a, *b, *c, to_f64(v))).collect(),
            gram,
            factor,
        })
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    /// `Ẋ` with `G Ẋ = T(X, DX, ·)`.
    pub fn rhs(&self, x: &DVector<f64>) -> DVector<f64> {
        let y = &self.d * x;
        let mut f = DVector::zeros(self.dim());
        for &(a, b, c, v) in &self.triple {
            f[c] += v * x[a] * y[b];
        }
        match &self.factor {
            Factor::Cholesky(c) => c.solve(&f),
            Factor::Lu(lu) => lu.solve(&f).unwrap_or(f),
        }
    }

    pub fn energy(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.gram * x))
    }

    pub fn helicity(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.linking * x))
    }

    /// Random state with unit energy.
    pub fn random_state(&self, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DVector::from_fn(self.dim(), |_, _| StandardNormal.sample(&mut rng));
        let e = self.energy(&x);
        if e > 0.0 {
            x / e.sqrt()
        } else {
            x
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

pub const MIDPOINT_TOL: f64 = 1e-13;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub step: usize,
    pub time: f64,
    pub energy: f64,
    pub helicity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub state: DVector<f64>,
}

impl Trajectory {
    pub fn max_relative_energy_drift(&self) -> f64 {
        relative_drift(self.samples.iter().map(|s| s.energy))
    }

    pub fn max_relative_helicity_drift(&self) -> f64 {
        relative_drift(self.samples.iter().map(|s| s.helicity))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,time,energy,helicity\n");
        for s in &self.samples {
            out.push_str(&format!("{},{:.17e},{:.17e},{:.17e}\n", s.step, s.time, s.energy, s.helicity));
        }
        out
    }
}

fn relative_drift(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    let Some(&first) = v.first() else { return 0.0 };
    let scale = if first.abs() > 0.0 { first.abs() } else { 1.0 };
    v.iter().map(|x| (x - first).abs() / scale).fold(0.0, f64::max)
}

fn rk4_step(flow: &FluidFlow, x: &DVector<f64>, dt: f64) -> DVector<f64> {
    let k1 = flow.rhs(x);
    let k2 = flow.rhs(&(x + &k1 * (dt / 2.0)));
    let k3 = flow.rhs(&(x + &k2 * (dt / 2.0)));
    let k4 = flow.rhs(&(x + &k3 * dt));
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

fn midpoint_step(flow: &FluidFlow, x: &DVector<f64>, dt: f64, step: usize) -> Result<DVector<f64>> {
    let mut next = x + flow.rhs(x) * dt;
    let mut residual = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITER {
        let update = x + flow.rhs(&((x + &next) * 0.5)) * dt;
        residual = (&update - &next).amax();
        next = update;
        if residual <= MIDPOINT_TOL * (1.0 + next.amax()) {
            return Ok(next);
        }
    }
    Err(TiaError::MidpointDiverged { step, residual })
}

pub fn integrate(flow: &FluidFlow, x0: &DVector<f64>, dt: f64, steps: usize, method: Method) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TiaError::Config(format!("time step must be positive, got {dt}")));
    }
    let sample = |step: usize, x: &DVector<f64>| Sample {
        step,
        time: step as f64 * dt,
        energy: flow.energy(x),
        helicity: flow.helicity(x),
    };
    let mut x = x0.clone();
    let mut samples = vec![sample(0, &x)];
    for step in 1..=steps {
        x = match method {
            Method::Rk4 => rk4_step(flow, &x, dt),
            Method::ImplicitMidpoint => midpoint_step(flow, &x, dt, step)?,
        };
        samples.push(sample(step, &x));
    }
    Ok(Trajectory { samples, state: x })
}

/// `|X(dt) - X(dt/2)| / |X(dt/2) - X(dt/4)|` at a common end time `steps * dt`;
/// about `2^p` for a method of order `p`.
pub fn self_convergence_ratio(flow: &FluidFlow, x0: &DVector<f64>, dt: f64, steps: usize, method: Method) -> Result<f64> {
    let end = |k: usize| integrate(flow, x0, dt / k as f64, steps * k, method).map(|t| t.state);
    let (coarse, mid, fine) = (end(1)?, end(2)?, end(4)?);
    Ok((&coarse - &mid).norm() / (&mid - &fine).norm())
}

/// Final state written next to the run CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub n: u32,
    pub delta: String,
    pub method: Method,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub time: f64,
    pub energy: f64,
    pub helicity: f64,
    pub state: Vec<f64>,
}
