//! The d-dimensional algebra as a graded tensor product of one-dimensional
//! factors, and the star involution on points and 2h-cubes.
//!
//! Signs follow the axis-descending Koszul rule: moving a factor past the
//! factors on higher axes picks up their codimensions.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TiaError};
use crate::exactnum::{format_rational, parse_rational, Rational};
use crate::lattice::{CellKind, Chain, Gen1D, GenJson, Lattice1D, LatticeJson};
use crate::tia1d::{self, Table};

/// Which side of the tensor product carries the Koszul signs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Convention {
    /// `τ = Σ_{i<j} codim(g_i) codim(g'_j)` and `σ_i = Σ_{j>i} codim(g_j)`.
    #[default]
    AxisDescending,
    /// `τ = Σ_{i>j} codim(g_i) codim(g'_j)` and `σ_i = Σ_{j<i} codim(g_j)`.
    AxisAscending,
}

impl Convention {
    fn interchange(self, g: &GenD, h: &GenD) -> u32 {
        let d = g.factors.len();
        let mut tau = 0;
        for i in 0..d {
            for j in 0..d {
                let counted = match self {
                    Convention::AxisDescending => i < j,
                    Convention::AxisAscending => i > j,
                };
                if counted {
                    tau += g.factors[i].codim() * h.factors[j].codim();
                }
            }
        }
        tau
    }

    fn boundary_shift(self, g: &GenD, axis: usize) -> u32 {
        let range = match self {
            Convention::AxisDescending => axis + 1..g.factors.len(),
            Convention::AxisAscending => 0..axis,
        };
        g.factors[range].iter().map(Gen1D::codim).sum()
    }
}

fn sign(exponent: u32) -> Rational {
    if exponent.is_multiple_of(2) {
        Rational::one()
    } else {
        -Rational::one()
    }
}

/// One generator per axis.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenD {
    pub factors: Vec<Gen1D>,
}

impl GenD {
    pub fn new(factors: Vec<Gen1D>) -> Self {
        GenD { factors }
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn codim(&self) -> u32 {
        self.factors.iter().map(Gen1D::codim).sum()
    }

    pub fn decoration_total(&self) -> u32 {
        self.factors.iter().map(Gen1D::decoration_total).sum()
    }
}

impl fmt::Display for GenD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|g| g.to_string()).collect();
        write!(f, "{}", parts.join("⊗"))
    }
}

impl fmt::Debug for GenD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Rational combination of d-dimensional generators over per-axis lattices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChainD {
    lattices: Vec<Lattice1D>,
    terms: BTreeMap<GenD, Rational>,
}

impl ChainD {
    pub fn zero(lattices: &[Lattice1D]) -> Self {
        ChainD { lattices: lattices.to_vec(), terms: BTreeMap::new() }
    }

    pub fn from_gen(lattices: &[Lattice1D], g: GenD) -> Result<Self> {
        ChainD::from_terms(lattices, [(Rational::one(), g)])
    }

    pub fn from_terms<I>(lattices: &[Lattice1D], terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, GenD)>,
    {
        let mut out = ChainD::zero(lattices);
        for (c, g) in terms {
            let g = out.canonical(g)?;
            out.push(g, c);
        }
        Ok(out)
    }

    fn canonical(&self, g: GenD) -> Result<GenD> {
        if g.dim() != self.dim() {
            return Err(TiaError::InvalidGenerator(format!(
                "{g} has {} factors on a {}-dimensional lattice",
                g.dim(),
                self.dim()
            )));
        }
        let factors = g
            .factors
            .into_iter()
            .zip(&self.lattices)
            .map(|(f, l)| l.canonical(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(GenD { factors })
    }

    pub(crate) fn push(&mut self, g: GenD, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        let slot = self.terms.entry(g).or_insert_with(Rational::zero);
        *slot += coeff;
        if slot.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    fn push_chain(&mut self, other: &ChainD, scale: &Rational) {
        for (g, c) in &other.terms {
            self.push(g.clone(), c * scale);
        }
    }

    pub fn dim(&self) -> usize {
        self.lattices.len()
    }

    pub fn lattices(&self) -> &[Lattice1D] {
        &self.lattices
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GenD, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &GenD) -> Rational {
        self.terms.get(g).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_lattices(&self, other: &ChainD) -> Result<()> {
        if self.lattices != other.lattices {
            return Err(TiaError::LatticeMismatch(format!("{:?} vs {:?}", self.lattices, other.lattices)));
        }
        Ok(())
    }

    pub fn add(&self, other: &ChainD) -> Result<ChainD> {
        self.check_lattices(other)?;
        let mut out = self.clone();
        out.push_chain(other, &Rational::one());
        Ok(out)
    }

    pub fn sub(&self, other: &ChainD) -> Result<ChainD> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> ChainD {
        let mut out = ChainD::zero(&self.lattices);
        out.push_chain(self, c);
        out
    }

    pub fn neg(&self) -> ChainD {
        self.scale(&-Rational::one())
    }

    pub fn to_json_value(&self) -> ChainDJson {
        ChainDJson {
            lattices: self.lattices.iter().map(LatticeJson::from).collect(),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| TermDJson {
                    coeff: format_rational(c),
                    factors: g.factors.iter().map(GenJson::from).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("chain serializes")
    }

    pub fn from_json(s: &str) -> Result<ChainD> {
        let raw: ChainDJson = serde_json::from_str(s).map_err(|e| TiaError::Parse(e.to_string()))?;
        ChainD::try_from(raw)
    }
}

impl fmt::Display for ChainD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(g, c)| format!("{}·{g}", format_rational(c)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for ChainD {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDJson {
    pub coeff: String,
    pub factors: Vec<GenJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainDJson {
    pub lattices: Vec<LatticeJson>,
    pub terms: Vec<TermDJson>,
}

impl TryFrom<ChainDJson> for ChainD {
    type Error = TiaError;
    fn try_from(raw: ChainDJson) -> Result<Self> {
        let lattices = raw
            .lattices
            .iter()
            .enumerate()
            .map(|(i, l)| Lattice1D::try_from(l).map_err(|e| TiaError::Parse(format!("lattices[{i}]: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if lattices.is_empty() {
            return Err(TiaError::Parse("lattices: need at least one axis".into()));
        }
        let mut out = ChainD::zero(&lattices);
        for (i, t) in raw.terms.iter().enumerate() {
            let coeff = parse_rational(&t.coeff).map_err(|e| TiaError::Parse(format!("terms[{i}].coeff: {e}")))?;
            if t.factors.len() != lattices.len() {
                return Err(TiaError::Parse(format!(
                    "terms[{i}].factors: expected {} factors, found {}",
                    lattices.len(),
                    t.factors.len()
                )));
            }
            let factors = t
                .factors
                .iter()
                .enumerate()
                .map(|(k, gj)| {
                    Gen1D::try_from(gj).map_err(|e| TiaError::Parse(format!("terms[{i}].factors[{k}].{e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let g = out
                .canonical(GenD { factors })
                .map_err(|e| TiaError::Parse(format!("terms[{i}].factors: {e}")))?;
            out.push(g, coeff);
        }
        Ok(out)
    }
}

/// Expands `coeff · c_0 ⊗ c_1 ⊗ ...` into `out`.
fn push_tensor(out: &mut ChainD, coeff: &Rational, factors: &[Chain]) {
    let mut partial: Vec<(Rational, Vec<Gen1D>)> = vec![(coeff.clone(), Vec::with_capacity(factors.len()))];
    for c in factors {
        let mut next = Vec::with_capacity(partial.len() * c.len());
        for (k, prefix) in &partial {
            for (g, a) in c.terms() {
                let mut v = prefix.clone();
                v.push(*g);
                next.push((k * a, v));
            }
        }
        partial = next;
    }
    for (c, factors) in partial {
        out.push(GenD { factors }, c);
    }
}

pub fn boundary_d_with(conv: Convention, x: &ChainD) -> ChainD {
    let mut out = ChainD::zero(&x.lattices);
    for (g, c) in x.terms() {
        for axis in 0..g.dim() {
            let lattice = &x.lattices[axis];
            let db = tia1d::boundary(&Chain::from_gen(lattice, g.factors[axis]).expect("canonical factor"));
            if db.is_zero() {
                continue;
            }
            let mut factors: Vec<Chain> = g
                .factors
                .iter()
                .zip(&x.lattices)
                .map(|(f, l)| Chain::from_gen(l, *f).expect("canonical factor"))
                .collect();
            factors[axis] = db;
            push_tensor(&mut out, &(c * sign(conv.boundary_shift(g, axis))), &factors);
        }
    }
    out
}

pub fn boundary_d(x: &ChainD) -> ChainD {
    boundary_d_with(Convention::default(), x)
}

/// Product of two generators, factor by factor.
pub fn intersect_gen_d(conv: Convention, table: Table, lattices: &[Lattice1D], g: &GenD, h: &GenD) -> ChainD {
    let mut out = ChainD::zero(lattices);
    let mut factors = Vec::with_capacity(g.dim());
    for ((a, b), l) in g.factors.iter().zip(&h.factors).zip(lattices) {
        let p = tia1d::intersect_gen_with(table, l, a, b);
        if p.is_zero() {
            return out;
        }
        factors.push(p);
    }
    push_tensor(&mut out, &sign(conv.interchange(g, h)), &factors);
    out
}

pub fn intersect_d_with(conv: Convention, table: Table, x: &ChainD, y: &ChainD) -> Result<ChainD> {
    x.check_lattices(y)?;
    let mut out = ChainD::zero(&x.lattices);
    for (g, a) in x.terms() {
        for (h, b) in y.terms() {
            out.push_chain(&intersect_gen_d(conv, table, &x.lattices, g, h), &(a * b));
        }
    }
    Ok(out)
}

pub fn intersect_d(x: &ChainD, y: &ChainD) -> Result<ChainD> {
    intersect_d_with(Convention::default(), Table::Standard, x, y)
}

/// Centre of a factor in `W`: a point, or an interval of length two.
fn w_centre(g: &Gen1D) -> Option<i64> {
    match g.kind {
        CellKind::Point => Some(g.a),
        CellKind::Interval if g.b - g.a == 2 => Some(g.a + 1),
        _ => None,
    }
}

/// Swaps points and 2h-intervals on every axis, keeping decorations, with
/// the sign `(-1)^τ(*g, g)` that makes `#(*a ⋔ a)` count positively.
pub fn star_w(x: &ChainD) -> Result<ChainD> {
    let mut out = ChainD::zero(&x.lattices);
    for (g, c) in x.terms() {
        let mut factors = Vec::with_capacity(g.dim());
        for f in &g.factors {
            let centre = w_centre(f).ok_or_else(|| TiaError::NotInW(format!("{f} in {g}")))?;
            factors.push(match f.kind {
                CellKind::Point => Gen1D::interval(centre - 1, centre + 1, f.dec.m, f.dec.n),
                _ => Gen1D::point(centre, f.dec.m, f.dec.n),
            });
        }
        let starred = out.canonical(GenD { factors })?;
        let s = sign(Convention::default().interchange(&starred, g));
        out.push(starred, c * s);
    }
    Ok(out)
}
