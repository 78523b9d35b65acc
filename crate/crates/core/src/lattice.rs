//! One-dimensional lattices, decorated generators and formal chains.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TiaError};
use crate::exactnum::{format_rational, parse_rational, Rational};

/// A line `hZ` or a circle `hZ/NhZ`. Positions are integers in units of `h`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice1D {
    spacing: Rational,
    period: Option<u32>,
}

impl Lattice1D {
    pub fn line() -> Self {
        Lattice1D { spacing: Rational::one(), period: None }
    }

    pub fn periodic(n: u32) -> Result<Self> {
        Lattice1D::new(Rational::one(), Some(n))
    }

    pub fn new(spacing: Rational, period: Option<u32>) -> Result<Self> {
        if spacing <= Rational::zero() {
            return Err(TiaError::InvalidLattice(format!(
                "spacing must be positive, got {}",
                format_rational(&spacing)
            )));
        }
        if let Some(n) = period {
            if n < 3 {
                return Err(TiaError::InvalidLattice(format!("period must be at least 3, got {n}")));
            }
        }
        Ok(Lattice1D { spacing, period })
    }

    pub fn spacing(&self) -> &Rational {
        &self.spacing
    }

    pub fn period(&self) -> Option<u32> {
        self.period
    }

    pub fn reduce(&self, p: i64) -> i64 {
        match self.period {
            Some(n) => p.rem_euclid(n as i64),
            None => p,
        }
    }

    /// Canonical representative: positions reduced, periodic intervals stored as
    /// a start in `[0, N)` and a length in `[1, N-1]`.
    pub fn canonical(&self, g: Gen1D) -> Result<Gen1D> {
        if g.kind == CellKind::Interval {
            let len = g.b - g.a;
            if len < 1 {
                return Err(TiaError::InvalidGenerator(format!(
                    "interval needs a < b, got a={} b={}",
                    g.a, g.b
                )));
            }
            if let Some(n) = self.period {
                if len > n as i64 - 1 {
                    return Err(TiaError::InvalidGenerator(format!(
                        "interval length {len} exceeds period {n} minus one"
                    )));
                }
            }
            let a = self.reduce(g.a);
            return Ok(Gen1D { a, b: a + len, ..g });
        }
        let a = self.reduce(g.a);
        Ok(Gen1D { a, b: a, ..g })
    }
}

impl Default for Lattice1D {
    fn default() -> Self {
        Lattice1D::line()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Point,
    Interval,
    Infinitesimal,
}

/// Exponents of the endpoint density `(1+z)^m (1-z)^n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Decoration {
    pub m: u32,
    pub n: u32,
}

impl Decoration {
    pub fn new(m: u32, n: u32) -> Self {
        Decoration { m, n }
    }

    pub fn total(&self) -> u32 {
        self.m + self.n
    }

    pub fn smaller(&self) -> u32 {
        self.m.min(self.n)
    }
}

/// A decorated one-dimensional cell: a wiggled point, a wiggled interval
/// `[a, b]` with `a < b`, or an infinitesimal interval at `a` (stored with `b == a`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen1D {
    pub kind: CellKind,
    pub a: i64,
    pub b: i64,
    pub dec: Decoration,
}

impl Gen1D {
    pub fn point(a: i64, m: u32, n: u32) -> Self {
        Gen1D { kind: CellKind::Point, a, b: a, dec: Decoration::new(m, n) }
    }

    /// # Panics
    /// If `a >= b`.
    pub fn interval(a: i64, b: i64, m: u32, n: u32) -> Self {
        assert!(a < b, "interval needs a < b, got {a}, {b}");
        Gen1D { kind: CellKind::Interval, a, b, dec: Decoration::new(m, n) }
    }

    pub fn infinitesimal(a: i64, m: u32, n: u32) -> Self {
        Gen1D { kind: CellKind::Infinitesimal, a, b: a, dec: Decoration::new(m, n) }
    }

    /// Points are codimension one; both kinds of interval are codimension zero.
    pub fn codim(&self) -> u32 {
        match self.kind {
            CellKind::Point => 1,
            CellKind::Interval | CellKind::Infinitesimal => 0,
        }
    }

    pub fn decoration_total(&self) -> u32 {
        self.dec.total()
    }

    pub fn translate(&self, k: i64) -> Gen1D {
        Gen1D { a: self.a + k, b: self.b + k, ..*self }
    }

    pub fn with_dec(&self, m: u32, n: u32) -> Gen1D {
        Gen1D { dec: Decoration::new(m, n), ..*self }
    }
}

impl fmt::Debug for Gen1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Gen1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Decoration { m, n } = self.dec;
        match self.kind {
            CellKind::Point => write!(f, "∅_{}^{{{m},{n}}}", self.a),
            CellKind::Interval => write!(f, "x_{{{},{}}}^{{{m},{n}}}", self.a, self.b),
            CellKind::Infinitesimal => write!(f, "x_{{{},{}}}^{{{m},{n}}}", self.a, self.a),
        }
    }
}

/// A finite rational combination of generators on one lattice. Zero
/// coefficients are never stored, so structural equality is chain equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chain {
    lattice: Lattice1D,
    terms: BTreeMap<Gen1D, Rational>,
}

impl Chain {
    pub fn zero(lattice: &Lattice1D) -> Self {
        Chain { lattice: lattice.clone(), terms: BTreeMap::new() }
    }

    pub fn from_gen(lattice: &Lattice1D, g: Gen1D) -> Result<Self> {
        let mut c = Chain::zero(lattice);
        c.push(lattice.canonical(g)?, Rational::one());
        Ok(c)
    }

    pub fn from_terms<I>(lattice: &Lattice1D, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Gen1D)>,
    {
        let mut c = Chain::zero(lattice);
        for (coeff, g) in terms {
            c.push(lattice.canonical(g)?, coeff);
        }
        Ok(c)
    }

    /// Adds `coeff * g`; `g` must already be canonical for this lattice.
    pub(crate) fn push(&mut self, g: Gen1D, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(g) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub(crate) fn push_chain(&mut self, other: &Chain, scale: &Rational) {
        for (g, c) in &other.terms {
            self.push(*g, c * scale);
        }
    }

    pub fn lattice(&self) -> &Lattice1D {
        &self.lattice
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Gen1D, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, g: &Gen1D) -> Rational {
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

    pub(crate) fn check_lattice(&self, other: &Chain) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(TiaError::LatticeMismatch(format!(
                "{:?} vs {:?}",
                self.lattice, other.lattice
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.check_lattice(other)?;
        let mut out = self.clone();
        out.push_chain(other, &Rational::one());
        Ok(out)
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Chain {
        let mut out = Chain::zero(&self.lattice);
        out.push_chain(self, c);
        out
    }

    pub fn neg(&self) -> Chain {
        self.scale(&-Rational::one())
    }

    /// Keeps only the terms whose generator satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(&Gen1D) -> bool) -> Chain {
        Chain {
            lattice: self.lattice.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(g, _)| keep(g))
                .map(|(g, c)| (*g, c.clone()))
                .collect(),
        }
    }

    pub fn to_json_value(&self) -> ChainJson {
        ChainJson {
            lattice: LatticeJson::from(&self.lattice),
            terms: self
                .terms
                .iter()
                .map(|(g, c)| TermJson { coeff: format_rational(c), gen: GenJson::from(g) })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("chain serializes")
    }

    pub fn from_json(s: &str) -> Result<Chain> {
        let raw: ChainJson = serde_json::from_str(s).map_err(|e| TiaError::Parse(e.to_string()))?;
        Chain::try_from(raw)
    }
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Chain {
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

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeJson {
    pub h: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<u32>,
}

impl From<&Lattice1D> for LatticeJson {
    fn from(l: &Lattice1D) -> Self {
        LatticeJson { h: format_rational(l.spacing()), period: l.period() }
    }
}

impl TryFrom<&LatticeJson> for Lattice1D {
    type Error = TiaError;
    fn try_from(j: &LatticeJson) -> Result<Self> {
        let h = parse_rational(&j.h).map_err(|e| TiaError::Parse(format!("lattice.h: {e}")))?;
        Lattice1D::new(h, j.period)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenJson {
    pub kind: CellKind,
    pub a: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    pub m: u32,
    pub n: u32,
}

impl From<&Gen1D> for GenJson {
    fn from(g: &Gen1D) -> Self {
        GenJson {
            kind: g.kind,
            a: g.a,
            b: (g.kind == CellKind::Interval).then_some(g.b),
            m: g.dec.m,
            n: g.dec.n,
        }
    }
}

impl TryFrom<&GenJson> for Gen1D {
    type Error = TiaError;
    fn try_from(j: &GenJson) -> Result<Self> {
        let dec = Decoration::new(j.m, j.n);
        match (j.kind, j.b) {
            (CellKind::Interval, Some(b)) => {
                if j.a >= b {
                    return Err(TiaError::Parse(format!("gen.b: interval needs a < b, got a={} b={b}", j.a)));
                }
                Ok(Gen1D { kind: CellKind::Interval, a: j.a, b, dec })
            }
            (CellKind::Interval, None) => Err(TiaError::Parse("gen.b: missing for interval".into())),
            (kind, None) => Ok(Gen1D { kind, a: j.a, b: j.a, dec }),
            (kind, Some(b)) if b == j.a => Ok(Gen1D { kind, a: j.a, b, dec }),
            (kind, Some(_)) => Err(TiaError::Parse(format!("gen.b: not allowed for {kind:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coeff: String,
    pub gen: GenJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainJson {
    pub lattice: LatticeJson,
    pub terms: Vec<TermJson>,
}

impl TryFrom<ChainJson> for Chain {
    type Error = TiaError;
    fn try_from(raw: ChainJson) -> Result<Self> {
        let lattice = Lattice1D::try_from(&raw.lattice)?;
        let mut out = Chain::zero(&lattice);
        for (i, t) in raw.terms.iter().enumerate() {
            let coeff = parse_rational(&t.coeff)
                .map_err(|e| TiaError::Parse(format!("terms[{i}].coeff: {e}")))?;
            let g = Gen1D::try_from(&t.gen)
                .map_err(|e| TiaError::Parse(format!("terms[{i}].{e}")))?;
            let g = lattice
                .canonical(g)
                .map_err(|e| TiaError::Parse(format!("terms[{i}].gen: {e}")))?;
            out.push(g, coeff);
        }
        Ok(out)
    }
}
