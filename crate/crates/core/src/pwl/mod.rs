//! Exact piecewise-linear term functions over `[0,1]^n`.

mod engine;
mod index;
mod sandwich;

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use engine::{compile_exact, mv_multiple, truncated_multiple, Op};
pub use sandwich::envelope_formulas;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::geometry::{
    check_dim, clip, format_point, split_off, AffineFn, Point, RationalPolyhedron, Simplex, SimplicialComplex,
};
use crate::par;
use crate::scalar::{format_rational, in_unit, parse_rational, Rational};
use engine::Engine;
use index::{bbox_of, CellIndex};

pub const DEFAULT_CELL_CAP: usize = 1_000_000;

static CELL_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_CELL_CAP);

/// Process-wide bound on the number of cells any refinement may produce.
pub fn set_cell_cap(cap: usize) {
    CELL_CAP.store(cap.max(1), Ordering::Relaxed);
}

pub fn cell_cap() -> usize {
    CELL_CAP.load(Ordering::Relaxed)
}

pub(crate) fn check_cap(cells: usize) -> Result<()> {
    let cap = cell_cap();
    if cells > cap {
        return Err(Error::CellCap { cells, cap });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoefficientClass {
    Integer,
    Rational,
}

/// Maximal linearity regions found by merging adjacent cells that carry the
/// same affine function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearityRegions {
    pub count: usize,
    pub class: CoefficientClass,
    /// lcm of every coefficient and constant denominator.
    pub denominator_lcm: BigInt,
}

/// A continuous function `[0,1]^n → [0,1]`, affine on each cell.
///
/// Cells are full-dimensional simplices with pairwise disjoint interiors
/// covering the cube. Compiled functions live on a face-to-face complex;
/// results of [`compose`] and of binary operations on unrelated complexes
/// may not be face-to-face, which no operation here relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    dim: usize,
    cells: Vec<Simplex>,
    pieces: Vec<AffineFn>,
}

#[derive(Serialize, Deserialize)]
struct PieceDump {
    c: Vec<String>,
    b: String,
}

#[derive(Serialize, Deserialize)]
struct PwlDump {
    dim: usize,
    simplices: Vec<Vec<Vec<String>>>,
    pieces: Vec<PieceDump>,
}

fn better(max: bool, a: &(Rational, Point), b: &(Rational, Point)) -> bool {
    let by_value = if max { a.0 > b.0 } else { a.0 < b.0 };
    by_value || (a.0 == b.0 && a.1 < b.1)
}

/// Best vertex value with the lexicographically least attaining point.
fn extremum<'a>(
    max: bool,
    cells: impl Iterator<Item = (&'a Simplex, &'a AffineFn)>,
) -> Option<(Rational, Point)> {
    let cells: Vec<(&Simplex, &AffineFn)> = cells.collect();
    let per_cell = par::map(&cells, |(s, f)| {
        s.vertices().iter().map(|v| (f.eval(v), v.clone())).reduce(|a, b| if better(max, &b, &a) { b } else { a })
    });
    per_cell.into_iter().flatten().reduce(|a, b| if better(max, &b, &a) { b } else { a })
}

impl PwlFunction {
    pub(crate) fn from_parts(dim: usize, cells: Vec<Simplex>, pieces: Vec<AffineFn>) -> Self {
        debug_assert_eq!(cells.len(), pieces.len());
        PwlFunction { dim, cells, pieces }
    }

    /// Validated construction: matching lengths, values in `[0,1]` and
    /// agreement on shared vertices.
    pub fn new(dim: usize, cells: Vec<Simplex>, pieces: Vec<AffineFn>) -> Result<Self> {
        check_dim(dim)?;
        if cells.len() != pieces.len() {
            return Err(Error::DimensionMismatch { expected: cells.len(), found: pieces.len() });
        }
        for (c, p) in cells.iter().zip(&pieces) {
            if c.ambient() != dim || !c.is_full() {
                return Err(Error::invalid("cells must be full-dimensional simplices of the cube"));
            }
            if p.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: p.dim() });
            }
        }
        let f = PwlFunction { dim, cells, pieces };
        f.check_range()?;
        f.check_continuity()?;
        let covered = f.cells.iter().fold(Rational::zero(), |a, c| a + c.volume());
        if !covered.is_one() {
            return Err(Error::invalid("cells do not cover the cube"));
        }
        Ok(f)
    }

    pub fn constant(n: usize, c: Rational) -> Result<Self> {
        if !in_unit(&c) {
            return Err(Error::ScalarRange(format_rational(&c)));
        }
        let cells = SimplicialComplex::kuhn(n)?.into_cells();
        let pieces = vec![AffineFn::constant(n, c); cells.len()];
        Ok(PwlFunction { dim: n, cells, pieces })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Simplex] {
        &self.cells
    }

    pub fn pieces(&self) -> &[AffineFn] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn complex(&self) -> SimplicialComplex {
        SimplicialComplex::from_cells(self.dim, self.cells.clone())
    }

    fn iter(&self) -> impl Iterator<Item = (&Simplex, &AffineFn)> {
        self.cells.iter().zip(&self.pieces)
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Rational> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        if let Some(bad) = x.iter().find(|c| !in_unit(c)) {
            return Err(Error::CoordinateOutOfRange(format_rational(bad)));
        }
        self.iter()
            .find(|(s, _)| s.contains(x))
            .map(|(_, f)| f.eval(x))
            .ok_or_else(|| Error::internal("point not covered by any cell"))
    }

    /// Minimum with the lexicographically least minimizing vertex.
    pub fn min(&self) -> (Rational, Point) {
        extremum(false, self.iter()).expect("nonempty complex")
    }

    /// Maximum with the lexicographically least maximizing vertex.
    pub fn max(&self) -> (Rational, Point) {
        extremum(true, self.iter()).expect("nonempty complex")
    }

    /// `∫_{[0,1]^n} f`, exact.
    pub fn integral(&self) -> Rational {
        let items: Vec<_> = self.iter().collect();
        par::map(&items, |(s, f)| s.volume() * f.eval(&s.barycenter()))
            .into_iter()
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn check_range(&self) -> Result<()> {
        for (s, f) in self.iter() {
            if let Some(v) = s.vertices().iter().map(|v| f.eval(v)).find(|y| !in_unit(y)) {
                return Err(Error::invalid(format!("value {} outside [0,1]", format_rational(&v))));
            }
        }
        Ok(())
    }

    /// Cells agree wherever they share a vertex.
    pub fn check_continuity(&self) -> Result<()> {
        let mut seen: HashMap<&Point, Rational> = HashMap::new();
        for (s, f) in self.iter() {
            for v in s.vertices() {
                let y = f.eval(v);
                if let Some(prev) = seen.insert(v, y.clone()) {
                    if prev != y {
                        return Err(Error::invalid(format!(
                            "discontinuity at ({})",
                            format_point(v).join(", ")
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn regions(&self) -> LinearityRegions {
        let n = self.cells.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut by_facet: HashMap<Vec<Point>, usize> = HashMap::new();
        for (i, s) in self.cells.iter().enumerate() {
            for skip in 0..s.vertices().len() {
                let key: Vec<Point> =
                    s.vertices().iter().enumerate().filter(|(j, _)| *j != skip).map(|(_, v)| v.clone()).collect();
                match by_facet.get(&key) {
                    Some(&j) if self.pieces[i] == self.pieces[j] => {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        parent[a.max(b)] = a.min(b);
                    }
                    Some(_) => {}
                    None => {
                        by_facet.insert(key, i);
                    }
                }
            }
        }
        let count = (0..n).filter(|&i| find(&mut parent, i) == i).count();
        let mut lcm = BigInt::one();
        for p in &self.pieces {
            for c in p.coeffs.iter().chain(std::iter::once(&p.constant)) {
                lcm = lcm.lcm(c.denom());
            }
        }
        let class = if lcm.is_one() { CoefficientClass::Integer } else { CoefficientClass::Rational };
        LinearityRegions { count, class, denominator_lcm: lcm }
    }

    pub fn to_json(&self) -> String {
        let dump = PwlDump {
            dim: self.dim,
            simplices: self.cells.iter().map(|s| s.vertices().iter().map(|p| format_point(p)).collect()).collect(),
            pieces: self
                .pieces
                .iter()
                .map(|p| PieceDump { c: format_point(&p.coeffs), b: format_rational(&p.constant) })
                .collect(),
        };
        serde_json::to_string(&dump).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dump: PwlDump = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        Self::from_value(dump)
    }

    pub fn from_json_value(value: &serde_json::Value) -> Result<Self> {
        let dump: PwlDump = serde_json::from_value(value.clone()).map_err(|e| Error::invalid(e.to_string()))?;
        Self::from_value(dump)
    }

    fn from_value(dump: PwlDump) -> Result<Self> {
        let cells = dump
            .simplices
            .iter()
            .map(|s| {
                let verts = s
                    .iter()
                    .map(|p| p.iter().map(|x| parse_rational(x)).collect::<Result<Point>>())
                    .collect::<Result<Vec<_>>>()?;
                Simplex::new(verts)
            })
            .collect::<Result<Vec<_>>>()?;
        let pieces = dump
            .pieces
            .iter()
            .map(|p| {
                let c = p.c.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>>>()?;
                Ok(AffineFn::new(c, parse_rational(&p.b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dump.dim, cells, pieces)
    }
}

/// Maximal-region coefficient class.
pub fn coefficient_class(f: &PwlFunction) -> CoefficientClass {
    f.regions().class
}

/// Rational lower and upper envelopes at precision index `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalPwl {
    pub precision: u32,
    pub lower: PwlFunction,
    pub upper: PwlFunction,
}

impl IntervalPwl {
    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    /// `‖upper − lower‖_u`.
    pub fn width(&self) -> Rational {
        sup_difference(&self.lower, &self.upper)
    }

    pub fn is_ordered(&self) -> bool {
        pwl_le(&self.lower, &self.upper)
    }
}

/// Output of [`compile`]: exact for L/QL formulas, an enclosure for RL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compiled {
    Exact(PwlFunction),
    Interval(IntervalPwl),
}

impl Compiled {
    pub fn lower(&self) -> &PwlFunction {
        match self {
            Compiled::Exact(f) => f,
            Compiled::Interval(iv) => &iv.lower,
        }
    }

    pub fn upper(&self) -> &PwlFunction {
        match self {
            Compiled::Exact(f) => f,
            Compiled::Interval(iv) => &iv.upper,
        }
    }

    pub fn exact(&self) -> Option<&PwlFunction> {
        match self {
            Compiled::Exact(f) => Some(f),
            Compiled::Interval(_) => None,
        }
    }
}

pub fn compile_interval(phi: &Formula, k: u32, n: usize) -> Result<IntervalPwl> {
    let (lo, hi) = envelope_formulas(phi, k);
    Ok(IntervalPwl { precision: k, lower: compile_exact(&lo, n)?, upper: compile_exact(&hi, n)? })
}

/// Compiles over `[0,1]^n`, `n` the arity of `φ`; `k` is used only for RL.
pub fn compile(phi: &Formula, k: u32) -> Result<Compiled> {
    compile_in(phi, k, phi.arity())
}

pub fn compile_in(phi: &Formula, k: u32, n: usize) -> Result<Compiled> {
    if phi.is_exact() {
        compile_exact(phi, n).map(Compiled::Exact)
    } else {
        compile_interval(phi, k, n).map(Compiled::Interval)
    }
}

/// Pieces of the common refinement: simplex, index into `f`, index into `g`.
pub fn common_refinement(f: &PwlFunction, g: &PwlFunction) -> Result<Vec<(Simplex, usize, usize)>> {
    if f.dim != g.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: g.dim });
    }
    if f.cells == g.cells {
        return Ok(f.cells.iter().enumerate().map(|(i, s)| (s.clone(), i, i)).collect());
    }
    let idx = CellIndex::new(&g.cells);
    let per_cell = par::map(&(0..f.cells.len()).collect::<Vec<_>>(), |&i| {
        let a = &f.cells[i];
        let (lo, hi) = a.bbox();
        let mut out = Vec::new();
        for j in idx.query(&lo, &hi) {
            for p in clip(a.vertices(), &g.cells[j].hrep().ineqs) {
                out.push((Simplex::from_sorted_unchecked(p), i, j));
            }
        }
        out
    });
    let total: usize = per_cell.iter().map(Vec::len).sum();
    check_cap(total)?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// `f ≤ g` everywhere, checked on common-refinement vertices.
pub fn pwl_le(f: &PwlFunction, g: &PwlFunction) -> bool {
    let Ok(pieces) = common_refinement(f, g) else { return false };
    par::map(&pieces, |(s, i, j)| s.vertices().iter().all(|v| f.pieces[*i].eval(v) <= g.pieces[*j].eval(v)))
        .into_iter()
        .all(|b| b)
}

/// `max (g − f)` over the cube.
pub fn sup_difference(f: &PwlFunction, g: &PwlFunction) -> Rational {
    let pieces = common_refinement(f, g).expect("same dimension");
    par::map(&pieces, |(s, i, j)| {
        s.vertices().iter().map(|v| g.pieces[*j].eval(v) - f.pieces[*i].eval(v)).max().expect("nonempty")
    })
    .into_iter()
    .max()
    .expect("nonempty complex")
}

/// Exact pointwise equality.
///
/// Two cells carrying different affine functions may only meet in a
/// lower-dimensional set; otherwise the functions differ there.
pub fn pwl_equal(f: &PwlFunction, g: &PwlFunction) -> bool {
    if f.dim != g.dim {
        return false;
    }
    if f.cells == g.cells {
        return f.pieces == g.pieces;
    }
    let idx = CellIndex::new(&g.cells);
    par::map(&(0..f.cells.len()).collect::<Vec<_>>(), |&i| {
        let a = &f.cells[i];
        let (lo, hi) = a.bbox();
        idx.query(&lo, &hi)
            .into_iter()
            .filter(|&j| g.pieces[j] != f.pieces[i])
            .all(|j| clip(a.vertices(), &g.cells[j].hrep().ineqs).is_empty())
    })
    .into_iter()
    .all(|b| b)
}

fn common_cells(f: &PwlFunction, g: &PwlFunction) -> Result<(Vec<Simplex>, Vec<AffineFn>, Vec<AffineFn>)> {
    let pieces = common_refinement(f, g)?;
    let mut cells = Vec::with_capacity(pieces.len());
    let mut fs = Vec::with_capacity(pieces.len());
    let mut gs = Vec::with_capacity(pieces.len());
    for (s, i, j) in pieces {
        cells.push(s);
        fs.push(f.pieces[i].clone());
        gs.push(g.pieces[j].clone());
    }
    Ok((cells, fs, gs))
}

/// Pointwise connective on term functions.
pub fn apply_connective(op: &Op, f: &PwlFunction, g: Option<&PwlFunction>) -> Result<PwlFunction> {
    match (op.is_binary(), g) {
        (false, None) => {
            let mut e = Engine::new(f.dim, f.cells.clone());
            e.push(f.pieces.clone());
            e.apply(op)?;
            e.finish()
        }
        (true, Some(g)) => {
            let (cells, fs, gs) = common_cells(f, g)?;
            let mut e = Engine::new(f.dim, cells);
            e.push(fs);
            e.push(gs);
            e.apply(op)?;
            e.finish()
        }
        (true, None) => Err(Error::invalid("binary connective needs two arguments")),
        (false, Some(_)) => Err(Error::invalid("unary connective takes one argument")),
    }
}

/// Vertices of a cell with the affine function on it.
type Piece = (Vec<Point>, AffineFn);

/// `f ∘ (λ_1, …, λ_m)`.
pub fn compose(f: &PwlFunction, lambdas: &[PwlFunction]) -> Result<PwlFunction> {
    if lambdas.len() != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: lambdas.len() });
    }
    let Some(first) = lambdas.first() else {
        return Err(Error::invalid("composition needs at least one inner function"));
    };
    let n = first.dim;
    if let Some(bad) = lambdas.iter().find(|l| l.dim != n) {
        return Err(Error::DimensionMismatch { expected: n, found: bad.dim });
    }
    // common refinement of the inner functions, with the affine map per piece
    let mut pieces: Vec<(Vec<Point>, Vec<AffineFn>)> =
        first.iter().map(|(s, a)| (s.vertices().to_vec(), vec![a.clone()])).collect();
    for lam in &lambdas[1..] {
        let idx = CellIndex::new(&lam.cells);
        let next = par::flat_map(&pieces, |(verts, maps)| {
            let (lo, hi) = bbox_of(verts);
            let mut out = Vec::new();
            for j in idx.query(&lo, &hi) {
                for p in clip(verts, &lam.cells[j].hrep().ineqs) {
                    let mut m = maps.clone();
                    m.push(lam.pieces[j].clone());
                    out.push((p, m));
                }
            }
            out
        });
        check_cap(next.len())?;
        pieces = next;
    }
    let idx = CellIndex::new(&f.cells);
    let parts: Vec<Result<Vec<Piece>>> = par::map(&pieces, |(verts, maps)| {
        let image: Vec<Point> =
            verts.iter().map(|v| maps.iter().map(|m| m.eval(v)).collect()).collect();
        let (lo, hi) = bbox_of(&image);
        let mut remaining = vec![verts.clone()];
        let mut out = Vec::new();
        for d in idx.query(&lo, &hi) {
            if remaining.is_empty() {
                break;
            }
            let hs: Vec<AffineFn> = f.cells[d].hrep().ineqs.iter().map(|b| b.compose(maps, n)).collect();
            let piece = f.pieces[d].compose(maps, n);
            let mut rest = Vec::new();
            for r in &remaining {
                let (inside, outside) = split_off(r, &hs);
                out.extend(inside.into_iter().map(|p| (p, piece.clone())));
                rest.extend(outside);
            }
            remaining = rest;
        }
        if remaining.is_empty() {
            Ok(out)
        } else {
            Err(Error::internal("composition left part of a cell uncovered"))
        }
    });
    let mut cells = Vec::new();
    let mut affs = Vec::new();
    for part in parts {
        for (p, a) in part? {
            cells.push(Simplex::from_sorted_unchecked(p));
            affs.push(a);
        }
    }
    check_cap(cells.len())?;
    Ok(PwlFunction::from_parts(n, cells, affs))
}

/// A term function restricted to a polyhedron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedPwl {
    dim: usize,
    pieces: Vec<(Simplex, AffineFn)>,
}

impl RestrictedPwl {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[(Simplex, AffineFn)] {
        &self.pieces
    }

    /// True for the restriction to the empty polyhedron.
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn domain(&self) -> RationalPolyhedron {
        RationalPolyhedron::canonical(self.dim, self.pieces.iter().map(|(s, _)| s.clone()).collect())
    }

    pub fn min(&self) -> Option<(Rational, Point)> {
        extremum(false, self.pieces.iter().map(|(s, f)| (s, f)))
    }

    pub fn max(&self) -> Option<(Rational, Point)> {
        extremum(true, self.pieces.iter().map(|(s, f)| (s, f)))
    }

    pub fn eval(&self, x: &[Rational]) -> Option<Rational> {
        self.pieces.iter().find(|(s, _)| s.contains(x)).map(|(_, f)| f.eval(x))
    }
}

/// `f|_P`.
pub fn restrict(f: &PwlFunction, p: &RationalPolyhedron) -> Result<RestrictedPwl> {
    if p.dim() != f.dim {
        return Err(Error::DimensionMismatch { expected: f.dim, found: p.dim() });
    }
    let idx = CellIndex::new(&f.cells);
    let parts = par::map(p.simplices(), |s| {
        let (lo, hi) = s.bbox();
        let mut remaining = vec![s.vertices().to_vec()];
        let mut out = Vec::new();
        for d in idx.query(&lo, &hi) {
            if remaining.is_empty() {
                break;
            }
            let mut rest = Vec::new();
            for r in &remaining {
                let (inside, outside) = split_off(r, &f.cells[d].hrep().ineqs);
                out.extend(inside.into_iter().map(|q| (Simplex::from_sorted_unchecked(q), f.pieces[d].clone())));
                rest.extend(outside);
            }
            remaining = rest;
        }
        out
    });
    Ok(RestrictedPwl { dim: f.dim, pieces: parts.into_iter().flatten().collect() })
}

/// Equality of restricted elements: same domain, same values on it.
pub fn restricted_equal(a: &RestrictedPwl, b: &RestrictedPwl) -> bool {
    if a.dim != b.dim || !crate::geometry::polyhedron_equal(&a.domain(), &b.domain()) {
        return false;
    }
    par::map(&a.pieces, |(sa, fa)| {
        b.pieces.iter().all(|(sb, fb)| {
            if fa == fb || sb.dim() < sa.dim() || !sb.hrep().spans_affine_hull_of(sa.vertices()) {
                return true;
            }
            clip(sa.vertices(), &sb.hrep().ineqs)
                .iter()
                .all(|q| q.iter().all(|v| fa.eval(v) == fb.eval(v)))
        })
    })
    .into_iter()
    .all(|ok| ok)
}
