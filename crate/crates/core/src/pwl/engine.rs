//! Bottom-up compilation on one shared, progressively refined complex.
//!
//! The engine keeps a stack of per-cell affine pieces, one entry per pending
//! subformula. A binary connective cuts every cell by its breakpoint
//! functional; the pieces of every pending entry are carried over to the
//! sub-cells through the parent map.

use num_traits::One;

use super::{cell_cap, PwlFunction};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::geometry::{refine, AffineFn, Side, Simplex, SimplicialComplex};
use crate::scalar::{Rational, Scalar};

/// Pointwise operations on term functions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Neg,
    /// `Δ_r`: multiplication by `r`.
    Scalar(Rational),
    /// `∇_r`: `1 − r(1 − f)`.
    Nabla(Rational),
    Oplus,
    Odot,
    Imp,
    Equiv,
    Min,
    Max,
    ChangDist,
}

impl Op {
    pub fn is_binary(&self) -> bool {
        !matches!(self, Op::Neg | Op::Scalar(_) | Op::Nabla(_))
    }

    fn unary(&self, f: &AffineFn) -> AffineFn {
        match self {
            Op::Neg => f.complement(),
            Op::Scalar(r) => f.scale(r),
            Op::Nabla(r) => f.scale(r).add_constant(&(Rational::one() - r)),
            _ => unreachable!("binary op applied to one argument"),
        }
    }

    fn breakpoint(&self, f: &AffineFn, g: &AffineFn) -> AffineFn {
        match self {
            Op::Oplus | Op::Odot => f.add(g).add_constant(&-Rational::one()),
            Op::Imp => g.sub(f),
            _ => f.sub(g),
        }
    }

    fn branch(&self, side: Side, f: &AffineFn, g: &AffineFn) -> AffineFn {
        let n = f.dim();
        let above = side == Side::Above;
        match self {
            Op::Oplus if above => AffineFn::one(n),
            Op::Oplus => f.add(g),
            Op::Odot if above => f.add(g).add_constant(&-Rational::one()),
            Op::Odot => AffineFn::zero(n),
            Op::Imp if above => AffineFn::one(n),
            Op::Imp => g.sub(f).add_constant(&Rational::one()),
            Op::Max if above => f.clone(),
            Op::Max => g.clone(),
            Op::Min if above => g.clone(),
            Op::Min => f.clone(),
            Op::ChangDist if above => f.sub(g),
            Op::ChangDist => g.sub(f),
            Op::Equiv if above => f.sub(g).complement(),
            Op::Equiv => g.sub(f).complement(),
            _ => unreachable!("unary op applied to two arguments"),
        }
    }
}

fn exact_scalar(r: &Scalar) -> Result<Rational> {
    r.as_rational().cloned().ok_or_else(|| Error::NotExact(r.to_string()))
}

pub(crate) struct Engine {
    n: usize,
    cells: Vec<Simplex>,
    stack: Vec<Vec<AffineFn>>,
    cap: usize,
}

impl Engine {
    pub(crate) fn new(n: usize, cells: Vec<Simplex>) -> Self {
        Engine { n, cells, stack: Vec::new(), cap: cell_cap() }
    }

    pub(crate) fn cube(n: usize) -> Result<Self> {
        Ok(Self::new(n, SimplicialComplex::kuhn(n)?.into_cells()))
    }

    pub(crate) fn push(&mut self, pieces: Vec<AffineFn>) {
        debug_assert_eq!(pieces.len(), self.cells.len());
        self.stack.push(pieces);
    }

    fn push_uniform(&mut self, f: AffineFn) {
        let pieces = vec![f; self.cells.len()];
        self.stack.push(pieces);
    }

    pub(crate) fn apply(&mut self, op: &Op) -> Result<()> {
        if !op.is_binary() {
            let f = self.stack.pop().ok_or_else(|| Error::internal("empty compile stack"))?;
            self.stack.push(f.iter().map(|a| op.unary(a)).collect());
            return Ok(());
        }
        let g = self.stack.pop().ok_or_else(|| Error::internal("empty compile stack"))?;
        let f = self.stack.pop().ok_or_else(|| Error::internal("empty compile stack"))?;
        let hs: Vec<AffineFn> = f.iter().zip(&g).map(|(a, b)| op.breakpoint(a, b)).collect();
        let r = refine(&self.cells, &hs, self.cap)?;
        if r.cells.len() != self.cells.len() {
            for entry in &mut self.stack {
                *entry = r.parent.iter().map(|&p| entry[p].clone()).collect();
            }
        }
        let out = r.parent.iter().zip(&r.side).map(|(&p, &side)| op.branch(side, &f[p], &g[p])).collect();
        self.cells = r.cells;
        self.stack.push(out);
        Ok(())
    }

    /// Replaces entry `i` by `op(entry i, entry j)`.
    fn combine(&mut self, op: &Op, i: usize, j: usize) -> Result<()> {
        let hs: Vec<AffineFn> =
            self.stack[i].iter().zip(&self.stack[j]).map(|(a, b)| op.breakpoint(a, b)).collect();
        let r = refine(&self.cells, &hs, self.cap)?;
        let out: Vec<AffineFn> = r
            .parent
            .iter()
            .zip(&r.side)
            .map(|(&p, &side)| op.branch(side, &self.stack[i][p], &self.stack[j][p]))
            .collect();
        if r.cells.len() != self.cells.len() {
            for entry in &mut self.stack {
                *entry = r.parent.iter().map(|&p| entry[p].clone()).collect();
            }
        }
        self.cells = r.cells;
        self.stack[i] = out;
        Ok(())
    }

    pub(crate) fn formula(&mut self, phi: &Formula) -> Result<()> {
        use Formula as F;
        match phi {
            F::Var(i) => self.push_uniform(AffineFn::coordinate(self.n, i - 1)),
            F::One => self.push_uniform(AffineFn::one(self.n)),
            F::Neg(a) => {
                self.formula(a)?;
                self.apply(&Op::Neg)?;
            }
            F::Nabla(r, a) => {
                let r = exact_scalar(r)?;
                self.formula(a)?;
                self.apply(&Op::Nabla(r))?;
            }
            F::Delta(r, a) => {
                let r = exact_scalar(r)?;
                self.formula(a)?;
                self.apply(&Op::Scalar(r))?;
            }
            F::Oplus(a, b) => self.binary(a, b, Op::Oplus)?,
            F::Imp(a, b) => self.binary(a, b, Op::Imp)?,
            F::Equiv(a, b) => self.binary(a, b, Op::Equiv)?,
            F::Odot(a, b) => self.binary(a, b, Op::Odot)?,
            F::Vee(a, b) => self.binary(a, b, Op::Max)?,
            F::Wedge(a, b) => self.binary(a, b, Op::Min)?,
            F::ChangDist(a, b) => self.binary(a, b, Op::ChangDist)?,
        }
        Ok(())
    }

    fn binary(&mut self, a: &Formula, b: &Formula, op: Op) -> Result<()> {
        self.formula(a)?;
        self.formula(b)?;
        self.apply(&op)
    }

    pub(crate) fn finish(mut self) -> Result<PwlFunction> {
        let pieces = self.stack.pop().ok_or_else(|| Error::internal("empty compile stack"))?;
        if !self.stack.is_empty() {
            return Err(Error::internal("unbalanced compile stack"));
        }
        Ok(PwlFunction::from_parts(self.n, self.cells, pieces))
    }
}

/// `f ⊕ ⋯ ⊕ f` with `k` summands, by repeated doubling.
pub fn mv_multiple(f: &PwlFunction, k: u64) -> Result<PwlFunction> {
    let n = f.dim();
    if k == 0 {
        return PwlFunction::constant(n, Rational::from_integer(0.into()));
    }
    let mut e = Engine::new(n, f.cells().to_vec());
    e.push(f.pieces().to_vec());
    let mut have_acc = false;
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            if have_acc {
                e.combine(&Op::Oplus, 1, 0)?;
            } else {
                let base = e.stack[0].clone();
                e.push(base);
                have_acc = true;
            }
        }
        k >>= 1;
        if k > 0 {
            e.combine(&Op::Oplus, 0, 0)?;
        }
    }
    e.stack.swap_remove(0);
    e.finish()
}

/// `min(1, k·f)` for a nonnegative multiplier.
pub fn truncated_multiple(f: &PwlFunction, k: &Rational) -> Result<PwlFunction> {
    let mut e = Engine::new(f.dim(), f.cells().to_vec());
    e.push(f.pieces().to_vec());
    e.apply(&Op::Scalar(k.clone()))?;
    e.push_uniform(AffineFn::one(f.dim()));
    e.apply(&Op::Min)?;
    e.finish()
}

/// Exact term function of an L/QL formula over `[0,1]^n`, `n ≥ arity`.
pub fn compile_exact(phi: &Formula, n: usize) -> Result<PwlFunction> {
    if phi.arity() > n {
        return Err(Error::DimensionMismatch { expected: phi.arity(), found: n });
    }
    if !phi.is_exact() {
        return Err(Error::NotExact(phi.to_string()));
    }
    compile_with_cap(phi, n, cell_cap())
}

pub(crate) fn compile_with_cap(phi: &Formula, n: usize, cap: usize) -> Result<PwlFunction> {
    let mut e = Engine::cube(n)?;
    e.cap = cap;
    e.formula(phi)?;
    e.finish()
}
