//! Seeded random formulas, points and polyhedra for randomized suites.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::Formula;
use crate::geometry::{Point, RationalPolyhedron, Simplex};
use crate::scalar::{rat, CReal, Rational, Scalar};

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform choice from `{p/q : 0 ≤ p ≤ q ≤ max_den}`.
pub fn unit_rational(rng: &mut impl Rng, max_den: i64) -> Rational {
    let q = rng.gen_range(1..=max_den);
    let p = rng.gen_range(0..=q);
    rat(p, q)
}

pub fn point(rng: &mut impl Rng, n: usize, max_den: i64) -> Point {
    (0..n).map(|_| unit_rational(rng, max_den)).collect()
}

#[derive(Debug, Clone)]
pub enum ScalarPool {
    /// Pure Ł formulas.
    None,
    /// Rational scalars with denominators up to the bound.
    Rational(i64),
    /// Rational scalars mixed with the given computable reals.
    Mixed(i64, Vec<CReal>),
}

#[derive(Debug, Clone)]
pub struct FormulaSampler {
    pub arity: usize,
    pub max_depth: usize,
    pub scalars: ScalarPool,
    /// Probability of stopping early at an inner position.
    pub leaf_bias: f64,
}

#[derive(Clone, Copy)]
enum Node {
    Neg,
    Oplus,
    Odot,
    Imp,
    Vee,
    Wedge,
    Dist,
    Equiv,
    Nabla,
    Delta,
}

const BINARY_AND_NEG: [Node; 8] =
    [Node::Neg, Node::Oplus, Node::Odot, Node::Imp, Node::Vee, Node::Wedge, Node::Dist, Node::Equiv];

impl FormulaSampler {
    pub fn new(arity: usize, max_depth: usize, scalars: ScalarPool) -> Self {
        FormulaSampler { arity, max_depth, scalars, leaf_bias: 0.3 }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Formula {
        self.grow(rng, self.max_depth)
    }

    pub fn scalar(&self, rng: &mut impl Rng) -> Option<Scalar> {
        match &self.scalars {
            ScalarPool::None => None,
            ScalarPool::Rational(d) => Some(Scalar::Rational(unit_rational(rng, *d))),
            ScalarPool::Mixed(d, reals) => {
                if !reals.is_empty() && rng.gen_bool(0.5) {
                    Some(Scalar::Real(reals.choose(rng).expect("nonempty").clone()))
                } else {
                    Some(Scalar::Rational(unit_rational(rng, *d)))
                }
            }
        }
    }

    fn leaf(&self, rng: &mut impl Rng, budget: usize) -> Formula {
        let roll: f64 = rng.gen();
        if roll < 0.05 || (self.arity == 0 && budget == 0) {
            Formula::One
        } else if (roll < 0.1 || self.arity == 0) && budget > 0 {
            Formula::zero()
        } else {
            Formula::var(rng.gen_range(1..=self.arity))
        }
    }

    fn grow(&self, rng: &mut impl Rng, budget: usize) -> Formula {
        if budget == 0 || (budget < self.max_depth && rng.gen_bool(self.leaf_bias)) {
            return self.leaf(rng, budget);
        }
        let with_scalars = !matches!(self.scalars, ScalarPool::None);
        let pick = if with_scalars && rng.gen_bool(0.2) {
            if rng.gen_bool(0.5) {
                Node::Nabla
            } else {
                Node::Delta
            }
        } else {
            *BINARY_AND_NEG.choose(rng).expect("nonempty")
        };
        let b = budget - 1;
        match pick {
            Node::Neg => Formula::neg(self.grow(rng, b)),
            Node::Nabla => {
                let r = self.scalar(rng).expect("scalar pool present");
                Formula::nabla(r, self.grow(rng, b))
            }
            Node::Delta => {
                let r = self.scalar(rng).expect("scalar pool present");
                Formula::delta(r, self.grow(rng, b))
            }
            binary => {
                let (x, y) = (self.grow(rng, b), self.grow(rng, b));
                match binary {
                    Node::Oplus => Formula::oplus(x, y),
                    Node::Odot => Formula::odot(x, y),
                    Node::Imp => Formula::imp(x, y),
                    Node::Vee => Formula::vee(x, y),
                    Node::Wedge => Formula::wedge(x, y),
                    Node::Dist => Formula::chang_dist(x, y),
                    _ => Formula::equiv(x, y),
                }
            }
        }
    }
}

/// Random simplex of dimension `dim` with grid vertices `i/max_den`.
pub fn simplex(rng: &mut impl Rng, n: usize, dim: usize, max_den: i64) -> Simplex {
    loop {
        let verts: Vec<Point> = (0..=dim)
            .map(|_| (0..n).map(|_| rat(rng.gen_range(0..=max_den), max_den)).collect())
            .collect();
        if let Ok(s) = Simplex::new(verts) {
            return s;
        }
    }
}

/// Union of up to `max_simplices` random simplices of random dimension.
pub fn polyhedron(rng: &mut impl Rng, n: usize, max_simplices: usize, max_den: i64) -> RationalPolyhedron {
    let count = rng.gen_range(1..=max_simplices);
    let simplices = (0..count)
        .map(|_| {
            let dim = rng.gen_range(0..=n);
            simplex(rng, n, dim, max_den)
        })
        .collect();
    RationalPolyhedron::new(n, simplices).expect("random simplices lie in the cube")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_respects_bounds() {
        let mut r = rng(7);
        let s = FormulaSampler::new(3, 6, ScalarPool::Rational(4));
        for _ in 0..200 {
            let f = s.sample(&mut r);
            assert!(f.depth() <= 6);
            assert!(f.arity() <= 3);
            assert!(f.is_exact());
        }
        let l = FormulaSampler::new(2, 4, ScalarPool::None);
        for _ in 0..50 {
            assert_eq!(l.sample(&mut r).classify(), crate::formula::SignatureClass::L);
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let s = FormulaSampler::new(3, 5, ScalarPool::Rational(4));
        let a: Vec<_> = (0..20).map({
            let mut r = rng(11);
            move |_| s.sample(&mut r)
        }).collect();
        let s = FormulaSampler::new(3, 5, ScalarPool::Rational(4));
        let mut r = rng(11);
        let b: Vec<_> = (0..20).map(|_| s.sample(&mut r)).collect();
        assert_eq!(a, b);
    }
}
