use std::fmt;

use num_traits::{One, Zero};

use super::linalg::dot;
use super::Point;
use crate::scalar::Rational;

/// `x ↦ c·x + b` with rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineFn {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl AffineFn {
    pub fn new(coeffs: Vec<Rational>, constant: Rational) -> Self {
        AffineFn { coeffs, constant }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        AffineFn { coeffs: vec![Rational::zero(); n], constant: c }
    }

    pub fn zero(n: usize) -> Self {
        Self::constant(n, Rational::zero())
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    /// The projection `x ↦ x_i` (0-based `i`).
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); n];
        coeffs[i] = Rational::one();
        AffineFn { coeffs, constant: Rational::zero() }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        dot(&self.coeffs, x) + &self.constant
    }

    pub fn add(&self, other: &AffineFn) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &AffineFn) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
            constant: &self.constant - &other.constant,
        }
    }

    pub fn scale(&self, r: &Rational) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.iter().map(|a| a * r).collect(),
            constant: &self.constant * r,
        }
    }

    pub fn add_constant(&self, c: &Rational) -> AffineFn {
        AffineFn { coeffs: self.coeffs.clone(), constant: &self.constant + c }
    }

    /// `1 − f`.
    pub fn complement(&self) -> AffineFn {
        AffineFn {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
            constant: Rational::one() - &self.constant,
        }
    }

    pub fn negate(&self) -> AffineFn {
        self.scale(&-Rational::one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.constant.is_integer() && self.coeffs.iter().all(|c| c.is_integer())
    }

    /// `self ∘ L` where `L(x)_i = maps[i](x)`.
    pub fn compose(&self, maps: &[AffineFn], n: usize) -> AffineFn {
        maps.iter()
            .zip(&self.coeffs)
            .fold(AffineFn::constant(n, self.constant.clone()), |acc, (m, c)| acc.add(&m.scale(c)))
    }

    /// Canonical representative of the hyperplane `f = 0`: leading nonzero
    /// coefficient scaled to 1. `None` for constant functionals.
    pub fn normalized_hyperplane(&self) -> Option<AffineFn> {
        let lead = self.coeffs.iter().find(|c| !c.is_zero())?;
        Some(self.scale(&lead.recip()))
    }

    pub fn values_at(&self, points: &[Point]) -> Vec<Rational> {
        points.iter().map(|p| self.eval(p)).collect()
    }
}

impl fmt::Display for AffineFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*x{}", i + 1)?;
            first = false;
        }
        if first {
            write!(f, "{}", self.constant)
        } else if self.constant.is_zero() {
            Ok(())
        } else {
            write!(f, " + {}", self.constant)
        }
    }
}
