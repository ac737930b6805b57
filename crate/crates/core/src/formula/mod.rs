//! Formulas of Ł, QŁ and RŁ.
//!
//! The base connectives are `¬`, `⊕`, `∇_r` and the constant `1`; the
//! remaining node kinds are derived and [`Formula::desugar`] rewrites them
//! into base form. Derived nodes are kept in the tree so that printing is
//! faithful and so that compilation can cut on their breakpoints directly.

mod eval;
mod parse;

use std::fmt;

pub use eval::{eval, eval_interval, evaluate, Value};
pub use parse::{parse, parse_with};

use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    /// Variable `v_i`, 1-based.
    Var(usize),
    One,
    Neg(Box<Formula>),
    Oplus(Box<Formula>, Box<Formula>),
    Nabla(Scalar, Box<Formula>),
    /// `Δ_r φ := ¬∇_r¬φ`, interpreted as `r · φ`.
    Delta(Scalar, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    /// `φ ↔ ψ := (φ → ψ) ⊙ (ψ → φ)`.
    Equiv(Box<Formula>, Box<Formula>),
    Odot(Box<Formula>, Box<Formula>),
    Vee(Box<Formula>, Box<Formula>),
    Wedge(Box<Formula>, Box<Formula>),
    /// Chang distance `d(φ, ψ) := (¬φ ⊙ ψ) ⊕ (φ ⊙ ¬ψ)`.
    ChangDist(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum SignatureClass {
    L,
    QL,
    RL,
}

impl fmt::Display for SignatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignatureClass::L => "L",
            SignatureClass::QL => "QL",
            SignatureClass::RL => "RL",
        })
    }
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn var(i: usize) -> Self {
        assert!(i >= 1, "variables are 1-based");
        Formula::Var(i)
    }

    pub fn one() -> Self {
        Formula::One
    }

    pub fn zero() -> Self {
        Formula::Neg(bx(Formula::One))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Formula) -> Self {
        Formula::Neg(bx(a))
    }

    pub fn oplus(a: Formula, b: Formula) -> Self {
        Formula::Oplus(bx(a), bx(b))
    }

    pub fn nabla(r: Scalar, a: Formula) -> Self {
        Formula::Nabla(r, bx(a))
    }

    pub fn delta(r: Scalar, a: Formula) -> Self {
        Formula::Delta(r, bx(a))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(bx(a), bx(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Self {
        Formula::Equiv(bx(a), bx(b))
    }

    pub fn odot(a: Formula, b: Formula) -> Self {
        Formula::Odot(bx(a), bx(b))
    }

    pub fn vee(a: Formula, b: Formula) -> Self {
        Formula::Vee(bx(a), bx(b))
    }

    pub fn wedge(a: Formula, b: Formula) -> Self {
        Formula::Wedge(bx(a), bx(b))
    }

    pub fn chang_dist(a: Formula, b: Formula) -> Self {
        Formula::ChangDist(bx(a), bx(b))
    }

    /// `η_r := Δ_r 1`, the formula with constant value `r`.
    pub fn eta(r: Scalar) -> Self {
        Formula::Delta(r, bx(Formula::One))
    }

    /// `Δ_{1/k} φ`.
    pub fn div_by(k: u32, a: Formula) -> Self {
        assert!(k >= 1);
        Formula::delta(Scalar::Rational(Rational::new(1.into(), k.into())), a)
    }

    /// Largest variable index occurring, 0 for closed formulas.
    pub fn arity(&self) -> usize {
        match self {
            Formula::Var(i) => *i,
            Formula::One => 0,
            Formula::Neg(a) | Formula::Nabla(_, a) | Formula::Delta(_, a) => a.arity(),
            Formula::Oplus(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b)
            | Formula::Odot(a, b)
            | Formula::Vee(a, b)
            | Formula::Wedge(a, b)
            | Formula::ChangDist(a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::One => 0,
            Formula::Neg(a) | Formula::Nabla(_, a) | Formula::Delta(_, a) => 1 + a.depth(),
            Formula::Oplus(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b)
            | Formula::Odot(a, b)
            | Formula::Vee(a, b)
            | Formula::Wedge(a, b)
            | Formula::ChangDist(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Var(_) | Formula::One => 1,
            Formula::Neg(a) | Formula::Nabla(_, a) | Formula::Delta(_, a) => 1 + a.size(),
            Formula::Oplus(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b)
            | Formula::Odot(a, b)
            | Formula::Vee(a, b)
            | Formula::Wedge(a, b)
            | Formula::ChangDist(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Visits every scalar attached to a `∇`/`Δ` node, pre-order.
    pub fn for_each_scalar<'a>(&'a self, f: &mut impl FnMut(&'a Scalar)) {
        match self {
            Formula::Var(_) | Formula::One => {}
            Formula::Neg(a) => a.for_each_scalar(f),
            Formula::Nabla(r, a) | Formula::Delta(r, a) => {
                f(r);
                a.for_each_scalar(f);
            }
            Formula::Oplus(a, b)
            | Formula::Imp(a, b)
            | Formula::Equiv(a, b)
            | Formula::Odot(a, b)
            | Formula::Vee(a, b)
            | Formula::Wedge(a, b)
            | Formula::ChangDist(a, b) => {
                a.for_each_scalar(f);
                b.for_each_scalar(f);
            }
        }
    }

    /// Number of scalar nodes, the `S(φ)` of the sandwich width bound.
    pub fn scalar_count(&self) -> usize {
        let mut n = 0;
        self.for_each_scalar(&mut |_| n += 1);
        n
    }

    pub fn classify(&self) -> SignatureClass {
        let mut class = SignatureClass::L;
        self.for_each_scalar(&mut |r| {
            let c = if r.is_rational() { SignatureClass::QL } else { SignatureClass::RL };
            class = class.max(c);
        });
        class
    }

    pub fn is_exact(&self) -> bool {
        self.classify() != SignatureClass::RL
    }

    /// Rewrites every derived node into `{¬, ⊕, ∇_r, 1}`.
    pub fn desugar(&self) -> Formula {
        use Formula as F;
        match self {
            F::Var(i) => F::Var(*i),
            F::One => F::One,
            F::Neg(a) => F::neg(a.desugar()),
            F::Oplus(a, b) => F::oplus(a.desugar(), b.desugar()),
            F::Nabla(r, a) => F::nabla(r.clone(), a.desugar()),
            F::Delta(r, a) => F::neg(F::nabla(r.clone(), F::neg(a.desugar()))),
            F::Imp(a, b) => base_imp(a.desugar(), b.desugar()),
            F::Odot(a, b) => base_odot(a.desugar(), b.desugar()),
            F::Vee(a, b) => base_vee(a.desugar(), b.desugar()),
            F::Wedge(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                F::neg(base_vee(F::neg(a), F::neg(b)))
            }
            F::ChangDist(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                F::oplus(base_odot(F::neg(a.clone()), b.clone()), base_odot(a, F::neg(b)))
            }
            F::Equiv(a, b) => {
                let (a, b) = (a.desugar(), b.desugar());
                base_odot(base_imp(a.clone(), b.clone()), base_imp(b, a))
            }
        }
    }

    /// Simultaneous substitution of variables.
    pub fn substitute(&self, sigma: &dyn Fn(usize) -> Formula) -> Formula {
        use Formula as F;
        let go = |a: &Formula| bx(a.substitute(sigma));
        match self {
            F::Var(i) => sigma(*i),
            F::One => F::One,
            F::Neg(a) => F::Neg(go(a)),
            F::Nabla(r, a) => F::Nabla(r.clone(), go(a)),
            F::Delta(r, a) => F::Delta(r.clone(), go(a)),
            F::Oplus(a, b) => F::Oplus(go(a), go(b)),
            F::Imp(a, b) => F::Imp(go(a), go(b)),
            F::Equiv(a, b) => F::Equiv(go(a), go(b)),
            F::Odot(a, b) => F::Odot(go(a), go(b)),
            F::Vee(a, b) => F::Vee(go(a), go(b)),
            F::Wedge(a, b) => F::Wedge(go(a), go(b)),
            F::ChangDist(a, b) => F::ChangDist(go(a), go(b)),
        }
    }

    /// Replaces every scalar through `f`, keeping the tree shape.
    pub fn map_scalars(&self, f: &mut impl FnMut(&Scalar) -> Scalar) -> Formula {
        use Formula as F;
        match self {
            F::Var(i) => F::Var(*i),
            F::One => F::One,
            F::Neg(a) => F::neg(a.map_scalars(f)),
            F::Nabla(r, a) => {
                let r = f(r);
                F::nabla(r, a.map_scalars(f))
            }
            F::Delta(r, a) => {
                let r = f(r);
                F::delta(r, a.map_scalars(f))
            }
            F::Oplus(a, b) => F::oplus(a.map_scalars(f), b.map_scalars(f)),
            F::Imp(a, b) => F::imp(a.map_scalars(f), b.map_scalars(f)),
            F::Equiv(a, b) => F::equiv(a.map_scalars(f), b.map_scalars(f)),
            F::Odot(a, b) => F::odot(a.map_scalars(f), b.map_scalars(f)),
            F::Vee(a, b) => F::vee(a.map_scalars(f), b.map_scalars(f)),
            F::Wedge(a, b) => F::wedge(a.map_scalars(f), b.map_scalars(f)),
            F::ChangDist(a, b) => F::chang_dist(a.map_scalars(f), b.map_scalars(f)),
        }
    }
}

fn base_imp(a: Formula, b: Formula) -> Formula {
    Formula::oplus(Formula::neg(a), b)
}

fn base_odot(a: Formula, b: Formula) -> Formula {
    Formula::neg(Formula::oplus(Formula::neg(a), Formula::neg(b)))
}

// x ∨ y = x ⊕ (y ⊙ ¬x)
fn base_vee(a: Formula, b: Formula) -> Formula {
    Formula::oplus(a.clone(), base_odot(b, Formula::neg(a)))
}

// Printing levels: 0 implication, 1 binary ⊕-level, 2 unary, 3 atom.
fn level_of(phi: &Formula) -> u8 {
    use Formula as F;
    match phi {
        F::Var(_) | F::One | F::ChangDist(..) => 3,
        F::Neg(a) | F::Delta(_, a) if **a == F::One => 3,
        F::Neg(_) | F::Nabla(..) | F::Delta(..) => 2,
        F::Oplus(..) | F::Odot(..) | F::Vee(..) | F::Wedge(..) => 1,
        F::Imp(..) | F::Equiv(..) => 0,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, phi: &Formula, level: u8) -> fmt::Result {
    if level_of(phi) < level {
        f.write_str("(")?;
        write_body(f, phi)?;
        f.write_str(")")
    } else {
        write_body(f, phi)
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, phi: &Formula) -> fmt::Result {
    use Formula as F;
    match phi {
        F::Var(i) => write!(f, "v{i}"),
        F::One => f.write_str("1"),
        F::Neg(a) if **a == F::One => f.write_str("0"),
        F::Delta(r, a) if **a == F::One => write!(f, "eta[{r}]"),
        F::ChangDist(a, b) => {
            f.write_str("d(")?;
            write_at(f, a, 0)?;
            f.write_str(", ")?;
            write_at(f, b, 0)?;
            f.write_str(")")
        }
        F::Neg(a) => {
            f.write_str("~")?;
            write_at(f, a, 2)
        }
        F::Nabla(r, a) => {
            write!(f, "nabla[{r}] ")?;
            write_at(f, a, 2)
        }
        F::Delta(r, a) => {
            write!(f, "delta[{r}] ")?;
            write_at(f, a, 2)
        }
        F::Oplus(a, b) => binary(f, a, " + ", b),
        F::Odot(a, b) => binary(f, a, " . ", b),
        F::Vee(a, b) => binary(f, a, " \\/ ", b),
        F::Wedge(a, b) => binary(f, a, " /\\ ", b),
        F::Imp(a, b) => {
            write_at(f, a, 1)?;
            f.write_str(" -> ")?;
            write_at(f, b, 0)
        }
        F::Equiv(a, b) => {
            write_at(f, a, 1)?;
            f.write_str(" <-> ")?;
            write_at(f, b, 0)
        }
    }
}

fn binary(f: &mut fmt::Formatter<'_>, a: &Formula, op: &str, b: &Formula) -> fmt::Result {
    write_at(f, a, 1)?;
    f.write_str(op)?;
    write_at(f, b, 2)
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_at(f, self, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, CReal};

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::Rational(rat(p, d))
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Formula::imp(Formula::var(1), Formula::var(2)).classify(), SignatureClass::L);
        assert_eq!(Formula::delta(q(1, 2), Formula::var(1)).classify(), SignatureClass::QL);
        let r = Scalar::Real(CReal::sqrt2_over_2());
        assert_eq!(Formula::delta(r, Formula::var(1)).classify(), SignatureClass::RL);
    }

    #[test]
    fn arity_is_max_index() {
        let f = Formula::oplus(Formula::var(3), Formula::neg(Formula::var(1)));
        assert_eq!(f.arity(), 3);
        assert_eq!(Formula::eta(q(1, 3)).arity(), 0);
    }

    #[test]
    fn printer_output() {
        let f = Formula::nabla(q(1, 2), Formula::imp(Formula::var(1), Formula::var(2)));
        assert_eq!(f.to_string(), "nabla[1/2] (v1 -> v2)");
        let g = Formula::oplus(Formula::var(1), Formula::oplus(Formula::var(2), Formula::zero()));
        assert_eq!(g.to_string(), "v1 + (v2 + 0)");
        assert_eq!(Formula::eta(q(2, 3)).to_string(), "eta[2/3]");
        let h = Formula::imp(Formula::imp(Formula::var(1), Formula::var(2)), Formula::var(3));
        assert_eq!(h.to_string(), "(v1 -> v2) -> v3");
    }

    #[test]
    fn desugar_leaves_only_base_nodes() {
        fn base_only(f: &Formula) -> bool {
            match f {
                Formula::Var(_) | Formula::One => true,
                Formula::Neg(a) | Formula::Nabla(_, a) => base_only(a),
                Formula::Oplus(a, b) => base_only(a) && base_only(b),
                _ => false,
            }
        }
        let f = Formula::equiv(
            Formula::chang_dist(Formula::var(1), Formula::eta(q(1, 2))),
            Formula::wedge(Formula::var(2), Formula::vee(Formula::var(1), Formula::var(3))),
        );
        assert!(base_only(&f.desugar()));
    }
}
