//! Rational lower/upper envelope formulas for formulas with real scalars.
//!
//! Every connective is monotone in each argument (increasing or decreasing),
//! except the Chang distance and equivalence, whose envelopes are written
//! out directly. Scalars are replaced by their index-`k` bracket.

use crate::formula::Formula;
use crate::scalar::Scalar;

fn bracket(r: &Scalar, k: u32) -> (Scalar, Scalar) {
    match r {
        Scalar::Rational(_) => (r.clone(), r.clone()),
        Scalar::Real(x) => {
            let (lo, hi) = x.approx(k);
            (Scalar::Rational(lo), Scalar::Rational(hi))
        }
    }
}

fn dist_envelopes(a: (Formula, Formula), b: (Formula, Formula)) -> (Formula, Formula) {
    let ((la, ua), (lb, ub)) = (a, b);
    // |a − b| ≥ max(0, la − ub, lb − ua) and ≤ max(ua − lb, ub − la)
    let lower = Formula::vee(
        Formula::odot(la.clone(), Formula::neg(ub.clone())),
        Formula::odot(lb.clone(), Formula::neg(ua.clone())),
    );
    let upper = Formula::vee(Formula::odot(ua, Formula::neg(lb)), Formula::odot(ub, Formula::neg(la)));
    (lower, upper)
}

/// `(lower, upper)` exact formulas with `lower ≤ φ ≤ upper` pointwise.
pub fn envelope_formulas(phi: &Formula, k: u32) -> (Formula, Formula) {
    use Formula as F;
    if phi.is_exact() {
        return (phi.clone(), phi.clone());
    }
    let env = |a: &Formula| envelope_formulas(a, k);
    match phi {
        F::Var(_) | F::One => (phi.clone(), phi.clone()),
        F::Neg(a) => {
            let (l, u) = env(a);
            (F::neg(u), F::neg(l))
        }
        F::Nabla(r, a) => {
            let (lo, hi) = bracket(r, k);
            let (l, u) = env(a);
            (F::nabla(hi, l), F::nabla(lo, u))
        }
        F::Delta(r, a) => {
            let (lo, hi) = bracket(r, k);
            let (l, u) = env(a);
            (F::delta(lo, l), F::delta(hi, u))
        }
        F::Oplus(a, b) => monotone(env(a), env(b), F::oplus),
        F::Odot(a, b) => monotone(env(a), env(b), F::odot),
        F::Vee(a, b) => monotone(env(a), env(b), F::vee),
        F::Wedge(a, b) => monotone(env(a), env(b), F::wedge),
        F::Imp(a, b) => {
            let ((la, ua), (lb, ub)) = (env(a), env(b));
            (F::imp(ua, lb), F::imp(la, ub))
        }
        F::ChangDist(a, b) => dist_envelopes(env(a), env(b)),
        F::Equiv(a, b) => {
            let (l, u) = dist_envelopes(env(a), env(b));
            (F::neg(u), F::neg(l))
        }
    }
}

fn monotone(
    a: (Formula, Formula),
    b: (Formula, Formula),
    make: impl Fn(Formula, Formula) -> Formula,
) -> (Formula, Formula) {
    (make(a.0, b.0), make(a.1, b.1))
}
