//! Reference recursive evaluator over the standard model `[0,1]`.

use num_traits::{One, Signed, Zero};

use super::Formula;
use crate::error::{Error, Result};
use crate::scalar::{format_rational, in_unit, truncated_diff, truncated_sum, Interval, Rational, Scalar};

/// Result of evaluating a formula at a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Exact(Rational),
    Interval { interval: Interval, precision: u32 },
}

fn check_point(phi: &Formula, point: &[Rational]) -> Result<()> {
    let arity = phi.arity();
    if point.len() < arity {
        return Err(Error::DimensionMismatch { expected: arity, found: point.len() });
    }
    if let Some(bad) = point.iter().find(|x| !in_unit(x)) {
        return Err(Error::CoordinateOutOfRange(format_rational(bad)));
    }
    Ok(())
}

/// Exact evaluation; requires every scalar in `phi` to be rational.
pub fn eval(phi: &Formula, point: &[Rational]) -> Result<Rational> {
    check_point(phi, point)?;
    if !phi.is_exact() {
        return Err(Error::NotExact(phi.to_string()));
    }
    Ok(eval_exact(phi, point))
}

fn scalar_value(r: &Scalar) -> &Rational {
    r.as_rational().expect("checked exact before evaluation")
}

fn eval_exact(phi: &Formula, x: &[Rational]) -> Rational {
    use Formula as F;
    let one = Rational::one;
    match phi {
        F::Var(i) => x[i - 1].clone(),
        F::One => one(),
        F::Neg(a) => one() - eval_exact(a, x),
        F::Oplus(a, b) => truncated_sum(&eval_exact(a, x), &eval_exact(b, x)),
        F::Nabla(r, a) => {
            // ∇_r y = ¬(r·¬y) = 1 − r(1 − y)
            let r = scalar_value(r);
            one() - r * (one() - eval_exact(a, x))
        }
        F::Delta(r, a) => scalar_value(r) * eval_exact(a, x),
        F::Imp(a, b) => (one() - eval_exact(a, x) + eval_exact(b, x)).min(one()),
        F::Equiv(a, b) => one() - (eval_exact(a, x) - eval_exact(b, x)).abs(),
        F::Odot(a, b) => truncated_diff(&eval_exact(a, x), &(one() - eval_exact(b, x))),
        F::Vee(a, b) => eval_exact(a, x).max(eval_exact(b, x)),
        F::Wedge(a, b) => eval_exact(a, x).min(eval_exact(b, x)),
        F::ChangDist(a, b) => (eval_exact(a, x) - eval_exact(b, x)).abs(),
    }
}

fn abs_diff(a: &Interval, b: &Interval) -> Interval {
    let lo = &a.lo - &b.hi;
    let hi = &a.hi - &b.lo;
    if !lo.is_negative() {
        Interval { lo, hi }
    } else if !hi.is_positive() {
        Interval { lo: -hi, hi: -lo }
    } else {
        Interval { lo: Rational::zero(), hi: hi.max(-lo) }
    }
}

fn eval_iv(phi: &Formula, x: &[Rational], k: u32) -> Interval {
    use Formula as F;
    let one = Rational::one;
    match phi {
        F::Var(i) => Interval::point(x[i - 1].clone()),
        F::One => Interval::point(one()),
        F::Neg(a) => eval_iv(a, x, k).complement(),
        F::Oplus(a, b) => eval_iv(a, x, k).truncated_sum(&eval_iv(b, x, k)),
        F::Nabla(r, a) => {
            // decreasing in r, increasing in the argument
            let r = r.interval(k);
            let y = eval_iv(a, x, k);
            Interval { lo: one() - &r.hi * (one() - &y.lo), hi: one() - &r.lo * (one() - &y.hi) }
        }
        F::Delta(r, a) => r.interval(k).product(&eval_iv(a, x, k)),
        F::Imp(a, b) => {
            let (a, b) = (eval_iv(a, x, k), eval_iv(b, x, k));
            Interval { lo: (one() - &a.hi + &b.lo).min(one()), hi: (one() - &a.lo + &b.hi).min(one()) }
        }
        F::Equiv(a, b) => abs_diff(&eval_iv(a, x, k), &eval_iv(b, x, k)).complement(),
        F::Odot(a, b) => eval_iv(a, x, k).truncated_diff(&eval_iv(b, x, k).complement()),
        F::Vee(a, b) => {
            let (a, b) = (eval_iv(a, x, k), eval_iv(b, x, k));
            Interval { lo: a.lo.max(b.lo), hi: a.hi.max(b.hi) }
        }
        F::Wedge(a, b) => {
            let (a, b) = (eval_iv(a, x, k), eval_iv(b, x, k));
            Interval { lo: a.lo.min(b.lo), hi: a.hi.min(b.hi) }
        }
        F::ChangDist(a, b) => abs_diff(&eval_iv(a, x, k), &eval_iv(b, x, k)),
    }
}

/// Interval evaluation at precision index `k`; exact formulas give a point.
pub fn eval_interval(phi: &Formula, point: &[Rational], k: u32) -> Result<Interval> {
    check_point(phi, point)?;
    Ok(eval_iv(phi, point, k))
}

/// Exact value for QŁ formulas, an enclosure at index `k` otherwise.
pub fn evaluate(phi: &Formula, point: &[Rational], k: u32) -> Result<Value> {
    check_point(phi, point)?;
    if phi.is_exact() {
        Ok(Value::Exact(eval_exact(phi, point)))
    } else {
        Ok(Value::Interval { interval: eval_iv(phi, point, k), precision: k })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat, CReal};

    fn q(p: i64, d: i64) -> Scalar {
        Scalar::Rational(rat(p, d))
    }

    #[test]
    fn spot_values() {
        assert_eq!(eval(&Formula::neg(Formula::var(1)), &[rat(1, 3)]).unwrap(), rat(2, 3));
        let dbl = Formula::oplus(Formula::var(1), Formula::var(1));
        assert_eq!(eval(&dbl, &[rat(3, 4)]).unwrap(), int(1));
        for r in [rat(0, 1), rat(2, 7), int(1)] {
            let eta = Formula::eta(Scalar::Rational(r.clone()));
            assert_eq!(eval(&eta, &[]).unwrap(), r);
            assert_eq!(eval(&eta, &[rat(1, 2), rat(1, 5)]).unwrap(), r);
        }
    }

    #[test]
    fn bookkeeping_laws_pointwise() {
        let (r, s) = (rat(2, 5), rat(3, 4));
        let eta = |x: &Rational| Formula::eta(Scalar::Rational(x.clone()));
        assert_eq!(eval(&Formula::neg(eta(&r)), &[]).unwrap(), int(1) - &r);
        assert_eq!(eval(&Formula::imp(eta(&r), eta(&s)), &[]).unwrap(), (int(1) - &r + &s).min(int(1)));
        assert_eq!(eval(&Formula::delta(Scalar::Rational(r.clone()), eta(&s)), &[]).unwrap(), &r * &s);
    }

    #[test]
    fn domain_errors() {
        let f = Formula::oplus(Formula::var(1), Formula::var(2));
        assert_eq!(eval(&f, &[rat(1, 2)]), Err(Error::DimensionMismatch { expected: 2, found: 1 }));
        assert!(matches!(eval(&f, &[rat(1, 2), rat(3, 2)]), Err(Error::CoordinateOutOfRange(_))));
        let real = Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1));
        assert!(matches!(eval(&real, &[rat(1, 2)]), Err(Error::NotExact(_))));
    }

    #[test]
    fn real_scalars_give_shrinking_enclosures() {
        let f = Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1));
        let mut prev: Option<Interval> = None;
        for k in 0..20 {
            let Value::Interval { interval, precision } = evaluate(&f, &[int(1)], k).unwrap() else {
                panic!("expected interval")
            };
            assert_eq!(precision, k);
            assert!(&interval.lo * &interval.lo <= rat(1, 2) && &interval.hi * &interval.hi >= rat(1, 2));
            if let Some(p) = prev {
                assert!(p.contains_interval(&interval));
            }
            prev = Some(interval);
        }
    }

    #[test]
    fn exact_interval_agrees_with_exact_eval() {
        let f = Formula::equiv(
            Formula::nabla(q(1, 3), Formula::var(1)),
            Formula::odot(Formula::var(2), Formula::chang_dist(Formula::var(1), Formula::var(2))),
        );
        let x = [rat(1, 5), rat(4, 7)];
        assert_eq!(eval_interval(&f, &x, 3).unwrap(), Interval::point(eval(&f, &x).unwrap()));
    }
}
