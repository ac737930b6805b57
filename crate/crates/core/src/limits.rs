//! Sandwich envelopes, a checker for syntactic limits, and piecewise linear
//! approximation of continuous functions from grid samples.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{parse, Formula};
use crate::geometry::SimplicialComplex;
use crate::par;
use crate::pwl::{apply_connective, compile_exact, compile_interval, Op, PwlFunction};
use crate::scalar::{format_rational, in_unit, parse_rational, pow2_neg, Rational};

/// Rational lower and upper envelopes of `φ` at precision `k`, over the
/// variables of `φ`.
pub fn sandwich(phi: &Formula, k: u32) -> Result<(PwlFunction, PwlFunction)> {
    let iv = compile_interval(phi, k, phi.arity())?;
    Ok((iv.lower, iv.upper))
}

/// A rational sequence indexed from 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Schedule {
    /// `1 − 2^(−n)`
    OneMinusPow2,
    /// `2^(−n)`
    Pow2,
    /// `1 − 1/(n+1)`
    OneMinusHarmonic,
    /// `1/n`
    Harmonic,
    Constant(Rational),
    List(Vec<Rational>),
}

impl Schedule {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(match text.trim() {
            "1-2^-n" => Schedule::OneMinusPow2,
            "2^-n" => Schedule::Pow2,
            "1-1/(n+1)" => Schedule::OneMinusHarmonic,
            "1/n" => Schedule::Harmonic,
            other => Schedule::Constant(parse_rational(other).map_err(|_| {
                Error::invalid(format!(
                    "unknown schedule {other:?} (expected 1-2^-n, 2^-n, 1-1/(n+1), 1/n, a rational or a list)"
                ))
            })?),
        })
    }

    fn from_json(v: &serde_json::Value) -> Result<Self> {
        match v {
            serde_json::Value::String(s) => Self::parse(s),
            serde_json::Value::Array(items) => Ok(Schedule::List(
                items
                    .iter()
                    .map(|i| i.as_str().ok_or_else(|| Error::invalid("schedule entries must be strings")))
                    .map(|s| parse_rational(s?))
                    .collect::<Result<_>>()?,
            )),
            _ => Err(Error::invalid("schedule must be a string or a list of rationals")),
        }
    }

    pub fn at(&self, n: usize) -> Result<Rational> {
        if n == 0 {
            return Err(Error::invalid("sequence indices start at 1"));
        }
        let n_big = Rational::from_integer((n as i64).into());
        Ok(match self {
            Schedule::OneMinusPow2 => Rational::one() - pow2_neg(n as u32),
            Schedule::Pow2 => pow2_neg(n as u32),
            Schedule::OneMinusHarmonic => Rational::one() - (n_big + Rational::one()).recip(),
            Schedule::Harmonic => n_big.recip(),
            Schedule::Constant(c) => c.clone(),
            Schedule::List(v) => {
                v.get(n - 1).cloned().ok_or_else(|| Error::invalid(format!("schedule has no entry {n}")))?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terms {
    Formulas(Vec<Formula>),
    /// The template with every `{q}` replaced by the schedule value.
    Ramp { template: String, schedule: Schedule },
    Functions(Vec<PwlFunction>),
}

/// `φ_1, φ_2, …` with an optional rate `r_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaSequence {
    pub terms: Terms,
    pub rate: Option<Schedule>,
}

enum Term {
    Formula(Formula),
    Function(PwlFunction),
}

impl FormulaSequence {
    pub fn new(terms: Terms, rate: Option<Schedule>) -> Self {
        FormulaSequence { terms, rate }
    }

    /// `{"kind":"scalar-ramp","formula":"delta[{q}] v1","schedule":"1-2^-n"}`
    /// or `{"kind":"list","formulas":[..]}`, each with an optional `"rate"`.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let rate = v.get("rate").map(Schedule::from_json).transpose()?;
        let field = |k: &str| v.get(k).ok_or_else(|| Error::invalid(format!("sequence file lacks {k:?}")));
        let terms = match v.get("kind").and_then(|k| k.as_str()) {
            Some("scalar-ramp") => Terms::Ramp {
                template: field("formula")?
                    .as_str()
                    .ok_or_else(|| Error::invalid("formula must be a string"))?
                    .to_owned(),
                schedule: Schedule::from_json(field("schedule")?)?,
            },
            Some("list") => Terms::Formulas(
                field("formulas")?
                    .as_array()
                    .ok_or_else(|| Error::invalid("formulas must be a list"))?
                    .iter()
                    .map(|f| f.as_str().ok_or_else(|| Error::invalid("formulas must be strings")).and_then(parse))
                    .collect::<Result<_>>()?,
            ),
            _ => return Err(Error::invalid("sequence kind must be \"scalar-ramp\" or \"list\"")),
        };
        Ok(FormulaSequence { terms, rate })
    }

    fn term(&self, n: usize) -> Result<Term> {
        match &self.terms {
            Terms::Formulas(v) => v
                .get(n - 1)
                .cloned()
                .map(Term::Formula)
                .ok_or_else(|| Error::invalid(format!("sequence has no term {n}"))),
            Terms::Ramp { template, schedule } => {
                let q = format_rational(&schedule.at(n)?);
                Ok(Term::Formula(parse(&template.replace("{q}", &q))?))
            }
            Terms::Functions(v) => v
                .get(n - 1)
                .cloned()
                .map(Term::Function)
                .ok_or_else(|| Error::invalid(format!("sequence has no term {n}"))),
        }
    }

    /// The term `φ_n` as a formula, when the sequence is given by formulas.
    pub fn formula(&self, n: usize) -> Result<Formula> {
        match self.term(n)? {
            Term::Formula(f) => Ok(f),
            Term::Function(_) => Err(Error::invalid("sequence is given by functions")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitMode {
    /// `δ_n ≤ 1 − r_n` with the sequence's declared rate.
    Rate,
    /// The least index from which `δ_n ≤ 1 − r` up to the last checked one.
    Threshold(Rational),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitEntry {
    pub n: usize,
    /// `‖d(φ_n, φ)‖_u`
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
    /// `1 − r_n`, or `1 − r` in threshold mode.
    #[serde(serialize_with = "ser_rational")]
    pub bound: Rational,
    pub holds: bool,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(x))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LimitReport {
    pub entries: Vec<LimitEntry>,
    /// Rate mode: every checked index holds.
    pub holds: bool,
    /// Threshold mode: least `k` with every `k ≤ n ≤ N` holding.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub from: Option<usize>,
}

fn sup_distance(a: &PwlFunction, b: &PwlFunction) -> Result<Rational> {
    Ok(apply_connective(&Op::ChangDist, a, Some(b))?.max().0)
}

/// Checks indices `1..=upto` against an exact target formula.
pub fn check_limit(seq: &FormulaSequence, phi: &Formula, upto: usize, mode: &LimitMode) -> Result<LimitReport> {
    if !phi.is_exact() {
        return Err(Error::NotExact(phi.to_string()));
    }
    let mut n = phi.arity();
    if !matches!(seq.terms, Terms::Functions(_)) {
        for i in 1..=upto {
            n = n.max(seq.formula(i)?.arity());
        }
    }
    if let Terms::Functions(v) = &seq.terms {
        n = n.max(v.first().map_or(0, PwlFunction::dim));
    }
    check_limit_against(seq, &compile_exact(phi, n)?, upto, mode)
}

/// Checks indices `1..=upto` against a compiled target.
pub fn check_limit_against(
    seq: &FormulaSequence,
    target: &PwlFunction,
    upto: usize,
    mode: &LimitMode,
) -> Result<LimitReport> {
    let bounds: Vec<Rational> = match mode {
        LimitMode::Rate => {
            let rate = seq.rate.as_ref().ok_or_else(|| Error::invalid("rate mode needs a declared rate"))?;
            let r: Vec<Rational> = (1..=upto).map(|i| rate.at(i)).collect::<Result<_>>()?;
            if r.iter().any(|x| !in_unit(x)) {
                return Err(Error::invalid("rate values must lie in [0,1]"));
            }
            if r.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::invalid("declared rate is not nondecreasing"));
            }
            r.into_iter().map(|x| Rational::one() - x).collect()
        }
        LimitMode::Threshold(r) => {
            if !in_unit(r) || r == &Rational::one() {
                return Err(Error::invalid("threshold must lie in [0,1)"));
            }
            vec![Rational::one() - r; upto]
        }
    };
    let indices: Vec<usize> = (1..=upto).collect();
    let deltas = par::map_coarse(&indices, |&i| -> Result<Rational> {
        let f = match seq.term(i)? {
            Term::Formula(f) => compile_exact(&f, target.dim())?,
            Term::Function(f) => f,
        };
        sup_distance(&f, target)
    });
    let mut entries = Vec::with_capacity(upto);
    for ((n, delta), bound) in indices.into_iter().zip(deltas).zip(bounds) {
        let delta = delta?;
        entries.push(LimitEntry { n, holds: delta <= bound, delta, bound });
    }
    let holds = entries.iter().all(|e| e.holds);
    let from = match mode {
        LimitMode::Rate => None,
        LimitMode::Threshold(_) => {
            let failing = entries.iter().rposition(|e| !e.holds);
            match failing {
                None => Some(1),
                Some(i) if i + 1 < entries.len() => Some(entries[i + 1].n),
                Some(_) => None,
            }
        }
    };
    Ok(LimitReport { entries, holds, from })
}

/// The Kuhn-grid interpolant of samples of a Lipschitz function.
///
/// `samples` lists values at the points `i/m` of the grid in row-major order
/// (the last coordinate varies fastest). Returns the interpolant and the
/// sup-norm error bound `L·n/m`.
pub fn approximate_continuous(
    samples: &[Rational],
    n: usize,
    m: usize,
    lipschitz: &Rational,
) -> Result<(PwlFunction, Rational)> {
    if m == 0 {
        return Err(Error::invalid("grid mesh must be positive"));
    }
    let expected = (m + 1).checked_pow(n as u32).ok_or_else(|| Error::invalid("grid too large"))?;
    if samples.len() != expected {
        return Err(Error::DimensionMismatch { expected, found: samples.len() });
    }
    if samples.iter().any(|s| !in_unit(s)) {
        return Err(Error::invalid("samples must lie in [0,1]"));
    }
    if lipschitz < &Rational::zero() {
        return Err(Error::invalid("Lipschitz bound must be nonnegative"));
    }
    let grid = SimplicialComplex::kuhn_grid(n, m)?;
    crate::pwl::check_cap(grid.len())?;
    let scale = Rational::from_integer((m as i64).into());
    let index = |p: &[Rational]| {
        p.iter().fold(0usize, |acc, x| {
            let i = (x * &scale).to_integer();
            acc * (m + 1) + usize::try_from(i).expect("grid coordinate")
        })
    };
    let pieces = par::map(grid.cells(), |c| {
        let values: Vec<Rational> = c.vertices().iter().map(|v| samples[index(v)].clone()).collect();
        c.interpolate(&values)
    });
    let bound = lipschitz * Rational::from_integer((n as i64).into()) / scale;
    Ok((PwlFunction::from_parts(n, grid.into_cells(), pieces), bound))
}

/// Samples `f` on the mesh-`1/m` grid in the order expected by
/// [`approximate_continuous`].
pub fn grid_samples(n: usize, m: usize, f: impl Fn(&[Rational]) -> Rational) -> Vec<Rational> {
    let total = (m + 1).pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut p = vec![Rational::zero(); n];
            for x in p.iter_mut().rev() {
                *x = Rational::new(((idx % (m + 1)) as i64).into(), (m as i64).into());
                idx /= m + 1;
            }
            f(&p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwl::{pwl_equal, pwl_le, sup_difference};
    use crate::scalar::{int, rat, CReal, Scalar};

    fn sqrt_half_x() -> Formula {
        Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1))
    }

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = sandwich(&parse("delta[1/2] v1").unwrap(), 3).unwrap();
        assert!(pwl_equal(&lo, &hi));
        assert_eq!(lo.eval(&[int(1)]).unwrap(), rat(1, 2));

        for k in [0, 7, 30] {
            let (a, b) = CReal::sqrt2_over_2().approx(k);
            let (lo, hi) = sandwich(&sqrt_half_x(), k).unwrap();
            assert_eq!(lo.eval(&[int(1)]).unwrap(), a);
            assert_eq!(hi.eval(&[int(1)]).unwrap(), b);
            assert!(sup_difference(&lo, &hi) <= pow2_neg(k));
            let (nlo, nhi) = sandwich(&Formula::neg(sqrt_half_x()), k).unwrap();
            assert_eq!(nlo.eval(&[int(1)]).unwrap(), Rational::one() - &b);
            assert_eq!(nhi.eval(&[int(1)]).unwrap(), Rational::one() - &a);
        }
        let (l3, u3) = sandwich(&sqrt_half_x(), 3).unwrap();
        let (l9, u9) = sandwich(&sqrt_half_x(), 9).unwrap();
        assert!(pwl_le(&l3, &l9) && pwl_le(&u9, &u3));
    }

    #[test]
    fn ramp_converges_at_its_rate() {
        let seq = FormulaSequence::from_json(
            r#"{"kind":"scalar-ramp","formula":"delta[{q}] v1","schedule":"1-2^-n","rate":"1-2^-n"}"#,
        )
        .unwrap();
        let v1 = parse("v1").unwrap();
        let r = check_limit(&seq, &v1, 12, &LimitMode::Rate).unwrap();
        assert!(r.holds);
        assert_eq!(r.entries[2].delta, rat(1, 8));

        let wrong = check_limit(&seq, &parse("~v1").unwrap(), 5, &LimitMode::Rate).unwrap();
        assert!(wrong.entries.iter().all(|e| !e.holds));

        let t = check_limit(&seq, &v1, 10, &LimitMode::Threshold(rat(15, 16))).unwrap();
        assert_eq!(t.from, Some(4));
    }

    #[test]
    fn constant_sequence() {
        let seq = FormulaSequence::new(Terms::Formulas(vec![parse("v1 . v2").unwrap(); 4]), Some(Schedule::Constant(int(1))));
        let r = check_limit(&seq, &parse("v1 . v2").unwrap(), 4, &LimitMode::Rate).unwrap();
        assert!(r.holds && r.entries.iter().all(|e| e.delta.is_zero()));
        let bad = FormulaSequence::new(Terms::Formulas(vec![parse("v1").unwrap(); 3]), Some(Schedule::List(vec![rat(1, 2), rat(1, 3), rat(1, 2)])));
        assert!(check_limit(&bad, &parse("v1").unwrap(), 3, &LimitMode::Rate).is_err());
    }

    #[test]
    fn interpolation_examples() {
        let (f, b) = approximate_continuous(&grid_samples(1, 2, |p| p[0].clone()), 1, 2, &int(1)).unwrap();
        assert!(pwl_equal(&f, &compile_exact(&parse("v1").unwrap(), 1).unwrap()));
        assert_eq!(b, rat(1, 2));

        let sq = |p: &[Rational]| &p[0] * &p[0];
        let (f, b) = approximate_continuous(&grid_samples(1, 4, sq), 1, 4, &int(2)).unwrap();
        assert_eq!(b, rat(1, 2));
        assert_eq!(f.eval(&[rat(1, 4)]).unwrap(), rat(1, 16));
        // the error of linear interpolation of x² on a cell of width h is h²/4
        assert_eq!(f.eval(&[rat(1, 8)]).unwrap() - rat(1, 64), rat(1, 64));

        let (f, _) = approximate_continuous(&grid_samples(2, 3, |_| rat(2, 7)), 2, 3, &int(0)).unwrap();
        assert!(pwl_equal(&f, &PwlFunction::constant(2, rat(2, 7)).unwrap()));
        assert!(approximate_continuous(&[int(0)], 1, 2, &int(1)).is_err());
    }
}
