//! Truth and provability degrees, unit norm, the integral state, and finite
//! consequence.

use num_traits::One;
use serde::Serialize;

use crate::duality::zero_set_of;
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::geometry::{format_point, Point, RationalPolyhedron};
use crate::pwl::{compile_exact, compile_interval, restrict, Compiled, PwlFunction};
use crate::scalar::{format_rational, Rational, Scalar};

/// A degree, exact with an optional attaining point, or an enclosure at a
/// precision index for formulas with real scalars.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DegreeResult {
    Exact { value: Rational, witness: Option<Point> },
    Interval { lo: Rational, hi: Rational, precision: u32 },
}

#[derive(Serialize)]
struct DegreeJson {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    value: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lo: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision: Option<u32>,
}

impl DegreeResult {
    pub fn exact_value(&self) -> Option<&Rational> {
        match self {
            DegreeResult::Exact { value, .. } => Some(value),
            DegreeResult::Interval { .. } => None,
        }
    }

    pub fn witness(&self) -> Option<&Point> {
        match self {
            DegreeResult::Exact { witness, .. } => witness.as_ref(),
            DegreeResult::Interval { .. } => None,
        }
    }

    /// `(lo, hi)`; both equal the value for exact results.
    pub fn bounds(&self) -> (Rational, Rational) {
        match self {
            DegreeResult::Exact { value, .. } => (value.clone(), value.clone()),
            DegreeResult::Interval { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let dump = match self {
            DegreeResult::Exact { value, witness } => DegreeJson {
                kind: "exact",
                value: Some(format_rational(value)),
                lo: None,
                hi: None,
                witness: witness.as_ref().map(|w| format_point(w)),
                precision: None,
            },
            DegreeResult::Interval { lo, hi, precision } => DegreeJson {
                kind: "interval",
                value: None,
                lo: Some(format_rational(lo)),
                hi: Some(format_rational(hi)),
                witness: None,
                precision: Some(*precision),
            },
        };
        serde_json::to_value(dump).expect("plain data serializes")
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }
}

fn compiled(phi: &Formula, k: u32) -> Result<Compiled> {
    crate::pwl::compile(phi, k)
}

fn extreme(c: &Compiled, max: bool) -> DegreeResult {
    let pick = |f: &PwlFunction| if max { f.max() } else { f.min() };
    match c {
        Compiled::Exact(f) => {
            let (value, at) = pick(f);
            DegreeResult::Exact { value, witness: Some(at) }
        }
        Compiled::Interval(iv) => {
            DegreeResult::Interval { lo: pick(&iv.lower).0, hi: pick(&iv.upper).0, precision: iv.precision }
        }
    }
}

/// `‖φ‖`, the minimum of the term function over the cube.
pub fn truth_degree(phi: &Formula, k: u32) -> Result<DegreeResult> {
    Ok(extreme(&compiled(phi, k)?, false))
}

/// Minimum of a compiled function, with the lexicographically least argmin.
pub fn truth_degree_of(f: &PwlFunction) -> DegreeResult {
    let (value, at) = f.min();
    DegreeResult::Exact { value, witness: Some(at) }
}

/// `|φ|`, the largest `r` with `⊢ η_r → φ`.
///
/// The candidate is the least value of the term function; it is certified by
/// checking that `η_r → φ` is a tautology. Strictly larger `r` fail at the
/// witness point, where `η_r → φ` evaluates to `1 − r + φ(w) < 1`.
pub fn provability_degree(phi: &Formula, k: u32) -> Result<DegreeResult> {
    let c = compiled(phi, k)?;
    let result = extreme(&c, false);
    if let DegreeResult::Exact { value, .. } = &result {
        let cert = Formula::imp(Formula::eta(Scalar::rational(value.clone())?), phi.clone());
        let f = compile_exact(&cert, phi.arity())?;
        if f.min().0 != Rational::one() {
            return Err(Error::internal("provability certificate η_r → φ is not a tautology"));
        }
    }
    Ok(result)
}

/// `‖φ‖_u`, the maximum of the term function.
pub fn unit_norm(phi: &Formula, k: u32) -> Result<DegreeResult> {
    Ok(extreme(&compiled(phi, k)?, true))
}

pub fn unit_norm_of(f: &PwlFunction) -> DegreeResult {
    let (value, at) = f.max();
    DegreeResult::Exact { value, witness: Some(at) }
}

/// `I(φ) = ∫ f_φ` over the cube.
pub fn integral_state(phi: &Formula, k: u32) -> Result<DegreeResult> {
    Ok(match compiled(phi, k)? {
        Compiled::Exact(f) => DegreeResult::Exact { value: f.integral(), witness: None },
        Compiled::Interval(iv) => {
            DegreeResult::Interval { lo: iv.lower.integral(), hi: iv.upper.integral(), precision: iv.precision }
        }
    })
}

pub fn integral_state_of(f: &PwlFunction) -> DegreeResult {
    DegreeResult::Exact { value: f.integral(), witness: None }
}

/// Three-valued answer of the enclosure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsequenceResult {
    pub verdict: Verdict,
    /// A point where every premise is 1 and the conclusion is below 1.
    pub witness: Option<Point>,
    /// Conclusion value at the witness (exact path only).
    pub value: Option<Rational>,
    pub precision: Option<u32>,
}

impl ConsequenceResult {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Yes
    }
}

fn shared_arity(premises: &[Formula], phi: Option<&Formula>) -> usize {
    premises.iter().chain(phi).map(Formula::arity).max().unwrap_or(0)
}

/// The formula `¬θ_1 ⊕ … ⊕ ¬θ_m`, zero exactly where every premise is 1.
fn premise_gap(premises: &[Formula]) -> Option<Formula> {
    premises.iter().map(|t| Formula::neg(t.clone())).reduce(Formula::oplus)
}

/// Points where every premise evaluates to 1, over `[0,1]^n`.
pub fn one_set(premises: &[Formula], n: usize) -> Result<RationalPolyhedron> {
    match premise_gap(premises) {
        None => RationalPolyhedron::cube(n),
        Some(g) => Ok(zero_set_of(&compile_exact(&g, n)?)),
    }
}

/// Semantic consequence `Θ ⊨ φ` over the one-set of the premises.
///
/// With real scalars the answer is computed from envelopes at index `k`: it
/// is "yes" when the lower conclusion envelope is 1 on the outer premise
/// enclosure and "no" only when the upper envelope is below 1 somewhere in
/// the inner enclosure.
pub fn consequence(premises: &[Formula], phi: &Formula, k: u32) -> Result<ConsequenceResult> {
    let n = shared_arity(premises, Some(phi));
    let exact = phi.is_exact() && premises.iter().all(Formula::is_exact);
    if exact {
        let p = one_set(premises, n)?;
        let f = compile_exact(phi, n)?;
        let r = restrict(&f, &p)?;
        return Ok(match r.min() {
            Some((v, at)) if v < Rational::one() => {
                ConsequenceResult { verdict: Verdict::No, witness: Some(at), value: Some(v), precision: None }
            }
            _ => ConsequenceResult { verdict: Verdict::Yes, witness: None, value: None, precision: None },
        });
    }
    let (outer, inner) = match premise_gap(premises) {
        None => (RationalPolyhedron::cube(n)?, RationalPolyhedron::cube(n)?),
        Some(g) => {
            let iv = compile_interval(&g, k, n)?;
            (zero_set_of(&iv.lower), zero_set_of(&iv.upper))
        }
    };
    let iv = compile_interval(phi, k, n)?;
    let lower_ok = restrict(&iv.lower, &outer)?.min().is_none_or(|(v, _)| v == Rational::one());
    if lower_ok {
        return Ok(ConsequenceResult { verdict: Verdict::Yes, witness: None, value: None, precision: Some(k) });
    }
    if let Some((v, at)) = restrict(&iv.upper, &inner)?.min() {
        if v < Rational::one() {
            return Ok(ConsequenceResult { verdict: Verdict::No, witness: Some(at), value: None, precision: Some(k) });
        }
    }
    Ok(ConsequenceResult { verdict: Verdict::Unknown, witness: None, value: None, precision: Some(k) })
}

/// Whether some evaluation sends every premise to 1, with a model point.
pub fn consistent(premises: &[Formula]) -> Result<Option<Point>> {
    if let Some(t) = premises.iter().find(|t| !t.is_exact()) {
        return Err(Error::NotExact(t.to_string()));
    }
    let p = one_set(premises, shared_arity(premises, None))?;
    Ok(p.least_vertex().cloned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::scalar::{int, rat, CReal};

    fn f(s: &str) -> Formula {
        parse(s).unwrap()
    }

    #[test]
    fn degree_examples() {
        let d = truth_degree(&f("v1 \\/ ~v1"), 0).unwrap();
        assert_eq!(d, DegreeResult::Exact { value: rat(1, 2), witness: Some(vec![rat(1, 2)]) });
        assert_eq!(d.to_json(), r#"{"kind":"exact","value":"1/2","witness":["1/2"]}"#);
        assert_eq!(truth_degree(&f("eta[2/5]"), 0).unwrap().exact_value(), Some(&rat(2, 5)));
        assert_eq!(provability_degree(&f("eta[2/3]"), 0).unwrap().exact_value(), Some(&rat(2, 3)));
        assert_eq!(provability_degree(&f("v1"), 0).unwrap().exact_value(), Some(&int(0)));
        assert_eq!(unit_norm(&f("d(v1 . v2, v1 . v2)"), 0).unwrap().exact_value(), Some(&int(0)));
        let u = unit_norm(&f("v1 . v1"), 0).unwrap();
        assert_eq!(u, DegreeResult::Exact { value: int(1), witness: Some(vec![int(1)]) });
        let i = integral_state(&f("v1 + v1"), 0).unwrap();
        assert_eq!(i.to_json(), r#"{"kind":"exact","value":"3/4"}"#);
        assert_eq!(integral_state(&f("v1"), 0).unwrap().exact_value(), Some(&rat(1, 2)));
    }

    #[test]
    fn interval_degrees() {
        let phi = Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1));
        let d = unit_norm(&phi, 10).unwrap();
        let (lo, hi) = CReal::sqrt2_over_2().approx(10);
        assert_eq!(d, DegreeResult::Interval { lo: lo.clone(), hi: hi.clone(), precision: 10 });
        let v = d.to_json_value();
        assert_eq!(v["kind"], "interval");
        assert_eq!(v["precision"], 10);
    }

    #[test]
    fn consequence_examples() {
        let yes = consequence(&[f("v1")], &f("v1 + v1"), 0).unwrap();
        assert!(yes.holds());
        let no = consequence(&[f("v1 + v1")], &f("v1"), 0).unwrap();
        assert_eq!(no.verdict, Verdict::No);
        assert_eq!(no.witness, Some(vec![rat(1, 2)]));
        assert_eq!(no.value, Some(rat(1, 2)));
        let l2 = f("(v1 -> v2) -> ((v2 -> v3) -> (v1 -> v3))");
        assert!(consequence(&[], &l2, 0).unwrap().holds());
        assert!(!consequence(&[], &f("v1"), 0).unwrap().holds());
    }

    #[test]
    fn consistency_examples() {
        assert_eq!(consistent(&[f("v1")]).unwrap(), Some(vec![int(1)]));
        assert_eq!(consistent(&[f("v1"), f("~v1")]).unwrap(), None);
        assert_eq!(consistent(&[f("eta[1/2] <-> v1")]).unwrap(), Some(vec![rat(1, 2)]));
    }

    #[test]
    fn consequence_with_real_scalars() {
        let r = Scalar::Real(CReal::sqrt2_over_2());
        // premise Δ_r v1 = 1 is never satisfiable, so anything follows
        let prem = Formula::delta(r.clone(), Formula::var(1));
        let c = consequence(&[prem], &f("v1 . ~v1"), 8).unwrap();
        assert_eq!(c.verdict, Verdict::Yes);
        // the conclusion Δ_r v1 fails wherever v1 = 1
        let c = consequence(&[f("v1")], &Formula::delta(r, Formula::var(1)), 8).unwrap();
        assert_eq!(c.verdict, Verdict::No);
        assert_eq!(c.witness, Some(vec![int(1)]));
    }
}
