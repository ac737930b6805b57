//! Scalar domains: exact rationals and computable reals given by nested
//! rational enclosures.
//!
//! A [`CReal`] is a pure generator `k ↦ (lo_k, hi_k)` with
//! `lo_k ≤ lo_{k+1} ≤ hi_{k+1} ≤ hi_k` and `hi_k − lo_k ≤ 2^-k`. Every
//! constructor audits the first [`AUDIT_DEPTH`] levels before handing the
//! value out.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Number of precision levels checked when a [`CReal`] is constructed.
pub const AUDIT_DEPTH: u32 = 24;

pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

/// `2^-k` as an exact rational.
pub fn pow2_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k as usize)
}

pub fn in_unit(x: &Rational) -> bool {
    !x.is_negative() && *x <= Rational::one()
}

/// Parses `p/q` or `p` (optional leading minus).
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::invalid(format!("malformed rational `{text}`"));
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(Error::invalid(format!("zero denominator in `{text}`")));
    }
    Ok(Rational::new(num, den))
}

/// Canonical text form: `p/q`, or `p` when the denominator is one.
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}

pub fn truncated_sum(a: &Rational, b: &Rational) -> Rational {
    (a + b).min(Rational::one())
}

/// `a ⊙ b* = max(0, a − b)`.
pub fn truncated_diff(a: &Rational, b: &Rational) -> Rational {
    (a - b).max(Rational::zero())
}

/// A closed rational interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn point(x: Rational) -> Self {
        Interval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn complement(&self) -> Interval {
        let one = Rational::one();
        Interval { lo: &one - &self.hi, hi: &one - &self.lo }
    }

    pub fn truncated_sum(&self, other: &Interval) -> Interval {
        Interval {
            lo: truncated_sum(&self.lo, &other.lo),
            hi: truncated_sum(&self.hi, &other.hi),
        }
    }

    /// Product of two intervals inside `[0,1]`.
    pub fn product(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo * &other.lo, hi: &self.hi * &other.hi }
    }

    pub fn truncated_diff(&self, other: &Interval) -> Interval {
        Interval {
            lo: truncated_diff(&self.lo, &other.hi),
            hi: truncated_diff(&self.hi, &other.lo),
        }
    }
}

trait Approximant: Send + Sync + fmt::Debug {
    fn approx(&self, k: u32) -> (Rational, Rational);
}

#[derive(Debug)]
struct ExactApprox(Rational);

impl Approximant for ExactApprox {
    fn approx(&self, _k: u32) -> (Rational, Rational) {
        (self.0.clone(), self.0.clone())
    }
}

/// `sqrt(radicand)` by dyadic bisection, memoized per level.
///
/// Level `j` holds the left endpoint of a dyadic interval of width `2^-j`
/// containing the root. `approx(k)` reports level `k + 1`.
#[derive(Debug)]
struct SqrtApprox {
    radicand: Rational,
    left: Mutex<Vec<Rational>>,
}

impl SqrtApprox {
    fn new(radicand: Rational) -> Self {
        SqrtApprox { radicand, left: Mutex::new(vec![Rational::zero()]) }
    }

    fn level(&self, j: u32) -> Rational {
        let mut left = self.left.lock().expect("sqrt cache poisoned");
        while left.len() <= j as usize {
            let depth = left.len() as u32;
            let a = left.last().cloned().unwrap_or_else(Rational::zero);
            let mid = &a + pow2_neg(depth);
            let next = if &mid * &mid <= self.radicand { mid } else { a };
            left.push(next);
        }
        left[j as usize].clone()
    }
}

impl Approximant for SqrtApprox {
    fn approx(&self, k: u32) -> (Rational, Rational) {
        let j = k + 1;
        let lo = self.level(j);
        let hi = &lo + pow2_neg(j);
        (lo, hi)
    }
}

#[derive(Debug)]
struct ProductApprox(CReal, CReal);

impl Approximant for ProductApprox {
    fn approx(&self, k: u32) -> (Rational, Rational) {
        let (al, ah) = self.0.approx(k + 1);
        let (bl, bh) = self.1.approx(k + 1);
        (al * bl, ah * bh)
    }
}

#[derive(Debug)]
struct ComplementApprox(CReal);

impl Approximant for ComplementApprox {
    fn approx(&self, k: u32) -> (Rational, Rational) {
        let (lo, hi) = self.0.approx(k);
        (Rational::one() - hi, Rational::one() - lo)
    }
}

#[derive(Debug)]
struct TruncDiffApprox(CReal, CReal);

impl Approximant for TruncDiffApprox {
    fn approx(&self, k: u32) -> (Rational, Rational) {
        let (al, ah) = self.0.approx(k + 1);
        let (bl, bh) = self.1.approx(k + 1);
        (truncated_diff(&al, &bh), truncated_diff(&ah, &bl))
    }
}

/// A computable real in `[0,1]`, identified by its label.
#[derive(Clone)]
pub struct CReal {
    label: Arc<str>,
    gen: Arc<dyn Approximant>,
}

impl fmt::Debug for CReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CReal({})", self.label)
    }
}

impl PartialEq for CReal {
    fn eq(&self, other: &Self) -> bool {
        self.label == other.label
    }
}

impl Eq for CReal {}

impl CReal {
    fn build(label: impl Into<Arc<str>>, gen: Arc<dyn Approximant>) -> Result<Self> {
        let x = CReal { label: label.into(), gen };
        x.audit(AUDIT_DEPTH)?;
        Ok(x)
    }

    pub fn from_rational(x: Rational) -> Result<Self> {
        if !in_unit(&x) {
            return Err(Error::ScalarRange(format_rational(&x)));
        }
        let label = format_rational(&x);
        Self::build(label, Arc::new(ExactApprox(x)))
    }

    /// `sqrt(radicand)` for a rational radicand in `[0,1]`.
    pub fn sqrt(label: &str, radicand: Rational) -> Result<Self> {
        if !in_unit(&radicand) {
            return Err(Error::ScalarRange(format_rational(&radicand)));
        }
        if let Some(root) = rational_sqrt(&radicand) {
            return Self::build(label, Arc::new(ExactApprox(root)));
        }
        Self::build(label, Arc::new(SqrtApprox::new(radicand)))
    }

    /// The canonical example constant `√2/2 = sqrt(1/2)`.
    pub fn sqrt2_over_2() -> Self {
        Self::sqrt("sqrt2_over_2", rat(1, 2)).expect("sqrt(1/2) is a valid approximant")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn approx(&self, k: u32) -> (Rational, Rational) {
        self.gen.approx(k)
    }

    pub fn interval(&self, k: u32) -> Interval {
        let (lo, hi) = self.approx(k);
        Interval { lo, hi }
    }

    pub fn product(&self, other: &CReal) -> Result<CReal> {
        let label = format!("({}*{})", self.label, other.label);
        Self::build(label, Arc::new(ProductApprox(self.clone(), other.clone())))
    }

    pub fn complement(&self) -> Result<CReal> {
        let label = format!("(1-{})", self.label);
        Self::build(label, Arc::new(ComplementApprox(self.clone())))
    }

    pub fn truncated_diff(&self, other: &CReal) -> Result<CReal> {
        let label = format!("({}-.{})", self.label, other.label);
        Self::build(label, Arc::new(TruncDiffApprox(self.clone(), other.clone())))
    }

    /// Checks the nesting, width, and range invariants up to `depth`.
    pub fn audit(&self, depth: u32) -> Result<()> {
        let fail = |why: String| Err(Error::InvalidApproximant(format!("{}: {why}", self.label)));
        let mut prev: Option<(Rational, Rational)> = None;
        for k in 0..=depth {
            let (lo, hi) = self.approx(k);
            if lo > hi {
                return fail(format!("lo > hi at level {k}"));
            }
            if &hi - &lo > pow2_neg(k) {
                return fail(format!("width exceeds 2^-{k}"));
            }
            if k == 0 && (lo.is_negative() || hi > Rational::one()) {
                return fail("level 0 leaves [0,1]".into());
            }
            if let Some((plo, phi)) = &prev {
                if lo < *plo || hi > *phi {
                    return fail(format!("level {k} is not nested in level {}", k - 1));
                }
            }
            prev = Some((lo, hi));
        }
        Ok(())
    }
}

/// Exact square root of a non-negative rational, when it is a rational square.
pub fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &n * &n == *x.numer() && &d * &d == *x.denom() {
        Some(Rational::new(n, d))
    } else {
        None
    }
}

/// A scalar of QŁ (rational) or RŁ (computable real).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Rational(Rational),
    Real(CReal),
}

impl Scalar {
    pub fn rational(x: Rational) -> Result<Self> {
        if !in_unit(&x) {
            return Err(Error::ScalarRange(format_rational(&x)));
        }
        Ok(Scalar::Rational(x))
    }

    pub fn one() -> Self {
        Scalar::Rational(Rational::one())
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rational(q) => Some(q),
            Scalar::Real(_) => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rational(_))
    }

    pub fn approx(&self, k: u32) -> (Rational, Rational) {
        match self {
            Scalar::Rational(q) => (q.clone(), q.clone()),
            Scalar::Real(x) => x.approx(k),
        }
    }

    pub fn interval(&self, k: u32) -> Interval {
        let (lo, hi) = self.approx(k);
        Interval { lo, hi }
    }

    fn to_creal(&self) -> Result<CReal> {
        match self {
            Scalar::Rational(q) => CReal::from_rational(q.clone()),
            Scalar::Real(x) => Ok(x.clone()),
        }
    }

    pub fn product(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a * b)),
            _ => Ok(Scalar::Real(self.to_creal()?.product(&other.to_creal()?)?)),
        }
    }

    pub fn complement(&self) -> Result<Scalar> {
        match self {
            Scalar::Rational(a) => Ok(Scalar::Rational(Rational::one() - a)),
            Scalar::Real(x) => Ok(Scalar::Real(x.complement()?)),
        }
    }

    /// `a ⊙ b* = max(0, a − b)`.
    pub fn truncated_diff(&self, other: &Scalar) -> Result<Scalar> {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(truncated_diff(a, b))),
            _ => Ok(Scalar::Real(self.to_creal()?.truncated_diff(&other.to_creal()?)?)),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) => write!(f, "{q}"),
            Scalar::Real(x) => f.write_str(x.label()),
        }
    }
}

/// Named scalars available to the formula parser.
#[derive(Debug, Clone, Default)]
pub struct ScalarRegistry {
    names: BTreeMap<String, Scalar>,
}

impl ScalarRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry preloaded with `sqrt2_over_2`.
    pub fn with_defaults() -> Self {
        let mut reg = Self::default();
        reg.insert("sqrt2_over_2", Scalar::Real(CReal::sqrt2_over_2()));
        reg
    }

    pub fn insert(&mut self, name: &str, value: Scalar) {
        self.names.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Scalar> {
        self.names.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.keys().map(String::as_str)
    }

    /// Loads `name = sqrt(p/q)` or `name = p/q` lines; `#` starts a comment.
    pub fn load_table(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| Error::Syntax {
                line: lineno + 1,
                column: 1,
                message: message.to_string(),
            };
            let (name, expr) = line.split_once('=').ok_or_else(|| syntax("expected `name = expr`"))?;
            let name = name.trim();
            if name.is_empty()
                || !name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                return Err(syntax("invalid scalar name"));
            }
            let expr = expr.trim();
            let value = if let Some(inner) = expr.strip_prefix("sqrt(").and_then(|s| s.strip_suffix(')')) {
                Scalar::Real(CReal::sqrt(name, parse_rational(inner)?)?)
            } else {
                Scalar::rational(parse_rational(expr)?)?
            };
            self.insert(name, value);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_embedding_is_constant() {
        let x = CReal::from_rational(rat(1, 3)).unwrap();
        for k in [0, 1, 5, 40] {
            assert_eq!(x.approx(k), (rat(1, 3), rat(1, 3)));
        }
    }

    #[test]
    fn sqrt_half_enclosures() {
        let s = CReal::sqrt2_over_2();
        for k in [1u32, 20] {
            let (lo, hi) = s.approx(k);
            assert!(&hi - &lo <= pow2_neg(k));
            // lo² ≤ 1/2 ≤ hi² brackets √2/2
            assert!(&lo * &lo <= rat(1, 2));
            assert!(&hi * &hi >= rat(1, 2));
        }
        // 0.70710678 lies in the level-1 pair
        let (lo, hi) = s.approx(1);
        assert!(lo <= rat(70710678, 100000000) && rat(70710679, 100000000) <= hi);
    }

    #[test]
    fn perfect_square_radicand_is_exact() {
        let s = CReal::sqrt("q", rat(4, 9)).unwrap();
        assert_eq!(s.approx(0), (rat(2, 3), rat(2, 3)));
    }

    #[test]
    fn rational_scalar_ops() {
        let a = Scalar::Rational(rat(1, 2));
        let b = Scalar::Rational(rat(2, 3));
        assert_eq!(a.product(&b).unwrap(), Scalar::Rational(rat(1, 3)));
        assert_eq!(Scalar::Rational(int(0)).complement().unwrap(), Scalar::Rational(int(1)));
        let c = Scalar::Rational(rat(3, 4));
        assert_eq!(a.truncated_diff(&c).unwrap(), Scalar::Rational(int(0)));
    }

    #[test]
    fn derived_creals_pass_audit() {
        let s = Scalar::Real(CReal::sqrt2_over_2());
        let half = Scalar::Rational(rat(1, 2));
        for derived in [
            s.product(&s).unwrap(),
            s.complement().unwrap(),
            s.truncated_diff(&half).unwrap(),
            half.truncated_diff(&s).unwrap(),
        ] {
            let Scalar::Real(x) = derived else { panic!("expected a real scalar") };
            x.audit(40).unwrap();
        }
        // (√2/2)² = 1/2 stays enclosed
        let Scalar::Real(sq) = s.product(&s).unwrap() else { unreachable!() };
        for k in 0..30 {
            assert!(sq.interval(k).contains(&rat(1, 2)));
        }
    }

    #[test]
    fn registry_table() {
        let mut reg = ScalarRegistry::empty();
        reg.load_table("# constants\nr = sqrt(1/3)\nq = 2/5\n").unwrap();
        assert_eq!(reg.get("q"), Some(&Scalar::Rational(rat(2, 5))));
        assert!(matches!(reg.get("r"), Some(Scalar::Real(_))));
        assert!(reg.load_table("bad = 3/2").is_err());
        assert!(reg.load_table("nonsense").is_err());
    }

    #[test]
    fn rejects_bad_generator() {
        #[derive(Debug)]
        struct Wide;
        impl Approximant for Wide {
            fn approx(&self, _k: u32) -> (Rational, Rational) {
                (rat(0, 1), rat(1, 1))
            }
        }
        assert!(matches!(CReal::build("wide", Arc::new(Wide)), Err(Error::InvalidApproximant(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn unit_rational() -> impl Strategy<Value = Rational> {
            (0i64..=64, 1i64..=64).prop_map(|(p, q)| rat(p.min(q), q))
        }

        proptest! {
            #[test]
            fn sqrt_levels_nest(r in unit_rational(), j in 0u32..30, k in 0u32..30) {
                let x = CReal::sqrt("x", r).unwrap();
                let (j, k) = (j.min(k), j.max(k));
                let (lj, hj) = x.approx(j);
                let (lk, hk) = x.approx(k);
                prop_assert!(lj <= lk && lk <= hk && hk <= hj);
            }

            #[test]
            fn interval_ops_enclose_pointwise_images(
                a in unit_rational(), b in unit_rational(),
                wa in 0i64..8, wb in 0i64..8,
            ) {
                let widen = |x: &Rational, w: i64| Interval {
                    lo: (x - rat(w, 64)).max(int(0)),
                    hi: (x + rat(w, 64)).min(int(1)),
                };
                let ia = widen(&a, wa);
                let ib = widen(&b, wb);
                prop_assert!(ia.product(&ib).contains(&(&a * &b)));
                prop_assert!(ia.complement().contains(&(int(1) - &a)));
                prop_assert!(ia.truncated_diff(&ib).contains(&truncated_diff(&a, &b)));
                prop_assert!(ia.truncated_sum(&ib).contains(&truncated_sum(&a, &b)));
            }
        }
    }
}
