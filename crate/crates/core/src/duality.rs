//! Finitely presented algebras through their zero sets: presentations,
//! the polyhedron-to-presentation construction, MV generators and scalar
//! extension.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::{parse, Formula};
use crate::geometry::{refine, AffineFn, Point, RationalPolyhedron, Simplex, SimplicialComplex};
use crate::par;
use crate::pwl::{
    cell_cap, coefficient_class, compile_exact, compile_in, compose, mv_multiple, pwl_le, truncated_multiple,
    CoefficientClass, Compiled, IntervalPwl, PwlFunction,
};
use crate::scalar::Rational;

/// The variety a presentation lives in, ordered by scalar strength.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlgebraClass {
    MV,
    DMV,
    RMV,
}

impl fmt::Display for AlgebraClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlgebraClass::MV => "MV",
            AlgebraClass::DMV => "DMV",
            AlgebraClass::RMV => "RMV",
        })
    }
}

impl FromStr for AlgebraClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "MV" | "mv" => Ok(AlgebraClass::MV),
            "DMV" | "dmv" => Ok(AlgebraClass::DMV),
            "RMV" | "rmv" => Ok(AlgebraClass::RMV),
            _ => Err(Error::invalid(format!("unknown algebra class {s:?} (expected MV, DMV or RMV)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Generator {
    Exact(PwlFunction),
    Interval(IntervalPwl),
}

/// The quotient of the free `n`-generated algebra of `class` by the
/// principal ideal of `generator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    class: AlgebraClass,
    n: usize,
    generator: Generator,
}

#[derive(Deserialize)]
struct PresentationFile {
    class: String,
    n: usize,
    generator: serde_json::Value,
}

impl Presentation {
    /// Checks that the generator's coefficients are allowed in `class`.
    pub fn new(class: AlgebraClass, n: usize, generator: Generator) -> Result<Self> {
        let dim = match &generator {
            Generator::Exact(f) => f.dim(),
            Generator::Interval(iv) => iv.dim(),
        };
        if dim != n {
            return Err(Error::DimensionMismatch { expected: n, found: dim });
        }
        match (&generator, class) {
            (Generator::Interval(_), AlgebraClass::MV | AlgebraClass::DMV) => {
                return Err(Error::invalid(format!("real-scalar generator is not allowed in class {class}")));
            }
            (Generator::Exact(f), AlgebraClass::MV) if coefficient_class(f) != CoefficientClass::Integer => {
                return Err(Error::invalid("MV generator must have integer coefficients"));
            }
            _ => {}
        }
        Ok(Presentation { class, n, generator })
    }

    /// From a formula; real scalars are enclosed at precision `k`.
    pub fn from_formula(class: AlgebraClass, n: usize, phi: &Formula, k: u32) -> Result<Self> {
        let generator = match compile_in(phi, k, n)? {
            Compiled::Exact(f) => Generator::Exact(f),
            Compiled::Interval(iv) => Generator::Interval(iv),
        };
        Self::new(class, n, generator)
    }

    pub fn class(&self) -> AlgebraClass {
        self.class
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// `{"class": .., "n": .., "generator": formula string | PWL dump}`.
    pub fn from_json(text: &str, k: u32) -> Result<Self> {
        let file: PresentationFile = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let class: AlgebraClass = file.class.parse()?;
        match &file.generator {
            serde_json::Value::String(src) => Self::from_formula(class, file.n, &parse(src)?, k),
            v => Self::new(class, file.n, Generator::Exact(PwlFunction::from_json_value(v)?)),
        }
    }

    /// Dump with the generator as PWL data (its lower envelope and upper
    /// envelope for real scalars).
    pub fn to_json_value(&self) -> serde_json::Value {
        let pwl = |f: &PwlFunction| serde_json::from_str::<serde_json::Value>(&f.to_json()).expect("valid dump");
        let generator = match &self.generator {
            Generator::Exact(f) => pwl(f),
            Generator::Interval(iv) => serde_json::json!({
                "precision": iv.precision,
                "lower": pwl(&iv.lower),
                "upper": pwl(&iv.upper),
            }),
        };
        serde_json::json!({ "class": self.class.to_string(), "n": self.n, "generator": generator })
    }
}

/// Zero set of an exact generator, or the pair of enclosures at a
/// precision index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ZeroSet {
    Exact(RationalPolyhedron),
    Enclosure { outer: RationalPolyhedron, inner: RationalPolyhedron, precision: u32 },
}

/// `f⁻¹(0)` for a function with values in `[0,1]`.
///
/// On each cell the function is affine and nonnegative, so its zeros there
/// form the face spanned by the zero vertices.
pub fn zero_set_of(f: &PwlFunction) -> RationalPolyhedron {
    let faces: Vec<Simplex> = par::map(&(0..f.len()).collect::<Vec<_>>(), |&i| {
        let a = &f.pieces()[i];
        f.cells()[i].face(|_, v| a.eval(v).is_zero())
    })
    .into_iter()
    .flatten()
    .collect();
    // Simplex caches its H-representation, which Eq and Hash ignore.
    #[allow(clippy::mutable_key_type)]
    let faces: HashSet<Simplex> = faces.into_iter().collect();
    #[allow(clippy::mutable_key_type)]
    let mut redundant: HashSet<Simplex> = HashSet::new();
    for s in &faces {
        let v = s.vertices();
        let full = (1u32 << v.len()) - 1;
        for mask in 1..full {
            let sub: Vec<Point> = (0..v.len()).filter(|i| mask & (1 << i) != 0).map(|i| v[i].clone()).collect();
            redundant.insert(Simplex::from_sorted_unchecked(sub));
        }
    }
    let kept: Vec<Simplex> = faces.into_iter().filter(|s| !redundant.contains(s)).collect();
    RationalPolyhedron::canonical(f.dim(), kept)
}

pub fn zero_set(p: &Presentation) -> ZeroSet {
    match &p.generator {
        Generator::Exact(f) => ZeroSet::Exact(zero_set_of(f)),
        // lower ≤ f ≤ upper, so Z(upper) ⊆ Z(f) ⊆ Z(lower)
        Generator::Interval(iv) => ZeroSet::Enclosure {
            outer: zero_set_of(&iv.lower),
            inner: zero_set_of(&iv.upper),
            precision: iv.precision,
        },
    }
}

/// Hyperplanes supporting the affine hulls and facets of every simplex.
fn supporting_hyperplanes(p: &RationalPolyhedron) -> Vec<AffineFn> {
    let mut hs: Vec<AffineFn> = p
        .simplices()
        .iter()
        .flat_map(|s| {
            let h = s.hrep();
            h.eqs.iter().chain(&h.ineqs).filter_map(AffineFn::normalized_hyperplane).collect::<Vec<_>>()
        })
        .collect();
    hs.sort();
    hs.dedup();
    hs
}

/// Vertex labels (0 in `p`, 1 outside) and the interpolating pieces.
fn hat_pieces(p: &RationalPolyhedron, c: &SimplicialComplex) -> (HashMap<Point, Rational>, Vec<AffineFn>) {
    let verts = c.vertices();
    let inside = par::map(&verts, |v| p.contains_point(v));
    let labels: HashMap<Point, Rational> = verts
        .into_iter()
        .zip(inside)
        .map(|(v, i)| (v, if i { Rational::zero() } else { Rational::one() }))
        .collect();
    let pieces = par::map(c.cells(), |cell| {
        let values: Vec<Rational> = cell.vertices().iter().map(|v| labels[v].clone()).collect();
        cell.interpolate(&values)
    });
    (labels, pieces)
}

/// A generator whose zero set is exactly `p`.
///
/// The cube triangulation is cut by every supporting hyperplane of `p`'s
/// simplices, which makes `p` a union of faces. The generator interpolates
/// 0 on vertices in `p` and 1 elsewhere. If some face has all its vertices
/// in `p` without lying in `p`, the complex is first barycentrically
/// subdivided, after which such faces cannot occur. MV class
/// presentations use the integer generator of [`mv_generator`].
pub fn presentation_of(p: &RationalPolyhedron, class: AlgebraClass) -> Result<Presentation> {
    let n = p.dim();
    if p.is_empty() {
        return Presentation::new(class, n, Generator::Exact(PwlFunction::constant(n, Rational::one())?));
    }
    let mut cells = SimplicialComplex::kuhn(n)?.into_cells();
    for h in supporting_hyperplanes(p) {
        let hs = vec![h; cells.len()];
        cells = refine(&cells, &hs, cell_cap())?.cells;
    }
    let mut complex = SimplicialComplex::from_cells(n, cells);
    let (labels, pieces) = hat_pieces(p, &complex);
    // a face with every vertex in `p` may still leave `p` between them
    let leaks = par::map(complex.cells(), |c| {
        c.face(|_, v| labels[v].is_zero()).is_some_and(|z| !p.contains_point(&z.barycenter()))
    });
    let pieces = if leaks.into_iter().any(|b| b) {
        complex = complex.barycentric_subdivision();
        crate::pwl::check_cap(complex.len())?;
        hat_pieces(p, &complex).1
    } else {
        pieces
    };
    let f = PwlFunction::from_parts(n, complex.into_cells(), pieces);
    let f = if class == AlgebraClass::MV { mv_generator(&f)?.generator } else { f };
    Presentation::new(class, n, Generator::Exact(f))
}

/// An integer generator of the same principal ideal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MvGenerator {
    /// lcm of the denominators of `f` over its linearity regions.
    pub k: BigInt,
    /// `min(1, k·f)`.
    pub generator: PwlFunction,
}

pub fn mv_generator(f: &PwlFunction) -> Result<MvGenerator> {
    let k = f.regions().denominator_lcm;
    let generator = truncated_multiple(f, &Rational::from_integer(k.clone()))?;
    Ok(MvGenerator { k, generator })
}

/// Evidence that `(f] = (b]`: `f ≤ b` and `b ≤ f ⊕ ⋯ ⊕ f` (`k` times).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealCertificate {
    pub k: BigInt,
    pub generator: PwlFunction,
    pub below: bool,
    pub dominated: bool,
    pub integer: bool,
}

impl IdealCertificate {
    pub fn is_valid(&self) -> bool {
        self.below && self.dominated && self.integer
    }
}

pub fn certify(f: &PwlFunction) -> Result<IdealCertificate> {
    let MvGenerator { k, generator } = mv_generator(f)?;
    let times = k.to_u64().ok_or_else(|| Error::invalid("generator multiplier too large"))?;
    let sum = mv_multiple(f, times)?;
    Ok(IdealCertificate {
        below: pwl_le(f, &generator),
        dominated: pwl_le(&generator, &sum),
        integer: coefficient_class(&generator) == CoefficientClass::Integer,
        k,
        generator,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MvGenerated {
    Yes(MvGenerator),
    /// Enclosure data cannot decide; the zero-set enclosures at `k`.
    Unknown { outer: RationalPolyhedron, inner: RationalPolyhedron, precision: u32 },
}

pub fn is_mv_generated(p: &Presentation) -> Result<MvGenerated> {
    match &p.generator {
        Generator::Exact(f) => Ok(MvGenerated::Yes(mv_generator(f)?)),
        Generator::Interval(iv) => Ok(MvGenerated::Unknown {
            outer: zero_set_of(&iv.lower),
            inner: zero_set_of(&iv.upper),
            precision: iv.precision,
        }),
    }
}

/// The same generator read in a class with more scalars.
pub fn extend_scalars(p: &Presentation, target: AlgebraClass) -> Result<Presentation> {
    if target < p.class {
        return Err(Error::Narrowing { from: p.class.to_string(), to: target.to_string() });
    }
    Ok(Presentation { class: target, n: p.n, generator: p.generator.clone() })
}

/// Images `σ(v_1), …, σ(v_m)` of the source variables, over target
/// variables `v_1, …, v_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    images: Vec<Formula>,
    target_arity: usize,
}

impl Substitution {
    pub fn new(images: Vec<Formula>) -> Self {
        let target_arity = images.iter().map(Formula::arity).max().unwrap_or(0).max(1);
        Substitution { images, target_arity }
    }

    pub fn with_target_arity(images: Vec<Formula>, n: usize) -> Result<Self> {
        if let Some(bad) = images.iter().find(|f| f.arity() > n) {
            return Err(Error::DimensionMismatch { expected: n, found: bad.arity() });
        }
        Ok(Substitution { images, target_arity: n })
    }

    /// `["v1 + v2", "delta[1/2] v1"]` or `{"1": "...", "2": "..."}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let sources: Vec<String> = match v {
            serde_json::Value::Array(items) => items
                .into_iter()
                .map(|i| i.as_str().map(str::to_owned).ok_or_else(|| Error::invalid("images must be strings")))
                .collect::<Result<_>>()?,
            serde_json::Value::Object(map) => {
                let mut entries: Vec<(usize, String)> = map
                    .into_iter()
                    .map(|(k, v)| {
                        let idx = k.trim_start_matches('v').parse::<usize>().map_err(|_| Error::invalid(format!("bad variable {k:?}")))?;
                        let s = v.as_str().ok_or_else(|| Error::invalid("images must be strings"))?.to_owned();
                        Ok((idx, s))
                    })
                    .collect::<Result<_>>()?;
                entries.sort();
                if entries.iter().enumerate().any(|(i, (idx, _))| *idx != i + 1) {
                    return Err(Error::invalid("substitution must be total on v1..vm"));
                }
                entries.into_iter().map(|(_, s)| s).collect()
            }
            _ => return Err(Error::invalid("substitution must be a list or an object")),
        };
        Ok(Self::new(sources.iter().map(|s| parse(s)).collect::<Result<_>>()?))
    }

    pub fn images(&self) -> &[Formula] {
        &self.images
    }

    pub fn target_arity(&self) -> usize {
        self.target_arity
    }
}

/// `Ok(None)` when every image has integer coefficients, otherwise the
/// first offending source variable (1-based).
pub fn is_mv_preserving(sigma: &Substitution) -> Result<Option<usize>> {
    for (i, img) in sigma.images.iter().enumerate() {
        if !img.is_exact() {
            return Err(Error::NotExact(img.to_string()));
        }
        let f = compile_exact(img, sigma.target_arity)?;
        if coefficient_class(&f) != CoefficientClass::Integer {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// The same check through function composition: the images of the
/// coordinate projections under `σ`.
pub fn is_mv_preserving_by_composition(sigma: &Substitution) -> Result<Option<usize>> {
    let m = sigma.images.len();
    let lambdas: Vec<PwlFunction> =
        sigma.images.iter().map(|img| compile_exact(img, sigma.target_arity)).collect::<Result<_>>()?;
    for i in 0..m {
        let proj = compile_exact(&Formula::var(i + 1), m)?;
        if coefficient_class(&compose(&proj, &lambdas)?) != CoefficientClass::Integer {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

/// An L-class generator of the same theory as a QL formula, with its
/// certificate.
pub fn l_generated_witness(phi: &Formula) -> Result<IdealCertificate> {
    if !phi.is_exact() {
        return Err(Error::NotExact(format!("{phi} (use is_mv_generated for real scalars)")));
    }
    certify(&compile_exact(phi, phi.arity())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polyhedron_equal;
    use crate::scalar::{int, rat, CReal, Scalar};

    fn pwl(s: &str) -> PwlFunction {
        let phi = parse(s).unwrap();
        compile_exact(&phi, phi.arity()).unwrap()
    }

    fn poly1(segs: &[(Rational, Rational)]) -> RationalPolyhedron {
        let simplices = segs
            .iter()
            .map(|(a, b)| {
                if a == b {
                    Simplex::new(vec![vec![a.clone()]]).unwrap()
                } else {
                    Simplex::new(vec![vec![a.clone()], vec![b.clone()]]).unwrap()
                }
            })
            .collect();
        RationalPolyhedron::new(1, simplices).unwrap()
    }

    #[test]
    fn zero_set_examples() {
        assert!(polyhedron_equal(&zero_set_of(&pwl("~v1")), &poly1(&[(int(1), int(1))])));
        assert!(polyhedron_equal(&zero_set_of(&pwl("~(v1 + v1)")), &poly1(&[(rat(1, 2), int(1))])));
        assert!(zero_set_of(&pwl("v1 \\/ ~v1")).is_empty());
    }

    #[test]
    fn irrational_zero_set_enclosures() {
        let r = Scalar::Real(CReal::sqrt2_over_2());
        let dr = Formula::delta(r, Formula::var(1));
        let phi = Formula::neg(Formula::oplus(dr.clone(), dr));
        for k in [4, 12] {
            let p = Presentation::from_formula(AlgebraClass::RMV, 1, &phi, k).unwrap();
            let ZeroSet::Enclosure { outer, inner, .. } = zero_set(&p) else { panic!("expected enclosure") };
            assert!(inner.is_subset_of(&outer));
            let a = &outer.least_vertex().unwrap()[0];
            let b = &inner.least_vertex().unwrap()[0];
            // a ≤ √2/2 ≤ b
            assert!(a * a * int(2) <= int(1) && b * b * int(2) >= int(1));
            assert!(b - a <= crate::scalar::pow2_neg(k - 1));
            assert!(matches!(is_mv_generated(&p).unwrap(), MvGenerated::Unknown { .. }));
        }
    }

    #[test]
    fn presentation_examples() {
        let point = poly1(&[(int(1), int(1))]);
        let p = presentation_of(&point, AlgebraClass::DMV).unwrap();
        let Generator::Exact(g) = p.generator() else { panic!() };
        assert_eq!(g.eval(&[int(1)]).unwrap(), int(0));
        assert!(g.eval(&[rat(99, 100)]).unwrap() > int(0));
        assert!(polyhedron_equal(&zero_set_of(g), &point));

        let cube = RationalPolyhedron::cube(2).unwrap();
        let Generator::Exact(g) = presentation_of(&cube, AlgebraClass::DMV).unwrap().generator else { panic!() };
        assert!(crate::pwl::pwl_equal(&g, &PwlFunction::constant(2, int(0)).unwrap()));

        let upper = poly1(&[(rat(1, 2), int(1))]);
        let Generator::Exact(g) = presentation_of(&upper, AlgebraClass::DMV).unwrap().generator else { panic!() };
        for (x, y) in [(int(0), int(1)), (rat(1, 4), rat(1, 2)), (rat(3, 4), int(0))] {
            assert_eq!(g.eval(&[x]).unwrap(), y);
        }

        let empty = presentation_of(&RationalPolyhedron::empty(2), AlgebraClass::RMV).unwrap();
        assert!(zero_set_of(match empty.generator() {
            Generator::Exact(g) => g,
            _ => unreachable!(),
        })
        .is_empty());

        // two isolated points need the subdivision step
        let two = poly1(&[(int(0), int(0)), (int(1), int(1))]);
        let Generator::Exact(g) = presentation_of(&two, AlgebraClass::MV).unwrap().generator else { panic!() };
        assert_eq!(coefficient_class(&g), CoefficientClass::Integer);
        assert!(polyhedron_equal(&zero_set_of(&g), &two));
    }

    #[test]
    fn mv_generator_examples() {
        let g = mv_generator(&pwl("delta[1/2] v1")).unwrap();
        assert_eq!(g.k, BigInt::from(2));
        assert!(crate::pwl::pwl_equal(&g.generator, &pwl("v1")));
        assert_eq!(mv_generator(&pwl("v1")).unwrap().k, BigInt::from(1));
        let g = mv_generator(&pwl("delta[1/3] ~v1")).unwrap();
        assert_eq!(g.k, BigInt::from(3));
        assert!(crate::pwl::pwl_equal(&g.generator, &pwl("~v1")));

        let c = l_generated_witness(&parse("delta[1/3] (v1 + v2)").unwrap()).unwrap();
        assert!(c.is_valid());
        assert_eq!(c.k, BigInt::from(3));
        assert!(crate::pwl::pwl_equal(&c.generator, &pwl("v1 + v2")));
        assert!(l_generated_witness(&Formula::delta(Scalar::Real(CReal::sqrt2_over_2()), Formula::var(1))).is_err());
    }

    #[test]
    fn mv_multiple_matches_iterated_sum() {
        let f = pwl("delta[1/5] (v1 . ~v2)");
        for k in [1u64, 2, 5, 6] {
            let direct = (1..k).fold(parse("delta[1/5] (v1 . ~v2)").unwrap(), |acc, _| {
                Formula::oplus(acc, parse("delta[1/5] (v1 . ~v2)").unwrap())
            });
            assert!(crate::pwl::pwl_equal(&mv_multiple(&f, k).unwrap(), &compile_exact(&direct, 2).unwrap()), "{k}");
        }
    }

    #[test]
    fn scalar_extension() {
        let p = Presentation::from_formula(AlgebraClass::MV, 1, &parse("~(v1 + v1)").unwrap(), 0).unwrap();
        let r = extend_scalars(&p, AlgebraClass::RMV).unwrap();
        assert_eq!(zero_set(&r), zero_set(&p));
        assert_eq!(extend_scalars(&extend_scalars(&p, AlgebraClass::DMV).unwrap(), AlgebraClass::RMV).unwrap(), r);
        assert!(matches!(extend_scalars(&r, AlgebraClass::MV), Err(Error::Narrowing { .. })));
        assert!(Presentation::from_formula(AlgebraClass::MV, 1, &parse("delta[1/2] v1").unwrap(), 0).is_err());
    }

    #[test]
    fn substitution_checks() {
        let s = |v: &[&str]| Substitution::new(v.iter().map(|x| parse(x).unwrap()).collect());
        assert_eq!(is_mv_preserving(&s(&["v1 + v2"])).unwrap(), None);
        assert_eq!(is_mv_preserving(&s(&["delta[1/2] v1"])).unwrap(), Some(1));
        assert_eq!(is_mv_preserving(&s(&["delta[1/2] v1 + delta[1/2] v1"])).unwrap(), None);
        let mixed = s(&["v1 . v2", "delta[1/3] v2"]);
        assert_eq!(is_mv_preserving(&mixed).unwrap(), Some(2));
        assert_eq!(is_mv_preserving_by_composition(&mixed).unwrap(), Some(2));
        let json = Substitution::from_json(r#"{"v2": "delta[1/3] v2", "v1": "v1 . v2"}"#).unwrap();
        assert_eq!(json, mixed);
    }

    #[test]
    fn presentation_json() {
        let p = Presentation::from_json(r#"{"class":"DMV","n":1,"generator":"delta[1/2] ~v1"}"#, 0).unwrap();
        let back = Presentation::from_json(&p.to_json_value().to_string(), 0).unwrap();
        assert_eq!(back, p);
        assert!(Presentation::from_json(r#"{"class":"XMV","n":1,"generator":"v1"}"#, 0).is_err());
    }
}
