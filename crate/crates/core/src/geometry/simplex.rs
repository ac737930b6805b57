use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use super::linalg::{self, sub};
use super::{AffineFn, Point};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, in_unit, Rational};

/// Halfspace description of a simplex inside `R^n`.
///
/// `ineqs[i]` is the barycentric coordinate of vertex `i`, extended to all of
/// `R^n` through the orthogonal projection onto the affine hull; `eqs`
/// vanish exactly on the affine hull.
#[derive(Debug, Clone)]
pub struct Hrep {
    pub eqs: Vec<AffineFn>,
    pub ineqs: Vec<AffineFn>,
}

impl Hrep {
    pub fn contains(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|e| e.eval(x).is_zero()) && self.ineqs.iter().all(|b| !b.eval(x).is_negative())
    }

    pub fn contains_relint(&self, x: &[Rational]) -> bool {
        self.eqs.iter().all(|e| e.eval(x).is_zero()) && self.ineqs.iter().all(|b| b.eval(x).is_positive())
    }

    /// True when every equation vanishes on all of `points`.
    pub fn spans_affine_hull_of(&self, points: &[Point]) -> bool {
        self.eqs.iter().all(|e| points.iter().all(|p| e.eval(p).is_zero()))
    }
}

/// Affinely independent rational points, sorted lexicographically.
#[derive(Debug, Clone)]
pub struct Simplex {
    vertices: Vec<Point>,
    hrep: OnceLock<Hrep>,
}

impl PartialEq for Simplex {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices
    }
}

impl Eq for Simplex {}

impl PartialOrd for Simplex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Simplex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.vertices.cmp(&other.vertices)
    }
}

impl std::hash::Hash for Simplex {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.vertices.hash(state);
    }
}

pub fn affinely_independent(points: &[Point]) -> bool {
    if points.len() <= 1 {
        return !points.is_empty();
    }
    let edges: Vec<Vec<Rational>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    edges.len() <= points[0].len() && linalg::rank(&edges) == edges.len()
}

fn factorial(n: usize) -> Rational {
    (1..=n).fold(Rational::one(), |acc, k| acc * Rational::from_integer((k as i64).into()))
}

/// Volume of a full-dimensional simplex; `degenerate` flags zero volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Volume {
    pub value: Rational,
    pub degenerate: bool,
}

/// `|det(v1−v0, …, vn−v0)| / n!` for `n + 1` points in `R^n`.
pub fn simplex_volume(vertices: &[Point]) -> Result<Volume> {
    let n = vertices.first().map(Vec::len).unwrap_or(0);
    if vertices.len() != n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: vertices.len() });
    }
    if n == 0 {
        return Ok(Volume { value: Rational::one(), degenerate: false });
    }
    let rows: Vec<Vec<Rational>> = vertices[1..].iter().map(|p| sub(p, &vertices[0])).collect();
    let value = linalg::determinant(&rows).abs() / factorial(n);
    Ok(Volume { degenerate: value.is_zero(), value })
}

impl Simplex {
    /// Validates coordinates in `[0,1]`, a common ambient dimension and
    /// affine independence.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.first().map(Vec::len).ok_or_else(|| Error::invalid("simplex without vertices"))?;
        if let Some(p) = vertices.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.len() });
        }
        if let Some(x) = vertices.iter().flatten().find(|x| !in_unit(x)) {
            return Err(Error::CoordinateOutOfRange(format_rational(x)));
        }
        vertices.sort();
        if vertices.windows(2).any(|w| w[0] == w[1]) || !affinely_independent(&vertices) {
            return Err(Error::invalid("simplex vertices are affinely dependent"));
        }
        Ok(Simplex { vertices, hrep: OnceLock::new() })
    }

    /// For vertices already known to be independent and inside the cube.
    pub(crate) fn from_sorted_unchecked(vertices: Vec<Point>) -> Self {
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex { vertices, hrep: OnceLock::new() }
    }

    pub(crate) fn from_unchecked(mut vertices: Vec<Point>) -> Self {
        vertices.sort();
        Self::from_sorted_unchecked(vertices)
    }

    pub fn point(p: Point) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point> {
        self.vertices
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn ambient(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient()
    }

    /// Volume in the ambient space (zero unless full-dimensional).
    pub fn volume(&self) -> Rational {
        if !self.is_full() {
            return Rational::zero();
        }
        simplex_volume(&self.vertices).expect("full simplex").value
    }

    pub fn bbox(&self) -> (Point, Point) {
        let n = self.ambient();
        let lo = (0..n).map(|i| self.vertices.iter().map(|p| &p[i]).min().expect("nonempty").clone()).collect();
        let hi = (0..n).map(|i| self.vertices.iter().map(|p| &p[i]).max().expect("nonempty").clone()).collect();
        (lo, hi)
    }

    pub fn hrep(&self) -> &Hrep {
        self.hrep.get_or_init(|| compute_hrep(&self.vertices))
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.hrep().contains(x)
    }

    pub fn contains_simplex(&self, other: &Simplex) -> bool {
        other.vertices.iter().all(|v| self.contains(v))
    }

    /// Barycentric interpolation of vertex values (defined on the affine hull).
    pub fn interpolate(&self, values: &[Rational]) -> AffineFn {
        let ineqs = &self.hrep().ineqs;
        ineqs
            .iter()
            .zip(values)
            .fold(AffineFn::zero(self.ambient()), |acc, (b, y)| acc.add(&b.scale(y)))
    }

    pub fn barycenter(&self) -> Point {
        barycenter(&self.vertices)
    }

    /// The face spanned by the vertices selected by `keep`.
    pub fn face(&self, keep: impl Fn(usize, &Point) -> bool) -> Option<Simplex> {
        let verts: Vec<Point> =
            self.vertices.iter().enumerate().filter(|(i, p)| keep(*i, p)).map(|(_, p)| p.clone()).collect();
        (!verts.is_empty()).then(|| Simplex::from_sorted_unchecked(verts))
    }
}

pub fn barycenter(points: &[Point]) -> Point {
    let n = points[0].len();
    let k = Rational::from_integer((points.len() as i64).into());
    (0..n)
        .map(|i| points.iter().fold(Rational::zero(), |acc, p| acc + &p[i]) / &k)
        .collect()
}

fn compute_hrep(vertices: &[Point]) -> Hrep {
    let n = vertices[0].len();
    let m = vertices.len() - 1;
    let u0 = &vertices[0];
    let edges: Vec<Vec<Rational>> = vertices[1..].iter().map(|p| sub(p, u0)).collect();
    // eqs: w · (x − u0) with w ⟂ every edge
    let eqs = linalg::null_space(&edges, n)
        .into_iter()
        .map(|w| {
            let c = -linalg::dot(&w, u0);
            AffineFn::new(w, c)
        })
        .collect();
    // λ'(x) = (EᵀE)⁻¹ Eᵀ (x − u0)
    let gram: Vec<Vec<Rational>> =
        edges.iter().map(|a| edges.iter().map(|b| linalg::dot(a, b)).collect()).collect();
    let ginv = linalg::inverse(&gram).expect("simplex vertices are affinely independent");
    let mut lambdas: Vec<AffineFn> = (0..m)
        .map(|j| {
            let coeffs: Vec<Rational> = (0..n)
                .map(|i| (0..m).fold(Rational::zero(), |acc, l| acc + &ginv[j][l] * &edges[l][i]))
                .collect();
            let constant = -linalg::dot(&coeffs, u0);
            AffineFn::new(coeffs, constant)
        })
        .collect();
    let lambda0 = lambdas.iter().fold(AffineFn::one(n), |acc, l| acc.sub(l));
    lambdas.insert(0, lambda0);
    Hrep { eqs, ineqs: lambdas }
}
