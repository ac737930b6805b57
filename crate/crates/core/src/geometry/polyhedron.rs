use serde::{Deserialize, Serialize};

use super::cut::split_off;
use super::{barycenter, Point, Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, Rational};

/// A finite union of rational simplices in `[0,1]^n`.
///
/// The simplex list is kept sorted and irredundant (no member lies inside
/// another), so structurally equal values are equal sets. The converse
/// does not hold; use [`polyhedron_equal`] for set equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalPolyhedron {
    dim: usize,
    simplices: Vec<Simplex>,
}

#[derive(Serialize, Deserialize)]
struct PolyhedronFile {
    dim: usize,
    simplices: Vec<Vec<Vec<String>>>,
}

fn bboxes_meet(a: &Simplex, b: &Simplex) -> bool {
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    (0..alo.len()).all(|i| alo[i] <= bhi[i] && blo[i] <= ahi[i])
}

/// True when `s` is covered by the simplices of `cover`.
///
/// A covered piece has, near its barycenter, full-dimensional overlap with
/// some member containing that barycenter; subtracting it leaves pieces that
/// never meet its interior again, so every lineage uses distinct members.
fn covered(s: &Simplex, cover: &[Simplex]) -> bool {
    let candidates: Vec<&Simplex> = cover
        .iter()
        .filter(|t| t.dim() >= s.dim() && bboxes_meet(s, t) && t.hrep().spans_affine_hull_of(s.vertices()))
        .collect();
    let mut work = vec![s.vertices().to_vec()];
    'pieces: while let Some(piece) = work.pop() {
        let c = barycenter(&piece);
        for t in candidates.iter().filter(|t| t.contains(&c)) {
            let (inside, outside) = split_off(&piece, &t.hrep().ineqs);
            if !inside.is_empty() {
                work.extend(outside);
                continue 'pieces;
            }
        }
        return false;
    }
    true
}

impl RationalPolyhedron {
    pub fn new(dim: usize, simplices: Vec<Simplex>) -> Result<Self> {
        if let Some(s) = simplices.iter().find(|s| s.ambient() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: s.ambient() });
        }
        Ok(Self::canonical(dim, simplices))
    }

    pub(crate) fn canonical(dim: usize, mut simplices: Vec<Simplex>) -> Self {
        simplices.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
        simplices.dedup();
        let mut kept: Vec<Simplex> = Vec::with_capacity(simplices.len());
        for s in simplices {
            // larger simplices come first, so only kept ones can absorb `s`
            if !kept.iter().any(|k| k.dim() >= s.dim() && bboxes_meet(k, &s) && k.contains_simplex(&s)) {
                kept.push(s);
            }
        }
        kept.sort();
        RationalPolyhedron { dim, simplices: kept }
    }

    pub fn empty(dim: usize) -> Self {
        RationalPolyhedron { dim, simplices: Vec::new() }
    }

    pub fn cube(dim: usize) -> Result<Self> {
        Ok(Self::canonical(dim, SimplicialComplex::kuhn(dim)?.into_cells()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// Dimension of the polyhedron as a set; `None` when empty.
    pub fn set_dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn contains_point(&self, x: &[Rational]) -> bool {
        self.simplices.iter().any(|s| s.contains(x))
    }

    /// `self ⊆ other`.
    pub fn is_subset_of(&self, other: &RationalPolyhedron) -> bool {
        self.dim == other.dim && crate::par::map(&self.simplices, |s| covered(s, &other.simplices)).into_iter().all(|b| b)
    }

    /// Lexicographically least vertex.
    pub fn least_vertex(&self) -> Option<&Point> {
        self.simplices.iter().map(|s| &s.vertices()[0]).min()
    }

    pub fn to_json(&self) -> String {
        let file = PolyhedronFile {
            dim: self.dim,
            simplices: self
                .simplices
                .iter()
                .map(|s| s.vertices().iter().map(|p| p.iter().map(format_rational).collect()).collect())
                .collect(),
        };
        serde_json::to_string(&file).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PolyhedronFile = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
        let simplices = file
            .simplices
            .iter()
            .map(|s| {
                let verts = s
                    .iter()
                    .map(|p| p.iter().map(|x| parse_rational(x)).collect::<Result<Point>>())
                    .collect::<Result<Vec<Point>>>()?;
                Simplex::new(verts)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.dim, simplices)
    }
}

/// Set equality, by mutual containment.
pub fn polyhedron_equal(p: &RationalPolyhedron, q: &RationalPolyhedron) -> bool {
    p == q || (p.is_subset_of(q) && q.is_subset_of(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    fn simplex(c: &[&[(i64, i64)]]) -> Simplex {
        Simplex::new(c.iter().map(|p| p.iter().map(|&(a, b)| rat(a, b)).collect()).collect()).unwrap()
    }

    #[test]
    fn equality_examples() {
        let half = RationalPolyhedron::new(1, vec![simplex(&[&[(0, 1)], &[(1, 2)]])]).unwrap();
        let with_point =
            RationalPolyhedron::new(1, vec![simplex(&[&[(0, 1)], &[(1, 2)]]), simplex(&[&[(3, 4)]])]).unwrap();
        assert!(!polyhedron_equal(&half, &with_point));
        assert!(half.is_subset_of(&with_point));

        let two = RationalPolyhedron::cube(2).unwrap();
        let four = RationalPolyhedron::new(
            2,
            vec![
                simplex(&[&[(0, 1), (0, 1)], &[(1, 1), (0, 1)], &[(1, 2), (1, 2)]]),
                simplex(&[&[(1, 1), (0, 1)], &[(1, 1), (1, 1)], &[(1, 2), (1, 2)]]),
                simplex(&[&[(1, 1), (1, 1)], &[(0, 1), (1, 1)], &[(1, 2), (1, 2)]]),
                simplex(&[&[(0, 1), (1, 1)], &[(0, 1), (0, 1)], &[(1, 2), (1, 2)]]),
            ],
        )
        .unwrap();
        assert_eq!(two.simplices().len(), 2);
        assert!(polyhedron_equal(&two, &four));
        assert!(polyhedron_equal(&four, &two));
    }

    #[test]
    fn canonical_form_drops_absorbed_faces() {
        let seg = simplex(&[&[(0, 1)], &[(1, 1)]]);
        let p = RationalPolyhedron::new(1, vec![simplex(&[&[(1, 3)]]), seg.clone(), seg.clone()]).unwrap();
        assert_eq!(p.simplices(), &[seg]);
        assert_eq!(p.set_dim(), Some(1));
        assert!(RationalPolyhedron::empty(1).is_subset_of(&p));
    }

    #[test]
    fn lower_dimensional_cover() {
        // the diagonal of the square as two collinear segments
        let diag = RationalPolyhedron::new(2, vec![simplex(&[&[(0, 1), (0, 1)], &[(1, 1), (1, 1)]])]).unwrap();
        let halves = RationalPolyhedron::new(
            2,
            vec![
                simplex(&[&[(0, 1), (0, 1)], &[(1, 3), (1, 3)]]),
                simplex(&[&[(1, 3), (1, 3)], &[(1, 1), (1, 1)]]),
            ],
        )
        .unwrap();
        assert!(polyhedron_equal(&diag, &halves));
        assert!(diag.is_subset_of(&RationalPolyhedron::cube(2).unwrap()));
        assert!(diag.contains_point(&[rat(1, 5), rat(1, 5)]));
        assert!(!diag.contains_point(&[rat(1, 5), int(0)]));
    }

    #[test]
    fn json_roundtrip() {
        let p = RationalPolyhedron::new(
            2,
            vec![simplex(&[&[(0, 1), (1, 3)], &[(1, 1), (2, 7)]]), simplex(&[&[(1, 2), (1, 2)]])],
        )
        .unwrap();
        let text = p.to_json();
        assert_eq!(text, r#"{"dim":2,"simplices":[[["0","1/3"],["1","2/7"]],[["1/2","1/2"]]]}"#);
        let back = RationalPolyhedron::from_json(&text).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
    }
}
