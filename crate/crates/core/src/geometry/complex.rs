use num_traits::{Signed, Zero};

use super::cut::both_halves;
use super::{AffineFn, Point, Simplex, MAX_DIM};
use crate::error::{Error, Result};
use crate::par;
use crate::scalar::{int, Rational};

/// Full-dimensional simplices covering a region of `[0,1]^n` face to face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    dim: usize,
    cells: Vec<Simplex>,
}

/// Which side of a cut a refined cell lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// Cells after splitting, with the index of the cell each came from.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub cells: Vec<Simplex>,
    pub parent: Vec<usize>,
    pub side: Vec<Side>,
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Kuhn cells of the grid cube `origin + [0, step]^n`.
pub(crate) fn kuhn_cells(origin: &[Rational], step: &Rational) -> Vec<Simplex> {
    permutations(origin.len())
        .into_iter()
        .map(|perm| {
            let mut v = origin.to_vec();
            let mut verts = vec![v.clone()];
            for i in perm {
                v[i] += step;
                verts.push(v.clone());
            }
            Simplex::from_unchecked(verts)
        })
        .collect()
}

/// Splits each cell by its own functional. `hs[i]` must agree with the
/// functional of every neighbour on their common face.
pub fn refine(cells: &[Simplex], hs: &[AffineFn], cap: usize) -> Result<Refinement> {
    let per_cell: Vec<Vec<(Simplex, Side)>> = par::map(&(0..cells.len()).collect::<Vec<_>>(), |&i| {
        let verts = cells[i].vertices();
        let vals = hs[i].values_at(verts);
        let pos = vals.iter().any(Signed::is_positive);
        let neg = vals.iter().any(Signed::is_negative);
        if !neg {
            vec![(cells[i].clone(), Side::Above)]
        } else if !pos {
            vec![(cells[i].clone(), Side::Below)]
        } else {
            let (above, below) = both_halves(verts, &vals);
            let above = above.into_iter().map(|p| (Simplex::from_sorted_unchecked(p), Side::Above));
            let below = below.into_iter().map(|p| (Simplex::from_sorted_unchecked(p), Side::Below));
            above.chain(below).collect()
        }
    });
    let total: usize = per_cell.iter().map(Vec::len).sum();
    if total > cap {
        return Err(Error::CellCap { cells: total, cap });
    }
    let mut out = Refinement {
        cells: Vec::with_capacity(total),
        parent: Vec::with_capacity(total),
        side: Vec::with_capacity(total),
    };
    for (i, pieces) in per_cell.into_iter().enumerate() {
        for (s, side) in pieces {
            out.cells.push(s);
            out.parent.push(i);
            out.side.push(side);
        }
    }
    Ok(out)
}

impl SimplicialComplex {
    pub fn from_cells(dim: usize, cells: Vec<Simplex>) -> Self {
        SimplicialComplex { dim, cells }
    }

    /// The Kuhn (Freudenthal) triangulation: one simplex per coordinate order.
    pub fn kuhn(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(SimplicialComplex { dim: n, cells: kuhn_cells(&vec![Rational::zero(); n], &int(1)) })
    }

    /// Kuhn triangulation of every cube of the mesh-`1/m` grid.
    pub fn kuhn_grid(n: usize, m: usize) -> Result<Self> {
        check_dim(n)?;
        if m == 0 {
            return Err(Error::invalid("grid mesh must be positive"));
        }
        let step = Rational::new((1).into(), (m as i64).into());
        let mut cells = Vec::new();
        let mut idx = vec![0usize; n];
        loop {
            let origin: Point = idx.iter().map(|&i| &step * int(i as i64)).collect();
            cells.extend(kuhn_cells(&origin, &step));
            let Some(pos) = idx.iter().position(|&i| i + 1 < m) else { break };
            idx[pos] += 1;
            idx[..pos].iter_mut().for_each(|i| *i = 0);
        }
        Ok(SimplicialComplex { dim: n, cells })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Simplex] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Simplex> {
        self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_volume(&self) -> Rational {
        par::map(&self.cells, Simplex::volume).into_iter().fold(Rational::zero(), |a, v| a + v)
    }

    /// Refines so that `h` has constant sign on every cell.
    pub fn split_by_hyperplane(&self, h: &AffineFn) -> SimplicialComplex {
        let hs = vec![h.clone(); self.cells.len()];
        let r = refine(&self.cells, &hs, usize::MAX).expect("uncapped refinement");
        SimplicialComplex { dim: self.dim, cells: r.cells }
    }

    /// Barycentric subdivision: one cell per maximal flag of faces.
    pub fn barycentric_subdivision(&self) -> SimplicialComplex {
        let perms = permutations(self.dim + 1);
        let cells = par::flat_map(&self.cells, |cell| {
            let v = cell.vertices();
            perms
                .iter()
                .map(|perm| {
                    let chain: Vec<Point> = (1..=perm.len())
                        .map(|len| super::barycenter(&perm[..len].iter().map(|&i| v[i].clone()).collect::<Vec<_>>()))
                        .collect();
                    Simplex::from_unchecked(chain)
                })
                .collect()
        });
        SimplicialComplex { dim: self.dim, cells }
    }

    /// Distinct vertices in lexicographic order.
    pub fn vertices(&self) -> Vec<Point> {
        let mut all: Vec<Point> = self.cells.iter().flat_map(|c| c.vertices().iter().cloned()).collect();
        all.sort();
        all.dedup();
        all
    }
}

/// Kuhn triangulation of `[0,1]^n`.
pub fn triangulate_cube(n: usize) -> Result<SimplicialComplex> {
    SimplicialComplex::kuhn(n)
}

/// See [`SimplicialComplex::split_by_hyperplane`].
pub fn split_by_hyperplane(c: &SimplicialComplex, h: &AffineFn) -> SimplicialComplex {
    c.split_by_hyperplane(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn kuhn_small_cases() {
        let one = triangulate_cube(1).unwrap();
        assert_eq!(one.len(), 1);
        let two = triangulate_cube(2).unwrap();
        let mut got: Vec<Vec<Point>> = two.cells().iter().map(|c| c.vertices().to_vec()).collect();
        got.sort();
        let p = |a: i64, b: i64| vec![int(a), int(b)];
        assert_eq!(got, vec![vec![p(0, 0), p(0, 1), p(1, 1)], vec![p(0, 0), p(1, 0), p(1, 1)]]);
        let three = triangulate_cube(3).unwrap();
        assert_eq!(three.len(), 6);
        assert_eq!(three.total_volume(), int(1));
        assert!(triangulate_cube(MAX_DIM + 1).is_err());
    }

    #[test]
    fn splitting_conserves_volume() {
        let seg = triangulate_cube(1).unwrap().split_by_hyperplane(&AffineFn::new(vec![int(2)], int(-1)));
        let mut got: Vec<Vec<Point>> = seg.cells().iter().map(|c| c.vertices().to_vec()).collect();
        got.sort();
        assert_eq!(got, vec![vec![vec![int(0)], vec![rat(1, 2)]], vec![vec![rat(1, 2)], vec![int(1)]]]);

        let sq = triangulate_cube(2).unwrap();
        assert_eq!(sq.split_by_hyperplane(&AffineFn::new(vec![int(1), int(1)], int(5))), sq);
        let diag = sq.split_by_hyperplane(&AffineFn::new(vec![int(1), int(-1)], int(0)));
        assert_eq!(diag.total_volume(), int(1));
        let h = AffineFn::new(vec![int(3), int(1)], rat(-3, 2));
        let cut = diag.split_by_hyperplane(&h);
        assert_eq!(cut.total_volume(), int(1));
        for c in cut.cells() {
            let vals = h.values_at(c.vertices());
            assert!(vals.iter().all(|v| !v.is_negative()) || vals.iter().all(|v| !v.is_positive()));
        }
    }

    #[test]
    fn grid_and_subdivision_volumes() {
        let g = SimplicialComplex::kuhn_grid(2, 3).unwrap();
        assert_eq!(g.len(), 18);
        assert_eq!(g.total_volume(), int(1));
        let b = triangulate_cube(3).unwrap().barycentric_subdivision();
        assert_eq!(b.len(), 6 * 24);
        assert_eq!(b.total_volume(), int(1));
    }
}
