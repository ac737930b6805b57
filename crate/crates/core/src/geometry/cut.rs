//! Cutting simplices by hyperplanes.
//!
//! Every cut polytope is re-triangulated by pulling its lexicographically
//! least vertex and coning over the (recursively pulled) boundary faces not
//! containing it. The triangulation of a polytope restricted to any of its
//! faces is then the pulling triangulation of that face, so two cells cut
//! by functionals that agree on their common face stay face-to-face.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use super::{AffineFn, Point, Simplex};
use crate::scalar::Rational;

fn cmp_rational(a: &Rational, b: &Rational) -> Ordering {
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}

fn cmp_point(a: &Point, b: &Point) -> Ordering {
    a.iter().zip(b).map(|(x, y)| cmp_rational(x, y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

fn crossing(pa: &Point, va: &Rational, pb: &Point, vb: &Rational) -> Point {
    let t = va / (va - vb);
    pa.iter().zip(pb).map(|(a, b)| a + &t * (b - a)).collect()
}

fn mixed(vals: &[Rational]) -> bool {
    vals.iter().any(Signed::is_positive) && vals.iter().any(Signed::is_negative)
}

type Piece = Vec<u8>;

#[derive(Clone, Copy)]
enum Origin {
    Face(u16),
    Cut,
}

/// One simplex cut by one functional.
///
/// Candidate points (the vertices and the crossing point of every edge with
/// strictly opposite signs) are ranked once in lexicographic order; all
/// recursion then works on ranks and face bitmasks. Faces are memoized.
struct Cutter {
    points: Vec<Point>,
    /// Smallest face of the simplex containing each ranked point.
    support: Vec<u16>,
    on_cut: Vec<bool>,
    vertex_rank: Vec<u8>,
    cross_rank: Vec<Vec<u8>>,
    sign: Vec<i8>,
    memo: [Vec<Option<Vec<Piece>>>; 3],
}

/// Point, support mask, lies on the cut, source vertex, source edge.
type Candidate = (Point, u16, bool, Option<usize>, Option<(usize, usize)>);

impl Cutter {
    fn new(verts: &[Point], vals: &[Rational]) -> Self {
        let m = verts.len();
        let sign: Vec<i8> = vals.iter().map(|v| if v.is_positive() { 1 } else if v.is_negative() { -1 } else { 0 }).collect();
        let mut cands: Vec<Candidate> = Vec::new();
        for i in 0..m {
            cands.push((verts[i].clone(), 1 << i, sign[i] == 0, Some(i), None));
        }
        for a in 0..m {
            for b in a + 1..m {
                if sign[a] * sign[b] < 0 {
                    let p = crossing(&verts[a], &vals[a], &verts[b], &vals[b]);
                    cands.push((p, (1 << a) | (1 << b), true, None, Some((a, b))));
                }
            }
        }
        cands.sort_by(|x, y| cmp_point(&x.0, &y.0));
        let mut vertex_rank = vec![0u8; m];
        let mut cross_rank = vec![vec![u8::MAX; m]; m];
        let mut points = Vec::with_capacity(cands.len());
        let mut support = Vec::with_capacity(cands.len());
        let mut on_cut = Vec::with_capacity(cands.len());
        for (r, (p, sup, zero, v, e)) in cands.into_iter().enumerate() {
            if let Some(i) = v {
                vertex_rank[i] = r as u8;
            }
            if let Some((a, b)) = e {
                cross_rank[a][b] = r as u8;
            }
            points.push(p);
            support.push(sup);
            on_cut.push(zero);
        }
        let faces = 1usize << m;
        Cutter {
            points,
            support,
            on_cut,
            vertex_rank,
            cross_rank,
            sign,
            memo: [vec![None; faces], vec![None; faces], vec![None; faces]],
        }
    }

    fn members(mask: u16) -> impl Iterator<Item = usize> {
        (0..16).filter(move |i| mask & (1 << i) != 0)
    }

    fn pull(&self, mut boundary: Vec<(Piece, Origin)>) -> Vec<Piece> {
        // a zero facet of a slice is reached from both faces through it
        boundary.sort_by(|a, b| a.0.cmp(&b.0));
        boundary.dedup_by(|a, b| a.0 == b.0);
        let Some(w) = boundary.iter().flat_map(|(p, _)| p.iter().copied()).min() else { return Vec::new() };
        let mut out: Vec<Piece> = boundary
            .into_iter()
            .filter(|(piece, origin)| {
                !piece.contains(&w)
                    && match origin {
                        Origin::Cut => !self.on_cut[w as usize],
                        Origin::Face(f) => self.support[w as usize] & !f != 0,
                    }
            })
            .map(|(mut piece, _)| {
                let at = piece.partition_point(|&p| p < w);
                piece.insert(at, w);
                piece
            })
            .collect();
        out.sort();
        out
    }

    /// `{h·dir ≥ 0}` on the face `mask`, or `{h = 0}` for `dir == 0`.
    fn solve(&mut self, mask: u16, dir: i8) -> Vec<Piece> {
        let slot = (dir + 1) as usize;
        if let Some(done) = &self.memo[slot][mask as usize] {
            return done.clone();
        }
        let idx: Vec<usize> = Self::members(mask).collect();
        let out = if dir == 0 {
            self.slice(mask, &idx)
        } else {
            self.half(mask, &idx, dir)
        };
        self.memo[slot][mask as usize] = Some(out.clone());
        out
    }

    fn half(&mut self, mask: u16, idx: &[usize], dir: i8) -> Vec<Piece> {
        if !idx.iter().any(|&i| self.sign[i] * dir < 0) {
            let mut all: Piece = idx.iter().map(|&i| self.vertex_rank[i]).collect();
            all.sort();
            return vec![all];
        }
        if !idx.iter().any(|&i| self.sign[i] * dir > 0) {
            return Vec::new();
        }
        let mut boundary = Vec::new();
        for &i in idx {
            let f = mask & !(1 << i);
            boundary.extend(self.solve(f, dir).into_iter().map(|p| (p, Origin::Face(f))));
        }
        boundary.extend(self.solve(mask, 0).into_iter().map(|p| (p, Origin::Cut)));
        self.pull(boundary)
    }

    /// Requires both strict signs on `mask`.
    fn slice(&mut self, mask: u16, idx: &[usize]) -> Vec<Piece> {
        if idx.len() == 2 {
            return vec![vec![self.cross_rank[idx[0]][idx[1]]]];
        }
        let k = idx.len() - 1;
        let mut boundary = Vec::new();
        for &i in idx {
            let f = mask & !(1 << i);
            let fidx: Vec<usize> = Self::members(f).collect();
            let pos = fidx.iter().any(|&j| self.sign[j] > 0);
            let neg = fidx.iter().any(|&j| self.sign[j] < 0);
            if pos && neg {
                boundary.extend(self.solve(f, 0).into_iter().map(|p| (p, Origin::Face(f))));
            } else {
                let mut zeros: Piece =
                    fidx.iter().filter(|&&j| self.sign[j] == 0).map(|&j| self.vertex_rank[j]).collect();
                if zeros.len() == k - 1 {
                    zeros.sort();
                    boundary.push((zeros, Origin::Face(f)));
                }
            }
        }
        self.pull(boundary)
    }

    fn full(&self) -> u16 {
        ((1u32 << self.sign.len()) - 1) as u16
    }

    fn realize(&self, pieces: Vec<Piece>) -> Vec<Vec<Point>> {
        pieces.into_iter().map(|p| p.into_iter().map(|r| self.points[r as usize].clone()).collect()).collect()
    }
}

/// Triangulation of `{h ≥ 0}` inside a simplex, given the vertex values of
/// `h`. Lower-dimensional intersections yield nothing.
pub(crate) fn half_rec(verts: &[Point], vals: &[Rational]) -> Vec<Vec<Point>> {
    if !vals.iter().any(Signed::is_negative) {
        return vec![verts.to_vec()];
    }
    if !vals.iter().any(Signed::is_positive) {
        return Vec::new();
    }
    let mut c = Cutter::new(verts, vals);
    let full = c.full();
    let pieces = c.solve(full, 1);
    c.realize(pieces)
}

/// Both sides of a cut through a simplex where `h` takes both signs.
pub(crate) fn both_halves(verts: &[Point], vals: &[Rational]) -> (Vec<Vec<Point>>, Vec<Vec<Point>>) {
    let mut c = Cutter::new(verts, vals);
    let full = c.full();
    let above = c.solve(full, 1);
    let below = c.solve(full, -1);
    (c.realize(above), c.realize(below))
}

fn slice_rec(verts: &[Point], vals: &[Rational]) -> Vec<Vec<Point>> {
    let mut c = Cutter::new(verts, vals);
    let full = c.full();
    let pieces = c.solve(full, 0);
    c.realize(pieces)
}

pub(crate) fn half(verts: &[Point], h: &AffineFn) -> Vec<Vec<Point>> {
    half_rec(verts, &h.values_at(verts))
}

/// `{x ∈ S : h_i(x) ≥ 0 for all i}` as simplices of the dimension of `S`.
pub(crate) fn clip(verts: &[Point], hs: &[AffineFn]) -> Vec<Vec<Point>> {
    let mut pieces = vec![verts.to_vec()];
    for h in hs {
        pieces = pieces.iter().flat_map(|p| half(p, h)).collect();
        if pieces.is_empty() {
            break;
        }
    }
    pieces
}

/// Splits `S` into the part where all `hs ≥ 0` and the closure of the rest,
/// with disjoint interiors. Lower-dimensional slivers are dropped.
pub(crate) fn split_off(verts: &[Point], hs: &[AffineFn]) -> (Vec<Vec<Point>>, Vec<Vec<Point>>) {
    // one functional that is nowhere positive and somewhere negative leaves
    // only a lower-dimensional face inside
    if hs.iter().any(|h| {
        let vals = h.values_at(verts);
        !vals.iter().any(Signed::is_positive) && vals.iter().any(Signed::is_negative)
    }) {
        return (Vec::new(), vec![verts.to_vec()]);
    }
    let mut inside = vec![verts.to_vec()];
    let mut outside = Vec::new();
    for h in hs {
        let mut next = Vec::new();
        for p in &inside {
            let vals = h.values_at(p);
            if !vals.iter().any(Signed::is_negative) {
                next.push(p.clone());
            } else {
                let (above, below) = both_halves(p, &vals);
                outside.extend(below);
                next.extend(above);
            }
        }
        inside = next;
        if inside.is_empty() {
            break;
        }
    }
    (inside, outside)
}

/// Triangulated `{x ∈ S : h(x) = level}`.
pub fn slice_simplex(s: &Simplex, h: &AffineFn, level: &Rational) -> Vec<Simplex> {
    let g = h.add_constant(&-level);
    let vals = g.values_at(s.vertices());
    if mixed(&vals) {
        return slice_rec(s.vertices(), &vals).into_iter().map(Simplex::from_sorted_unchecked).collect();
    }
    s.face(|i, _| vals[i].is_zero()).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::simplex_volume;
    use crate::scalar::{int, rat};

    fn pts(c: &[&[i64]]) -> Vec<Point> {
        c.iter().map(|p| p.iter().map(|&x| int(x)).collect()).collect()
    }

    fn volume(pieces: &[Vec<Point>]) -> Rational {
        pieces.iter().fold(Rational::zero(), |acc, p| acc + simplex_volume(p).unwrap().value)
    }

    #[test]
    fn halves_of_a_triangle() {
        let tri = pts(&[&[0, 0], &[1, 0], &[1, 1]]);
        // x1 + x2 − 1 passes through the vertex (1,0)
        let h = AffineFn::new(vec![int(1), int(1)], int(-1));
        assert_eq!(volume(&half(&tri, &h)), rat(1, 4));
        assert_eq!(half(&tri, &h).len(), 1);
        assert_eq!(half(&tri, &h.negate()).len(), 1);
        // x1 − 1/2 leaves a quadrilateral above
        let h = AffineFn::new(vec![int(1), int(0)], rat(-1, 2));
        let up = half(&tri, &h);
        let down = half(&tri, &h.negate());
        assert_eq!(volume(&up), rat(3, 8));
        assert_eq!(volume(&down), rat(1, 8));
        assert_eq!(up.len(), 2);
        assert_eq!(down.len(), 1);
    }

    #[test]
    fn slices() {
        let seg = Simplex::new(pts(&[&[0], &[1]])).unwrap();
        let cut = slice_simplex(&seg, &AffineFn::coordinate(1, 0), &rat(1, 2));
        assert_eq!(cut.len(), 1);
        assert_eq!(cut[0].vertices(), &[vec![rat(1, 2)]]);

        let tri = Simplex::new(pts(&[&[0, 0], &[1, 0], &[0, 1]])).unwrap();
        let h = AffineFn::new(vec![int(1), int(1)], int(0));
        let cut = slice_simplex(&tri, &h, &rat(1, 2));
        assert_eq!(cut.len(), 1);
        assert_eq!(cut[0].vertices(), &[vec![rat(0, 1), rat(1, 2)], vec![rat(1, 2), rat(0, 1)]]);

        let flat = slice_simplex(&tri, &AffineFn::zero(2), &rat(0, 1));
        assert_eq!(flat, vec![tri]);
    }

    #[test]
    fn split_off_partitions_volume() {
        let tet = pts(&[&[0, 0, 0], &[1, 0, 0], &[1, 1, 0], &[1, 1, 1]]);
        let hs = vec![
            AffineFn::new(vec![int(2), int(0), int(0)], int(-1)),
            AffineFn::new(vec![int(0), int(-3), int(1)], int(1)),
        ];
        let (inside, outside) = split_off(&tet, &hs);
        assert_eq!(volume(&inside) + volume(&outside), rat(1, 6));
        assert_eq!(volume(&clip(&tet, &hs)), volume(&inside));
    }
}
