use std::collections::HashMap;

use num_traits::ToPrimitive;

use crate::geometry::{Point, Simplex};
use crate::scalar::Rational;

/// Uniform bucket grid over `[0,1]^n` for bounding-box candidate queries.
pub(crate) struct CellIndex {
    res: usize,
    buckets: HashMap<Vec<usize>, Vec<usize>>,
}

fn bucket(x: &Rational, res: usize) -> usize {
    let scaled = (x * Rational::from_integer((res as i64).into())).floor();
    scaled.to_integer().to_usize().unwrap_or(0).min(res - 1)
}

fn for_each_bucket(lo: &[Rational], hi: &[Rational], res: usize, mut f: impl FnMut(Vec<usize>)) {
    let from: Vec<usize> = lo.iter().map(|x| bucket(x, res)).collect();
    let to: Vec<usize> = hi.iter().map(|x| bucket(x, res)).collect();
    let mut cur = from.clone();
    loop {
        f(cur.clone());
        let Some(pos) = (0..cur.len()).find(|&i| cur[i] < to[i]) else { return };
        cur[pos] += 1;
        cur[..pos].copy_from_slice(&from[..pos]);
    }
}

impl CellIndex {
    pub(crate) fn new(cells: &[Simplex]) -> Self {
        let n = cells.first().map(Simplex::ambient).unwrap_or(0);
        let res = if n == 0 { 1 } else { ((cells.len() as f64).powf(1.0 / n as f64).ceil() as usize).clamp(1, 64) };
        let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
        for (i, c) in cells.iter().enumerate() {
            let (lo, hi) = c.bbox();
            for_each_bucket(&lo, &hi, res, |key| buckets.entry(key).or_default().push(i));
        }
        CellIndex { res, buckets }
    }

    /// Indices of cells whose bucket range meets the box, ascending.
    pub(crate) fn query(&self, lo: &[Rational], hi: &[Rational]) -> Vec<usize> {
        let mut out = Vec::new();
        for_each_bucket(lo, hi, self.res, |key| {
            if let Some(b) = self.buckets.get(&key) {
                out.extend_from_slice(b);
            }
        });
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub(crate) fn bbox_of(points: &[Point]) -> (Point, Point) {
    let n = points[0].len();
    let lo = (0..n).map(|i| points.iter().map(|p| &p[i]).min().expect("nonempty").clone()).collect();
    let hi = (0..n).map(|i| points.iter().map(|p| &p[i]).max().expect("nonempty").clone()).collect();
    (lo, hi)
}
