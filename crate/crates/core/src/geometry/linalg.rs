//! Small dense exact linear algebra over the rationals.

use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::scalar::Rational;

pub type Matrix = Vec<Vec<Rational>>;

/// Row-reduces in place, returning the pivot columns.
fn row_reduce(m: &mut Matrix, ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.len() {
            break;
        }
        let Some(p) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(row, p);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..m.len() {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                let (pivot_row, other) = if r < row {
                    let (a, b) = m.split_at_mut(row);
                    (&b[0], &mut a[r])
                } else {
                    let (a, b) = m.split_at_mut(r);
                    (&a[row], &mut b[0])
                };
                for (x, p) in other.iter_mut().zip(pivot_row.iter()) {
                    *x -= &factor * p;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let ncols = rows[0].len();
    let mut m = rows.to_vec();
    row_reduce(&mut m, ncols).len()
}

pub fn determinant(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else { return Rational::zero() };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= &a[col][col];
        let inv = a[col][col].recip();
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] * &inv;
            let (pivot, below) = a.split_at_mut(r);
            for (x, p) in below[0][col..n].iter_mut().zip(&pivot[col][col..n]) {
                *x -= &factor * p;
            }
        }
    }
    det
}

pub fn inverse(m: &[Vec<Rational>]) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = row_reduce(&mut aug, n);
    if pivots.len() != n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Basis of `{w : rows · w = 0}`.
pub fn null_space(rows: &[Vec<Rational>], ncols: usize) -> Matrix {
    let mut m = rows.to_vec();
    let pivots = row_reduce(&mut m, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut w = vec![Rational::zero(); ncols];
            w[f] = Rational::one();
            for (r, &p) in pivots.iter().enumerate() {
                w[p] = -m[r][f].clone();
            }
            w
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    small_dot(a, b).unwrap_or_else(|| a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y))
}

fn small(x: &Rational) -> Option<(i128, i128)> {
    Some((x.numer().to_i64()? as i128, x.denom().to_i64()? as i128))
}

/// Machine-integer evaluation; `None` on overflow.
fn small_dot(a: &[Rational], b: &[Rational]) -> Option<Rational> {
    let (mut n, mut d) = (0i128, 1i128);
    for (x, y) in a.iter().zip(b) {
        let (xn, xd) = small(x)?;
        let (yn, yd) = small(y)?;
        if xn == 0 || yn == 0 {
            continue;
        }
        let (pn, pd) = (xn * yn, xd * yd);
        let g = d.gcd(&pd);
        let l = (d / g).checked_mul(pd)?;
        n = n.checked_mul(l / d)?.checked_add(pn.checked_mul(l / pd)?)?;
        d = l;
        let g = n.gcd(&d);
        if g > 1 {
            n /= g;
            d /= g;
        }
    }
    Some(Rational::new_raw(n.into(), d.into()))
}

pub fn sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn determinant_and_inverse() {
        let m = vec![vec![int(2), int(1)], vec![int(1), int(3)]];
        assert_eq!(determinant(&m), int(5));
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![rat(3, 5), rat(-1, 5)], vec![rat(-1, 5), rat(2, 5)]]);
        assert!(inverse(&[vec![int(1), int(2)], vec![int(2), int(4)]]).is_none());
    }

    #[test]
    fn null_space_is_orthogonal() {
        let rows = vec![vec![int(1), int(1), int(0)]];
        let ns = null_space(&rows, 3);
        assert_eq!(ns.len(), 2);
        for w in &ns {
            assert_eq!(dot(&rows[0], w), int(0));
        }
        assert_eq!(rank(&rows), 1);
    }
}
