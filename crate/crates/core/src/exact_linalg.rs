//! Gaussian elimination over ℚ for the small exact systems used by the
//! character-ring and cyclicity checks.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

pub fn to_rational(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

/// Row-reduces `m` in place and returns the pivot columns.
fn row_reduce(m: &mut [Vec<BigRational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (top, rest) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&mut a[i], &b[0])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&mut b[0], &a[r])
                };
                for (x, y) in top.iter_mut().zip(rest.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Rank of the matrix whose rows are `rows`.
pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m = rows.to_vec();
    row_reduce(&mut m).len()
}

/// The unique solution of `A x = b` for `A` with independent columns, or
/// `None` when the system is inconsistent or under-determined.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let pivots = row_reduce(&mut m);
    if pivots.contains(&n) || pivots.len() != n {
        return None;
    }
    Some((0..n).map(|i| m[i][n].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn rank_of_dependent_rows() {
        assert_eq!(rank(&[q(&[1, 2, 3]), q(&[2, 4, 6]), q(&[0, 1, 1])]), 2);
        assert_eq!(rank(&[q(&[0, 0]), q(&[0, 0])]), 0);
    }

    #[test]
    fn overdetermined_consistent_solve() {
        let a = [q(&[1, 0]), q(&[0, 1]), q(&[1, 1])];
        let x = solve(&a, &q(&[3, -2, 1])).unwrap();
        assert_eq!(x, q(&[3, -2]));
        assert!(solve(&a, &q(&[3, -2, 2])).is_none());
        assert!(solve(&[q(&[1, 1]), q(&[2, 2])], &q(&[1, 2])).is_none());
    }
}
