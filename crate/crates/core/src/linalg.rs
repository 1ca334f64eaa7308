//! Dense linear algebra over Q and the integers, sized for small ranks.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{lcm_denominators, Q};
use crate::lattice::IntVec;

pub type QVec = Vec<Q>;

pub fn zero_vec(n: usize) -> QVec {
    vec![Q::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> QVec {
    let mut v = zero_vec(n);
    v[i] = Q::one();
    v
}

pub fn is_zero(v: &[Q]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn add_scaled(target: &mut [Q], k: &Q, src: &[Q]) {
    if k.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        *t += k * s;
    }
}

pub fn scale(v: &[Q], k: &Q) -> QVec {
    v.iter().map(|x| x * k).collect()
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `m * v` for a row-major matrix `m`.
pub fn mat_vec(m: &[QVec], v: &[Q]) -> QVec {
    m.iter().map(|row| dot(row, v)).collect()
}

pub fn from_ints(v: &[BigInt]) -> QVec {
    v.iter().map(|x| Q::from_integer(x.clone())).collect()
}

/// Scale a rational vector to a primitive integer vector (same direction).
pub fn primitive(v: &[Q]) -> IntVec {
    let d = lcm_denominators(v);
    let ints: IntVec = v.iter().map(|x| (x * Q::from_integer(d.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Reduced row echelon form; returns `(rref_rows, pivot_columns)` with zero
/// rows removed.
pub fn rref(rows: &[QVec], ncols: usize) -> (Vec<QVec>, Vec<usize>) {
    let mut m: Vec<QVec> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        m[r] = scale(&m[r], &inv);
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let k = -row[c].clone();
                add_scaled(row, &k, &pivot_row);
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    (m, pivots)
}

pub fn rank(rows: &[QVec], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{ x : row . x = 0 for every row }`.
pub fn nullspace(rows: &[QVec], ncols: usize) -> Vec<QVec> {
    let (m, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = unit_vec(ncols, f);
            for (row, &pc) in m.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Whether `v` lies in the Q-span of `rows`.
pub fn in_span(rows: &[QVec], v: &[Q], ncols: usize) -> bool {
    let mut ext = rows.to_vec();
    ext.push(v.to_vec());
    rank(&ext, ncols) == rank(rows, ncols)
}

/// Inverse of a square matrix, `None` when singular.
pub fn inverse(m: &[QVec]) -> Option<Vec<QVec>> {
    let n = m.len();
    let aug: Vec<QVec> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend(unit_vec(n, i));
            r
        })
        .collect();
    let (red, pivots) = rref(&aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Saturated integer basis of `{ x in Z^n : C x = 0 }` for integer rows `C`.
pub fn integer_kernel(constraints: &[IntVec], n: usize) -> Vec<IntVec> {
    let mut basis: Vec<IntVec> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    for c in constraints {
        let values: Vec<BigInt> = basis.iter().map(|b| b.iter().zip(c).map(|(x, y)| x * y).sum()).collect();
        basis = crate::lattice::kernel_exact(basis, &values);
        if basis.is_empty() {
            break;
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qi;

    fn qv(xs: &[i64]) -> QVec {
        xs.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn nullspace_and_span() {
        let rows = vec![qv(&[1, 2, 3]), qv(&[2, 4, 6])];
        let ns = nullspace(&rows, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(&rows[0], v).is_zero());
        }
        assert!(in_span(&rows, &qv(&[3, 6, 9]), 3));
        assert!(!in_span(&rows, &qv(&[1, 0, 0]), 3));
    }

    #[test]
    fn inverse_round_trip() {
        let m = vec![qv(&[2, 1]), qv(&[1, 1])];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![qv(&[1, -1]), qv(&[-1, 2])]);
        assert!(inverse(&[qv(&[1, 2]), qv(&[2, 4])]).is_none());
    }

    #[test]
    fn integer_kernel_is_saturated() {
        // 2x + 4y = 0 -> (2, -1) generates
        let k = integer_kernel(&[vec![BigInt::from(2), BigInt::from(4)]], 2);
        assert_eq!(k.len(), 1);
        let v = &k[0];
        assert_eq!(v[0].clone() * 1 + v[1].clone() * 2, BigInt::zero());
        assert!(v[1] == BigInt::one() || v[1] == -BigInt::one());
    }
}
