//! Integer lattices: Hermite normal form, congruence kernels, LLL reduction
//! and bounded short-vector enumeration. All arithmetic is exact.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{isqrt, round_q, Q};

pub type IntVec = Vec<BigInt>;

/// Returned when an enumeration would visit more nodes than allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub budget: u64,
}

fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(target: &mut [BigInt], k: &BigInt, src: &[BigInt]) {
    for (t, s) in target.iter_mut().zip(src) {
        *t += k * s;
    }
}

pub fn is_zero_vec(v: &[BigInt]) -> bool {
    v.iter().all(Zero::is_zero)
}

/// Row-style Hermite normal form of the lattice spanned by `gens`.
///
/// Rows are returned in order of strictly increasing pivot column; pivots
/// are positive and entries above a pivot lie in `[0, pivot)`. Zero rows
/// are dropped, so the result is a basis.
pub fn hnf(gens: &[IntVec], dim: usize) -> Vec<IntVec> {
    let mut rows: Vec<IntVec> = gens.iter().filter(|r| !is_zero_vec(r)).cloned().collect();
    let mut out: Vec<IntVec> = Vec::new();
    for col in 0..dim {
        let mut pivot: Option<IntVec> = None;
        let mut rest = Vec::with_capacity(rows.len());
        for r in rows.drain(..) {
            if r[col].is_zero() {
                rest.push(r);
                continue;
            }
            pivot = Some(match pivot {
                None => r,
                Some(mut p) => {
                    let mut r = r;
                    // Euclid on the column entries; unimodular on the pair.
                    while !r[col].is_zero() {
                        let q = p[col].div_floor(&r[col]);
                        let neg = -q;
                        axpy(&mut p, &neg, &r);
                        core::mem::swap(&mut p, &mut r);
                    }
                    if !is_zero_vec(&r) {
                        rest.push(r);
                    }
                    p
                }
            });
        }
        rows = rest;
        if let Some(mut p) = pivot {
            if p[col].is_negative() {
                for x in p.iter_mut() {
                    *x = -x.clone();
                }
            }
            for prev in out.iter_mut() {
                let q = prev[col].div_floor(&p[col]);
                if !q.is_zero() {
                    let neg = -q;
                    axpy(prev, &neg, &p);
                }
            }
            out.push(p);
        }
    }
    out
}

/// Sublattice `{ sum t_i b_i : sum t_i v_i = 0 mod m }` of the lattice with
/// basis rows `basis`, where `values[i]` is the image of `basis[i]`.
pub fn kernel_mod(basis: Vec<IntVec>, values: &[BigInt], modulus: &BigInt) -> Vec<IntVec> {
    assert_eq!(basis.len(), values.len());
    let mut rows: Vec<(IntVec, BigInt)> = basis
        .into_iter()
        .zip(values.iter().map(|v| v.mod_floor(modulus)))
        .collect();
    let mut out = Vec::with_capacity(rows.len());
    let mut pivot: Option<(IntVec, BigInt)> = None;
    for (row, val) in rows.drain(..) {
        if val.is_zero() {
            out.push(row);
            continue;
        }
        pivot = Some(match pivot {
            None => (row, val),
            Some((prow, pval)) => {
                let g = pval.extended_gcd(&val);
                let mut combined: IntVec = prow.iter().map(|x| x * &g.x).collect();
                axpy(&mut combined, &g.y, &row);
                let a = &val / &g.gcd;
                let b = &pval / &g.gcd;
                let mut zeroed: IntVec = prow.iter().map(|x| x * &a).collect();
                axpy(&mut zeroed, &(-b), &row);
                out.push(zeroed);
                (combined, g.gcd)
            }
        });
    }
    if let Some((prow, pval)) = pivot {
        let scale = modulus / pval.gcd(modulus);
        out.push(prow.iter().map(|x| x * &scale).collect());
    }
    out
}

/// Sublattice `{ sum t_i b_i : sum t_i v_i = 0 }` (exact, no modulus).
/// The transformation is unimodular on the surviving rows, so the result
/// is saturated in the original lattice.
pub fn kernel_exact(basis: Vec<IntVec>, values: &[BigInt]) -> Vec<IntVec> {
    assert_eq!(basis.len(), values.len());
    let mut out = Vec::with_capacity(basis.len());
    let mut pivot: Option<(IntVec, BigInt)> = None;
    for (row, val) in basis.into_iter().zip(values.iter().cloned()) {
        if val.is_zero() {
            out.push(row);
            continue;
        }
        pivot = Some(match pivot {
            None => (row, val),
            Some((prow, pval)) => {
                let g = pval.extended_gcd(&val);
                let mut combined: IntVec = prow.iter().map(|x| x * &g.x).collect();
                axpy(&mut combined, &g.y, &row);
                let a = &val / &g.gcd;
                let b = &pval / &g.gcd;
                let mut zeroed: IntVec = prow.iter().map(|x| x * &a).collect();
                axpy(&mut zeroed, &(-b), &row);
                out.push(zeroed);
                (combined, g.gcd)
            }
        });
    }
    out
}

/// Output of [`lll`]: the reduced basis with its Gram-Schmidt data.
#[derive(Debug, Clone)]
pub struct Reduced {
    pub basis: Vec<IntVec>,
    /// Squared Gram-Schmidt norms `|b_i*|^2`.
    pub gs_norms: Vec<Q>,
    /// `mu[i][j]` for `j < i`.
    pub mu: Vec<Vec<Q>>,
}

/// Integral LLL reduction (delta = 3/4) of linearly independent rows.
#[allow(clippy::needless_range_loop)]
pub fn lll(basis: Vec<IntVec>) -> Reduced {
    let n = basis.len();
    if n == 0 {
        return Reduced { basis, gs_norms: Vec::new(), mu: Vec::new() };
    }
    // 1-based bookkeeping as in the classical integral formulation.
    let mut b: Vec<IntVec> = Vec::with_capacity(n + 1);
    b.push(Vec::new());
    b.extend(basis);
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n + 1]; n + 1];
    d[0] = BigInt::one();
    d[1] = dot(&b[1], &b[1]);
    let mut k = 2usize;
    let mut kmax = 1usize;
    let three = BigInt::from(3);
    let four = BigInt::from(4);

    fn red(k: usize, l: usize, b: &mut [IntVec], lam: &mut [Vec<BigInt>], d: &[BigInt]) {
        let two_l: BigInt = &lam[k][l] * BigInt::from(2);
        if two_l.abs() > d[l] {
            let q = round_q(&Q::new(lam[k][l].clone(), d[l].clone()));
            let (head, tail) = b.split_at_mut(k);
            axpy(&mut tail[0], &(-&q), &head[l]);
            lam[k][l] -= &q * &d[l];
            for i in 1..l {
                let t = &q * &lam[l][i];
                lam[k][i] -= t;
            }
        }
    }

    while k <= n {
        if k > kmax {
            kmax = k;
            for j in 1..=k {
                let mut u = dot(&b[k], &b[j]);
                for i in 1..j {
                    u = (&d[i] * &u - &lam[k][i] * &lam[j][i]) / &d[i - 1];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    assert!(!u.is_zero(), "lll: rows are linearly dependent");
                    d[k] = u;
                }
            }
        }
        red(k, k - 1, &mut b, &mut lam, &d);
        let lhs = &four * &d[k] * &d[k - 2];
        let rhs = &three * &d[k - 1] * &d[k - 1] - &four * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            b.swap(k, k - 1);
            for j in 1..k - 1 {
                let t = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = t;
            }
            let l = lam[k][k - 1].clone();
            let bb = (&d[k - 2] * &d[k] + &l * &l) / &d[k - 1];
            for i in k + 1..=kmax {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k] * &lam[i][k - 1] - &l * &t) / &d[k - 1];
                lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k];
            }
            d[k - 1] = bb;
            if k > 2 {
                k -= 1;
            }
        } else {
            for l in (1..k - 1).rev() {
                red(k, l, &mut b, &mut lam, &d);
            }
            k += 1;
        }
    }
    let gs_norms = (1..=n).map(|i| Q::new(d[i].clone(), d[i - 1].clone())).collect();
    let mu = (1..=n)
        .map(|i| (1..i).map(|j| Q::new(lam[i][j].clone(), d[j].clone())).collect())
        .collect();
    b.remove(0);
    Reduced { basis: b, gs_norms, mu }
}

/// Search for a nonzero lattice vector with every coordinate in
/// `[-bound, bound]`. Exact: returns `Ok(None)` only when no such vector
/// exists.
pub fn find_short_linf(
    basis: Vec<IntVec>,
    bound: &BigInt,
    budget: u64,
) -> Result<Option<IntVec>, BudgetExceeded> {
    let n = basis.len();
    if n == 0 {
        return Ok(None);
    }
    let dim = basis[0].len();
    let red = lll(basis);
    if let Some(v) = red.basis.iter().find(|v| v.iter().all(|x| x.abs() <= *bound)) {
        return Ok(Some(v.clone()));
    }
    // Any vector with |v|_inf <= B has |v|_2^2 <= dim * B^2, and every
    // nonzero vector is at least as long as the shortest GS vector.
    let radius = Q::from_integer(BigInt::from(dim as u64) * bound * bound);
    if red.gs_norms.iter().all(|g| *g > radius) {
        return Ok(None);
    }
    let mut found = None;
    let mut nodes = 0u64;
    let mut x = vec![BigInt::zero(); n];
    enumerate(&red, n, &radius, &mut x, &mut nodes, budget, &mut |v: &IntVec| {
        if v.iter().all(|c| c.abs() <= *bound) && !is_zero_vec(v) {
            found = Some(v.clone());
            true
        } else {
            false
        }
    })?;
    Ok(found)
}

#[allow(clippy::needless_range_loop)]
fn enumerate(
    red: &Reduced,
    level: usize,
    remaining: &Q,
    x: &mut Vec<BigInt>,
    nodes: &mut u64,
    budget: u64,
    visit: &mut dyn FnMut(&IntVec) -> bool,
) -> Result<bool, BudgetExceeded> {
    *nodes += 1;
    if *nodes > budget {
        return Err(BudgetExceeded { budget });
    }
    if level == 0 {
        let dim = red.basis[0].len();
        let mut v = vec![BigInt::zero(); dim];
        for (xi, bi) in x.iter().zip(&red.basis) {
            axpy(&mut v, xi, bi);
        }
        return Ok(visit(&v));
    }
    let i = level - 1;
    let n = red.basis.len();
    let mut center = Q::zero();
    for j in i + 1..n {
        center -= &red.mu[j][i] * Q::from_integer(x[j].clone());
    }
    let slack = remaining / &red.gs_norms[i];
    let r = isqrt(&slack.floor().to_integer()) + BigInt::one();
    let lo = center.floor().to_integer() - &r;
    let hi = center.ceil().to_integer() + &r;
    let mut xi = lo;
    while xi <= hi {
        let diff = Q::from_integer(xi.clone()) - &center;
        let used = &diff * &diff * &red.gs_norms[i];
        if used <= *remaining {
            x[i] = xi.clone();
            let rest = remaining - used;
            if enumerate(red, level - 1, &rest, x, nodes, budget, visit)? {
                return Ok(true);
            }
        }
        xi += 1;
    }
    x[i] = BigInt::zero();
    Ok(false)
}

/// Lattice points of an HNF basis with all coordinates in `[-bound, bound]`,
/// excluding zero, up to `limit` points.
pub fn box_points(
    hnf_rows: &[IntVec],
    bound: &BigInt,
    limit: usize,
    budget: u64,
) -> Result<Vec<IntVec>, BudgetExceeded> {
    let n = hnf_rows.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let dim = hnf_rows[0].len();
    let pivots: Vec<usize> = hnf_rows
        .iter()
        .map(|r| r.iter().position(|x| !x.is_zero()).expect("hnf row is nonzero"))
        .collect();
    let mut out = Vec::new();
    let mut nodes = 0u64;
    let mut acc = vec![BigInt::zero(); dim];
    box_rec(hnf_rows, &pivots, 0, bound, &mut acc, &mut out, limit, &mut nodes, budget)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn box_rec(
    rows: &[IntVec],
    pivots: &[usize],
    i: usize,
    bound: &BigInt,
    acc: &mut IntVec,
    out: &mut Vec<IntVec>,
    limit: usize,
    nodes: &mut u64,
    budget: u64,
) -> Result<(), BudgetExceeded> {
    *nodes += 1;
    if *nodes > budget {
        return Err(BudgetExceeded { budget });
    }
    if out.len() >= limit {
        return Ok(());
    }
    // Columns strictly before this row's pivot are now final.
    let settled = if i < rows.len() { pivots[i] } else { acc.len() };
    let start = if i == 0 { 0 } else { pivots[i - 1] };
    if acc[start..settled].iter().any(|c| c.abs() > *bound) {
        return Ok(());
    }
    if i == rows.len() {
        if !is_zero_vec(acc) {
            out.push(acc.clone());
        }
        return Ok(());
    }
    let p = pivots[i];
    let piv = &rows[i][p];
    // acc[p] + t * piv in [-B, B]
    let lo = (-bound - &acc[p]).div_ceil(piv);
    let hi = (bound - &acc[p]).div_floor(piv);
    let mut t = lo;
    while t <= hi {
        axpy(acc, &t, &rows[i]);
        box_rec(rows, pivots, i + 1, bound, acc, out, limit, nodes, budget)?;
        axpy(acc, &(-&t), &rows[i]);
        if out.len() >= limit {
            break;
        }
        t += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVec {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn hnf_of_small_lattice() {
        let h = hnf(&[v(&[2, 4]), v(&[3, 1]), v(&[1, 1])], 2);
        // index = gcd of the 2x2 minors = gcd(-10, -2, 2) = 2
        assert_eq!(h, vec![v(&[1, 1]), v(&[0, 2])]);
        let h = hnf(&[v(&[4, 2]), v(&[0, 6])], 2);
        assert_eq!(h, vec![v(&[4, 2]), v(&[0, 6])]);
    }

    #[test]
    fn kernel_mod_is_exact_sublattice() {
        // t0 * 3 + t1 * 5 = 0 mod 7 over Z^2
        let k = kernel_mod(vec![v(&[1, 0]), v(&[0, 1])], &v(&[3, 5]), &BigInt::from(7));
        let h = hnf(&k, 2);
        for a in -10i64..=10 {
            for b in -10i64..=10 {
                let inside = (3 * a + 5 * b).rem_euclid(7) == 0;
                let pts = box_points(&h, &BigInt::from(10), 10_000, 1_000_000).unwrap();
                let member = pts.contains(&v(&[a, b])) || (a == 0 && b == 0);
                assert_eq!(inside, member, "({a},{b})");
            }
        }
    }

    #[test]
    fn lll_finds_short_relation() {
        // relation lattice of (1, 123456) mod 10^6: short vectors exist
        let m = BigInt::from(1_000_000);
        let k = kernel_mod(vec![v(&[1, 0]), v(&[0, 1])], &v(&[1, 123_456]), &m);
        let found = find_short_linf(k.clone(), &BigInt::from(2000), 1_000_000).unwrap().unwrap();
        let val: BigInt = &found[0] + &found[1] * BigInt::from(123_456);
        assert!(val.mod_floor(&m).is_zero());
        // brute-force oracle for the smallest sup-norm
        let mut best = i64::MAX;
        for b in -2000i64..=2000 {
            let a = (-(b * 123_456)).rem_euclid(1_000_000);
            for a in [a, a - 1_000_000] {
                if (a, b) != (0, 0) {
                    best = best.min(a.abs().max(b.abs()));
                }
            }
        }
        let got = found.iter().map(|x| x.abs()).max().unwrap();
        assert!(got <= BigInt::from(2000));
        let none = find_short_linf(k, &BigInt::from(best - 1), 1_000_000).unwrap();
        assert!(none.is_none(), "nothing below the brute-force minimum {best}");
    }
}
