//! Exact integer and rational helpers: primes, factorization of small
//! integers, p-adic valuations and residues.

use alloc::vec::Vec;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational number used throughout the crate.
pub type Q = BigRational;

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = alloc::vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &b)| b.then_some(k as u64))
        .collect()
}

/// Smallest prime strictly greater than `n`.
pub fn next_prime(n: u64) -> u64 {
    let mut c = n + 1;
    while !is_prime(c) {
        c += 1;
    }
    c
}

fn pollard_rho(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut d) = (2u64, 2u64, 1u64);
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = x.abs_diff(y).gcd(&n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn factor_u64(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_rho(n);
    factor_u64(d, out);
    factor_u64(n / d, out);
}

/// Distinct prime divisors of a nonzero integer, ascending. Returns `None`
/// when a cofactor larger than `u64` survives trial division.
pub fn prime_divisors(n: &BigInt) -> Option<Vec<u64>> {
    let mut m = n.abs();
    let mut out = Vec::new();
    if m.is_zero() {
        return Some(out);
    }
    for p in primes_up_to(1000) {
        let bp = big(p);
        if (&m % &bp).is_zero() {
            out.push(p);
            while (&m % &bp).is_zero() {
                m /= &bp;
            }
        }
    }
    if !m.is_one() {
        let small = m.to_u64()?;
        let mut f = Vec::new();
        factor_u64(small, &mut f);
        out.extend(f);
    }
    out.sort_unstable();
    out.dedup();
    Some(out)
}

/// Exponent of `p` in a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> u32 {
    debug_assert!(!n.is_zero());
    let bp = big(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (quo, rem) = m.div_rem(&bp);
        if !rem.is_zero() {
            return v;
        }
        m = quo;
        v += 1;
    }
}

/// `v_p(x)` for nonzero rational `x`; `None` for zero.
pub fn q_valuation(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    Some(int_valuation(x.numer(), p) as i64 - int_valuation(x.denom(), p) as i64)
}

/// Multiply `x` by the unit of `Z_(p)` that strips every prime other than
/// `p` from numerator and denominator, leaving `±p^v`.
pub fn p_part(x: &Q, p: u64) -> Q {
    match q_valuation(x, p) {
        None => Q::zero(),
        Some(v) => {
            let pp = big(p).pow(v.unsigned_abs() as u32);
            if v >= 0 {
                Q::from_integer(pp)
            } else {
                Q::new(BigInt::one(), pp)
            }
        }
    }
}

/// Image of a `p`-integral rational in `Z/p^e`, as a value in `[0, p^e)`.
pub fn residue_mod_prime_power(x: &Q, p: u64, e: u32) -> BigInt {
    let m = big(p).pow(e);
    let num = x.numer().mod_floor(&m);
    let den = x.denom().mod_floor(&m);
    let inv = mod_inverse(&den, &m).expect("denominator must be a p-adic unit");
    (num * inv).mod_floor(&m)
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() && g.gcd != -BigInt::one() {
        return None;
    }
    let x = if g.gcd.sign() == Sign::Minus { -g.x } else { g.x };
    Some(x.mod_floor(m))
}

pub fn lcm_denominators<'a>(xs: impl IntoIterator<Item = &'a Q>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Round a rational to the nearest integer (ties toward +inf).
pub fn round_q(x: &Q) -> BigInt {
    let two = BigInt::from(2);
    (x.numer() * &two + x.denom()).div_floor(&(x.denom() * &two))
}

/// Integer square root (floor) of a nonnegative integer.
pub fn isqrt(n: &BigInt) -> BigInt {
    if n.sign() != Sign::Plus {
        return BigInt::zero();
    }
    n.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_matches_miller_rabin() {
        let sieved = primes_up_to(2000);
        let tested: Vec<u64> = (0..=2000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, tested);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007u64 * 3));
    }

    #[test]
    fn factors_small_and_medium() {
        assert_eq!(prime_divisors(&BigInt::from(360)).unwrap(), [2, 3, 5]);
        let n = BigInt::from(1_000_003u64) * BigInt::from(999_983u64);
        assert_eq!(prime_divisors(&n).unwrap(), [999_983, 1_000_003]);
        assert_eq!(prime_divisors(&BigInt::from(-7)).unwrap(), [7]);
    }

    #[test]
    fn residues_of_units() {
        // 1/2 mod 9 = 5
        assert_eq!(residue_mod_prime_power(&qr(1, 2), 3, 2), BigInt::from(5));
        assert_eq!(p_part(&qr(-50, 7), 5), qi(25));
        assert_eq!(round_q(&qr(5, 2)), BigInt::from(3));
        assert_eq!(round_q(&qr(-5, 2)), BigInt::from(-2));
    }
}
