//! Valuations, prime-set descriptors, multiplicative sets and truncated
//! S-adic completion elements.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{big, is_prime, q_valuation, Q};
use crate::error::{Error, Result};
use crate::lattice::{find_short_linf, kernel_mod};

/// Default ceiling on enumeration steps for bounded searches.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// `v_p(x)`. Zero has no finite valuation and is reported as an error.
pub fn valuation(x: &Q, p: u64) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    q_valuation(x, p).ok_or(Error::ValuationOfZero)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SplitClass {
    First,
    Second,
}

/// Deterministic split of the primes into two infinite classes: a prime
/// `p != pivot` lies in the second class iff `p mod modulus` is one of
/// `second_residues`; the pivot always lies in the first class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueRule {
    pub pivot: u64,
    pub modulus: u64,
    pub second_residues: Vec<u64>,
}

impl ResidueRule {
    /// Primes `= 1 mod 4` form the second class, everything else the first.
    pub fn standard(pivot: u64) -> Self {
        ResidueRule { pivot, modulus: 4, second_residues: alloc::vec![1] }
    }

    pub fn class_of(&self, p: u64) -> SplitClass {
        if p != self.pivot && self.second_residues.contains(&(p % self.modulus)) {
            SplitClass::Second
        } else {
            SplitClass::First
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PrimeKind {
    All,
    Explicit(Vec<u64>),
    ResidueSplit { rule: ResidueRule, class: SplitClass },
}

/// A possibly infinite set of primes: a kind minus a finite excluded set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeSetDescriptor {
    pub kind: PrimeKind,
    pub excluded: Vec<u64>,
}

impl PrimeSetDescriptor {
    pub fn all() -> Self {
        PrimeSetDescriptor { kind: PrimeKind::All, excluded: Vec::new() }
    }

    pub fn all_except(excluded: &[u64]) -> Self {
        let mut ex = excluded.to_vec();
        ex.sort_unstable();
        ex.dedup();
        PrimeSetDescriptor { kind: PrimeKind::All, excluded: ex }
    }

    pub fn explicit(primes: &[u64]) -> Result<Self> {
        let mut ps = primes.to_vec();
        ps.sort_unstable();
        let n = ps.len();
        ps.dedup();
        if ps.len() != n {
            return Err(Error::Invalid("explicit prime list has duplicates".into()));
        }
        if let Some(&p) = ps.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeSetDescriptor { kind: PrimeKind::Explicit(ps), excluded: Vec::new() })
    }

    pub fn split(rule: ResidueRule, class: SplitClass, excluded: &[u64]) -> Self {
        let mut ex = excluded.to_vec();
        ex.sort_unstable();
        ex.dedup();
        PrimeSetDescriptor { kind: PrimeKind::ResidueSplit { rule, class }, excluded: ex }
    }

    pub fn contains(&self, p: u64) -> bool {
        if self.excluded.contains(&p) {
            return false;
        }
        match &self.kind {
            PrimeKind::All => true,
            PrimeKind::Explicit(ps) => ps.binary_search(&p).is_ok(),
            PrimeKind::ResidueSplit { rule, class } => rule.class_of(p) == *class,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, PrimeKind::Explicit(_))
    }

    /// Primes that behave differently from the generic members of their
    /// residue class.
    pub fn special_primes(&self) -> Vec<u64> {
        let mut out = self.excluded.clone();
        match &self.kind {
            PrimeKind::All => {}
            PrimeKind::Explicit(ps) => out.extend(ps),
            PrimeKind::ResidueSplit { rule, .. } => {
                out.push(rule.pivot);
                // primes dividing the modulus sit outside the unit classes
                out.extend(crate::arith::primes_up_to(rule.modulus).into_iter().filter(|p| rule.modulus % p == 0));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Modulus whose unit residue classes determine membership of generic
    /// primes (1 when membership is constant on generic primes).
    pub fn class_modulus(&self) -> u64 {
        match &self.kind {
            PrimeKind::ResidueSplit { rule, .. } => rule.modulus,
            _ => 1,
        }
    }

    /// Members up to `bound`, ascending.
    pub fn enumerate(&self, bound: u64) -> Vec<u64> {
        crate::arith::primes_up_to(bound).into_iter().filter(|&p| self.contains(p)).collect()
    }
}

/// Truncation `s_0, ..., s_{M-1}` of a countable multiplicative set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiplicativeSet {
    generators: Vec<u64>,
}

impl MultiplicativeSet {
    pub fn new(generators: Vec<u64>) -> Result<Self> {
        if generators.iter().any(|&s| s < 2) {
            return Err(Error::Invalid("multiplicative set generators must be >= 2".into()));
        }
        Ok(MultiplicativeSet { generators })
    }

    /// `s_n = p` for `n < levels`: the completion is the p-adic integers.
    pub fn powers_of(p: u64, levels: usize) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Self::new(alloc::vec![p; levels])
    }

    pub fn generators(&self) -> &[u64] {
        &self.generators
    }

    pub fn levels(&self) -> usize {
        self.generators.len()
    }

    /// `q_m = prod_{n < m} s_n`.
    pub fn q(&self, m: usize) -> BigInt {
        self.generators[..m].iter().fold(BigInt::one(), |acc, &s| acc * big(s))
    }

    /// Distinct primes dividing some generator.
    pub fn primes(&self) -> Vec<u64> {
        let mut out = Vec::new();
        for &s in &self.generators {
            out.extend(crate::arith::prime_divisors(&big(s)).unwrap_or_default());
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Element of the S-adic completion known to precision `M`, stored by its
/// digits `d_m` in `[0, s_m)`; the residue modulo `q_m` is
/// `sum_{n<m} d_n q_n`, so coherence holds by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompletionElement {
    base: MultiplicativeSet,
    digits: Vec<u64>,
    seed: Option<u64>,
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 step
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl CompletionElement {
    pub fn from_digits(base: MultiplicativeSet, digits: Vec<u64>, seed: Option<u64>) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::PrecisionTooLow(0));
        }
        if digits.len() > base.levels() {
            return Err(Error::LevelExceedsPrecision { level: digits.len(), precision: base.levels() });
        }
        if digits.iter().zip(base.generators()).any(|(&d, &s)| d >= s) {
            return Err(Error::Invalid("completion digit out of range".into()));
        }
        Ok(CompletionElement { base, digits, seed })
    }

    /// Pseudorandom element drawn from a ChaCha stream keyed by `seed`.
    pub fn seeded(base: MultiplicativeSet, precision: usize, seed: u64) -> Result<Self> {
        if precision == 0 {
            return Err(Error::PrecisionTooLow(0));
        }
        if precision > base.levels() {
            return Err(Error::LevelExceedsPrecision { level: precision, precision: base.levels() });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let digits = base.generators()[..precision].iter().map(|&s| rng.next_u64() % s).collect();
        Ok(CompletionElement { base, digits, seed: Some(seed) })
    }

    /// The `index`-th element of a family derived from one master seed.
    pub fn seeded_family_member(base: MultiplicativeSet, precision: usize, seed: u64, index: u64) -> Result<Self> {
        Self::seeded(base, precision, mix_seed(seed, index))
    }

    /// The rational integer `n >= 0` viewed in the completion.
    pub fn from_integer(base: MultiplicativeSet, precision: usize, n: u64) -> Result<Self> {
        let mut rest = n;
        let digits = base.generators()[..precision]
            .iter()
            .map(|&s| {
                let d = rest % s;
                rest /= s;
                d
            })
            .collect();
        Self::from_digits(base, digits, None)
    }

    pub fn base(&self) -> &MultiplicativeSet {
        &self.base
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Residue modulo `q_m`, in `[0, q_m)`.
    pub fn residue(&self, m: usize) -> Result<BigInt> {
        if m > self.precision() {
            return Err(Error::LevelExceedsPrecision { level: m, precision: self.precision() });
        }
        let mut acc = BigInt::zero();
        let mut qn = BigInt::one();
        for (n, &d) in self.digits[..m].iter().enumerate() {
            acc += &qn * big(d);
            qn *= big(self.base.generators()[n]);
        }
        Ok(acc)
    }
}

/// A product of at most two completion elements (by index); the empty
/// product is the constant 1.
pub type Monomial = Vec<usize>;

/// All monomials of total degree `<= degree` in `n` variables, graded then
/// lexicographic.
pub fn monomials(n: usize, degree: usize) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = alloc::vec![Vec::new()];
    let mut layer: Vec<Monomial> = alloc::vec![Vec::new()];
    for _ in 0..degree {
        let mut next = Vec::new();
        for m in &layer {
            let start = m.last().copied().unwrap_or(0);
            for i in start..n {
                let mut mm = m.clone();
                mm.push(i);
                next.push(mm);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub monomials: Vec<Monomial>,
    pub coefficients: Vec<BigInt>,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndependenceVerdict {
    NoRelationFound { coeff_bound: u64, level: usize, monomials: usize },
    RelationWitness(Relation),
}

impl IndependenceVerdict {
    pub fn is_independent(&self) -> bool {
        matches!(self, IndependenceVerdict::NoRelationFound { .. })
    }
}

fn monomial_value(elems: &[CompletionElement], mono: &Monomial, level: usize, modulus: &BigInt) -> Result<BigInt> {
    let mut v = BigInt::one();
    for &i in mono {
        v = (v * elems[i].residue(level)?).mod_floor(modulus);
    }
    Ok(v.mod_floor(modulus))
}

/// Checks a relation directly: `sum c_mu * mu(w) = 0 mod q_level`.
pub fn relation_holds(elems: &[CompletionElement], rel: &Relation) -> Result<bool> {
    let modulus = elems[0].base().q(rel.level);
    let mut acc = BigInt::zero();
    for (mono, c) in rel.monomials.iter().zip(&rel.coefficients) {
        acc += c * monomial_value(elems, mono, rel.level, &modulus)?;
    }
    Ok(acc.mod_floor(&modulus).is_zero())
}

/// Searches for integer coefficients, each of absolute value at most
/// `coeff_bound` and not all zero, that make the combination of the given
/// monomials vanish modulo `q_level`. The search is complete: a reported
/// absence means no such relation exists.
pub fn independence_check_monomials(
    elems: &[CompletionElement],
    monos: &[Monomial],
    coeff_bound: u64,
    level: usize,
    budget: u64,
) -> Result<IndependenceVerdict> {
    let first = elems.first().ok_or_else(|| Error::Invalid("no completion elements".into()))?;
    if elems.iter().any(|e| e.base() != first.base()) {
        return Err(Error::IncompatibleElements);
    }
    if let Some(e) = elems.iter().find(|e| e.precision() < level) {
        return Err(Error::LevelExceedsPrecision { level, precision: e.precision() });
    }
    if let Some(i) = monos.iter().flatten().find(|&&i| i >= elems.len()) {
        return Err(Error::Invalid(alloc::format!("monomial refers to element {i}")));
    }
    let modulus = first.base().q(level);
    let values = monos
        .iter()
        .map(|m| monomial_value(elems, m, level, &modulus))
        .collect::<Result<Vec<_>>>()?;
    let n = monos.len();
    let identity: Vec<Vec<BigInt>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let relations = kernel_mod(identity, &values, &modulus);
    match find_short_linf(relations, &big(coeff_bound), budget)? {
        None => Ok(IndependenceVerdict::NoRelationFound { coeff_bound, level, monomials: n }),
        Some(c) => Ok(IndependenceVerdict::RelationWitness(Relation {
            monomials: monos.to_vec(),
            coefficients: c,
            level,
        })),
    }
}

/// [`independence_check_monomials`] over every monomial of degree
/// `<= degree` (constant term included).
pub fn independence_check(
    elems: &[CompletionElement],
    degree: usize,
    coeff_bound: u64,
    level: usize,
    budget: u64,
) -> Result<IndependenceVerdict> {
    if degree > 2 {
        return Err(Error::Invalid("independence check supports degree <= 2".into()));
    }
    independence_check_monomials(elems, &monomials(elems.len(), degree), coeff_bound, level, budget)
}
