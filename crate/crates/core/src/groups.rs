//! Finite-rank torsion-free groups presented as a free lattice with
//! rank-one height data on each basis direction, plus prime-indexed
//! adjunction families `(e_t + z_p) / p^k`.
//!
//! A group `G` is determined by its localizations `G_(p)`, and membership of
//! `x` only depends on the primes dividing the denominator of `x`, so it is
//! decided exactly by echelon reduction over `Z_(p)` at those primes.
//!
//! For arguments that quantify over infinitely many primes, every primes
//! outside a finite special set behaves like one of finitely many *generic
//! classes* (unit residues modulo the lcm of the split moduli). At such a
//! prime `G_(p) = Z_(p)^n + p^{-1} span(V) + Q^D` for a fixed set of integer
//! vectors `V` and divisible coordinates `D`; see [`GenericClass`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{big, prime_divisors, primes_up_to, q_valuation, Q};
use crate::error::{Error, Result};
use crate::lattice::{hnf, IntVec};
use crate::linalg::{self, QVec};
use crate::rankone::{Height, HeightSequence};
use crate::valuations::{CompletionElement, PrimeKind, PrimeSetDescriptor, SplitClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    KernelBasis,
    CokernelLift,
    CompletionMix,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::KernelBasis => "kernel-basis",
            Role::CokernelLift => "cokernel-lift",
            Role::CompletionMix => "completion-mix",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "kernel-basis" => Ok(Role::KernelBasis),
            "cokernel-lift" => Ok(Role::CokernelLift),
            "completion-mix" => Ok(Role::CompletionMix),
            _ => Err(Error::Invalid(format!("unknown role `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Basis {
    names: Vec<String>,
    roles: Vec<Role>,
}

impl Basis {
    pub fn new(symbols: Vec<(String, Role)>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Invalid("basis needs at least one symbol".into()));
        }
        let (names, roles): (Vec<String>, Vec<Role>) = symbols.into_iter().unzip();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || names[..i].contains(n) {
                return Err(Error::Invalid(format!("basis symbol `{n}` is empty or repeated")));
            }
        }
        Ok(Basis { names, roles })
    }

    pub fn from_pairs(symbols: &[(&str, Role)]) -> Result<Self> {
        Self::new(symbols.iter().map(|&(n, r)| (String::from(n), r)).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::MalformedElement(format!("symbol `{name}` is not in the basis")))
    }

    pub fn with_role(&self, role: Role) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.roles[i] == role).collect()
    }
}

/// Denominator of a family: `p^k`, or `q_M` for completion families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Power(u32),
    Schedule,
}

/// How the offset `z_p` depends on `p`. Offsets are integer vectors over
/// the whole basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OffsetRule {
    Constant(IntVec),
    /// Explicit values at finitely many primes; `extension` covers the
    /// rest (without it, the rule is undefined elsewhere).
    Table { entries: BTreeMap<u64, IntVec>, extension: Option<IntVec> },
    /// `z_p = base + p * slope`.
    Affine { base: IntVec, slope: IntVec },
    /// The same offset `b` at every prime of the family; `q` is the prime
    /// the assignment `z -> sigma(z)` is built over, on the truncated domain.
    Sigma { q: u64, b: IntVec, domain: SigmaDomain },
    /// `z = -c_M` where `c_M = sum_i res_M(w_i) e_{idx_i}`.
    CompletionTruncation { mix: Vec<(usize, CompletionElement)> },
}

impl OffsetRule {
    pub fn kind(&self) -> &'static str {
        match self {
            OffsetRule::Constant(_) => "constant",
            OffsetRule::Table { .. } => "table",
            OffsetRule::Affine { .. } => "affine",
            OffsetRule::Sigma { .. } => "sigma",
            OffsetRule::CompletionTruncation { .. } => "completion-truncation",
        }
    }

    /// Offset used at generic primes (exponent 1): the rule modulo `p`.
    pub fn generic_offset(&self) -> Option<&IntVec> {
        match self {
            OffsetRule::Constant(z) | OffsetRule::Sigma { b: z, .. } => Some(z),
            OffsetRule::Table { extension, .. } => extension.as_ref(),
            OffsetRule::Affine { base, .. } => Some(base),
            OffsetRule::CompletionTruncation { .. } => None,
        }
    }
}

/// Truncation of `Z[1/q]` used by a sigma rule: `z = n / q^e` with
/// `0 < |n| <= numerator_bound`, `e <= exponent_bound`, images below
/// `prime_bound`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SigmaDomain {
    pub numerator_bound: u64,
    pub exponent_bound: u32,
    pub prime_bound: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AdjunctionFamily {
    pub primes: PrimeSetDescriptor,
    pub exponent: Exponent,
    pub rule: OffsetRule,
    pub target: usize,
}

/// What a family contributes at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalGen {
    Inactive,
    Gen(QVec),
    Unknown,
}

impl AdjunctionFamily {
    pub fn offset_at(&self, p: u64) -> Option<IntVec> {
        match &self.rule {
            OffsetRule::Constant(z) | OffsetRule::Sigma { b: z, .. } => Some(z.clone()),
            OffsetRule::Table { entries, extension } => entries.get(&p).or(extension.as_ref()).cloned(),
            OffsetRule::Affine { base, slope } => {
                Some(base.iter().zip(slope).map(|(b, s)| b + s * big(p)).collect())
            }
            OffsetRule::CompletionTruncation { mix } => {
                let n = mix.iter().map(|(i, _)| i + 1).max().unwrap_or(0).max(self.target + 1);
                let m = self.precision();
                let mut z = vec![BigInt::zero(); n];
                for (i, w) in mix {
                    z[*i] -= w.residue(m).ok()?;
                }
                Some(z)
            }
        }
    }

    /// Denominator `p^k` or `q_M`.
    pub fn denominator(&self, p: u64) -> BigInt {
        match (&self.exponent, &self.rule) {
            (Exponent::Power(k), _) => num_traits::pow(big(p), *k as usize),
            (Exponent::Schedule, OffsetRule::CompletionTruncation { mix }) => match mix.first() {
                Some((_, w)) => w.base().q(self.precision()),
                None => BigInt::one(),
            },
            (Exponent::Schedule, _) => big(p),
        }
    }

    /// Truncation level of a completion family (0 otherwise).
    pub fn precision(&self) -> usize {
        match &self.rule {
            OffsetRule::CompletionTruncation { mix } => mix.iter().map(|(_, w)| w.precision()).min().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn generator_at(&self, p: u64, rank: usize) -> LocalGen {
        if !self.primes.contains(p) {
            return LocalGen::Inactive;
        }
        let Some(mut z) = self.offset_at(p) else {
            return LocalGen::Unknown;
        };
        z.resize(rank, BigInt::zero());
        z[self.target] += BigInt::one();
        let d = Q::from_integer(self.denominator(p));
        LocalGen::Gen(z.into_iter().map(|c| Q::from_integer(c) / &d).collect())
    }

    /// Whether generic primes with residue `r` modulo `l` belong to the
    /// family (the class moduli divide `l`).
    pub fn contains_generic(&self, r: u64) -> bool {
        match &self.primes.kind {
            PrimeKind::All => true,
            PrimeKind::Explicit(_) => false,
            PrimeKind::ResidueSplit { rule, class } => {
                let second = rule.second_residues.contains(&(r % rule.modulus));
                second == (*class == SplitClass::Second)
            }
        }
    }

    /// Primes at which this family may differ from its generic behaviour.
    pub fn special_primes(&self) -> Vec<u64> {
        let mut out = self.primes.special_primes();
        match &self.rule {
            OffsetRule::Table { entries, .. } => out.extend(entries.keys()),
            OffsetRule::Sigma { q, .. } => out.push(*q),
            OffsetRule::CompletionTruncation { mix } => {
                if let Some((_, w)) = mix.first() {
                    out.extend(w.base().primes());
                }
            }
            _ => {}
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// A vector of rational coordinates over a basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementExpr {
    pub coords: QVec,
}

impl ElementExpr {
    pub fn new(coords: QVec) -> Self {
        ElementExpr { coords }
    }

    pub fn basis_vector(basis: &Basis, name: &str) -> Result<Self> {
        let i = basis.index_of(name)?;
        Ok(ElementExpr { coords: linalg::unit_vec(basis.len(), i) })
    }

    pub fn from_terms(basis: &Basis, terms: &[(&str, Q)]) -> Result<Self> {
        let mut coords = linalg::zero_vec(basis.len());
        for (name, c) in terms {
            coords[basis.index_of(name)?] += c;
        }
        Ok(ElementExpr { coords })
    }

    /// Parses `sym:num/den` terms separated by commas, e.g. `a:1/7,e:-1/7`.
    pub fn parse(basis: &Basis, s: &str) -> Result<Self> {
        let mut coords = linalg::zero_vec(basis.len());
        for term in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (name, val) = term
                .split_once(':')
                .ok_or_else(|| Error::MalformedElement(format!("expected symbol:value, got `{term}`")))?;
            let v: Q = val
                .trim()
                .parse()
                .map_err(|_| Error::MalformedElement(format!("bad rational `{val}`")))?;
            coords[basis.index_of(name.trim())?] += v;
        }
        Ok(ElementExpr { coords })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Membership {
    Yes,
    No,
    UnknownAtBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupPresentation {
    pub basis: Basis,
    pub heights: Vec<HeightSequence>,
    pub families: Vec<AdjunctionFamily>,
    pub purified: bool,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
}

/// A full-rank `Z_(p)`-lattice in the finite coordinates, plus a set of
/// divisible coordinates carrying all of `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalLattice {
    pub p: u64,
    pub divisible: Vec<bool>,
    /// Echelon rows; `rows[k]` has entry `p^v` at `cols[k]` and zeros at
    /// the columns processed before it.
    pub rows: Vec<QVec>,
    pub cols: Vec<usize>,
}

fn val(x: &Q, p: u64) -> i64 {
    q_valuation(x, p).unwrap_or(i64::MAX)
}

fn p_pow(p: u64, e: i64) -> Q {
    let base = Q::from_integer(big(p));
    if e >= 0 {
        num_traits::pow(base, e as usize)
    } else {
        num_traits::pow(base.recip(), (-e) as usize)
    }
}

impl LocalLattice {
    /// Echelon basis of the `Z_(p)`-span of `gens` (restricted to the finite
    /// coordinates), processing columns in `order` (all finite columns
    /// ascending when `None`). The span must have full rank.
    pub fn new(p: u64, divisible: Vec<bool>, gens: &[QVec], order: Option<&[usize]>) -> Result<Self> {
        let n = divisible.len();
        let mut pending: Vec<QVec> = gens
            .iter()
            .map(|g| (0..n).map(|i| if divisible[i] { Q::zero() } else { g[i].clone() }).collect::<QVec>())
            .filter(|g| !linalg::is_zero(g))
            .collect();
        let default_order: Vec<usize> = (0..n).filter(|&i| !divisible[i]).collect();
        let order = order.map(<[usize]>::to_vec).unwrap_or(default_order);
        let mut rows = Vec::new();
        let mut cols = Vec::new();
        for &c in order.iter().filter(|&&c| !divisible[c]) {
            let Some(idx) = (0..pending.len())
                .filter(|&i| !pending[i][c].is_zero())
                .min_by_key(|&i| (val(&pending[i][c], p), i))
            else {
                return Err(Error::Invalid(format!("local lattice at {p} is not of full rank")));
            };
            let piv = pending.swap_remove(idx);
            let v = val(&piv[c], p);
            let unit = p_pow(p, v) / &piv[c];
            let piv = linalg::scale(&piv, &unit);
            for r in pending.iter_mut() {
                if !r[c].is_zero() {
                    let k = -(&r[c] / &piv[c]);
                    linalg::add_scaled(r, &k, &piv);
                }
            }
            pending.retain(|r| !linalg::is_zero(r));
            rows.push(piv);
            cols.push(c);
        }
        Ok(LocalLattice { p, divisible, rows, cols })
    }

    /// Coordinates of `y` in the echelon basis (finite part only).
    pub fn coefficients(&self, y: &[Q]) -> QVec {
        let mut rest: QVec = y
            .iter()
            .enumerate()
            .map(|(i, x)| if self.divisible[i] { Q::zero() } else { x.clone() })
            .collect();
        let mut out = Vec::with_capacity(self.rows.len());
        for (row, &c) in self.rows.iter().zip(&self.cols) {
            let k = &rest[c] / &row[c];
            linalg::add_scaled(&mut rest, &-k.clone(), row);
            out.push(k);
        }
        out
    }

    pub fn contains(&self, y: &[Q]) -> bool {
        self.coefficients(y).iter().all(|k| val(k, self.p) >= 0)
    }

    /// Largest `e` with some basis entry of valuation `-e` (0 if integral).
    pub fn exponent(&self) -> u32 {
        let m = self.rows.iter().flatten().map(|x| val(x, self.p)).min().unwrap_or(0);
        if m < 0 {
            (-m) as u32
        } else {
            0
        }
    }

    pub fn is_subset_of(&self, other: &LocalLattice) -> bool {
        self.divisible.iter().zip(&other.divisible).all(|(a, b)| !a || *b)
            && self.rows.iter().all(|r| other.contains(r))
    }
}

/// Local data of a group at generic primes of one residue class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericClass {
    pub residue: u64,
    pub modulus: u64,
    pub divisible: Vec<bool>,
    /// Integer vectors `v` with `v / p` adjoined; families contribute
    /// `e_t + z`, height-one directions contribute `e_j`.
    pub vectors: Vec<IntVec>,
    /// Family index for each vector (`None` for height-one directions).
    pub sources: Vec<Option<usize>>,
}

impl GenericClass {
    /// Vectors projected to the finite coordinates, as rationals.
    pub fn finite_vectors(&self) -> Vec<QVec> {
        self.vectors
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .map(|(i, x)| if self.divisible[i] { Q::zero() } else { Q::from_integer(x.clone()) })
                    .collect()
            })
            .collect()
    }
}

/// Unit residues modulo `l` (just `0` when `l = 1`).
pub fn unit_residues(l: u64) -> Vec<u64> {
    if l == 1 {
        return vec![0];
    }
    (1..l).filter(|r| r.gcd(&l) == 1).collect()
}

/// Primes dividing some pivot of the Hermite form of `rows`: outside them,
/// the rows keep their rank modulo `p` and any rational solution of a
/// system over their span has `p`-integral coefficients.
pub fn degeneration_primes(rows: &[IntVec], dim: usize) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for r in hnf(rows, dim) {
        if let Some(x) = r.iter().find(|x| !x.is_zero()) {
            let ps = prime_divisors(&x.abs()).ok_or_else(|| Error::Unsupported("pivot too large to factor".into()))?;
            out.extend(ps);
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

impl GroupPresentation {
    pub fn new(basis: Basis, heights: Vec<HeightSequence>, families: Vec<AdjunctionFamily>) -> Result<Self> {
        let g = GroupPresentation { basis, heights, families, purified: false, precision: None, seed: None };
        g.validate()?;
        Ok(g)
    }

    /// The free lattice `Z^n` on the given basis.
    pub fn free(basis: Basis) -> Self {
        let n = basis.len();
        GroupPresentation {
            basis,
            heights: vec![HeightSequence::constant(Height::Finite(0)); n],
            families: Vec::new(),
            purified: false,
            precision: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        if self.heights.len() != n {
            return Err(Error::Invalid(format!("{} height sequences for rank {n}", self.heights.len())));
        }
        for f in &self.families {
            if f.target >= n {
                return Err(Error::Invalid(format!("family target {} out of range", f.target)));
            }
            if let Exponent::Power(0) = f.exponent {
                return Err(Error::Invalid("family exponent must be positive".into()));
            }
            let vecs: Vec<&IntVec> = match &f.rule {
                OffsetRule::Constant(z) | OffsetRule::Sigma { b: z, .. } => vec![z],
                OffsetRule::Table { entries, extension } => entries.values().chain(extension.iter()).collect(),
                OffsetRule::Affine { base, slope } => vec![base, slope],
                OffsetRule::CompletionTruncation { mix } => {
                    let Some((_, w0)) = mix.first() else {
                        return Err(Error::Invalid("completion family without elements".into()));
                    };
                    if mix.iter().any(|(i, w)| *i >= n || w.base() != w0.base()) {
                        return Err(Error::IncompatibleElements);
                    }
                    if f.exponent != Exponent::Schedule {
                        return Err(Error::Invalid("completion family needs the q_m schedule".into()));
                    }
                    Vec::new()
                }
            };
            if vecs.iter().any(|v| v.len() != n) {
                return Err(Error::Invalid(format!("offset length differs from rank {n}")));
            }
            if let OffsetRule::Table { entries, .. } = &f.rule {
                if let Some(p) = entries.keys().find(|&&p| !crate::arith::is_prime(p)) {
                    return Err(Error::NotPrime(*p));
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Generators of `G_(p)` (divisible coordinates separately), or `None`
    /// when some family rule is undefined at `p`.
    pub fn local_generators(&self, p: u64) -> Option<(Vec<bool>, Vec<QVec>)> {
        let n = self.rank();
        let divisible: Vec<bool> = self.heights.iter().map(|h| h.at(p).is_inf()).collect();
        let mut gens = Vec::new();
        for (j, h) in self.heights.iter().enumerate() {
            if let Height::Finite(k) = h.at(p) {
                let mut v = linalg::zero_vec(n);
                v[j] = p_pow(p, -(k as i64));
                gens.push(v);
            }
        }
        for f in &self.families {
            match f.generator_at(p, n) {
                LocalGen::Inactive => {}
                LocalGen::Gen(g) => gens.push(g),
                LocalGen::Unknown => return None,
            }
        }
        Some((divisible, gens))
    }

    pub fn local_lattice(&self, p: u64) -> Result<Option<LocalLattice>> {
        match self.local_generators(p) {
            None => Ok(None),
            Some((div, gens)) => LocalLattice::new(p, div, &gens, None).map(Some),
        }
    }

    /// Exact membership; only the primes dividing the denominators matter.
    pub fn member(&self, x: &ElementExpr) -> Result<Membership> {
        if x.coords.len() != self.rank() {
            return Err(Error::MalformedElement(format!(
                "element has {} coordinates, basis has {}",
                x.coords.len(),
                self.rank()
            )));
        }
        let den = crate::arith::lcm_denominators(&x.coords);
        let primes = prime_divisors(&den).ok_or_else(|| Error::Unsupported("denominator too large to factor".into()))?;
        let mut unknown = false;
        for p in primes {
            match self.local_lattice(p)? {
                None => unknown = true,
                Some(l) => {
                    if !l.contains(&x.coords) {
                        return Ok(Membership::No);
                    }
                }
            }
        }
        Ok(if unknown { Membership::UnknownAtBound } else { Membership::Yes })
    }

    pub fn contains(&self, x: &[Q]) -> Result<bool> {
        Ok(self.member(&ElementExpr::new(x.to_vec()))? == Membership::Yes)
    }

    /// Primes at which the group may differ from its generic class.
    pub fn special_primes(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self.heights.iter().flat_map(HeightSequence::special_primes).collect();
        for f in &self.families {
            out.extend(f.special_primes());
        }
        let l = self.class_modulus();
        out.extend(primes_up_to(l).into_iter().filter(|p| l.is_multiple_of(*p)));
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Lcm of the residue moduli of all families.
    pub fn class_modulus(&self) -> u64 {
        self.families.iter().fold(1u64, |acc, f| acc.lcm(&f.primes.class_modulus()))
    }

    /// Local structure at generic primes `p = r mod l` (with `l` a multiple
    /// of [`Self::class_modulus`]). Requires generic heights in `{0, 1, inf}`
    /// and exponent 1 on families active there.
    pub fn generic_class(&self, r: u64, l: u64) -> Result<GenericClass> {
        let n = self.rank();
        let mut divisible = vec![false; n];
        let mut vectors = Vec::new();
        let mut sources = Vec::new();
        for (j, h) in self.heights.iter().enumerate() {
            match h.default_height() {
                Height::Inf => divisible[j] = true,
                Height::Finite(0) => {}
                Height::Finite(1) => {
                    let mut e = vec![BigInt::zero(); n];
                    e[j] = BigInt::one();
                    vectors.push(e);
                    sources.push(None);
                }
                Height::Finite(k) => {
                    return Err(Error::Unsupported(format!("generic height {k} on coordinate {j}")));
                }
            }
        }
        for (fi, f) in self.families.iter().enumerate() {
            if !f.contains_generic(r) {
                continue;
            }
            if f.exponent != Exponent::Power(1) {
                return Err(Error::Unsupported("family with exponent above 1 at infinitely many primes".into()));
            }
            let z = f.rule.generic_offset().ok_or(Error::OffsetsNotTotal)?;
            let mut v = z.clone();
            v[f.target] += BigInt::one();
            vectors.push(v);
            sources.push(Some(fi));
        }
        Ok(GenericClass { residue: r, modulus: l, divisible, vectors, sources })
    }

    /// Whether the localization at `p` is all of `Q^n`.
    pub fn is_divisible_at(&self, p: u64) -> bool {
        self.heights.iter().all(|h| h.at(p).is_inf())
    }

    /// Coordinates with infinite height at `p`.
    pub fn divisible_coords(&self, p: u64) -> Vec<usize> {
        (0..self.rank()).filter(|&j| self.heights[j].at(p).is_inf()).collect()
    }
}

/// Drops the coordinates of an offset divisible by `p^k`; the group is
/// unchanged since those terms already lie in the lattice.
pub fn normalize_offset(z: &[BigInt], p: u64, k: u32) -> IntVec {
    let m = num_traits::pow(big(p), k as usize);
    z.iter().map(|c| if (c % &m).is_zero() { BigInt::zero() } else { c.clone() }).collect()
}

/// `G ∩ V` for a subspace `V` of `Q^n`: the pure subgroup of `G` cut out by
/// `V` (spanned by `span`, kept in reduced echelon form).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    pub ambient: GroupPresentation,
    pub span: Vec<QVec>,
}

impl Subgroup {
    pub fn new(ambient: GroupPresentation, gens: &[QVec]) -> Result<Self> {
        let n = ambient.rank();
        if gens.iter().any(|g| g.len() != n) {
            return Err(Error::MalformedElement("generator length differs from rank".into()));
        }
        let (span, _) = linalg::rref(gens, n);
        Ok(Subgroup { ambient, span })
    }

    pub fn coordinate(ambient: GroupPresentation, coords: &[usize]) -> Self {
        let n = ambient.rank();
        let gens: Vec<QVec> = coords.iter().map(|&i| linalg::unit_vec(n, i)).collect();
        let (span, _) = linalg::rref(&gens, n);
        Subgroup { ambient, span }
    }

    pub fn rank(&self) -> usize {
        self.span.len()
    }

    pub fn is_zero(&self) -> bool {
        self.span.is_empty()
    }

    pub fn member(&self, x: &ElementExpr) -> Result<Membership> {
        if !linalg::in_span(&self.span, &x.coords, self.ambient.rank()) {
            return Ok(Membership::No);
        }
        self.ambient.member(x)
    }

    /// The coordinates spanning `V`, when `V` is a coordinate subspace.
    pub fn coordinate_support(&self) -> Option<Vec<usize>> {
        let mut out = Vec::new();
        for row in &self.span {
            let nz: Vec<usize> = (0..row.len()).filter(|&i| !row[i].is_zero()).collect();
            if nz.len() != 1 {
                return None;
            }
            out.push(nz[0]);
        }
        Some(out)
    }

    /// `G_(p) ∩ V` written in the coordinates of the support (coordinate
    /// subspaces only; `None` when a rule is undefined at `p`).
    pub fn local_lattice(&self, p: u64) -> Result<Option<LocalLattice>> {
        let support = self
            .coordinate_support()
            .ok_or_else(|| Error::Unsupported("local structure of a non-coordinate subgroup".into()))?;
        let Some((div, gens)) = self.ambient.local_generators(p) else {
            return Ok(None);
        };
        let n = self.ambient.rank();
        let mut order: Vec<usize> = (0..n).filter(|i| !support.contains(i)).collect();
        order.extend(&support);
        let full = LocalLattice::new(p, div.clone(), &gens, Some(&order))?;
        let rows: Vec<QVec> = full
            .rows
            .iter()
            .zip(&full.cols)
            .filter(|(_, c)| support.contains(c))
            .map(|(r, _)| support.iter().map(|&i| r[i].clone()).collect())
            .collect();
        let sub_div: Vec<bool> = support.iter().map(|&i| div[i]).collect();
        let sub_gens: Vec<QVec> = rows;
        LocalLattice::new(p, sub_div, &sub_gens, None).map(Some)
    }

    /// Generic local structure of `G ∩ V` on a coordinate subspace, in the
    /// coordinates of the support: the Q-span of the ambient vectors meets
    /// `Q^S` in the returned integer vectors. Valid at primes outside
    /// [`Self::generic_degeneration`].
    pub fn generic_class(&self, r: u64, l: u64) -> Result<GenericClass> {
        let support = self
            .coordinate_support()
            .ok_or_else(|| Error::Unsupported("generic structure of a non-coordinate subgroup".into()))?;
        let amb = self.ambient.generic_class(r, l)?;
        let n = self.ambient.rank();
        let fin = amb.finite_vectors();
        // x in span(fin) with zero entries outside S: solve over Q
        let outside: Vec<usize> = (0..n).filter(|i| !support.contains(i) && !amb.divisible[*i]).collect();
        let constraints: Vec<QVec> = outside
            .iter()
            .map(|&i| fin.iter().map(|v| v[i].clone()).collect())
            .collect();
        let combos = linalg::nullspace(&constraints, fin.len());
        let mut vectors: Vec<IntVec> = Vec::new();
        for c in combos {
            let mut x = linalg::zero_vec(n);
            for (k, v) in c.iter().zip(&fin) {
                linalg::add_scaled(&mut x, k, v);
            }
            let sub: QVec = support.iter().map(|&i| x[i].clone()).collect();
            if !linalg::is_zero(&sub) {
                vectors.push(linalg::primitive(&sub));
            }
        }
        let vectors = hnf(&vectors, support.len());
        let sources = vec![None; vectors.len()];
        Ok(GenericClass {
            residue: r,
            modulus: l,
            divisible: support.iter().map(|&i| amb.divisible[i]).collect(),
            vectors,
            sources,
        })
    }

    /// Primes where reduction modulo `p` may change the intersection
    /// computed by [`Self::generic_class`].
    pub fn generic_degeneration(&self, r: u64, l: u64) -> Result<Vec<u64>> {
        let support = self.coordinate_support().unwrap_or_default();
        let amb = self.ambient.generic_class(r, l)?;
        let n = self.ambient.rank();
        let fin: Vec<IntVec> = amb.finite_vectors().iter().map(|v| linalg::primitive(v)).collect();
        let mut out = degeneration_primes(&fin, n)?;
        let outside: Vec<IntVec> = fin
            .iter()
            .map(|v| (0..n).map(|i| if support.contains(&i) { BigInt::zero() } else { v[i].clone() }).collect())
            .collect();
        out.extend(degeneration_primes(&outside, n)?);
        let sub = self.generic_class(r, l)?;
        out.extend(degeneration_primes(&sub.vectors, support.len())?);
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }
}

/// Pure closure `N_* = G ∩ Q N` of the subgroup generated by `gens`.
pub fn purify(g: &GroupPresentation, gens: &[QVec]) -> Result<Subgroup> {
    Subgroup::new(g.clone(), gens)
}

/// Largest `q`-divisible subgroup: `G` meets the span of the coordinates of
/// infinite `q`-height (families only add bounded denominators).
pub fn max_divisible_subgroup(g: &GroupPresentation, q: u64) -> Subgroup {
    Subgroup::coordinate(g.clone(), &g.divisible_coords(q))
}

/// Pure closure of the free lattice `base` inside the truncated completion,
/// where the basis vector `u` stands for `sum_i w_i e_{idx_i}`: adjoins
/// `(u - c_M) / q_M`, which also yields every lower level.
pub fn purify_completion(
    base: &GroupPresentation,
    u: usize,
    mix: Vec<(usize, CompletionElement)>,
) -> Result<GroupPresentation> {
    let (_, w0) = mix.first().ok_or_else(|| Error::Invalid("no completion elements".into()))?;
    let primes = PrimeSetDescriptor::explicit(&w0.base().primes())?;
    let precision = mix.iter().map(|(_, w)| w.precision()).min().unwrap_or(0);
    let seed = w0.seed();
    let mut g = base.clone();
    g.families.push(AdjunctionFamily {
        primes,
        exponent: Exponent::Schedule,
        rule: OffsetRule::CompletionTruncation { mix },
        target: u,
    });
    g.purified = true;
    g.precision = Some(precision);
    g.seed = seed;
    g.validate()?;
    Ok(g)
}

/// Whether `M / E` is torsion for `E` spanned by the basis symbols `e`;
/// with `s_primes`, only multiplications by products of those primes are
/// allowed.
pub fn is_torsion_quotient(m: &GroupPresentation, e: &[usize], s_primes: Option<&[u64]>) -> bool {
    if (0..m.rank()).any(|i| !e.contains(&i)) {
        return false;
    }
    let Some(allowed) = s_primes else {
        return true;
    };
    let ok = |p: &u64| allowed.contains(p);
    for h in &m.heights {
        if h.default_height() != Height::Finite(0) {
            return false;
        }
        if h.exceptions().iter().any(|(p, k)| *k != Height::Finite(0) && !ok(p)) {
            return false;
        }
    }
    m.families.iter().all(|f| match &f.primes.kind {
        PrimeKind::Explicit(ps) => ps.iter().all(ok),
        _ => false,
    })
}
