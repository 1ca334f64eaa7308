//! The explicit candidates: the corrected rank-one cover with a sigma rule,
//! its split variant with offsets `p - 1`, and the completion-backed
//! construction over a free kernel.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::{big, is_prime, prime_divisors, Q};
use crate::error::{Error, Result};
use crate::groups::{
    purify_completion, AdjunctionFamily, Basis, Exponent, GroupPresentation, OffsetRule, Role, SigmaDomain, Subgroup,
};
use crate::homsolver::{Homomorphism, Provenance};
use crate::lattice::IntVec;
use crate::rankone::{Height, HeightSequence};
use crate::valuations::{
    independence_check_monomials, CompletionElement, IndependenceVerdict, Monomial, MultiplicativeSet, PrimeSetDescriptor,
    ResidueRule, SplitClass,
};

/// Injective map `z -> sigma(z)` from a truncation of `Z[1/q] \ {0}` into a
/// prime set, with `z` not in `sigma(z) Z[1/q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaAssignment {
    pub q: u64,
    pub domain: SigmaDomain,
    pub map: Vec<(Q, u64)>,
}

impl SigmaAssignment {
    pub fn get(&self, z: &Q) -> Option<u64> {
        self.map.iter().find(|(w, _)| w == z).map(|&(_, r)| r)
    }
}

/// Domain elements `n / q^e` in lowest terms, ordered by `(|n|, e)` with
/// the positive sign first.
pub fn sigma_domain(q: u64, domain: &SigmaDomain) -> Vec<Q> {
    let mut out = Vec::new();
    let qb = big(q);
    for n in 1..=domain.numerator_bound {
        for e in 0..=domain.exponent_bound {
            if e > 0 && n % q == 0 {
                continue;
            }
            let den = qb.pow(e);
            for sign in [1i64, -1] {
                out.push(Q::new(BigInt::from(n) * sign, den.clone()));
            }
        }
    }
    out
}

/// Greedy assignment: each `z` in domain order gets the smallest unused
/// prime of `pi2` (up to the prime bound) not dividing its numerator.
pub fn sigma_assignment(q: u64, domain: SigmaDomain, pi2: &PrimeSetDescriptor) -> Result<SigmaAssignment> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if pi2.contains(q) {
        return Err(Error::Invalid(format!("{q} must not lie in the second class")));
    }
    let primes = pi2.enumerate(domain.prime_bound);
    let mut used = vec![false; primes.len()];
    let mut map = Vec::new();
    for z in sigma_domain(q, &domain) {
        let slot = (0..primes.len())
            .find(|&i| !used[i] && !(z.numer() % big(primes[i])).is_zero())
            .ok_or(Error::SigmaExhausted { prime_bound: domain.prime_bound })?;
        used[slot] = true;
        map.push((z, primes[slot]));
    }
    Ok(SigmaAssignment { q, domain, map })
}

/// Which builder produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstructionTag {
    Corrected,
    Split,
    Corner,
    FreeKernel,
    User,
}

impl ConstructionTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstructionTag::Corrected => "corrected",
            ConstructionTag::Split => "split",
            ConstructionTag::Corner => "corner",
            ConstructionTag::FreeKernel => "free-kernel",
            ConstructionTag::User => "user",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "corrected" => ConstructionTag::Corrected,
            "split" => ConstructionTag::Split,
            "corner" => ConstructionTag::Corner,
            "free-kernel" => ConstructionTag::FreeKernel,
            "user" => ConstructionTag::User,
            _ => return Err(Error::Invalid(format!("unknown construction `{s}`"))),
        })
    }
}

/// Construction parameters, recorded for reproducibility.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct CandidateParams {
    pub q: Option<u64>,
    pub prime_bound: Option<u64>,
    pub numerator_bound: Option<u64>,
    pub exponent_bound: Option<u32>,
    pub kappa: Option<usize>,
    pub precision: Option<usize>,
    pub seed: Option<u64>,
    pub coeff_bound: Option<u64>,
}

/// A short exact sequence `0 -> K -> G -> H -> 0` to be tested. `K` sits
/// inside `G` through equal basis symbol names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularCandidate {
    pub k: GroupPresentation,
    pub g: GroupPresentation,
    pub h: GroupPresentation,
    pub pi: Homomorphism,
    pub construction: ConstructionTag,
    pub params: CandidateParams,
}

impl CellularCandidate {
    pub fn new(
        k: GroupPresentation,
        g: GroupPresentation,
        h: GroupPresentation,
        pi: Homomorphism,
        construction: ConstructionTag,
        params: CandidateParams,
    ) -> Result<Self> {
        let c = CellularCandidate { k, g, h, pi, construction, params };
        c.validate()?;
        Ok(c)
    }

    /// Positions of `K`'s basis symbols inside `G`'s basis.
    pub fn kernel_coords(&self) -> Result<Vec<usize>> {
        self.k.basis.names().iter().map(|n| self.g.basis.index_of(n)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.pi.rows() != self.h.rank() || self.pi.matrix.iter().any(|r| r.len() != self.g.rank()) {
            return Err(Error::Invalid("pi has the wrong shape".into()));
        }
        for j in self.kernel_coords()? {
            if self.pi.matrix.iter().any(|r| !r[j].is_zero()) {
                return Err(Error::Invalid("pi does not vanish on the kernel".into()));
            }
        }
        Ok(())
    }

    /// The kernel as a subgroup of `G`.
    pub fn kernel_subgroup(&self) -> Result<Subgroup> {
        Ok(Subgroup::coordinate(self.g.clone(), &self.kernel_coords()?))
    }
}

fn ints(xs: &[i64]) -> IntVec {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

/// Heights of `<1/p : p != q>` with infinite height at `divisible`.
fn cokernel_heights(q: u64, divisible: &[u64]) -> Result<HeightSequence> {
    let mut exc = vec![(q, Height::Finite(0))];
    exc.extend(divisible.iter().map(|&p| (p, Height::Inf)));
    HeightSequence::new(Height::Finite(1), exc)
}

fn kernel_group(q: u64) -> Result<GroupPresentation> {
    let b = Basis::from_pairs(&[("e", Role::KernelBasis)])?;
    GroupPresentation::new(b, vec![HeightSequence::new(Height::Finite(0), [(q, Height::Inf)])?], vec![])
}

fn cokernel_group(q: u64, divisible: &[u64]) -> Result<GroupPresentation> {
    let b = Basis::from_pairs(&[("h", Role::CokernelLift)])?;
    GroupPresentation::new(b, vec![cokernel_heights(q, divisible)?], vec![])
}

fn split_classes(q: u64, divisible: &[u64]) -> (PrimeSetDescriptor, PrimeSetDescriptor) {
    let mut ex = vec![q];
    ex.extend(divisible);
    let rule = ResidueRule::standard(q);
    (
        PrimeSetDescriptor::split(rule.clone(), SplitClass::First, &ex),
        PrimeSetDescriptor::split(rule, SplitClass::Second, &ex),
    )
}

/// `G = <K, a, a/p, (a + b)/r : p in P1 \ {q}, r in P2>` with `K = Z[1/q] e`,
/// `b = e`, cokernel `<1/p : p != q>` (optionally with infinite height at
/// the primes in `divisible`, where `a` is made divisible too).
pub fn build_corrected(q: u64, prime_bound: u64, numerator_bound: u64, exponent_bound: u32, divisible: &[u64]) -> Result<CellularCandidate> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if divisible.contains(&q) {
        return Err(Error::Invalid(format!("{q} cannot be divisible in the cokernel")));
    }
    let domain = SigmaDomain { numerator_bound, exponent_bound, prime_bound };
    let (pi1, pi2) = split_classes(q, divisible);
    sigma_assignment(q, domain, &pi2)?;
    let basis = Basis::from_pairs(&[("e", Role::KernelBasis), ("a", Role::CokernelLift)])?;
    let ha = HeightSequence::new(Height::Finite(0), divisible.iter().map(|&p| (p, Height::Inf)))?;
    let k = kernel_group(q)?;
    let families = vec![
        AdjunctionFamily { primes: pi1, exponent: Exponent::Power(1), rule: OffsetRule::Constant(ints(&[0, 0])), target: 1 },
        AdjunctionFamily {
            primes: pi2,
            exponent: Exponent::Power(1),
            rule: OffsetRule::Sigma { q, b: ints(&[1, 0]), domain },
            target: 1,
        },
    ];
    let g = GroupPresentation::new(basis, vec![k.heights[0].clone(), ha], families)?;
    let h = cokernel_group(q, divisible)?;
    let pi = Homomorphism::new(vec![vec![Q::zero(), Q::one()]], Provenance::SymbolicDerivation);
    let params = CandidateParams {
        q: Some(q),
        prime_bound: Some(prime_bound),
        numerator_bound: Some(numerator_bound),
        exponent_bound: Some(exponent_bound),
        ..CandidateParams::default()
    };
    CellularCandidate::new(k, g, h, pi, ConstructionTag::Corrected, params)
}

/// Same classes as [`build_corrected`] but with offsets `b_p = p - 1` on
/// both, i.e. `G = <K, (a + p - 1)/p : p != q>`.
pub fn build_split(q: u64, prime_bound: u64) -> Result<CellularCandidate> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    let (pi1, pi2) = split_classes(q, &[]);
    let basis = Basis::from_pairs(&[("e", Role::KernelBasis), ("a", Role::CokernelLift)])?;
    let rule = OffsetRule::Affine { base: ints(&[-1, 0]), slope: ints(&[1, 0]) };
    let families = [pi1, pi2]
        .into_iter()
        .map(|primes| AdjunctionFamily { primes, exponent: Exponent::Power(1), rule: rule.clone(), target: 1 })
        .collect();
    let k = kernel_group(q)?;
    let g = GroupPresentation::new(basis, vec![k.heights[0].clone(), HeightSequence::constant(Height::Finite(0))], families)?;
    let h = cokernel_group(q, &[])?;
    let pi = Homomorphism::new(vec![vec![Q::zero(), Q::one()]], Provenance::SymbolicDerivation);
    let params = CandidateParams { q: Some(q), prime_bound: Some(prime_bound), ..CandidateParams::default() };
    CellularCandidate::new(k, g, h, pi, ConstructionTag::Split, params)
}

/// Monomials certifying the construction: `1, w_1..w_k, w` for maps into
/// the kernel, and `1, w, w_i, w_i w, w^2` for maps into the cokernel
/// (`w` is the last element).
pub fn corner_monomials(kappa: usize) -> (Vec<Monomial>, Vec<Monomial>) {
    let jw = kappa;
    let mut lin: Vec<Monomial> = vec![Vec::new()];
    lin.extend((0..=kappa).map(|i| vec![i]));
    let mut quad: Vec<Monomial> = vec![Vec::new(), vec![jw]];
    quad.extend((0..kappa).map(|i| vec![i]));
    quad.extend((0..kappa).map(|i| vec![i, jw]));
    quad.push(vec![jw, jw]);
    (lin, quad)
}

/// Free `K = <e_1..e_k>`, `F = <f>`, `u = sum w_i e_i + w f` with seeded
/// completion elements, `G` the pure closure of `<K, F, u>` truncated at
/// `precision`, and `pi` the projection onto the `f`-coordinate with
/// `u -> v = w f`.
pub fn build_corner(kappa: usize, base: MultiplicativeSet, precision: usize, seed: u64, coeff_bound: u64, budget: u64) -> Result<CellularCandidate> {
    if kappa == 0 {
        return Err(Error::Invalid("kernel rank must be positive".into()));
    }
    if precision == 0 {
        return Err(Error::PrecisionTooLow(precision));
    }
    let elems = (0..=kappa as u64)
        .map(|i| CompletionElement::seeded_family_member(base.clone(), precision, seed, i))
        .collect::<Result<Vec<_>>>()?;
    let (lin, quad) = corner_monomials(kappa);
    for monos in [&lin, &quad] {
        if let IndependenceVerdict::RelationWitness(rel) = independence_check_monomials(&elems, monos, coeff_bound, precision, budget)? {
            return Err(Error::IndependenceFailed(format!("relation {:?}; choose another seed", rel.coefficients)));
        }
    }
    let mut symbols: Vec<(String, Role)> = (1..=kappa).map(|i| (format!("e{i}"), Role::KernelBasis)).collect();
    symbols.push(("f".into(), Role::CokernelLift));
    symbols.push(("u".into(), Role::CompletionMix));
    let (f, u) = (kappa, kappa + 1);
    let ambient = GroupPresentation::free(Basis::new(symbols.clone())?);
    let mix: Vec<(usize, CompletionElement)> = (0..kappa).map(|i| (i, elems[i].clone())).chain([(f, elems[kappa].clone())]).collect();
    let mut g = purify_completion(&ambient, u, mix)?;
    g.seed = Some(seed);
    let k = GroupPresentation::free(Basis::new(symbols[..kappa].to_vec())?);
    let hb = Basis::from_pairs(&[("f", Role::CokernelLift), ("v", Role::CompletionMix)])?;
    let mut h = purify_completion(&GroupPresentation::free(hb), 1, vec![(0, elems[kappa].clone())])?;
    h.seed = Some(seed);
    let mut pim = vec![vec![Q::zero(); kappa + 2]; 2];
    pim[0][f] = Q::one();
    pim[1][u] = Q::one();
    let pi = Homomorphism::new(pim, Provenance::SymbolicDerivation);
    let params = CandidateParams {
        kappa: Some(kappa),
        precision: Some(precision),
        seed: Some(seed),
        coeff_bound: Some(coeff_bound),
        ..CandidateParams::default()
    };
    CellularCandidate::new(k, g, h, pi, ConstructionTag::Corner, params)
}

/// Offset rule for one kernel coordinate: `p -> z_p^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ZRule {
    Constant(i64),
    /// `z_p = base + slope * p`.
    Affine { base: i64, slope: i64 },
    /// Values at finitely many primes, `extension` elsewhere (partial when
    /// absent).
    Table { entries: BTreeMap<u64, i64>, extension: Option<Box<ZRule>> },
}

impl ZRule {
    pub fn value_at(&self, p: u64) -> Option<i64> {
        match self {
            ZRule::Constant(c) => Some(*c),
            ZRule::Affine { base, slope } => Some(base + slope * p as i64),
            ZRule::Table { entries, extension } => entries.get(&p).copied().or_else(|| extension.as_ref()?.value_at(p)),
        }
    }

    pub fn is_total(&self) -> bool {
        match self {
            ZRule::Table { extension, .. } => extension.as_ref().is_some_and(|e| e.is_total()),
            _ => true,
        }
    }

    /// Integer congruent to `z_p` modulo `p` at every prime outside
    /// [`Self::exceptions`] (total rules only).
    pub fn generic(&self) -> Option<i64> {
        match self {
            ZRule::Constant(c) => Some(*c),
            ZRule::Affine { base, .. } => Some(*base),
            ZRule::Table { extension, .. } => extension.as_ref()?.generic(),
        }
    }

    /// Primes carrying explicit table values.
    pub fn exceptions(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut cur = self;
        while let ZRule::Table { entries, extension } = cur {
            out.extend(entries.keys());
            match extension {
                Some(e) => cur = e,
                None => break,
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Erases every value divisible by its prime, for primes outside
    /// `excluded`.
    pub fn normalize(&self, excluded: &[u64]) -> ZRule {
        let zero_at = |n: i64| -> BTreeMap<u64, i64> {
            prime_divisors(&BigInt::from(n))
                .unwrap_or_default()
                .into_iter()
                .filter(|p| !excluded.contains(p))
                .map(|p| (p, 0))
                .collect()
        };
        let wrap = |entries: BTreeMap<u64, i64>, ext: ZRule| {
            if entries.is_empty() {
                ext
            } else {
                ZRule::Table { entries, extension: Some(Box::new(ext)) }
            }
        };
        match self {
            ZRule::Constant(0) | ZRule::Affine { base: 0, .. } => ZRule::Constant(0),
            ZRule::Constant(c) => wrap(zero_at(*c), self.clone()),
            ZRule::Affine { base, .. } => wrap(zero_at(*base), self.clone()),
            ZRule::Table { entries, extension } => {
                let ext = extension.as_ref().map(|e| e.normalize(excluded));
                let mut out = match &ext {
                    Some(ZRule::Table { entries, .. }) => entries.clone(),
                    _ => BTreeMap::new(),
                };
                for (&p, &v) in entries {
                    let keep = excluded.contains(&p) || v % p as i64 != 0;
                    out.insert(p, if keep { v } else { 0 });
                }
                let ext = ext.map(|e| match e {
                    ZRule::Table { extension, .. } => extension,
                    other => Some(Box::new(other)),
                });
                ZRule::Table { entries: out, extension: ext.flatten() }
            }
        }
    }
}

/// `G = <F, a, (a + z_p)/p : p not excluded>` over `F = Z^k`, with cokernel
/// `H = <1/p : p not excluded>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeKernelSpec {
    pub rules: Vec<ZRule>,
    pub excluded: Vec<u64>,
}

impl FreeKernelSpec {
    pub fn new(rules: Vec<ZRule>, excluded: Vec<u64>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Invalid("kernel rank must be positive".into()));
        }
        if let Some(&p) = excluded.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::NotPrime(p));
        }
        let mut excluded = excluded;
        excluded.sort_unstable();
        excluded.dedup();
        Ok(FreeKernelSpec { rules, excluded })
    }

    pub fn kernel_rank(&self) -> usize {
        self.rules.len()
    }

    pub fn is_active(&self, p: u64) -> bool {
        !self.excluded.contains(&p)
    }

    /// The offset vector `z_p`, when every coordinate rule is defined at `p`.
    pub fn offset_at(&self, p: u64) -> Option<Vec<i64>> {
        self.rules.iter().map(|r| r.value_at(p)).collect()
    }

    pub fn normalize(&self) -> FreeKernelSpec {
        FreeKernelSpec { rules: self.rules.iter().map(|r| r.normalize(&self.excluded)).collect(), excluded: self.excluded.clone() }
    }

    fn offset_rule(&self) -> Result<OffsetRule> {
        let pad = |v: Vec<i64>| -> IntVec { v.into_iter().chain([0]).map(BigInt::from).collect() };
        let consts: Option<Vec<i64>> = self.rules.iter().map(|r| if let ZRule::Constant(c) = r { Some(*c) } else { None }).collect();
        if let Some(c) = consts {
            return Ok(OffsetRule::Constant(pad(c)));
        }
        let affine: Option<Vec<(i64, i64)>> = self
            .rules
            .iter()
            .map(|r| match r {
                ZRule::Constant(c) => Some((*c, 0)),
                ZRule::Affine { base, slope } => Some((*base, *slope)),
                ZRule::Table { .. } => None,
            })
            .collect();
        if let Some(a) = affine {
            return Ok(OffsetRule::Affine {
                base: pad(a.iter().map(|x| x.0).collect()),
                slope: pad(a.iter().map(|x| x.1).collect()),
            });
        }
        let total = self.rules.iter().filter(|r| r.is_total()).count();
        let mut primes: Vec<u64> = self.rules.iter().flat_map(ZRule::exceptions).filter(|&p| self.is_active(p)).collect();
        primes.sort_unstable();
        primes.dedup();
        let mut entries = BTreeMap::new();
        for p in primes {
            let v = self.offset_at(p).ok_or_else(|| Error::Unsupported(format!("partial tables disagree at {p}")))?;
            entries.insert(p, pad(v));
        }
        let extension = if total == self.rules.len() {
            let ext: Option<Vec<i64>> = self
                .rules
                .iter()
                .map(|r| {
                    let mut cur = r;
                    while let ZRule::Table { extension: Some(e), .. } = cur {
                        cur = e;
                    }
                    if let ZRule::Constant(c) = cur {
                        Some(*c)
                    } else {
                        None
                    }
                })
                .collect();
            Some(pad(ext.ok_or_else(|| Error::Unsupported("tables extended by a non-constant rule".into()))?))
        } else if total == 0 {
            None
        } else {
            return Err(Error::Unsupported("mixing total and partial coordinate rules".into()));
        };
        Ok(OffsetRule::Table { entries, extension })
    }
}

/// The candidate `0 -> F -> G -> H -> 0` of a free-kernel specification.
pub fn build_free_kernel(spec: &FreeKernelSpec) -> Result<CellularCandidate> {
    let kappa = spec.kernel_rank();
    let mut symbols: Vec<(String, Role)> = (1..=kappa).map(|i| (format!("e{i}"), Role::KernelBasis)).collect();
    symbols.push(("a".into(), Role::CokernelLift));
    let family = AdjunctionFamily {
        primes: PrimeSetDescriptor::all_except(&spec.excluded),
        exponent: Exponent::Power(1),
        rule: spec.offset_rule()?,
        target: kappa,
    };
    let heights = vec![HeightSequence::constant(Height::Finite(0)); kappa + 1];
    let g = GroupPresentation::new(Basis::new(symbols.clone())?, heights, vec![family])?;
    let k = GroupPresentation::free(Basis::new(symbols[..kappa].to_vec())?);
    let hb = Basis::from_pairs(&[("h", Role::CokernelLift)])?;
    let hh = HeightSequence::new(Height::Finite(1), spec.excluded.iter().map(|&p| (p, Height::Finite(0))))?;
    let h = GroupPresentation::new(hb, vec![hh], vec![])?;
    let mut row = vec![Q::zero(); kappa + 1];
    row[kappa] = Q::one();
    let pi = Homomorphism::new(vec![row], Provenance::SymbolicDerivation);
    let params = CandidateParams { kappa: Some(kappa), ..CandidateParams::default() };
    CellularCandidate::new(k, g, h, pi, ConstructionTag::FreeKernel, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{q_valuation, qi, qr};
    use crate::groups::{max_divisible_subgroup, ElementExpr, Membership};
    use crate::homsolver::{replay, solve_hom, Bounds, HomVerdict};

    fn pi2(q: u64) -> PrimeSetDescriptor {
        PrimeSetDescriptor::split(ResidueRule::standard(q), SplitClass::Second, &[q])
    }

    #[test]
    fn sigma_examples() {
        let d = SigmaDomain { numerator_bound: 3, exponent_bound: 1, prime_bound: 100 };
        let s = sigma_assignment(3, d, &pi2(3)).unwrap();
        assert_eq!(s.get(&qi(1)), Some(5));
        assert_eq!(s.map.len(), 10);
        for (z, r) in &s.map {
            assert_eq!(q_valuation(z, *r), Some(0));
        }
        let mut images: Vec<u64> = s.map.iter().map(|x| x.1).collect();
        images.sort_unstable();
        images.dedup();
        assert_eq!(images.len(), s.map.len());
        assert!(s.get(&qr(1, 3)).is_some());
        // q = 7: 5 is in the second class, so z = 5 must avoid it
        let d = SigmaDomain { numerator_bound: 5, exponent_bound: 0, prime_bound: 200 };
        let s = sigma_assignment(7, d, &pi2(7)).unwrap();
        assert_ne!(s.get(&qi(5)), Some(5));
        let tiny = SigmaDomain { numerator_bound: 9, exponent_bound: 3, prime_bound: 30 };
        assert_eq!(sigma_assignment(3, tiny, &pi2(3)), Err(Error::SigmaExhausted { prime_bound: 30 }));
    }

    fn small() -> Bounds {
        Bounds { coeff_bound: 20, prime_bound: 60, ..Bounds::default() }
    }

    #[test]
    fn corrected_has_no_maps_to_kernel() {
        let c = build_corrected(3, 100, 3, 1, &[]).unwrap();
        let v = solve_hom(&c.g, &c.k, &small()).unwrap();
        let HomVerdict::ZeroProven(t) = &v else { panic!("{v:?}") };
        assert!(replay(&c.g, &c.k, t, &small()).unwrap());
        let k = c.kernel_subgroup().unwrap();
        let m = max_divisible_subgroup(&c.g, 3);
        assert_eq!(m.span, k.span);
    }

    #[test]
    fn split_has_a_projection() {
        let c = build_split(3, 100).unwrap();
        let b = &c.g.basis;
        for p in [2u64, 5, 7, 11] {
            let x = ElementExpr::from_terms(b, &[("a", qr(1, p as i64)), ("e", qr(p as i64 - 1, p as i64))]).unwrap();
            assert_eq!(c.g.member(&x).unwrap(), Membership::Yes);
        }
        let HomVerdict::Generators(gens) = solve_hom(&c.g, &c.k, &small()).unwrap() else { panic!() };
        assert_eq!(gens.maps.len(), 1);
        assert!(gens.maps[0].apply(&[qi(1), qi(0)]) == vec![qi(1)] || gens.maps[0].apply(&[qi(1), qi(0)]) == vec![qi(-1)]);
    }

    #[test]
    fn corrected_and_split_share_everything_but_offsets() {
        let c = build_corrected(3, 100, 3, 1, &[]).unwrap();
        let s = build_split(3, 100).unwrap();
        assert_eq!((&c.k, &c.h, &c.pi), (&s.k, &s.h, &s.pi));
        assert_eq!(c.g.basis, s.g.basis);
        assert_eq!(c.g.heights, s.g.heights);
        for (x, y) in c.g.families.iter().zip(&s.g.families) {
            assert_eq!((&x.primes, x.target), (&y.primes, y.target));
            assert_ne!(x.rule, y.rule);
        }
    }

    #[test]
    fn corner_shapes() {
        let base = MultiplicativeSet::powers_of(5, 24).unwrap();
        let c = build_corner(2, base, 24, 7, 10, 1 << 20).unwrap();
        assert_eq!((c.k.rank(), c.g.rank(), c.h.rank()), (2, 4, 2));
        assert!(c.g.purified);
        assert_eq!(c.kernel_coords().unwrap(), vec![0, 1]);
        assert!(build_corner(2, MultiplicativeSet::powers_of(5, 4).unwrap(), 0, 7, 10, 1 << 20).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(build_corrected(4, 100, 3, 1, &[]).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(build_corrected(3, 20, 3, 1, &[]), Err(Error::SigmaExhausted { .. })));
        assert!(build_corrected(3, 100, 3, 1, &[3]).is_err());
    }

    #[test]
    fn z_rule_normalization() {
        let ex = [2u64];
        assert_eq!(ZRule::Affine { base: 0, slope: 1 }.normalize(&ex), ZRule::Constant(0));
        let n = ZRule::Constant(6).normalize(&ex);
        assert_eq!((n.value_at(3), n.value_at(2), n.value_at(5)), (Some(0), Some(6), Some(6)));
        let t = ZRule::Table { entries: [(5, 5), (7, 2)].into(), extension: Some(Box::new(ZRule::Constant(1))) };
        let n = t.normalize(&ex);
        assert_eq!((n.value_at(5), n.value_at(7), n.value_at(11)), (Some(0), Some(2), Some(1)));
        assert_eq!(n.normalize(&ex), n);
        // p - 1 is never divisible by p
        let split = ZRule::Affine { base: -1, slope: 1 };
        assert_eq!(split.normalize(&ex), split);
    }

    #[test]
    fn free_kernel_candidates() {
        let spec = FreeKernelSpec::new(vec![ZRule::Constant(2)], vec![2]).unwrap();
        let c = build_free_kernel(&spec).unwrap();
        assert_eq!((c.g.rank(), c.h.rank()), (2, 1));
        let x = ElementExpr::from_terms(&c.g.basis, &[("a", qr(1, 7)), ("e1", qr(2, 7))]).unwrap();
        assert_eq!(c.g.member(&x).unwrap(), Membership::Yes);
        let t = ZRule::Table { entries: [(3, 0)].into(), extension: Some(Box::new(ZRule::Constant(2))) };
        let spec = FreeKernelSpec::new(vec![t, ZRule::Constant(1)], vec![2]).unwrap();
        let c = build_free_kernel(&spec).unwrap();
        let x = ElementExpr::from_terms(&c.g.basis, &[("a", qr(1, 3)), ("e2", qr(1, 3))]).unwrap();
        assert_eq!(c.g.member(&x).unwrap(), Membership::Yes);
        let partial = ZRule::Table { entries: [(3, 1)].into(), extension: None };
        let spec = FreeKernelSpec::new(vec![partial, ZRule::Constant(1)], vec![2]).unwrap();
        assert!(build_free_kernel(&spec).is_err());
    }
}
