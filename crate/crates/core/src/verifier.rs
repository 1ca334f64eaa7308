//! Cellular-cover checks for candidates, and the obstruction engine for
//! covers of rank-one groups with free kernel.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::{big, int_valuation, primes_up_to, Q};
use crate::constructions::{CellularCandidate, FreeKernelSpec, ZRule};
use crate::error::{Error, Result};
use crate::groups::{degeneration_primes, unit_residues, ElementExpr, LocalLattice, Membership, Subgroup};
use crate::homsolver::{
    hom_equals_pi_r, hom_lattice, is_fully_invariant, is_hom, solve_hom, Bounds, HomVerdict, Homomorphism, Provenance,
    SearchMode, Verdict,
};
use crate::lattice::IntVec;
use crate::linalg::{self, QVec};

/// Outcome of comparing `ker(pi) ∩ G` with `K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelCheck {
    pub holds: bool,
    /// Element of `G` in the kernel of `pi` but outside `K` (or of `K`
    /// outside `G`).
    pub witness: Option<QVec>,
    pub primes_checked: usize,
    /// Primes where a rule is undefined, so nothing was compared.
    pub unknown_primes: Vec<u64>,
}

fn clear_coprime_denominators(x: &[Q], p: u64) -> QVec {
    let d = crate::arith::lcm_denominators(x);
    let pp = num_traits::pow(big(p), int_valuation(&d, p) as usize);
    let m = Q::from_integer(d / pp);
    x.iter().map(|v| v * &m).collect()
}

/// Checks `ker(pi|G) = K` exactly at the primes where the two can differ
/// (special, class and degeneration primes) and at every prime up to the
/// bound; elsewhere both are compared through their generic local form.
pub fn kernel_check(cand: &CellularCandidate, bounds: &Bounds) -> Result<KernelCheck> {
    let g = &cand.g;
    let n = g.rank();
    let kcoords = cand.kernel_coords()?;
    let mut support = kcoords.clone();
    support.sort_unstable();
    let fail = |w: QVec| KernelCheck { holds: false, witness: Some(w), primes_checked: 0, unknown_primes: vec![] };

    let ker = linalg::nullspace(&cand.pi.matrix, n);
    let kspan: Vec<QVec> = kcoords.iter().map(|&i| linalg::unit_vec(n, i)).collect();
    if let Some(v) = ker.iter().find(|v| !linalg::in_span(&kspan, v, n)) {
        let w = linalg::from_ints(&linalg::primitive(v));
        return Ok(fail(w));
    }
    let s = Subgroup::coordinate(g.clone(), &kcoords);
    // K-coordinates listed in the order of `support`
    let perm: Vec<usize> = support.iter().map(|c| kcoords.iter().position(|k| k == c).unwrap_or(0)).collect();
    let to_support = |v: &[Q]| -> QVec { perm.iter().map(|&j| v[j].clone()).collect() };
    let embed = |v: &[Q]| -> QVec {
        let mut out = linalg::zero_vec(n);
        for (x, &c) in v.iter().zip(&support) {
            out[c] = x.clone();
        }
        out
    };

    let l = g.class_modulus().lcm(&cand.k.class_modulus());
    let mut primes: BTreeSet<u64> = primes_up_to(bounds.prime_bound).into_iter().collect();
    primes.extend(g.special_primes());
    primes.extend(cand.k.special_primes());
    primes.extend(crate::arith::prime_divisors(&big(l)).unwrap_or_default());
    for r in unit_residues(l) {
        let sg = s.generic_class(r, l)?;
        let kg = cand.k.generic_class(r, l)?;
        let kdiv = to_support_bools(&perm, &kg.divisible);
        let kvecs: Vec<QVec> = kg.finite_vectors().iter().map(|v| to_support(v)).collect();
        let svecs = sg.finite_vectors();
        let m = support.len();
        let same_span = linalg::rank(&svecs, m) == linalg::rank(&kvecs, m)
            && kvecs.iter().all(|v| linalg::in_span(&svecs, v, m));
        if sg.divisible != kdiv || !same_span {
            let p = first_class_prime(r, l, &primes, g, &cand.k);
            primes.insert(p);
        }
        primes.extend(s.generic_degeneration(r, l)?);
        let kint: Vec<IntVec> = kvecs.iter().map(|v| linalg::primitive(v)).collect();
        primes.extend(degeneration_primes(&kint, m)?);
        primes.extend(degeneration_primes(&kg.vectors, kg.divisible.len())?);
    }

    let mut unknown = Vec::new();
    for &p in &primes {
        let Some(sl) = s.local_lattice(p)? else {
            unknown.push(p);
            continue;
        };
        let Some((kdiv, kgens)) = cand.k.local_generators(p) else {
            unknown.push(p);
            continue;
        };
        let kgens: Vec<QVec> = kgens.iter().map(|v| to_support(v)).collect();
        let kl = LocalLattice::new(p, to_support_bools(&perm, &kdiv), &kgens, None)?;
        if let Some(row) = sl.rows.iter().find(|r| !kl.contains(r)) {
            return Ok(fail(embed(&clear_coprime_denominators(row, p))));
        }
        if let Some(row) = kl.rows.iter().find(|r| !sl.contains(r)) {
            return Ok(fail(embed(&clear_coprime_denominators(row, p))));
        }
        if sl.divisible != kl.divisible {
            let c = (0..support.len()).find(|&i| sl.divisible[i] != kl.divisible[i]).unwrap_or(0);
            let mut w = linalg::zero_vec(support.len());
            w[c] = Q::new(BigInt::one(), big(p));
            return Ok(fail(embed(&w)));
        }
    }
    Ok(KernelCheck { holds: true, witness: None, primes_checked: primes.len(), unknown_primes: unknown })
}

fn to_support_bools(perm: &[usize], v: &[bool]) -> Vec<bool> {
    perm.iter().map(|&j| v[j]).collect()
}

/// A prime of the residue class `r mod l` that is not special for either
/// group, so that the generic description applies there.
fn first_class_prime(
    r: u64,
    l: u64,
    avoid: &BTreeSet<u64>,
    g: &crate::groups::GroupPresentation,
    k: &crate::groups::GroupPresentation,
) -> u64 {
    let special: BTreeSet<u64> = g.special_primes().into_iter().chain(k.special_primes()).collect();
    let mut p = 1;
    loop {
        p = crate::arith::next_prime(p);
        if (l == 1 || p % l == r) && !special.contains(&p) && !avoid.contains(&p) {
            return p;
        }
    }
}

/// Integer vector with last coordinate 1 in the lattice spanned by `basis`.
fn combine_to_unit(basis: &[IntVec]) -> Option<IntVec> {
    let last = basis.first()?.len() - 1;
    let mut acc: Option<IntVec> = None;
    for b in basis.iter().filter(|b| !b[last].is_zero()) {
        acc = Some(match acc {
            None => b.clone(),
            Some(a) => {
                let e = a[last].extended_gcd(&b[last]);
                a.iter().zip(b).map(|(x, y)| x * &e.x + y * &e.y).collect()
            }
        });
    }
    let mut a = acc?;
    if a[last].is_negative() {
        a = a.iter().map(|x| -x).collect();
    }
    a[last].is_one().then_some(a)
}

/// A splitting map `s : H -> G` with `pi s = id`: first the section read
/// off the generic offset of rank-one cokernels (`1 -> a + z`), then an
/// integer solution inside the computed homomorphism lattice.
pub fn find_section(cand: &CellularCandidate, bounds: &Bounds) -> Result<Option<Homomorphism>> {
    let (g, h) = (&cand.g, &cand.h);
    let id = Homomorphism::identity(h.rank());
    let is_section = |s: &Homomorphism| -> Result<bool> { Ok(cand.pi.compose(s).matrix == id.matrix && is_hom(h, g, s)?) };
    if h.rank() == 1 {
        let lifts: Vec<usize> = (0..g.rank()).filter(|&j| cand.pi.matrix[0][j].is_one()).collect();
        for &t in &lifts {
            let mut offsets: Vec<QVec> = vec![linalg::zero_vec(g.rank())];
            for f in g.families.iter().filter(|f| f.target == t) {
                if let Some(z) = f.rule.generic_offset() {
                    offsets.push(linalg::from_ints(z));
                }
            }
            for mut z in offsets {
                z[t] = Q::one();
                let s = Homomorphism::new(z.iter().map(|x| vec![x.clone()]).collect(), Provenance::SymbolicDerivation);
                if is_section(&s)? {
                    return Ok(Some(s));
                }
            }
        }
    }
    let lat = match hom_lattice(h, g, bounds, SearchMode::Full) {
        Ok(l) => l,
        Err(Error::Unsupported(_)) | Err(Error::OffsetsNotTotal) => return Ok(None),
        Err(e) => return Err(e),
    };
    let maps = lat.maps();
    if maps.is_empty() {
        return Ok(None);
    }
    let comps: Vec<Homomorphism> = maps.iter().map(|m| cand.pi.compose(m)).collect();
    let m = h.rank();
    let den = comps
        .iter()
        .flat_map(|c| c.matrix.iter().flatten())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let dq = Q::from_integer(den.clone());
    let mut constraints = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let mut row: IntVec = comps.iter().map(|c| (&c.matrix[i][j] * &dq).to_integer()).collect();
            row.push(if i == j { -den.clone() } else { BigInt::zero() });
            constraints.push(row);
        }
    }
    let kernel = linalg::integer_kernel(&constraints, maps.len() + 1);
    let Some(c) = combine_to_unit(&kernel) else {
        return Ok(None);
    };
    let mut s = Homomorphism::zero(g.rank(), m);
    for (k, map) in c.iter().zip(&maps) {
        s = s.sub(&map.scaled(&Q::from_integer(-k.clone())));
    }
    s.provenance = Provenance::SearchWitness;
    Ok(is_section(&s)?.then_some(s))
}

/// Why a candidate fails to be a cellular cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NotCellularWitness {
    /// A section `s : H -> G` of `pi`.
    Split(Homomorphism),
    /// A nonzero homomorphism `G -> K`.
    KernelMap(Homomorphism),
    /// An element of `ker(pi) ∩ G` outside `K`, or of `K` outside `G`.
    KernelMismatch(QVec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Overall {
    Cellular(Bounds),
    NotCellular(NotCellularWitness),
    Inconclusive { bounds: Bounds, reason: String },
}

impl Overall {
    pub fn label(&self) -> &'static str {
        match self {
            Overall::Cellular(_) => "cellular",
            Overall::NotCellular(_) => "not-cellular",
            Overall::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularReport {
    pub hom_gk: HomVerdict,
    pub hom_kh: HomVerdict,
    pub fully_invariant: Verdict,
    pub hom_gh: Verdict,
    pub kernel_identity: KernelCheck,
    pub overall: Overall,
}

fn soft<T>(r: Result<T>, wrap: impl FnOnce(String) -> T) -> Result<T> {
    match r {
        Err(e @ (Error::BudgetExceeded { .. } | Error::Unsupported(_) | Error::OffsetsNotTotal)) => Ok(wrap(e.to_string())),
        other => other,
    }
}

/// Runs every check and assembles the verdict: cellular needs `Hom(G, K)`
/// proven zero, the kernel identity, and either `Hom(K, H) = 0` with `K`
/// fully invariant or `Hom(G, H) = pi R` proven.
pub fn verify_cellular(cand: &CellularCandidate, bounds: &Bounds) -> Result<CellularReport> {
    let (k, g, h) = (&cand.k, &cand.g, &cand.h);
    let kernel_identity = kernel_check(cand, bounds)?;
    let inconclusive = |reason: String| HomVerdict::InconclusiveAtBound { bounds: *bounds, reason };
    let hom_gk = soft(solve_hom(g, k, bounds), inconclusive)?;
    let hom_kh = soft(solve_hom(k, h, bounds), inconclusive)?;
    let fully_invariant = if hom_kh.is_zero_proven() {
        soft(is_fully_invariant(&cand.kernel_subgroup()?, g, bounds), Verdict::Inconclusive)?
    } else {
        Verdict::Inconclusive("not needed: Hom(K, H) is not zero".into())
    };
    let route_a = hom_kh.is_zero_proven() && fully_invariant.is_proven();
    let hom_gh = if route_a {
        Verdict::Inconclusive("not needed: Hom(K, H) = 0 and K is fully invariant".into())
    } else {
        soft(hom_equals_pi_r(g, h, &cand.pi, bounds), Verdict::Inconclusive)?
    };

    let overall = if let Some(w) = &kernel_identity.witness {
        Overall::NotCellular(NotCellularWitness::KernelMismatch(w.clone()))
    } else if let Some(s) = find_section_if_split(cand, &hom_gk, bounds)? {
        Overall::NotCellular(NotCellularWitness::Split(s))
    } else if let Some(m) = nonzero_kernel_map(&hom_gk) {
        Overall::NotCellular(NotCellularWitness::KernelMap(m))
    } else if hom_gk.is_zero_proven()
        && kernel_identity.unknown_primes.is_empty()
        && (route_a || hom_gh.is_proven())
    {
        Overall::Cellular(*bounds)
    } else {
        let reason = if !hom_gk.is_zero_proven() {
            format!("Hom(G, K) is {}", hom_gk.label())
        } else if !kernel_identity.unknown_primes.is_empty() {
            format!("kernel identity unchecked at {:?}", kernel_identity.unknown_primes)
        } else {
            format!("Hom(G, H) = pi R is {}", hom_gh.label())
        };
        Overall::Inconclusive { bounds: *bounds, reason }
    };
    Ok(CellularReport { hom_gk, hom_kh, fully_invariant, hom_gh, kernel_identity, overall })
}

/// Sections only exist when `Hom(G, K)` is nonzero (the projection onto
/// `K` along the section).
fn find_section_if_split(cand: &CellularCandidate, hom_gk: &HomVerdict, bounds: &Bounds) -> Result<Option<Homomorphism>> {
    if hom_gk.is_zero_proven() {
        return Ok(None);
    }
    find_section(cand, bounds)
}

fn nonzero_kernel_map(v: &HomVerdict) -> Option<Homomorphism> {
    match v {
        HomVerdict::Generators(g) => g.maps.iter().find(|m| !m.is_zero()).cloned(),
        _ => None,
    }
}

/// Membership of `x` in `K` read through the kernel coordinates of `G`.
pub fn kernel_member(cand: &CellularCandidate, x: &[Q]) -> Result<Membership> {
    let kcoords = cand.kernel_coords()?;
    if (0..x.len()).any(|i| !kcoords.contains(&i) && !x[i].is_zero()) {
        return Ok(Membership::No);
    }
    let coords: QVec = kcoords.iter().map(|&i| x[i].clone()).collect();
    cand.k.member(&ElementExpr::new(coords))
}

/// Erases each table value divisible by its prime; the presented group is
/// unchanged since `z e_i / p` already lies in `F`.
pub fn normalize_zp(spec: &FreeKernelSpec) -> FreeKernelSpec {
    spec.normalize()
}

/// Symbols of the lift action table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    A,
    E(usize),
    /// `h_a`.
    Ha,
    /// `h_j`.
    H(usize),
}

/// The endomorphism `psi` lifting `a -> r, e_i -> s, e_j -> 0` along
/// `pi`, determined up to the unknown elements `h_a, h_j` of `F`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftShape {
    pub r: i64,
    pub s: i64,
    pub i: usize,
    pub kernel_rank: usize,
    /// `(expression, modulus)` pairs recorded as constraints on the
    /// unknowns; `s h_j^i in qZ` for `j != i` comes from `psi = q psi'`.
    pub constraints: Vec<(String, u64)>,
}

impl LiftShape {
    pub fn new(r: i64, s: i64, i: usize, kernel_rank: usize, q: u64) -> Self {
        let constraints = (0..kernel_rank)
            .filter(|&j| j != i)
            .map(|j| (format!("s*h_{}^{}", j + 1, i + 1), q))
            .collect();
        LiftShape { r, s, i, kernel_rank, constraints }
    }

    /// `a -> r a + s h_a`, `e_j -> r e_j + s h_j`, `e_i -> r e_i + s h_i + s a`.
    pub fn image(&self, x: Sym) -> Vec<(Sym, i64)> {
        match x {
            Sym::A => vec![(Sym::A, self.r), (Sym::Ha, self.s)],
            Sym::E(j) if j == self.i => vec![(Sym::E(j), self.r), (Sym::H(j), self.s), (Sym::A, self.s)],
            Sym::E(j) => vec![(Sym::E(j), self.r), (Sym::H(j), self.s)],
            other => vec![(other, 1)],
        }
    }

    /// The `i`-th coordinate of `psi(e_i) - s (a + z_q)` as `alpha h_i^i +
    /// beta`, read off the action table; the `a`-terms must cancel.
    pub fn component_of_image(&self, z_q: &[i64]) -> Option<(i64, i64)> {
        let mut terms = self.image(Sym::E(self.i));
        terms.push((Sym::A, -self.s));
        terms.extend(z_q.iter().enumerate().map(|(k, &z)| (Sym::E(k), -self.s * z)));
        let coeff = |sym: Sym| terms.iter().filter(|t| t.0 == sym).map(|t| t.1).sum::<i64>();
        if coeff(Sym::A) != 0 {
            return None;
        }
        Some((coeff(Sym::H(self.i)), coeff(Sym::E(self.i))))
    }
}

/// A congruence `alpha * h_i^i + beta in qZ` in the lift argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    pub label: &'static str,
    pub alpha: i64,
    pub beta: i64,
    pub modulus: u64,
    /// Whether the trail claims membership (`true`) or its failure.
    pub holds: bool,
}

impl Congruence {
    fn reduced(&self) -> (i64, i64) {
        let q = self.modulus as i64;
        (self.alpha.rem_euclid(q), self.beta.rem_euclid(q))
    }
}

/// The data `(r, s, i, p, q)` of the lift argument with its congruence
/// trail as stated in the source argument.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftWitness {
    pub r: i64,
    pub s: i64,
    pub i: usize,
    pub p: u64,
    pub q: u64,
    pub z_p: i64,
    pub z_q: i64,
    pub shape: LiftShape,
    pub trail: Vec<Congruence>,
}

/// Result of replaying a congruence trail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailReplay {
    /// Every step is the stated combination of earlier ones and the final
    /// congruence is violated.
    pub arithmetic: bool,
    /// Every step also matches the lift's action table.
    pub derivation: bool,
    pub failing_step: Option<&'static str>,
}

impl LiftWitness {
    fn new(spec: &FreeKernelSpec, i: usize, p: u64, q: u64) -> Self {
        let z = |t: u64| spec.rules[i].value_at(t).unwrap_or(0);
        let (z_p, z_q) = (z(p), z(q));
        let qi = q as i64;
        let s = 1;
        let mut r = (-s * z_q).rem_euclid(qi);
        if r.gcd(&qi) != 1 {
            r += qi;
        }
        let d = z_p - z_q;
        let c = |label, alpha, beta, holds| Congruence { label, alpha, beta, modulus: q, holds };
        let trail = vec![
            c("choice of r and s", 0, r + s * z_q, true),
            c("component difference", s * d, -2 * s * d * z_q, true),
            c("add twice the choice", s * d, 2 * d * r, true),
            c("component of psi(e_i)", s, r + s * z_q, true),
            c("eliminate h_i^i", 0, d * (r - s * z_q), true),
            c("final", 0, 2 * d * r, false),
        ];
        let shape = LiftShape::new(r, s, i, spec.kernel_rank(), q);
        LiftWitness { r, s, i, p, q, z_p, z_q, shape, trail }
    }

    /// Recomputes every step from the earlier ones and from the action
    /// table.
    pub fn replay(&self, spec: &FreeKernelSpec) -> TrailReplay {
        let q = self.q as i64;
        let (r, s, d) = (self.r, self.s, self.z_p - self.z_q);
        let step = |k: usize| self.trail[k].reduced();
        let lin = |x: (i64, i64), k: i64, y: (i64, i64)| ((x.0 + k * y.0).rem_euclid(q), (x.1 + k * y.1).rem_euclid(q));
        let mut failing = None;
        let mut check = |ok: bool, label: &'static str| {
            if !ok && failing.is_none() {
                failing = Some(label);
            }
        };
        let labels: Vec<&'static str> = self.trail.iter().map(|c| c.label).collect();
        check(self.trail.len() == 6, "trail shape");
        if self.trail.len() != 6 {
            return TrailReplay { arithmetic: false, derivation: false, failing_step: failing };
        }
        check(step(0) == (0, 0) && r.gcd(&q) == 1 && s.gcd(&q) == 1, labels[0]);
        check(step(2) == lin(step(1), 2 * d, step(0)), labels[2]);
        check(step(4) == lin(step(2), -d, step(3)), labels[4]);
        check(step(5) == lin(step(4), d, step(0)), labels[5]);
        check(step(5).0 == 0 && step(5).1 != 0, labels[5]);
        let arithmetic = failing.is_none();

        let z_q: Vec<i64> = spec.rules.iter().map(|rule| rule.value_at(self.q).unwrap_or(0)).collect();
        let derived = self.shape.component_of_image(&z_q).map(|(a, b)| (a.rem_euclid(q), b.rem_euclid(q)));
        let mut deriv_fail = None;
        let expected_diff = ((s * d).rem_euclid(q), (-2 * s * d * self.z_q).rem_euclid(q));
        if step(1) != expected_diff {
            deriv_fail = Some(labels[1]);
        } else if derived != Some(step(3)) {
            deriv_fail = Some(labels[3]);
        }
        TrailReplay { arithmetic, derivation: arithmetic && deriv_fail.is_none(), failing_step: failing.or(deriv_fail) }
    }
}

/// Which branch of the case analysis applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ObstructionCase {
    /// Some `z_p^i = 0` while `z_q^i != 0`.
    VanishingCoordinate { i: usize, p: u64, q: u64 },
    /// All coordinates nonvanishing, `z_p^i - z_q^i` not in `qZ`.
    NonconstantCoordinate { i: usize, p: u64, q: u64 },
    /// The offsets agree at every checked prime.
    Constant(Vec<i64>),
    /// Nonconstant, but every difference is divisible at the checked primes.
    Undetermined,
}

/// `s : H -> G`, `1 -> a + z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionWitness {
    pub z: Vec<i64>,
}

/// `f : G -> F`, `a -> x e_1`, `e_k -> y_k e_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelMapWitness {
    pub x: i64,
    pub y: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Conclusion {
    NotCellularSplit,
    NotCellularKernelMap,
    NotCellularCongruence,
    Inconclusive(String),
}

impl Conclusion {
    pub fn label(&self) -> &'static str {
        match self {
            Conclusion::NotCellularSplit => "not-cellular: split",
            Conclusion::NotCellularKernelMap => "not-cellular: map into kernel",
            Conclusion::NotCellularCongruence => "not-cellular: congruence contradiction",
            Conclusion::Inconclusive(_) => "inconclusive",
        }
    }

    pub fn is_not_cellular(&self) -> bool {
        !matches!(self, Conclusion::Inconclusive(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObstructionReport {
    /// Whether normalization changed any offset.
    pub normalized: bool,
    pub case: ObstructionCase,
    pub witness: Option<LiftWitness>,
    pub trail_replay: Option<TrailReplay>,
    pub section: Option<SectionWitness>,
    pub kernel_map: Option<KernelMapWitness>,
    pub conclusion: Conclusion,
}

fn generic_vector(spec: &FreeKernelSpec) -> Option<Vec<i64>> {
    spec.rules.iter().map(ZRule::generic).collect()
}

fn exception_primes(spec: &FreeKernelSpec) -> Vec<u64> {
    let mut t: Vec<u64> = spec.rules.iter().flat_map(ZRule::exceptions).filter(|&p| spec.is_active(p)).collect();
    t.sort_unstable();
    t.dedup();
    t
}

/// `1 -> a + z` is a section iff `z = z_p (mod p)` at every active prime;
/// outside the exceptions this forces `z` to be the generic vector.
pub fn section_replays(spec: &FreeKernelSpec, w: &SectionWitness) -> bool {
    let Some(g) = generic_vector(spec) else { return false };
    w.z == g
        && exception_primes(spec).into_iter().all(|p| {
            let zp = spec.offset_at(p).unwrap_or_default();
            w.z.iter().zip(&zp).all(|(a, b)| (a - b).rem_euclid(p as i64) == 0)
        })
}

/// `f` is a homomorphism iff `x + z_p . y = 0 (mod p)` at every active
/// prime: generically `x + g . y = 0`, and explicitly at the exceptions.
pub fn kernel_map_replays(spec: &FreeKernelSpec, w: &KernelMapWitness) -> bool {
    let Some(g) = generic_vector(spec) else { return false };
    let dot = |z: &[i64]| w.x + z.iter().zip(&w.y).map(|(a, b)| a * b).sum::<i64>();
    w.y.iter().any(|&v| v != 0)
        && dot(&g) == 0
        && exception_primes(spec).into_iter().all(|p| spec.offset_at(p).is_some_and(|zp| dot(&zp).rem_euclid(p as i64) == 0))
}

fn kernel_map(spec: &FreeKernelSpec) -> Option<KernelMapWitness> {
    let g = generic_vector(spec)?;
    let m = exception_primes(spec)
        .into_iter()
        .filter(|&p| spec.rules[0].value_at(p).is_some_and(|z| (z - g[0]).rem_euclid(p as i64) != 0))
        .try_fold(1i64, |acc, p| acc.checked_mul(p as i64))?;
    let mut y = vec![0; spec.kernel_rank()];
    y[0] = m;
    Some(KernelMapWitness { x: g[0].checked_mul(m)?.checked_neg()?, y })
}

/// Case analysis for a candidate with free kernel and cokernel
/// `<1/p : p not excluded>`, with witnesses that replay exactly.
pub fn obstruct_free_kernel(spec: &FreeKernelSpec, prime_bound: u64) -> Result<ObstructionReport> {
    if spec.kernel_rank() == 0 {
        return Err(Error::KernelNotFree);
    }
    let norm = normalize_zp(spec);
    let normalized = norm != *spec;
    let total = spec.rules.iter().all(ZRule::is_total);
    let mut checked: Vec<u64> = exception_primes(&norm);
    if total {
        checked.extend(primes_up_to(prime_bound).into_iter().filter(|&p| spec.is_active(p)));
        checked.sort_unstable();
        checked.dedup();
    }
    let values: Vec<Vec<(u64, i64)>> = (0..norm.kernel_rank())
        .map(|i| checked.iter().filter_map(|&p| Some((p, norm.rules[i].value_at(p)?))).collect())
        .collect();

    let mut case = ObstructionCase::Constant(values.iter().map(|v| v.first().map_or(0, |x| x.1)).collect());
    'search: for (i, vals) in values.iter().enumerate() {
        let zero = vals.iter().find(|x| x.1 == 0);
        let odd_nonzero = vals.iter().find(|x| x.0 != 2 && x.1 != 0);
        if let (Some(&(p, _)), Some(&(q, _))) = (zero, odd_nonzero) {
            case = ObstructionCase::VanishingCoordinate { i, p, q };
            break 'search;
        }
    }
    if matches!(case, ObstructionCase::Constant(_)) {
        'outer: for (i, vals) in values.iter().enumerate() {
            if vals.iter().all(|x| x.1 == vals[0].1) {
                continue;
            }
            for &(q, zq) in vals.iter().filter(|x| x.0 != 2) {
                if let Some(&(p, _)) = vals.iter().find(|x| (x.1 - zq).rem_euclid(q as i64) != 0) {
                    case = ObstructionCase::NonconstantCoordinate { i, p, q };
                    break 'outer;
                }
            }
            case = ObstructionCase::Undetermined;
        }
    }
    let witness = match case {
        ObstructionCase::VanishingCoordinate { i, p, q } | ObstructionCase::NonconstantCoordinate { i, p, q } => {
            Some(LiftWitness::new(&norm, i, p, q))
        }
        _ => None,
    };
    let trail_replay = witness.as_ref().map(|w| w.replay(&norm));

    let section = generic_vector(spec).map(|z| SectionWitness { z }).filter(|w| section_replays(spec, w));
    let kernel_map = if section.is_none() && total { kernel_map(spec).filter(|w| kernel_map_replays(spec, w)) } else { None };
    let conclusion = if section.is_some() {
        Conclusion::NotCellularSplit
    } else if kernel_map.is_some() {
        Conclusion::NotCellularKernelMap
    } else if trail_replay.as_ref().is_some_and(|t| t.derivation) {
        Conclusion::NotCellularCongruence
    } else if !total {
        Conclusion::Inconclusive(
            "offsets are known only on the table; a total rule is forced toward constant offsets".into(),
        )
    } else {
        Conclusion::Inconclusive("no replayable witness within the bounds".into())
    };
    Ok(ObstructionReport { normalized, case, witness, trail_replay, section, kernel_map, conclusion })
}

/// The finite family of free-kernel candidates swept exhaustively: kernel
/// rank 1 with constant extension `c` and table values at up to two
/// primes, and kernel rank 2 with constant extensions and one table value
/// in total. Table values `v` satisfy `|v| <= entry_bound` and are
/// normalized (`v = 0` or `p` does not divide `v`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepSpace {
    pub max_rank: usize,
    pub prime_bound: u64,
    pub entry_bound: i64,
    pub excluded: Vec<u64>,
    singles: Vec<(u64, i64)>,
    pairs: Vec<(u32, u32)>,
}

impl SweepSpace {
    pub fn new(max_rank: usize, prime_bound: u64, entry_bound: i64, excluded: Vec<u64>) -> Result<Self> {
        if !(1..=2).contains(&max_rank) {
            return Err(Error::Invalid("sweeps cover kernel rank 1 or 2".into()));
        }
        if entry_bound < 0 {
            return Err(Error::Invalid("entry bound must be nonnegative".into()));
        }
        let primes: Vec<u64> = primes_up_to(prime_bound).into_iter().filter(|p| !excluded.contains(p)).collect();
        let singles: Vec<(u64, i64)> = primes
            .iter()
            .flat_map(|&p| (-entry_bound..=entry_bound).filter(move |v| v % p as i64 != 0 || *v == 0).map(move |v| (p, v)))
            .collect();
        let mut pairs = Vec::new();
        for a in 0..singles.len() {
            for b in a + 1..singles.len() {
                if singles[a].0 != singles[b].0 {
                    pairs.push((a as u32, b as u32));
                }
            }
        }
        Ok(SweepSpace { max_rank, prime_bound, entry_bound, excluded, singles, pairs })
    }

    fn width(&self) -> usize {
        (2 * self.entry_bound + 1) as usize
    }

    fn rank_one_len(&self) -> usize {
        self.width() * (1 + self.singles.len() + self.pairs.len())
    }

    fn rank_two_len(&self) -> usize {
        if self.max_rank < 2 {
            return 0;
        }
        self.width() * self.width() * (1 + 2 * self.singles.len())
    }

    pub fn len(&self) -> usize {
        self.rank_one_len() + self.rank_two_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn rule(&self, c: i64, entries: &[(u64, i64)]) -> ZRule {
        if entries.is_empty() {
            ZRule::Constant(c)
        } else {
            ZRule::Table { entries: entries.iter().copied().collect(), extension: Some(alloc::boxed::Box::new(ZRule::Constant(c))) }
        }
    }

    /// The `idx`-th candidate in a fixed order.
    pub fn get(&self, idx: usize) -> Option<FreeKernelSpec> {
        let w = self.width();
        let e = self.entry_bound;
        let rules = if idx < self.rank_one_len() {
            let c = (idx % w) as i64 - e;
            let t = idx / w;
            let entries: Vec<(u64, i64)> = if t == 0 {
                vec![]
            } else if t <= self.singles.len() {
                vec![self.singles[t - 1]]
            } else {
                let (a, b) = self.pairs[t - 1 - self.singles.len()];
                vec![self.singles[a as usize], self.singles[b as usize]]
            };
            vec![self.rule(c, &entries)]
        } else {
            let k = idx - self.rank_one_len();
            if k >= self.rank_two_len() {
                return None;
            }
            let c1 = (k % w) as i64 - e;
            let c2 = ((k / w) % w) as i64 - e;
            let t = k / (w * w);
            let (mut t1, mut t2) = (vec![], vec![]);
            if t > 0 {
                let j = t - 1;
                let entry = self.singles[j % self.singles.len()];
                if j < self.singles.len() {
                    t1.push(entry);
                } else {
                    t2.push(entry);
                }
            }
            vec![self.rule(c1, &t1), self.rule(c2, &t2)]
        };
        FreeKernelSpec::new(rules, self.excluded.clone()).ok()
    }
}

/// Classification of one swept candidate, with every witness replayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SweepTally {
    pub candidates: u64,
    pub split: u64,
    pub kernel_map: u64,
    pub congruence: u64,
    pub inconclusive: u64,
    pub cellular: u64,
    /// Reports whose decisive witness failed to replay.
    pub replay_failures: u64,
    /// Lift witnesses whose trail is arithmetically consistent.
    pub trails_arithmetic: u64,
    /// Lift witnesses whose trail also follows from the lift's action table.
    pub trails_derived: u64,
    pub lift_witnesses: u64,
}

impl SweepTally {
    pub fn merge(mut self, o: SweepTally) -> SweepTally {
        self.candidates += o.candidates;
        self.split += o.split;
        self.kernel_map += o.kernel_map;
        self.congruence += o.congruence;
        self.inconclusive += o.inconclusive;
        self.cellular += o.cellular;
        self.replay_failures += o.replay_failures;
        self.trails_arithmetic += o.trails_arithmetic;
        self.trails_derived += o.trails_derived;
        self.lift_witnesses += o.lift_witnesses;
        self
    }
}

pub fn sweep_one(spec: &FreeKernelSpec, prime_bound: u64) -> Result<SweepTally> {
    let rep = obstruct_free_kernel(spec, prime_bound)?;
    let mut t = SweepTally { candidates: 1, ..SweepTally::default() };
    let replayed = match &rep.conclusion {
        Conclusion::NotCellularSplit => {
            t.split = 1;
            rep.section.as_ref().is_some_and(|w| section_replays(spec, w))
        }
        Conclusion::NotCellularKernelMap => {
            t.kernel_map = 1;
            rep.kernel_map.as_ref().is_some_and(|w| kernel_map_replays(spec, w))
        }
        Conclusion::NotCellularCongruence => {
            t.congruence = 1;
            rep.witness.as_ref().is_some_and(|w| w.replay(&normalize_zp(spec)).derivation)
        }
        Conclusion::Inconclusive(_) => {
            t.inconclusive = 1;
            true
        }
    };
    t.replay_failures = u64::from(!replayed);
    if let Some(w) = &rep.witness {
        let r = w.replay(&normalize_zp(spec));
        t.lift_witnesses = 1;
        t.trails_arithmetic = u64::from(r.arithmetic);
        t.trails_derived = u64::from(r.derivation);
    }
    Ok(t)
}

/// Sequential sweep over an index range of the space.
pub fn sweep_range(space: &SweepSpace, range: core::ops::Range<usize>) -> Result<SweepTally> {
    let mut acc = SweepTally::default();
    for idx in range {
        if let Some(spec) = space.get(idx) {
            acc = acc.merge(sweep_one(&spec, space.prime_bound)?);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::qi;
    use alloc::boxed::Box;
    use crate::constructions::{build_corner, build_corrected, build_split, CandidateParams, ConstructionTag};
    use crate::groups::{AdjunctionFamily, Basis, Exponent, GroupPresentation, OffsetRule, Role};
    use crate::rankone::{Height, HeightSequence};
    use crate::valuations::{MultiplicativeSet, PrimeSetDescriptor};

    fn small() -> Bounds {
        Bounds { coeff_bound: 20, prime_bound: 60, ..Bounds::default() }
    }

    #[test]
    fn split_candidate_has_a_section() {
        let c = build_split(3, 50).unwrap();
        let s = find_section(&c, &small()).unwrap().expect("section");
        assert_eq!(s.matrix, vec![vec![qi(-1)], vec![qi(1)]]);
        let r = verify_cellular(&c, &small()).unwrap();
        assert!(matches!(r.overall, Overall::NotCellular(NotCellularWitness::Split(_))), "{:?}", r.overall);
    }

    #[test]
    fn corrected_candidate_is_cellular() {
        let c = build_corrected(3, 100, 3, 1, &[]).unwrap();
        assert_eq!(find_section(&c, &small()).unwrap(), None);
        let r = verify_cellular(&c, &small()).unwrap();
        assert!(r.hom_gk.is_zero_proven() && r.hom_kh.is_zero_proven());
        assert!(r.fully_invariant.is_proven());
        assert!(r.kernel_identity.holds);
        assert_eq!(r.overall, Overall::Cellular(small()));
    }

    fn trivial(extra: Option<u64>) -> CellularCandidate {
        let b = Basis::from_pairs(&[("e", Role::KernelBasis), ("h", Role::CokernelLift)]).unwrap();
        let hh = HeightSequence::new(Height::Finite(1), [(2, Height::Finite(0))]).unwrap();
        let mut families = vec![];
        if let Some(p) = extra {
            let z = vec![BigInt::zero(), BigInt::zero()];
            families.push(AdjunctionFamily {
                primes: PrimeSetDescriptor::explicit(&[p]).unwrap(),
                exponent: Exponent::Power(1),
                rule: OffsetRule::Table { entries: [(p, z)].into(), extension: None },
                target: 0,
            });
        }
        let g = GroupPresentation::new(b, vec![HeightSequence::constant(Height::Finite(0)), hh.clone()], families).unwrap();
        let k = GroupPresentation::free(Basis::from_pairs(&[("e", Role::KernelBasis)]).unwrap());
        let h = GroupPresentation::new(Basis::from_pairs(&[("h", Role::CokernelLift)]).unwrap(), vec![hh], vec![]).unwrap();
        let pi = Homomorphism::new(vec![vec![qi(0), qi(1)]], Provenance::SymbolicDerivation);
        CellularCandidate::new(k, g, h, pi, ConstructionTag::User, CandidateParams::default()).unwrap()
    }

    #[test]
    fn kernel_identity_checks() {
        assert!(kernel_check(&trivial(None), &small()).unwrap().holds);
        // adjoining e/7 enlarges the kernel of pi beyond K
        let bad = trivial(Some(7));
        let kc = kernel_check(&bad, &small()).unwrap();
        assert!(!kc.holds);
        let w = kc.witness.unwrap();
        assert!(bad.g.contains(&w).unwrap());
        assert_eq!(bad.pi.apply(&w), vec![qi(0)]);
        assert_eq!(kernel_member(&bad, &w).unwrap(), Membership::No);
        let base = MultiplicativeSet::powers_of(5, 16).unwrap();
        let corner = build_corner(1, base, 16, 3, 5, 1 << 20).unwrap();
        assert!(kernel_check(&corner, &small()).unwrap().holds);
    }

    fn table(entries: &[(u64, i64)], ext: i64) -> ZRule {
        ZRule::Table { entries: entries.iter().copied().collect(), extension: Some(Box::new(ZRule::Constant(ext))) }
    }

    fn spec1(rule: ZRule) -> FreeKernelSpec {
        FreeKernelSpec::new(vec![rule], vec![2]).unwrap()
    }

    #[test]
    fn vanishing_coordinate_report() {
        let spec = spec1(table(&[(3, 0)], 2));
        let rep = obstruct_free_kernel(&spec, 31).unwrap();
        assert_eq!(rep.case, ObstructionCase::VanishingCoordinate { i: 0, p: 3, q: 5 });
        let w = rep.witness.as_ref().unwrap();
        assert_eq!((w.r, w.s), (3, 1));
        assert_eq!(w.trail.last().unwrap().beta, -12);
        let t = rep.trail_replay.as_ref().unwrap();
        assert!(t.arithmetic);
        assert!(!t.derivation);
        assert_eq!(t.failing_step, Some("component of psi(e_i)"));
        assert_eq!(rep.conclusion, Conclusion::NotCellularKernelMap);
        let km = rep.kernel_map.unwrap();
        assert!(kernel_map_replays(&spec, &km));
        // independent check through the presentation
        let c = crate::constructions::build_free_kernel(&spec).unwrap();
        let f = Homomorphism::new(vec![vec![qi(km.y[0]), qi(km.x)]], Provenance::SearchWitness);
        assert!(is_hom(&c.g, &c.k, &f).unwrap());
    }

    #[test]
    fn explicit_lift_satisfies_the_derived_component() {
        // G = <e, a, a/3, (a + 2e)/p : p > 3>, q = 5, r = 3, s = 1:
        // psi' = psi / 5 with psi'(e) = (a + 2e)/5, psi'(a) = 3(a + 2e)/5
        let spec = spec1(table(&[(3, 0)], 2));
        let c = crate::constructions::build_free_kernel(&spec).unwrap();
        let psi1 = Homomorphism::new(
            vec![vec![Q::new(2.into(), 5.into()), Q::new(6.into(), 5.into())], vec![Q::new(1.into(), 5.into()), Q::new(3.into(), 5.into())]],
            Provenance::SearchWitness,
        );
        assert!(is_hom(&c.g, &c.g, &psi1).unwrap());
        let phi1 = c.pi.compose(&psi1);
        assert_eq!(phi1.matrix, vec![vec![Q::new(1.into(), 5.into()), Q::new(3.into(), 5.into())]]);
        // psi(e) = r e + s h e + s a = 2e + a, so h = -1
        let shape = LiftShape::new(3, 1, 0, 1, 5);
        let (alpha, beta) = shape.component_of_image(&[2]).unwrap();
        assert_eq!((-alpha + beta).rem_euclid(5), 0);
        // the congruence as stated in the trail is violated by this lift
        let w = obstruct_free_kernel(&spec, 31).unwrap().witness.unwrap();
        let stated = &w.trail[3];
        assert_ne!((-stated.alpha + stated.beta).rem_euclid(5), 0);
    }

    #[test]
    fn constant_and_affine_rules_split() {
        let rep = obstruct_free_kernel(&spec1(ZRule::Constant(2)), 31).unwrap();
        assert_eq!(rep.conclusion, Conclusion::NotCellularSplit);
        assert_eq!(rep.section, Some(SectionWitness { z: vec![2] }));
        let c = crate::constructions::build_free_kernel(&spec1(ZRule::Constant(2))).unwrap();
        let s = find_section(&c, &small()).unwrap().unwrap();
        assert_eq!(s.matrix, vec![vec![qi(2)], vec![qi(1)]]);

        let rep = obstruct_free_kernel(&spec1(ZRule::Affine { base: 0, slope: 1 }), 31).unwrap();
        assert!(rep.normalized);
        assert_eq!(rep.case, ObstructionCase::Constant(vec![0]));
        assert_eq!(rep.section, Some(SectionWitness { z: vec![0] }));

        let rep = obstruct_free_kernel(&spec1(ZRule::Affine { base: 1, slope: 1 }), 31).unwrap();
        assert_eq!(rep.case, ObstructionCase::NonconstantCoordinate { i: 0, p: 5, q: 3 });
        assert_eq!(rep.conclusion, Conclusion::NotCellularSplit);
    }

    #[test]
    fn partial_tables_are_inconclusive() {
        let partial = ZRule::Table { entries: [(3, 1), (5, 1)].into(), extension: None };
        let rep = obstruct_free_kernel(&spec1(partial), 31).unwrap();
        assert_eq!(rep.case, ObstructionCase::Constant(vec![1]));
        assert!(matches!(rep.conclusion, Conclusion::Inconclusive(_)));
    }

    #[test]
    fn sweep_space_enumerates_distinct_candidates() {
        let space = SweepSpace::new(2, 7, 2, vec![2]).unwrap();
        // primes 3, 5, 7; values -2..=2 are all normalized except none
        assert_eq!(space.len(), 5 * (1 + 15 + 75) + 25 * 31);
        let all: alloc::vec::Vec<_> = (0..space.len()).map(|i| space.get(i).unwrap()).collect();
        let distinct: alloc::collections::BTreeSet<_> = all.iter().map(|s| alloc::format!("{s:?}")).collect();
        assert_eq!(distinct.len(), all.len());
        assert!(space.get(space.len()).is_none());
        let t = sweep_range(&space, 0..space.len()).unwrap();
        assert_eq!(t.candidates as usize, space.len());
        assert_eq!((t.cellular, t.inconclusive, t.replay_failures), (0, 0, 0));
        assert_eq!(t.split + t.kernel_map, t.candidates);
    }
}
