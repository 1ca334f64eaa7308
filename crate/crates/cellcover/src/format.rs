//! JSON group and candidate files. Rationals are `"num/den"` strings,
//! integers are decimal strings and infinite heights are `"inf"`.

use std::collections::BTreeMap;
use std::path::Path;

use cellcover_core::arith::Q;
use cellcover_core::constructions::{CandidateParams, CellularCandidate, ConstructionTag};
use cellcover_core::groups::{AdjunctionFamily, Basis, Exponent, GroupPresentation, OffsetRule, Role, SigmaDomain};
use cellcover_core::homsolver::{Homomorphism, Provenance};
use cellcover_core::lattice::IntVec;
use cellcover_core::rankone::{Height, HeightSequence};
use cellcover_core::valuations::{
    CompletionElement, MultiplicativeSet, PrimeKind, PrimeSetDescriptor, ResidueRule, SplitClass,
};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

pub const GROUP_FORMAT: &str = "cellcover-group/1";
pub const CANDIDATE_FORMAT: &str = "cellcover-candidate/1";

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Json { path: String, line: usize, column: usize, message: String },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Core(#[from] cellcover_core::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, FormatError>;

fn field(name: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field { field: name.into(), message: message.into() }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolFile {
    pub name: String,
    pub role: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightsFile {
    pub default: String,
    #[serde(default)]
    pub exceptions: BTreeMap<u64, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PrimesFile {
    All {
        #[serde(default)]
        excluded: Vec<u64>,
    },
    Explicit {
        primes: Vec<u64>,
    },
    Split {
        pivot: u64,
        modulus: u64,
        second_residues: Vec<u64>,
        class: String,
        #[serde(default)]
        excluded: Vec<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentFile {
    Power(u32),
    Named(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixFile {
    pub coordinate: String,
    pub base: Vec<u64>,
    pub digits: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RuleFile {
    Constant {
        z: Vec<String>,
    },
    Table {
        /// Keyed by the prime in decimal; JSON object keys are strings.
        entries: BTreeMap<String, Vec<String>>,
        #[serde(default)]
        extension: Option<Vec<String>>,
    },
    Affine {
        base: Vec<String>,
        slope: Vec<String>,
    },
    Sigma {
        q: u64,
        b: Vec<String>,
        numerator_bound: u64,
        exponent_bound: u32,
        prime_bound: u64,
    },
    Completion {
        mix: Vec<MixFile>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyFile {
    pub primes: PrimesFile,
    pub exponent: ExponentFile,
    pub target: String,
    pub rule: RuleFile,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub format: String,
    pub basis: Vec<SymbolFile>,
    pub heights: Vec<HeightsFile>,
    #[serde(default)]
    pub families: Vec<FamilyFile>,
    #[serde(default)]
    pub purified: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_bound: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateFile {
    pub format: String,
    pub construction: String,
    pub params: ParamsFile,
    pub k: GroupFile,
    pub g: GroupFile,
    pub h: GroupFile,
    pub pi: Vec<Vec<String>>,
}

pub fn rational_to_string(x: &Q) -> String {
    x.to_string()
}

pub fn parse_rational(s: &str, name: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|_| field(name, format!("`{s}` is not a rational `num/den`")))
}

fn parse_int(s: &str, name: &str) -> Result<BigInt> {
    s.trim().parse::<BigInt>().map_err(|_| field(name, format!("`{s}` is not an integer")))
}

fn ints_to_strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn parse_ints(v: &[String], name: &str) -> Result<IntVec> {
    v.iter().map(|s| parse_int(s, name)).collect()
}

pub fn height_to_string(h: Height) -> String {
    match h {
        Height::Inf => "inf".into(),
        Height::Finite(k) => k.to_string(),
    }
}

pub fn parse_height(s: &str, name: &str) -> Result<Height> {
    match s.trim() {
        "inf" => Ok(Height::Inf),
        t => t.parse::<u32>().map(Height::Finite).map_err(|_| field(name, format!("`{s}` is not a height"))),
    }
}

pub fn heights_to_file(h: &HeightSequence) -> HeightsFile {
    HeightsFile {
        default: height_to_string(h.default_height()),
        exceptions: h.exceptions().iter().map(|(&p, &k)| (p, height_to_string(k))).collect(),
    }
}

pub fn heights_from_file(f: &HeightsFile, name: &str) -> Result<HeightSequence> {
    let default = parse_height(&f.default, name)?;
    let exc = f
        .exceptions
        .iter()
        .map(|(&p, k)| Ok((p, parse_height(k, name)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(HeightSequence::new(default, exc)?)
}

fn class_name(c: SplitClass) -> &'static str {
    match c {
        SplitClass::First => "first",
        SplitClass::Second => "second",
    }
}

fn primes_to_file(d: &PrimeSetDescriptor) -> PrimesFile {
    match &d.kind {
        PrimeKind::All => PrimesFile::All { excluded: d.excluded.clone() },
        PrimeKind::Explicit(ps) => PrimesFile::Explicit { primes: ps.clone() },
        PrimeKind::ResidueSplit { rule, class } => PrimesFile::Split {
            pivot: rule.pivot,
            modulus: rule.modulus,
            second_residues: rule.second_residues.clone(),
            class: class_name(*class).into(),
            excluded: d.excluded.clone(),
        },
    }
}

fn primes_from_file(f: &PrimesFile, name: &str) -> Result<PrimeSetDescriptor> {
    Ok(match f {
        PrimesFile::All { excluded } => PrimeSetDescriptor::all_except(excluded),
        PrimesFile::Explicit { primes } => PrimeSetDescriptor::explicit(primes)?,
        PrimesFile::Split { pivot, modulus, second_residues, class, excluded } => {
            let class = match class.as_str() {
                "first" => SplitClass::First,
                "second" => SplitClass::Second,
                other => return Err(field(name, format!("unknown class `{other}`"))),
            };
            let rule = ResidueRule { pivot: *pivot, modulus: *modulus, second_residues: second_residues.clone() };
            PrimeSetDescriptor::split(rule, class, excluded)
        }
    })
}

fn rule_to_file(r: &OffsetRule, basis: &Basis) -> RuleFile {
    match r {
        OffsetRule::Constant(z) => RuleFile::Constant { z: ints_to_strings(z) },
        OffsetRule::Table { entries, extension } => RuleFile::Table {
            entries: entries.iter().map(|(p, v)| (p.to_string(), ints_to_strings(v))).collect(),
            extension: extension.as_ref().map(|v| ints_to_strings(v)),
        },
        OffsetRule::Affine { base, slope } => RuleFile::Affine { base: ints_to_strings(base), slope: ints_to_strings(slope) },
        OffsetRule::Sigma { q, b, domain } => RuleFile::Sigma {
            q: *q,
            b: ints_to_strings(b),
            numerator_bound: domain.numerator_bound,
            exponent_bound: domain.exponent_bound,
            prime_bound: domain.prime_bound,
        },
        OffsetRule::CompletionTruncation { mix } => RuleFile::Completion {
            mix: mix
                .iter()
                .map(|(i, w)| MixFile {
                    coordinate: basis.names()[*i].clone(),
                    base: w.base().generators().to_vec(),
                    digits: w.digits().to_vec(),
                    seed: w.seed(),
                })
                .collect(),
        },
    }
}

fn rule_from_file(f: &RuleFile, basis: &Basis, name: &str) -> Result<OffsetRule> {
    Ok(match f {
        RuleFile::Constant { z } => OffsetRule::Constant(parse_ints(z, name)?),
        RuleFile::Table { entries, extension } => OffsetRule::Table {
            entries: entries
                .iter()
                .map(|(p, v)| {
                    let p = p.parse::<u64>().map_err(|_| field(name, format!("table key `{p}` is not a prime")))?;
                    Ok((p, parse_ints(v, name)?))
                })
                .collect::<Result<_>>()?,
            extension: extension.as_ref().map(|v| parse_ints(v, name)).transpose()?,
        },
        RuleFile::Affine { base, slope } => OffsetRule::Affine { base: parse_ints(base, name)?, slope: parse_ints(slope, name)? },
        RuleFile::Sigma { q, b, numerator_bound, exponent_bound, prime_bound } => OffsetRule::Sigma {
            q: *q,
            b: parse_ints(b, name)?,
            domain: SigmaDomain {
                numerator_bound: *numerator_bound,
                exponent_bound: *exponent_bound,
                prime_bound: *prime_bound,
            },
        },
        RuleFile::Completion { mix } => OffsetRule::CompletionTruncation {
            mix: mix
                .iter()
                .map(|m| {
                    let idx = basis.index_of(&m.coordinate)?;
                    let base = MultiplicativeSet::new(m.base.clone())?;
                    Ok((idx, CompletionElement::from_digits(base, m.digits.clone(), m.seed)?))
                })
                .collect::<Result<_>>()?,
        },
    })
}

pub fn group_to_file(g: &GroupPresentation) -> GroupFile {
    GroupFile {
        format: GROUP_FORMAT.into(),
        basis: g
            .basis
            .names()
            .iter()
            .zip(g.basis.roles())
            .map(|(n, r)| SymbolFile { name: n.clone(), role: r.as_str().into() })
            .collect(),
        heights: g.heights.iter().map(heights_to_file).collect(),
        families: g
            .families
            .iter()
            .map(|f| FamilyFile {
                primes: primes_to_file(&f.primes),
                exponent: match f.exponent {
                    Exponent::Power(k) => ExponentFile::Power(k),
                    Exponent::Schedule => ExponentFile::Named("schedule".into()),
                },
                target: g.basis.names()[f.target].clone(),
                rule: rule_to_file(&f.rule, &g.basis),
            })
            .collect(),
        purified: g.purified,
        precision: g.precision,
        seed: g.seed,
    }
}

pub fn group_from_file(f: &GroupFile) -> Result<GroupPresentation> {
    if f.format != GROUP_FORMAT {
        return Err(field("format", format!("expected `{GROUP_FORMAT}`, found `{}`", f.format)));
    }
    let symbols = f
        .basis
        .iter()
        .map(|s| Ok((s.name.clone(), Role::parse(&s.role)?)))
        .collect::<Result<Vec<_>>>()?;
    let basis = Basis::new(symbols)?;
    let heights = f
        .heights
        .iter()
        .enumerate()
        .map(|(i, h)| heights_from_file(h, &format!("heights[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let families = f
        .families
        .iter()
        .enumerate()
        .map(|(i, fam)| {
            let name = format!("families[{i}]");
            let exponent = match &fam.exponent {
                ExponentFile::Power(k) => Exponent::Power(*k),
                ExponentFile::Named(s) if s == "schedule" => Exponent::Schedule,
                ExponentFile::Named(s) => return Err(field(&name, format!("unknown exponent `{s}`"))),
            };
            Ok(AdjunctionFamily {
                primes: primes_from_file(&fam.primes, &name)?,
                exponent,
                rule: rule_from_file(&fam.rule, &basis, &name)?,
                target: basis.index_of(&fam.target)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = GroupPresentation::new(basis, heights, families)?;
    g.purified = f.purified;
    g.precision = f.precision;
    g.seed = f.seed;
    Ok(g)
}

pub fn matrix_to_strings(m: &Homomorphism) -> Vec<Vec<String>> {
    m.matrix.iter().map(|r| r.iter().map(rational_to_string).collect()).collect()
}

pub fn matrix_from_strings(rows: &[Vec<String>], name: &str) -> Result<Homomorphism> {
    let m = rows
        .iter()
        .map(|r| r.iter().map(|s| parse_rational(s, name)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(Homomorphism::new(m, Provenance::SymbolicDerivation))
}

pub fn candidate_to_file(c: &CellularCandidate) -> CandidateFile {
    let p = &c.params;
    CandidateFile {
        format: CANDIDATE_FORMAT.into(),
        construction: c.construction.as_str().into(),
        params: ParamsFile {
            q: p.q,
            prime_bound: p.prime_bound,
            numerator_bound: p.numerator_bound,
            exponent_bound: p.exponent_bound,
            kappa: p.kappa,
            precision: p.precision,
            seed: p.seed,
            coeff_bound: p.coeff_bound,
        },
        k: group_to_file(&c.k),
        g: group_to_file(&c.g),
        h: group_to_file(&c.h),
        pi: matrix_to_strings(&c.pi),
    }
}

pub fn candidate_from_file(f: &CandidateFile) -> Result<CellularCandidate> {
    if f.format != CANDIDATE_FORMAT {
        return Err(field("format", format!("expected `{CANDIDATE_FORMAT}`, found `{}`", f.format)));
    }
    let p = &f.params;
    let params = CandidateParams {
        q: p.q,
        prime_bound: p.prime_bound,
        numerator_bound: p.numerator_bound,
        exponent_bound: p.exponent_bound,
        kappa: p.kappa,
        precision: p.precision,
        seed: p.seed,
        coeff_bound: p.coeff_bound,
    };
    let k = group_from_file(&f.k).map_err(|e| prefix("k", e))?;
    let g = group_from_file(&f.g).map_err(|e| prefix("g", e))?;
    let h = group_from_file(&f.h).map_err(|e| prefix("h", e))?;
    let pi = matrix_from_strings(&f.pi, "pi")?;
    Ok(CellularCandidate::new(k, g, h, pi, ConstructionTag::parse(&f.construction)?, params)?)
}

fn prefix(name: &str, e: FormatError) -> FormatError {
    match e {
        FormatError::Field { field: f, message } => FormatError::Field { field: format!("{name}.{f}"), message },
        FormatError::Core(c) => FormatError::Field { field: name.into(), message: c.to_string() },
        other => other,
    }
}

/// Pretty JSON with a trailing newline; key order is fixed by the types.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str, path: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FormatError::Json {
        path: path.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| FormatError::Io { path: path.display().to_string(), source })
}

/// A file holding either a candidate bundle or a single group.
pub enum AnyFile {
    Candidate(Box<CellularCandidate>),
    Group(GroupPresentation),
}

pub fn read_any(path: &Path) -> Result<AnyFile> {
    let text = read_text(path)?;
    let name = path.display().to_string();
    let value: serde_json::Value = from_json(&text, &name)?;
    match value.get("format").and_then(|v| v.as_str()) {
        Some(CANDIDATE_FORMAT) => Ok(AnyFile::Candidate(Box::new(candidate_from_file(&from_json(&text, &name)?)?))),
        Some(GROUP_FORMAT) => Ok(AnyFile::Group(group_from_file(&from_json(&text, &name)?)?)),
        other => Err(field("format", format!("unknown file format {other:?}"))),
    }
}
