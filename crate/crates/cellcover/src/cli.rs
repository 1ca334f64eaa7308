//! Command-line front end. Exit codes: 0 when a verdict was reached, 1 when
//! bounds or budget were too small, 2 on usage or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use cellcover_core::constructions::{
    build_corner, build_corrected, build_free_kernel, build_split, CellularCandidate, FreeKernelSpec, ZRule,
};
use cellcover_core::groups::GroupPresentation;
use cellcover_core::homsolver::{end_ring, solve_hom, Bounds, HomVerdict};
use cellcover_core::rankone::{HeightSequence, RationalGroup};
use cellcover_core::valuations::{MultiplicativeSet, DEFAULT_BUDGET};
use cellcover_core::verifier::{obstruct_free_kernel, verify_cellular, Conclusion, Overall, SweepSpace};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::format::{self, AnyFile, FormatError};
use crate::report;

pub const BUDGET_ENV: &str = "CELLCOVER_BUDGET";

#[derive(Debug, Parser)]
#[command(name = "cellcover", version, about = "Cellular covers of torsion-free abelian groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// Primes checked explicitly (N).
    #[arg(long, default_value_t = 100)]
    pub prime_bound: u64,
    /// Coefficient bound for searches and certificates (B).
    #[arg(long, default_value_t = 50)]
    pub coeff_bound: u64,
    /// Largest prime-power exponent of searched denominators.
    #[arg(long, default_value_t = 3)]
    pub exponent_bound: u32,
    /// Completion level for independence certificates (0: the recorded precision).
    #[arg(long, default_value_t = 0)]
    pub level: usize,
    /// Step budget for enumerations.
    #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

impl BoundArgs {
    pub fn bounds(&self) -> Bounds {
        Bounds {
            coeff_bound: self.coeff_bound,
            prime_bound: self.prime_bound,
            exponent_bound: self.exponent_bound,
            level: self.level,
            budget: self.budget,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a candidate sequence and write it as a candidate file.
    Construct {
        #[command(subcommand)]
        which: Construct,
    },
    /// Decide whether a candidate is a cellular cover.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Homomorphisms between two groups (`file` or `file#k|g|h`).
    Hom {
        from: String,
        to: String,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Endomorphism ring of a group.
    End {
        input: String,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Case analysis for a cover of a rank-one group with free kernel.
    Obstruct {
        #[arg(long)]
        kernel_rank: usize,
        /// Offset rule per kernel coordinate (one rule is used for all).
        #[arg(long = "zrule", required = true)]
        zrules: Vec<String>,
        /// Cokernel, `nonring:exclude=<primes>`.
        #[arg(long = "H", default_value = "nonring:exclude=2")]
        h: String,
        #[arg(long, default_value_t = 31)]
        prime_bound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive sweep over small free-kernel candidates.
    Sweep {
        #[arg(long, default_value_t = 2)]
        max_rank: usize,
        #[arg(long, default_value_t = 31)]
        prime_bound: u64,
        #[arg(long, default_value_t = 10)]
        entry_bound: i64,
        #[arg(long = "H", default_value = "nonring:exclude=2")]
        h: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Type computations for rank-one groups.
    Type {
        #[command(subcommand)]
        which: TypeCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum Construct {
    /// Rank-one kernel `Z[1/q]` with offsets chosen through sigma.
    Corrected {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 100)]
        prime_bound: u64,
        #[arg(long, default_value_t = 3)]
        numerator_bound: u64,
        #[arg(long, default_value_t = 1)]
        exponent_bound: u32,
        /// Primes of infinite height in the cokernel.
        #[arg(long, value_delimiter = ',')]
        divisible: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Offsets `p - 1`: the sequence splits.
    Split {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 50)]
        prime_bound: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free kernel of rank `kappa` with cokernel of rank two.
    Corner {
        #[arg(long)]
        kappa: usize,
        /// Generator of the multiplicative set (powers of this prime).
        #[arg(long, default_value_t = 5)]
        s: u64,
        #[arg(long, default_value_t = 64)]
        precision: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        coeff_bound: u64,
        #[arg(long, env = BUDGET_ENV, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free kernel with offsets given per coordinate.
    FreeKernel {
        #[arg(long)]
        kernel_rank: usize,
        #[arg(long = "zrule", required = true)]
        zrules: Vec<String>,
        #[arg(long = "H", default_value = "nonring:exclude=2")]
        h: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum TypeCmd {
    /// Compare the types of two height sequences.
    Cmp {
        #[arg(long)]
        heights: String,
        #[arg(long)]
        other: String,
    },
    /// Whether the group is a subring of Q.
    Ring {
        #[arg(long)]
        heights: String,
    },
    /// The nucleus of the group.
    Nucleus {
        #[arg(long)]
        heights: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] cellcover_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Outcome of a command: the JSON document and whether a verdict was reached.
pub struct Outcome {
    pub doc: Value,
    pub decided: bool,
    pub out: Option<PathBuf>,
}

/// Parses `constant:<z>`, `affine:<base>,<slope>`, `table:<p>=<z>,...` and
/// `table:<p>=<z>,...;ext=<rule>`.
pub fn parse_zrule(s: &str) -> Result<ZRule, CliError> {
    let bad = || CliError::Usage(format!("bad offset rule `{s}`"));
    let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    match kind {
        "constant" => Ok(ZRule::Constant(int(rest)?)),
        "affine" => {
            let (b, m) = rest.split_once(',').ok_or_else(bad)?;
            Ok(ZRule::Affine { base: int(b)?, slope: int(m)? })
        }
        "table" => {
            let (body, ext) = match rest.split_once(";ext=") {
                Some((b, e)) => (b, Some(Box::new(parse_zrule(e)?))),
                None => (rest, None),
            };
            let mut entries = std::collections::BTreeMap::new();
            for item in body.split(',').filter(|t| !t.trim().is_empty()) {
                let (p, z) = item.split_once('=').ok_or_else(bad)?;
                let p = p.trim().parse::<u64>().map_err(|_| bad())?;
                if !cellcover_core::arith::is_prime(p) {
                    return Err(CliError::Core(cellcover_core::Error::NotPrime(p)));
                }
                entries.insert(p, int(z)?);
            }
            Ok(ZRule::Table { entries, extension: ext })
        }
        _ => Err(bad()),
    }
}

/// Parses `nonring:exclude=<p>,<p>,...` into the excluded primes.
pub fn parse_h(s: &str) -> Result<Vec<u64>, CliError> {
    let rest = s
        .trim()
        .strip_prefix("nonring:exclude=")
        .ok_or_else(|| CliError::Usage(format!("bad cokernel `{s}`, expected nonring:exclude=<primes>")))?;
    rest.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<u64>().map_err(|_| CliError::Usage(format!("bad prime `{t}`"))))
        .collect()
}

pub fn free_kernel_spec(kernel_rank: usize, zrules: &[String], h: &str) -> Result<FreeKernelSpec, CliError> {
    let rules: Vec<ZRule> = zrules.iter().map(|z| parse_zrule(z)).collect::<Result<_, _>>()?;
    let rules = match rules.len() {
        1 => vec![rules[0].clone(); kernel_rank],
        n if n == kernel_rank => rules,
        n => return Err(CliError::Usage(format!("{n} offset rules for kernel rank {kernel_rank}"))),
    };
    Ok(FreeKernelSpec::new(rules, parse_h(h)?)?)
}

fn heights(s: &str) -> Result<RationalGroup, CliError> {
    Ok(RationalGroup::new(s.parse::<HeightSequence>()?))
}

fn load_group(spec: &str) -> Result<GroupPresentation, CliError> {
    let (path, part) = match spec.rsplit_once('#') {
        Some((p, part)) => (p, Some(part)),
        None => (spec, None),
    };
    match (format::read_any(Path::new(path))?, part) {
        (AnyFile::Group(g), None) => Ok(g),
        (AnyFile::Candidate(c), Some("k")) => Ok(c.k),
        (AnyFile::Candidate(c), Some("g") | None) => Ok(c.g),
        (AnyFile::Candidate(c), Some("h")) => Ok(c.h),
        (_, Some(p)) => Err(CliError::Usage(format!("cannot select `{p}` from {path}"))),
    }
}

fn load_candidate(path: &Path) -> Result<CellularCandidate, CliError> {
    match format::read_any(path)? {
        AnyFile::Candidate(c) => Ok(*c),
        AnyFile::Group(_) => Err(CliError::Usage(format!("{} holds a group, not a candidate", path.display()))),
    }
}

fn config_json(bounds: &Bounds, extra: Value) -> Value {
    json!({ "bounds": report::bounds_json(bounds), "parameters": extra })
}

fn hom_doc(kind: &str, v: &HomVerdict, config: Value) -> (Value, bool) {
    let decided = !matches!(v, HomVerdict::InconclusiveAtBound { .. });
    (json!({ "format": report::REPORT_FORMAT, "report": kind, "config": config, "hom": report::hom_verdict_json(v) }), decided)
}

fn candidate_outcome(c: CellularCandidate, out: Option<PathBuf>) -> Outcome {
    Outcome { doc: serde_json::to_value(format::candidate_to_file(&c)).expect("serializable"), decided: true, out }
}

/// Executes a parsed command.
pub fn execute(cmd: Command) -> Result<Outcome, CliError> {
    Ok(match cmd {
        Command::Construct { which } => match which {
            Construct::Corrected { q, prime_bound, numerator_bound, exponent_bound, divisible, out } => {
                candidate_outcome(build_corrected(q, prime_bound, numerator_bound, exponent_bound, &divisible)?, out)
            }
            Construct::Split { q, prime_bound, out } => candidate_outcome(build_split(q, prime_bound)?, out),
            Construct::Corner { kappa, s, precision, seed, coeff_bound, budget, out } => {
                let base = MultiplicativeSet::powers_of(s, precision)?;
                candidate_outcome(build_corner(kappa, base, precision, seed, coeff_bound, budget)?, out)
            }
            Construct::FreeKernel { kernel_rank, zrules, h, out } => {
                candidate_outcome(build_free_kernel(&free_kernel_spec(kernel_rank, &zrules, &h)?)?, out)
            }
        },
        Command::Verify { input, bounds, out } => {
            let c = load_candidate(&input)?;
            let b = bounds.bounds();
            let r = verify_cellular(&c, &b)?;
            let params = serde_json::to_value(format::candidate_to_file(&c).params).expect("serializable");
            let extra = json!({ "input": input.display().to_string(), "construction": c.construction.as_str(), "candidate": params });
            let decided = !matches!(r.overall, Overall::Inconclusive { .. });
            Outcome { doc: report::cellular_json(&r, config_json(&b, extra)), decided, out }
        }
        Command::Hom { from, to, bounds, out } => {
            let (a, b) = (load_group(&from)?, load_group(&to)?);
            let bd = bounds.bounds();
            let v = solve_hom(&a, &b, &bd)?;
            let (doc, decided) = hom_doc("hom", &v, config_json(&bd, json!({ "from": from, "to": to })));
            Outcome { doc, decided, out }
        }
        Command::End { input, bounds, out } => {
            let a = load_group(&input)?;
            let bd = bounds.bounds();
            let v = end_ring(&a, &bd)?;
            let (doc, decided) = hom_doc("end", &v, config_json(&bd, json!({ "input": input })));
            Outcome { doc, decided, out }
        }
        Command::Obstruct { kernel_rank, zrules, h, prime_bound, out } => {
            let spec = free_kernel_spec(kernel_rank, &zrules, &h)?;
            let r = obstruct_free_kernel(&spec, prime_bound)?;
            let config = json!({ "kernel_rank": kernel_rank, "zrules": zrules, "H": h, "prime_bound": prime_bound });
            let decided = !matches!(r.conclusion, Conclusion::Inconclusive(_));
            Outcome { doc: report::obstruction_json(&r, config), decided, out }
        }
        Command::Sweep { max_rank, prime_bound, entry_bound, h, out } => {
            let space = SweepSpace::new(max_rank, prime_bound, entry_bound, parse_h(&h)?)?;
            let tally = crate::sweep::run(&space)?;
            let config = json!({ "max_rank": max_rank, "prime_bound": prime_bound, "entry_bound": entry_bound, "H": h });
            let decided = tally.inconclusive == 0;
            Outcome { doc: report::sweep_json(&tally, config), decided, out }
        }
        Command::Type { which } => {
            let doc = match which {
                TypeCmd::Cmp { heights: a, other: b } => {
                    let (x, y) = (heights(&a)?, heights(&b)?);
                    json!({ "leq": x.type_leq(&y), "geq": y.type_leq(&x), "equivalent": x.baer_equivalent(&y) })
                }
                TypeCmd::Ring { heights: a } => json!(heights(&a)?.is_ring()),
                TypeCmd::Nucleus { heights: a } => json!(heights(&a)?.nucleus().heights().to_string()),
            };
            Outcome { doc, decided: true, out: None }
        }
    })
}

/// Runs the command line; output goes to `--out` or `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(o) => {
            let text = format::to_json(&o.doc);
            let written = match &o.out {
                Some(path) => format::write_text(path, &text).map_err(CliError::from),
                None => stdout.write_all(text.as_bytes()).map_err(CliError::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return 2;
            }
            i32::from(!o.decided)
        }
        Err(CliError::Core(e @ cellcover_core::Error::BudgetExceeded { .. })) => {
            let doc = json!({ "format": report::REPORT_FORMAT, "report": "partial", "error": e.to_string() });
            let _ = stdout.write_all(format::to_json(&doc).as_bytes());
            1
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}
