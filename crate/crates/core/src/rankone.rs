//! Rank-one torsion-free groups: subgroups of Q containing 1, described by
//! the height of 1 at every prime.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::arith::{is_prime, q_valuation, Q};
use crate::error::Error;
use num_traits::{One, Zero};

/// A p-height: a natural number or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Height {
    Finite(u32),
    Inf,
}

impl Height {
    pub fn is_inf(self) -> bool {
        self == Height::Inf
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Height::Finite(h) => Some(h),
            Height::Inf => None,
        }
    }
}

impl fmt::Display for Height {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Height::Finite(h) => write!(f, "{h}"),
            Height::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Height {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "inf" {
            return Ok(Height::Inf);
        }
        s.parse::<u32>()
            .map(Height::Finite)
            .map_err(|_| Error::Invalid(alloc::format!("bad height `{s}`")))
    }
}

/// Heights given as a default value plus finitely many exceptions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HeightSequence {
    default: Height,
    exceptions: BTreeMap<u64, Height>,
}

impl HeightSequence {
    pub fn constant(default: Height) -> Self {
        HeightSequence { default, exceptions: BTreeMap::new() }
    }

    pub fn new(default: Height, exceptions: impl IntoIterator<Item = (u64, Height)>) -> Result<Self, Error> {
        let mut map = BTreeMap::new();
        for (p, h) in exceptions {
            if !is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if map.insert(p, h).is_some() {
                return Err(Error::Invalid(alloc::format!("prime {p} listed twice")));
            }
        }
        map.retain(|_, h| *h != default);
        Ok(HeightSequence { default, exceptions: map })
    }

    pub fn with(mut self, p: u64, h: Height) -> Self {
        if h == self.default {
            self.exceptions.remove(&p);
        } else {
            self.exceptions.insert(p, h);
        }
        self
    }

    pub fn default_height(&self) -> Height {
        self.default
    }

    pub fn exceptions(&self) -> &BTreeMap<u64, Height> {
        &self.exceptions
    }

    pub fn at(&self, p: u64) -> Height {
        self.exceptions.get(&p).copied().unwrap_or(self.default)
    }

    pub fn special_primes(&self) -> Vec<u64> {
        self.exceptions.keys().copied().collect()
    }

    fn union_keys(&self, other: &Self) -> Vec<u64> {
        let mut keys: Vec<u64> = self.exceptions.keys().chain(other.exceptions.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys
    }

    /// Same type: the sequences differ at finitely many primes, and only
    /// where both values are finite.
    pub fn baer_equivalent(&self, other: &Self) -> bool {
        if self.default != other.default {
            return false;
        }
        self.union_keys(other).into_iter().all(|p| {
            let (a, b) = (self.at(p), other.at(p));
            a == b || (!a.is_inf() && !b.is_inf())
        })
    }

    /// Type order: pointwise `<=` after finitely many finite corrections.
    pub fn type_leq(&self, other: &Self) -> bool {
        if self.default > other.default {
            return false;
        }
        self.union_keys(other).into_iter().all(|p| {
            let (a, b) = (self.at(p), other.at(p));
            a <= b || !a.is_inf()
        })
    }
}

impl fmt::Display for HeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "default={}", self.default)?;
        for (p, h) in &self.exceptions {
            write!(f, ";{p}={h}")?;
        }
        Ok(())
    }
}

/// Parses `default=<h>;<p>=<h>;...`, `inf` standing for infinity.
impl FromStr for HeightSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let mut default = None;
        let mut exceptions = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Invalid(alloc::format!("expected key=value, got `{part}`")))?;
            let h: Height = v.parse()?;
            if k.trim() == "default" {
                default = Some(h);
            } else {
                let p: u64 = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::Invalid(alloc::format!("bad prime `{k}`")))?;
                exceptions.push((p, h));
            }
        }
        let default = default.ok_or_else(|| Error::Invalid(String::from("missing default height")))?;
        HeightSequence::new(default, exceptions)
    }
}

/// A subgroup of Q containing 1, given by the heights of 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalGroup {
    heights: HeightSequence,
}

impl RationalGroup {
    pub fn new(heights: HeightSequence) -> Self {
        RationalGroup { heights }
    }

    /// Z.
    pub fn integers() -> Self {
        Self::new(HeightSequence::constant(Height::Finite(0)))
    }

    /// Z[1/q] for a prime q.
    pub fn localization(q: u64) -> Result<Self, Error> {
        Ok(Self::new(HeightSequence::new(Height::Finite(0), [(q, Height::Inf)])?))
    }

    /// `<1/p : p != q>`: height 1 everywhere except 0 at `q`.
    pub fn reciprocals_except(q: u64) -> Result<Self, Error> {
        Ok(Self::new(HeightSequence::new(Height::Finite(1), [(q, Height::Finite(0))])?))
    }

    pub fn heights(&self) -> &HeightSequence {
        &self.heights
    }

    pub fn height(&self, p: u64) -> Height {
        self.heights.at(p)
    }

    /// Membership of a rational. Denominators are factored; a cofactor that
    /// cannot be factored (a prime factor beyond `u64` after trial division)
    /// is only accepted when the default height is infinite.
    pub fn contains(&self, x: &Q) -> bool {
        if num_traits::Zero::is_zero(x) {
            return true;
        }
        for (&p, h) in &self.heights.exceptions {
            if let Height::Finite(h) = h {
                if q_valuation(x, p).is_some_and(|v| v < -(*h as i64)) {
                    return false;
                }
            }
        }
        let mut cofactor = x.denom().clone();
        for &p in self.heights.exceptions.keys() {
            let bp = crate::arith::big(p);
            while (&cofactor % &bp).is_zero() {
                cofactor /= &bp;
            }
        }
        match self.heights.default {
            Height::Inf => true,
            Height::Finite(0) => cofactor.is_one(),
            Height::Finite(h) => match crate::arith::prime_divisors(&cofactor) {
                Some(ps) => ps
                    .into_iter()
                    .all(|p| crate::arith::int_valuation(&cofactor, p) <= h),
                None => false,
            },
        }
    }

    /// Closed under multiplication: every height is 0 or infinite.
    pub fn is_ring(&self) -> bool {
        let ok = |h: &Height| matches!(h, Height::Finite(0) | Height::Inf);
        ok(&self.heights.default) && self.heights.exceptions.values().all(ok)
    }

    /// Largest unital subring of Q over which the group is a module.
    pub fn nucleus(&self) -> Self {
        let f = |h: Height| if h.is_inf() { Height::Inf } else { Height::Finite(0) };
        let default = f(self.heights.default);
        let exc = self.heights.exceptions.iter().map(|(&p, &h)| (p, f(h)));
        Self::new(HeightSequence::new(default, exc).expect("keys are primes"))
    }

    pub fn type_leq(&self, other: &Self) -> bool {
        self.heights.type_leq(&other.heights)
    }

    pub fn baer_equivalent(&self, other: &Self) -> bool {
        self.heights.baer_equivalent(&other.heights)
    }
}
