//! Parallel sweep with a deterministic merge order.

use cellcover_core::verifier::{sweep_range, SweepSpace, SweepTally};
use rayon::prelude::*;

const CHUNK: usize = 4096;

pub fn run(space: &SweepSpace) -> cellcover_core::Result<SweepTally> {
    let n = space.len();
    let chunks: Vec<_> = (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect();
    let parts: Vec<_> = chunks.into_par_iter().map(|r| sweep_range(space, r)).collect();
    parts.into_iter().try_fold(SweepTally::default(), |acc, t| Ok(acc.merge(t?)))
}
