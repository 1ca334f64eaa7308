//! Exact algebra for cellular covers of torsion-free abelian groups of
//! finite rank.
//!
//! The crate is `no_std` (it needs `alloc`). Groups are presented as a free
//! lattice with rank-one height data plus prime-indexed adjunction families;
//! on top of that sit a homomorphism solver, the explicit cover
//! constructions and a verifier that decides cellularity or produces a
//! refutation witness.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod arith;
pub mod constructions;
pub mod error;
pub mod groups;
pub mod homsolver;
pub mod lattice;
pub mod linalg;
pub mod rankone;
pub mod valuations;
pub mod verifier;

pub use error::{Error, Result};
