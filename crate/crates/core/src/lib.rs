//! Computation with finite skew lattices.
//!
//! An algebra is a pair of `n × n` operation tables over `0..n`. Everything else
//! (Green's relations, cosets, decompositions, identity checks, enumeration and
//! the matrix models) is computed from those tables.

pub mod algebra;
pub mod cosets;
pub mod decompose;
pub mod elemset;
pub mod enumerate;
pub mod greens;
pub mod laws;
pub mod matrix;
pub mod varieties;

pub use algebra::{AlgebraError, AlgebraFile, Op, OpTable, SkewLattice, ValidationReport};
pub use elemset::ElemSet;

/// Largest supported algebra order; every element subset fits in one `u64`.
pub const MAX_ORDER: usize = 64;
