//! Vector-valued reproducing kernel Hilbert spaces generated by an
//! operator-valued entire function `F`, evaluated on a finite truncation
//! of a separable Hilbert space.
//!
//! The crate covers:
//! - the space `H_F = { F(.)u }` with its quotient norm ([`rkhs`]),
//! - the three concrete kernel families and a matrix-polynomial escape hatch
//!   ([`kernels`]),
//! - Kramer, quasi Lagrange-type and resolvent Lagrange reconstruction
//!   ([`sampling`]),
//! - generalized backward shifts and the invariance test `R_b H_b ⊆ H`
//!   ([`shift`]),
//! - de Branges kernels and the space characterization battery
//!   ([`debranges`]).
//!
//! Everything is dense, double precision and immutable after construction.

pub mod acceptance;
pub mod cstep;
pub mod debranges;
pub mod entire;
mod error;
pub mod grid;
pub mod harness;
pub mod hilbert;
pub mod kernels;
pub mod rkhs;
pub mod sampling;
pub mod scenario;
pub mod shift;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use hilbert::{HilbertVector, LinearOperator, Subspace};

/// Seeded generator used for every randomized vector in the crate.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds the crate-wide seeded generator.
pub fn seeded_rng(seed: u64) -> SeededRng {
    use rand::SeedableRng;
    SeededRng::seed_from_u64(seed)
}
