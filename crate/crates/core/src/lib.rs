//! Discrete transboundary modulus on finite-generation Sierpiński carpets.
//!
//! The crate is organised bottom-up:
//!
//! * [`carpet`] builds the carpets `S_p` and truncated weak tangents with exact
//!   rational geometry, and provides the dihedral / scaling symmetry actions.
//! * [`pathgrid`] discretises a region into a cell grid, describes path
//!   families and answers minimum ρ-length queries.
//! * [`modulus`] computes the modulus by constraint generation over a convex
//!   quadratic program, plus the lemma-level experiments built on top of it.
//! * [`labcli`] holds the command implementations, JSON documents and SVG
//!   rendering used by the `carpetlab` binary.
//!
//! All floating point code is generic over [`Real`] (`f32` or `f64`); carpet
//! geometry is exact and uses [`Rational`].

pub mod carpet;
pub mod error;
pub mod labcli;
pub mod modulus;
pub mod pathgrid;
mod scalar;

pub use error::{Error, Result};
pub use scalar::{ratio_to_real, Real};

/// Exact coordinates. Denominators are powers of `p`.
pub type Rational = num_rational::Ratio<i64>;

pub type MassDistribution = pathgrid::MassDistribution<f64>;
pub type MassDistribution32 = pathgrid::MassDistribution<f32>;
pub type GridDomain = pathgrid::GridDomain<f64>;
pub type GridDomain32 = pathgrid::GridDomain<f32>;
pub type PathResult = pathgrid::PathResult<f64>;
pub type ModulusResult = modulus::ModulusResult<f64>;
pub type ModulusResult32 = modulus::ModulusResult<f32>;
pub type SolverOptions = modulus::SolverOptions<f64>;
