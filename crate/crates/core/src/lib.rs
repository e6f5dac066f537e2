//! Exceptional spectrum and polynomial eigenfunctions of the one-dimensional
//! two-channel harmonic vibronic model.
//!
//! The model couples two identical harmonic channels with linear slopes
//! through a constant off-diagonal term. Completing the square in one
//! channel, rescaling to the oscillator length, and stripping a Gaussian
//! gauge factor reduces the problem to three dimensionless numbers (slope
//! difference `F`, shift `b`, coupling `v`). Eliminating one component turns
//! the coupled pair into a single fourth-order differential operator whose
//! hidden sl(2) structure preserves the polynomials of degree at most `n`
//! whenever the level parameter satisfies `E2 = n`. On that subspace part of
//! the spectrum — the exceptional eigenvalues `λ = n + 1/2` — and the
//! corresponding polynomial eigenfunctions become algebraically computable,
//! either by diagonalizing the restricted operator or by solving the root
//! system of the polynomial ansatz.
//!
//! Module map:
//! - [`model`] — dimensionful inputs and the dimensionless reduction,
//! - [`polyop`] — dense polynomials and differential operators,
//! - [`sl2`] — generators, the generic quasi-exactly-solvable operator, the
//!   vibronic fourth-order operator, and its invariant-subspace reduction,
//! - [`bethe`] — the root-system equations for the eigenpolynomials,
//! - [`oracle`] — brute-force diagonalization of the original coupled pair
//!   in an oscillator basis,
//! - [`linalg`] — the in-repo dense eigensolvers backing everything,
//! - [`verify`] — the cross-module consistency suite driven by the CLI.

pub mod bethe;
mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod polyop;
pub mod rng;
pub mod sl2;
pub mod verify;

pub use bethe::{BetheSolution, SolveDiagnostics, SolveOutcome};
pub use error::{Error, Result};
pub use model::{ExceptionalEnergy, LevelParams, ModelParams, PhysicalParams};
pub use oracle::{MatchRecord, OracleConfig, SpectrumReport};
pub use polyop::{DiffOperator, Polynomial};
pub use sl2::{CouplingBranch, QesCoefficients, Sl2Generators, SubspaceProjection};
