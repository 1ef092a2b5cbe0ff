//! Stationary spectra of nonlinear non-Hermitian lattices.
//!
//! Two open chains are covered, both with unit right hopping and left hopping `γ < 1`:
//! the nonreciprocal discrete nonlinear Schrödinger (DNLS) lattice and a non-Hermitian
//! Ablowitz–Ladik (AL) lattice. Stationary profiles are built by shooting from the left
//! edge in multiprecision arithmetic, because both recurrences amplify roundoff
//! exponentially with the lattice length.
//!
//! - [`numerics`]: precision contexts, complex amplitudes, the recurrence engine
//! - [`models`]: step maps, periodic dispersions, closed-form two-site solutions
//! - [`solver`]: open-boundary root finding, fractal scans, small-lattice solution counts
//! - [`bands`]: continuum-band formulas, edge probes, gaps, AL exceptional point
//! - [`stability`]: perturbation growth along the lattice
//! - [`cli`]: the `nhse` command-line front end

// `!(x > 0.0)` is used on purpose to reject NaN alongside non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bands;
pub mod cli;
pub mod error;
pub mod models;
pub mod numerics;
pub mod solver;
pub mod stability;

pub use error::{Error, Result};
pub use models::{ModelKind, ModelParams, Nonlinearity};
pub use numerics::{ComplexAmp, LatticeState, Precision, Verdict};
