//! Single-shot Bayesian frequency estimation with a sensing qubit and
//! auxiliary levels.
//!
//! The crate is organised around the life cycle of one estimation run:
//!
//! - [`priors`]: probability densities over the frequency and their
//!   transforms (characteristic function, variance, entropy, Fisher
//!   information).
//! - [`estimation`]: averaged operators for a probe state under an
//!   effective spectrum, the optimal-measurement (Sylvester) solver, the
//!   mean squared error, QFI/SLD machinery and the precision bounds.
//! - [`engineering`]: degeneracy lifting — converting target spectra and
//!   states into timed control schedules on a qubit ⊗ ancilla register,
//!   multi-qubit swap schedules, phase freezing and band capacity.
//! - [`protocols`]: the stroboscopic on-the-fly protocol and the
//!   Gaussian-approximation sequential strategy.
//! - [`optimize`]: derivative-free drivers for optimal probe states,
//!   optimal measurement times, n-level sweeps and the two-qubit study.
//! - [`ioncompile`]: compilation of a protocol to trapped-ion pulse
//!   primitives, verified by direct unitary simulation.

pub mod engineering;
pub mod error;
pub mod estimation;
pub mod ioncompile;
pub mod linalg;
pub mod optimize;
pub mod priors;
pub mod protocols;
pub mod simplex;

pub use error::{Error, Result};
pub use estimation::{AveragedPair, MeasurementSolution, ProbeState, Spectrum};
pub use priors::Prior;

/// Complex amplitude type used throughout.
pub type C64 = num_complex::Complex64;
