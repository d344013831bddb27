//! Photon generation from vacuum in a cavity whose frequency is modulated at
//! twice its resonance, filled with a Kerr medium.
//!
//! The crate has two halves that are meant to be checked against each other:
//!
//! * [`analytic`] holds the closed forms: the su(1,1) Wei–Norman
//!   coefficients, the Heisenberg-picture number operator, the three-regime
//!   vacuum photon number, the factorized short-time propagator, Kerr
//!   evolution of coherent states and the displacement diagonalization.
//! * [`propagator`] integrates the Schrödinger equation in a truncated Fock
//!   basis for any of the Hamiltonians built in [`model`], integrates the
//!   Wei–Norman ODE system, and steps the split su(1,1) product.
//!
//! [`fock`] provides the state and operator types used by both, and
//! [`signal`] a few post-processing helpers (moving averages, single-bin
//! Fourier amplitudes) for the comparison of sampled curves.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod model;
pub mod propagator;
pub mod signal;

pub use error::{Error, Result};
pub use fock::{DenseOperator, FockVector};
pub use model::{ChiMode, Hamiltonian, ModelParams};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
