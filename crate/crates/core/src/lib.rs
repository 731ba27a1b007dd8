//! Quantum wavepacket dynamics in asymmetric quartic double-well potentials.
//!
//! The state is always expanded in harmonic-oscillator eigenfunctions. The
//! Hamiltonian is assembled analytically in that basis (it is banded with
//! half-width 4), diagonalized densely, and propagated either by integrating
//! the coefficient ODE directly or by phase-rotating eigen-amplitudes.
//! Observables are evaluated from the coefficient vector with ladder-operator
//! identities.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod observables;
pub mod ode;
pub mod quadrature;
pub mod reference;
pub mod system;

pub use error::{Error, Result};
pub use num_complex::Complex64;
