//! Qubit ⊗ harmonic-oscillator simulation of spin-mediated nonlinear bosonic
//! interactions: Hamiltonians, Lindblad dynamics, and phase-space tomography.
//!
//! Units: ħ = 1, angular frequencies in rad/s, times in seconds.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod optimize;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub mod cli;
pub mod dynamics;
pub mod experiments;
pub mod model;
pub mod tomography;
