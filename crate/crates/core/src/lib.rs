//! Pseudo-spectral Galerkin simulator for incompressible ferromagnetic
//! magnetohydrodynamics on the periodic box: Navier–Stokes for the velocity
//! `v`, magnetic induction for `B`, and Landau–Lifshitz dynamics for the
//! magnetisation `m`, with diagnostics for the structural invariants.

pub mod calculus;
pub mod checkpoint;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
mod fft;
pub mod fields;
pub mod grid;
pub mod harness;

pub use error::{Error, Result};
pub use fields::{
    random_state, to_physical, to_spectral, Model, PhysicalField, PhysicalParams, PhysicalScalar,
    SpectralField, SpectralScalar, StateVector,
};
pub use grid::Grid;
