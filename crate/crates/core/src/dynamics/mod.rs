//! Right-hand sides of the projected system, Galerkin truncation, and time
//! integration.

mod rhs;
mod simulate;
mod stepper;

pub use rhs::{divergence_drift, rhs, rhs_magnetic, rhs_magnetisation, rhs_velocity, Rhs};
pub use simulate::{
    galerkin_initial_data, simulate, simulate_with, BlowUp, SimulateOptions, Simulation, Trajectory,
};
pub use stepper::{default_dt, stability_limit, step, DissipationCheck, Scheme, TimeStepper};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Galerkin truncation: keep the modes with `|k|∞ <= k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    k_max: f64,
}

impl Truncation {
    /// Everything the dealias mask keeps.
    pub fn full(grid: &Grid) -> Self {
        Self {
            k_max: grid.dealias_cutoff(),
        }
    }

    pub fn new(grid: &Grid, k_max: f64) -> Result<Self> {
        if !(k_max.is_finite() && k_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation k_max must be positive, got {k_max}"
            )));
        }
        if k_max > grid.dealias_cutoff() * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "truncation k_max = {k_max} exceeds the dealias cutoff {:.6} of the {}³ grid",
                grid.dealias_cutoff(),
                grid.n()
            )));
        }
        Ok(Self { k_max })
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    /// Retained modes; always a subset of the dealias mask.
    pub fn mask(&self, grid: &Grid) -> Vec<bool> {
        let dealias = grid.dealias_mask();
        grid.mask_for(self.k_max)
            .into_iter()
            .zip(dealias)
            .map(|(a, b)| a && b)
            .collect()
    }

    /// Largest `|k|²` among retained modes.
    pub fn max_ksq(&self, grid: &Grid) -> f64 {
        self.mask(grid)
            .iter()
            .enumerate()
            .filter(|(_, &keep)| keep)
            .map(|(idx, _)| grid.ksq(idx))
            .fold(0.0, f64::max)
    }
}
