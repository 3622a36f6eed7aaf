//! Sobolev norms, the energy functionals `J` and `E`, invariant monitors,
//! the twin-run stability metric, and the generalised Gronwall bound.

mod gronwall;
mod norms;
mod record;
mod stability;

pub use gronwall::{
    breakdown_time, fit_gronwall_echo, gronwall_bound, BetaSamples, GSpec, GronwallBound,
    GronwallEcho, QUAD_ABS_TOL, QUAD_REL_TOL,
};
pub use norms::{energy_e, energy_j, sobolev_norm, unit_drift};
pub use record::{DiagnosticsRecord, DiagnosticsRow, COLUMNS};
pub use stability::{difference_norm, stability_metric, StabilityMetric};
