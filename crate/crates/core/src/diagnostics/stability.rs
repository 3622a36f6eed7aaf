use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::fields::StateVector;

use super::norms::sobolev_norm;

/// Twin-run comparison `sup_t D(t) / D(0)` with
/// `D = ‖v̄‖₂ + ‖B̄‖₂ + ‖m̄‖_{H¹}` for the difference of the two runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityMetric {
    pub sup_diff: f64,
    pub initial_diff: f64,
    pub ratio: f64,
    /// Set when `initial_diff` is zero; `ratio` is then 1 by convention.
    pub degenerate: bool,
}

/// `‖v̄‖₂ + ‖B̄‖₂ + ‖m̄‖_{H¹}` for `a - b`.
pub fn difference_norm(a: &StateVector, b: &StateVector) -> f64 {
    sobolev_norm(&a.v.sub(&b.v), 0)
        + sobolev_norm(&a.b.sub(&b.b), 0)
        + sobolev_norm(&a.m.sub(&b.m), 1)
}

pub fn stability_metric(t1: &Trajectory, t2: &Trajectory) -> Result<StabilityMetric> {
    let (s1, s2) = (t1.states(), t2.states());
    if s1.is_empty() || s1.len() != s2.len() {
        return Err(Error::Input(format!(
            "trajectories record different numbers of states ({} vs {})",
            s1.len(),
            s2.len()
        )));
    }
    let mut sup_diff = 0.0f64;
    let mut initial_diff = 0.0;
    for (i, ((_, a), (_, b))) in s1.iter().zip(s2).enumerate() {
        if a.grid() != b.grid() {
            return Err(Error::GridMismatch);
        }
        if a.time.to_bits() != b.time.to_bits() {
            return Err(Error::Input(format!(
                "trajectory times differ at entry {i}: {} vs {}",
                a.time, b.time
            )));
        }
        let d = difference_norm(a, b);
        if i == 0 {
            initial_diff = d;
        }
        sup_diff = sup_diff.max(d);
    }
    let degenerate = initial_diff == 0.0;
    let ratio = if degenerate {
        1.0
    } else {
        sup_diff / initial_diff
    };
    Ok(StabilityMetric {
        sup_diff,
        initial_diff,
        ratio,
        degenerate,
    })
}
