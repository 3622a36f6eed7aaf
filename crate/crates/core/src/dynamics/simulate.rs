use super::stepper::{Integrator, TimeStepper};
use super::Truncation;
use crate::diagnostics::{unit_drift, DiagnosticsRecord, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::fields::{forward_many, inverse_many, PhysicalParams, StateVector};

/// Growth factor of the state norm that counts as blow-up.
pub const BLOW_UP_FACTOR: f64 = 1e8;

/// A run that broke down.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowUp {
    /// Time of the failed step.
    pub time: f64,
    /// Last time with a valid state (the observed `T*`).
    pub last_valid_time: f64,
    pub reason: String,
}

/// States recorded every `diagnostics_every` steps, keyed by step index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    states: Vec<(usize, StateVector)>,
}

impl Trajectory {
    pub fn states(&self) -> &[(usize, StateVector)] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Option<&StateVector> {
        self.states.last().map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulateOptions {
    pub diagnostics_every: usize,
    /// Keep the recorded states in the trajectory.
    pub keep_states: bool,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            diagnostics_every: 10,
            keep_states: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub record: DiagnosticsRecord,
    /// Completed steps.
    pub steps: usize,
    /// Step actually taken: `(t_end - t0)/steps` for the smallest step count
    /// not exceeding the requested `dt`.
    pub dt: f64,
    /// Last valid state.
    pub final_state: StateVector,
    pub blow_up: Option<BlowUp>,
}

/// Projects `s` onto the Galerkin modes. `m` is truncated, its unit drift
/// measured, then renormalised pointwise and truncated again.
///
/// Returns the projected state and the drift before renormalisation.
pub fn galerkin_initial_data(s: &StateVector, trunc: &Truncation) -> Result<(StateVector, f64)> {
    let g = *s.grid();
    let mask = trunc.mask(&g);
    let mut out = s.clone();
    out.v.apply_mask(&mask);
    out.b.apply_mask(&mask);
    out.m.apply_mask(&mask);
    let drift = unit_drift(&out.m);
    let phys = inverse_many(
        &g,
        &[out.m.component(0), out.m.component(1), out.m.component(2)],
    );
    let mut unit = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
    for p in 0..g.len() {
        let norm = (phys[0][p].powi(2) + phys[1][p].powi(2) + phys[2][p].powi(2)).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter(
                "truncated magnetisation vanishes at a collocation point".into(),
            ));
        }
        for c in 0..3 {
            unit[c][p] = phys[c][p] / norm;
        }
    }
    let spec = forward_many(&g, &[&unit[0], &unit[1], &unit[2]]);
    for (c, comp) in spec.into_iter().enumerate() {
        out.m.component_mut(c).copy_from_slice(&comp);
    }
    out.m.apply_mask(&mask);
    Ok((out, drift))
}

/// [`simulate_with`] keeping every recorded state.
pub fn simulate(
    s0: &StateVector,
    t_end: f64,
    stepper: &TimeStepper,
    params: &PhysicalParams,
    trunc: &Truncation,
    diagnostics_every: usize,
) -> Result<Simulation> {
    simulate_with(
        s0,
        t_end,
        stepper,
        params,
        trunc,
        SimulateOptions {
            diagnostics_every,
            keep_states: true,
        },
    )
}

/// Advances `s0` to `t_end`, recording diagnostics (and optionally states)
/// at step 0, every `diagnostics_every` steps and the last step. Blow-up ends the run early
/// and is reported in [`Simulation::blow_up`], not as an error.
pub fn simulate_with(
    s0: &StateVector,
    t_end: f64,
    stepper: &TimeStepper,
    params: &PhysicalParams,
    trunc: &Truncation,
    opts: SimulateOptions,
) -> Result<Simulation> {
    params.validate()?;
    if opts.diagnostics_every == 0 {
        return Err(Error::InvalidParameter(
            "diagnostics_every must be at least 1".into(),
        ));
    }
    if !(t_end.is_finite() && t_end >= s0.time) {
        return Err(Error::InvalidParameter(format!(
            "t_end = {t_end} precedes the initial time {}",
            s0.time
        )));
    }
    let span = t_end - s0.time;
    let steps = if span == 0.0 {
        0
    } else {
        (span / stepper.dt() * (1.0 - 1e-12)).ceil().max(1.0) as usize
    };
    let dt = if steps == 0 {
        stepper.dt()
    } else {
        span / steps as f64
    };
    let integrator = Integrator::new(
        s0.grid(),
        &TimeStepper::unchecked(stepper.scheme(), dt)?,
        params,
        trunc,
    );

    let mut record = DiagnosticsRecord::new();
    let mut trajectory = Trajectory::default();
    record.push(DiagnosticsRow::measure(s0, params, trunc)?);
    if opts.keep_states {
        trajectory.states.push((0, s0.clone()));
    }

    let norm0 = state_norm(s0);
    let mut state = s0.clone();
    let mut blow_up = None;
    let mut done = 0;
    for k in 1..=steps {
        let next = match integrator.step(&state) {
            Ok(mut next) => {
                next.time = s0.time + k as f64 * dt;
                if k == steps {
                    next.time = t_end;
                }
                let norm = state_norm(&next);
                if norm > BLOW_UP_FACTOR * norm0 {
                    Err(BlowUp {
                        time: next.time,
                        last_valid_time: state.time,
                        reason: format!(
                            "state norm {norm:e} exceeds {BLOW_UP_FACTOR:e} times its initial value"
                        ),
                    })
                } else {
                    Ok(next)
                }
            }
            Err(Error::BlowUp {
                time,
                last_valid_time,
                reason,
            }) => Err(BlowUp {
                time,
                last_valid_time,
                reason,
            }),
            Err(e) => return Err(e),
        };
        match next {
            Ok(next) => {
                state = next;
                done = k;
            }
            Err(b) => {
                blow_up = Some(b);
                break;
            }
        }
        if k % opts.diagnostics_every == 0 || k == steps {
            match DiagnosticsRow::measure(&state, params, trunc) {
                Ok(row) if row.is_finite() => record.push(row),
                _ => {
                    blow_up = Some(BlowUp {
                        time: state.time,
                        last_valid_time: state.time,
                        reason: "non-finite diagnostics".into(),
                    });
                    break;
                }
            }
            if opts.keep_states {
                trajectory.states.push((k, state.clone()));
            }
        }
    }
    if blow_up.is_some() {
        record.flag_blow_up();
    }
    Ok(Simulation {
        trajectory,
        record,
        steps: done,
        dt,
        final_state: state,
        blow_up,
    })
}

/// Combined `L²` norm of `(v, B, m)`.
fn state_norm(s: &StateVector) -> f64 {
    (s.v.coeff_energy() + s.b.coeff_energy() + s.m.coeff_energy()).sqrt()
}
