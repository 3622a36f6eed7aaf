//! Time integration of the Galerkin ODE system.
//!
//! The stiff diagonal diffusion (`μΔ` on `v`, `ηΔ` on `B`, `χΔ` on `m`) is
//! integrated exactly per mode; everything else is explicit.

use num_complex::Complex64;

use super::rhs::{divergence_drift, nonlinear_terms, Rhs};
use super::Truncation;
use crate::calculus::{curl, gradient_vec, leray_project};
use crate::error::{Error, Result};
use crate::fields::{Model, PhysicalParams, SpectralField, StateVector};
use crate::grid::Grid;

/// Divergence re-projection trigger after a step.
pub const DIV_REPROJECT_TOL: f64 = 1e-13;

/// Real-axis extent of the classical RK4 stability region.
const RK4_REAL_AXIS: f64 = 2.785;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Integrating-factor Euler: `u ← e^{Lh}(u + h N(u))`.
    ImexEuler,
    /// Cox–Matthews exponential time differencing, fourth order.
    EtdRk4,
    /// Classical RK4 on the full right side.
    Rk4Explicit,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ImexEuler => "imex_euler",
            Scheme::EtdRk4 => "etd_rk4",
            Scheme::Rk4Explicit => "rk4_explicit",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "imex_euler" => Some(Scheme::ImexEuler),
            "etd_rk4" => Some(Scheme::EtdRk4),
            "rk4_explicit" => Some(Scheme::Rk4Explicit),
            _ => None,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Scheme::ImexEuler => 1,
            Scheme::EtdRk4 | Scheme::Rk4Explicit => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepper {
    scheme: Scheme,
    dt: f64,
}

impl TimeStepper {
    /// Validated stepper; `rk4_explicit` must respect [`stability_limit`].
    pub fn new(
        scheme: Scheme,
        dt: f64,
        grid: &Grid,
        params: &PhysicalParams,
        trunc: &Truncation,
    ) -> Result<Self> {
        let s = Self::unchecked(scheme, dt)?;
        if scheme == Scheme::Rk4Explicit {
            let limit = stability_limit(grid, params, trunc);
            if dt > limit {
                return Err(Error::InvalidParameter(format!(
                    "dt = {dt} exceeds the rk4_explicit stability limit {limit:.6e}"
                )));
            }
        }
        Ok(s)
    }

    /// Only checks `dt > 0`. Used for deliberate instability probes.
    pub fn unchecked(scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {dt}"
            )));
        }
        Ok(Self { scheme, dt })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }
}

/// `0.25 / (max(μ, η, χ) · k_cut²)` with `k_cut` the dealias cutoff.
pub fn default_dt(grid: &Grid, params: &PhysicalParams) -> f64 {
    let kc = grid.dealias_cutoff();
    0.25 / (params.mu.max(params.eta).max(params.chi) * kc * kc)
}

/// Largest stable `dt` for `rk4_explicit`: the stiffest retained mode has
/// eigenvalues of size `max(μ, η, |χ + iγ|)·|k|²`.
pub fn stability_limit(grid: &Grid, params: &PhysicalParams, trunc: &Truncation) -> f64 {
    let rate = params
        .mu
        .max(params.eta)
        .max(params.chi.hypot(params.gamma));
    RK4_REAL_AXIS / (rate * trunc.max_ksq(grid))
}

/// `(φ₁, φ₂, φ₃)` at `z`, with `φⱼ(z) = Σₘ zᵐ/(m+j)!`.
pub(crate) fn phi(z: f64) -> (f64, f64, f64) {
    if z.abs() < 1.0 {
        let series = |j: u32| {
            let mut term = 1.0;
            for i in 1..=j {
                term /= i as f64;
            }
            let mut sum = term;
            for m in 1..30 {
                term *= z / (m + j) as f64;
                sum += term;
            }
            sum
        };
        (series(1), series(2), series(3))
    } else {
        let em1 = z.exp_m1();
        let p1 = em1 / z;
        let p2 = (em1 - z) / (z * z);
        let p3 = (em1 - z - 0.5 * z * z) / (z * z * z);
        (p1, p2, p3)
    }
}

/// Per-mode exponential factors for one field with decay rate `c` (`L = -c|k|²`).
struct LinearFactors {
    rate: f64,
    e: Vec<f64>,
    e2: Vec<f64>,
    half: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    f3: Vec<f64>,
}

impl LinearFactors {
    fn new(ksq: &[f64], rate: f64, h: f64) -> Self {
        let len = ksq.len();
        let mut lf = Self {
            rate,
            e: Vec::with_capacity(len),
            e2: Vec::with_capacity(len),
            half: Vec::with_capacity(len),
            f1: Vec::with_capacity(len),
            f2: Vec::with_capacity(len),
            f3: Vec::with_capacity(len),
        };
        for &k2 in ksq {
            let z = -rate * k2 * h;
            lf.e.push(z.exp());
            lf.e2.push((0.5 * z).exp());
            lf.half.push(0.5 * h * phi(0.5 * z).0);
            let (p1, p2, p3) = phi(z);
            lf.f1.push(h * (p1 - 3.0 * p2 + 4.0 * p3));
            lf.f2.push(h * (p2 - 2.0 * p3));
            lf.f3.push(h * (-p2 + 4.0 * p3));
        }
        lf
    }
}

/// A stepper bound to one grid, parameter set and truncation, with the
/// exponential factors precomputed.
pub(crate) struct Integrator {
    params: PhysicalParams,
    scheme: Scheme,
    dt: f64,
    mask: Vec<bool>,
    ksq: Vec<f64>,
    factors: [LinearFactors; 3],
}

/// Stage states of one ETDRK4 step, in order `u, a, b, c`.
pub(crate) struct Stages(pub [StateVector; 4]);

fn field(s: &StateVector, f: usize) -> &SpectralField {
    match f {
        0 => &s.v,
        1 => &s.b,
        _ => &s.m,
    }
}

fn field_mut(s: &mut StateVector, f: usize) -> &mut SpectralField {
    match f {
        0 => &mut s.v,
        1 => &mut s.b,
        _ => &mut s.m,
    }
}

fn rhs_field(r: &Rhs, f: usize) -> &SpectralField {
    match f {
        0 => &r.v,
        1 => &r.b,
        _ => &r.m,
    }
}

impl Integrator {
    pub(crate) fn new(
        grid: &Grid,
        stepper: &TimeStepper,
        params: &PhysicalParams,
        trunc: &Truncation,
    ) -> Self {
        let ksq: Vec<f64> = (0..grid.len()).map(|idx| grid.ksq(idx)).collect();
        let h = stepper.dt;
        let chi = if params.model == Model::Mhd {
            0.0
        } else {
            params.chi
        };
        let factors = [params.mu, params.eta, chi].map(|c| LinearFactors::new(&ksq, c, h));
        Self {
            params: *params,
            scheme: stepper.scheme,
            dt: h,
            mask: trunc.mask(grid),
            ksq,
            factors,
        }
    }

    fn nonlinear(&self, s: &StateVector, last_valid: f64) -> Result<Rhs> {
        nonlinear_terms(s, &self.params, &self.mask).map_err(|e| match e {
            Error::NonFinite { what } => Error::BlowUp {
                time: last_valid + self.dt,
                last_valid_time: last_valid,
                reason: format!("non-finite {what}"),
            },
            other => other,
        })
    }

    pub(crate) fn step(&self, s: &StateVector) -> Result<StateVector> {
        let next = match self.scheme {
            Scheme::ImexEuler => self.imex_euler(s)?,
            Scheme::EtdRk4 => self.etdrk4(s, false)?.0,
            Scheme::Rk4Explicit => self.rk4(s)?,
        };
        self.finish(s, next)
    }

    /// ETDRK4 step that also returns its stage states.
    pub(crate) fn step_with_stages(&self, s: &StateVector) -> Result<(StateVector, Stages)> {
        let (next, stages) = self.etdrk4(s, true)?;
        Ok((self.finish(s, next)?, stages.expect("stages requested")))
    }

    fn finish(&self, prev: &StateVector, mut next: StateVector) -> Result<StateVector> {
        next.time = prev.time + self.dt;
        if !next.is_finite() {
            return Err(Error::BlowUp {
                time: next.time,
                last_valid_time: prev.time,
                reason: "non-finite state after step".into(),
            });
        }
        if divergence_drift(&next.v) > DIV_REPROJECT_TOL {
            next.v = leray_project(&next.v);
        }
        if divergence_drift(&next.b) > DIV_REPROJECT_TOL {
            next.b = leray_project(&next.b);
        }
        Ok(next)
    }

    fn imex_euler(&self, s: &StateVector) -> Result<StateVector> {
        let n = self.nonlinear(s, s.time)?;
        let mut out = s.clone();
        let h = self.dt;
        let len = self.ksq.len();
        for f in 0..3 {
            let e = &self.factors[f].e;
            let nf = rhs_field(&n, f).coeffs();
            let dst = field_mut(&mut out, f).coeffs_mut();
            for (d, src) in dst.chunks_exact_mut(len).zip(nf.chunks_exact(len)) {
                for ((c, x), ek) in d.iter_mut().zip(src).zip(e) {
                    *c = (*c + x * h) * ek;
                }
            }
        }
        Ok(out)
    }

    fn etdrk4(&self, u: &StateVector, keep: bool) -> Result<(StateVector, Option<Stages>)> {
        let len = self.ksq.len();
        let t = u.time;

        // base·e^{Lh/2} + (h/2)φ₁(Lh/2)·forcing
        let stage = |base: &StateVector, forcing: [&[Complex64]; 3]| {
            let mut out = base.clone();
            for f in 0..3 {
                let lf = &self.factors[f];
                let dst = field_mut(&mut out, f).coeffs_mut();
                for (d, src) in dst.chunks_exact_mut(len).zip(forcing[f].chunks_exact(len)) {
                    for (k, (c, x)) in d.iter_mut().zip(src).enumerate() {
                        *c = *c * lf.e2[k] + x * lf.half[k];
                    }
                }
            }
            out
        };
        let coeffs = |r: &Rhs| {
            [
                r.v.coeffs().to_vec(),
                r.b.coeffs().to_vec(),
                r.m.coeffs().to_vec(),
            ]
        };

        let nu = self.nonlinear(u, t)?;
        let a = stage(u, [nu.v.coeffs(), nu.b.coeffs(), nu.m.coeffs()]);
        let na = self.nonlinear(&a, t)?;
        let b = stage(u, [na.v.coeffs(), na.b.coeffs(), na.m.coeffs()]);
        let nb = self.nonlinear(&b, t)?;
        let mut forcing_c = coeffs(&nb);
        for f in 0..3 {
            let n0 = rhs_field(&nu, f).coeffs();
            for (x, y) in forcing_c[f].iter_mut().zip(n0) {
                *x = *x * 2.0 - y;
            }
        }
        let c = stage(&a, [&forcing_c[0], &forcing_c[1], &forcing_c[2]]);
        let nc = self.nonlinear(&c, t)?;

        let mut out = u.clone();
        for f in 0..3 {
            let lf = &self.factors[f];
            let (n0, n1, n2, n3) = (
                rhs_field(&nu, f).coeffs(),
                rhs_field(&na, f).coeffs(),
                rhs_field(&nb, f).coeffs(),
                rhs_field(&nc, f).coeffs(),
            );
            let dst = field_mut(&mut out, f).coeffs_mut();
            for (comp, d) in dst.chunks_exact_mut(len).enumerate() {
                let o = comp * len;
                for (k, z) in d.iter_mut().enumerate() {
                    let i = o + k;
                    *z = *z * lf.e[k]
                        + n0[i] * lf.f1[k]
                        + (n1[i] + n2[i]) * (2.0 * lf.f2[k])
                        + n3[i] * lf.f3[k];
                }
            }
        }
        let stages = keep.then(|| Stages([u.clone(), a, b, c]));
        Ok((out, stages))
    }

    /// `L u + N(u)`.
    fn full_rhs(&self, s: &StateVector) -> Result<Rhs> {
        let mut r = self.nonlinear(s, s.time)?;
        let len = self.ksq.len();
        for f in 0..3 {
            let rate = self.factors[f].rate;
            let src = field(s, f).coeffs();
            let dst = match f {
                0 => &mut r.v,
                1 => &mut r.b,
                _ => &mut r.m,
            };
            for (d, x) in dst
                .coeffs_mut()
                .chunks_exact_mut(len)
                .zip(src.chunks_exact(len))
            {
                for ((z, y), k2) in d.iter_mut().zip(x).zip(&self.ksq) {
                    *z -= y * (rate * k2);
                }
            }
        }
        Ok(r)
    }

    fn rk4(&self, u: &StateVector) -> Result<StateVector> {
        let h = self.dt;
        let shifted = |base: &StateVector, k: &Rhs, a: f64| {
            let mut out = base.clone();
            for f in 0..3 {
                field_mut(&mut out, f).axpy(a, rhs_field(k, f));
            }
            out
        };
        let k1 = self.full_rhs(u)?;
        let k2 = self.full_rhs(&shifted(u, &k1, 0.5 * h))?;
        let k3 = self.full_rhs(&shifted(u, &k2, 0.5 * h))?;
        let k4 = self.full_rhs(&shifted(u, &k3, h))?;
        let mut out = u.clone();
        for f in 0..3 {
            let o = field_mut(&mut out, f);
            o.axpy(h / 6.0, rhs_field(&k1, f));
            o.axpy(h / 3.0, rhs_field(&k2, f));
            o.axpy(h / 3.0, rhs_field(&k3, f));
            o.axpy(h / 6.0, rhs_field(&k4, f));
        }
        Ok(out)
    }
}

/// Advance `s` by one step.
pub fn step(
    s: &StateVector,
    stepper: &TimeStepper,
    p: &PhysicalParams,
    trunc: &Truncation,
) -> Result<StateVector> {
    Integrator::new(s.grid(), stepper, p, trunc).step(s)
}

/// Energy bookkeeping of one ETDRK4 step of the MHD part.
///
/// With `E = ½(‖v‖² + ‖B‖²)` and `D = μ‖∇v‖² + η‖curl B‖²`, the exact flow has
/// `dE/dt = -D` once the coupling terms cancel. `dissipation` integrates `D`
/// with the same ETDRK4 stages (for a zero linear part this is the RK4
/// weighting `h/6·(1, 2, 2, 1)`). `lte_estimate` is the Richardson estimate of
/// the step's error in `E` from one step of `h` against two of `h/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationCheck {
    pub energy_before: f64,
    pub energy_change: f64,
    pub dissipation: f64,
    pub lte_estimate: f64,
}

impl DissipationCheck {
    /// `|ΔE + ∫D|`
    pub fn defect(&self) -> f64 {
        (self.energy_change + self.dissipation).abs()
    }

    pub fn evaluate(
        s: &StateVector,
        dt: f64,
        p: &PhysicalParams,
        trunc: &Truncation,
    ) -> Result<(Self, StateVector)> {
        let g = *s.grid();
        let full = Integrator::new(&g, &TimeStepper::unchecked(Scheme::EtdRk4, dt)?, p, trunc);
        let half = Integrator::new(
            &g,
            &TimeStepper::unchecked(Scheme::EtdRk4, 0.5 * dt)?,
            p,
            trunc,
        );
        let (next, dissipation) = step_with_dissipation(&full, s, p)?;
        let (mid, q1) = step_with_dissipation(&half, s, p)?;
        let (fine, q2) = step_with_dissipation(&half, &mid, p)?;
        let e0 = mhd_energy(s);
        let e1 = mhd_energy(&next);
        // Richardson on the balance residual, which is zero for the exact flow.
        let coarse = e1 - e0 + dissipation;
        let refined = mhd_energy(&fine) - e0 + q1 + q2;
        let lte_estimate = (coarse - refined).abs() * 16.0 / 15.0;
        Ok((
            Self {
                energy_before: e0,
                energy_change: e1 - e0,
                dissipation,
                lte_estimate,
            },
            next,
        ))
    }
}

/// One step plus `∫D dt` over it, with `D` carried as an extra ODE component
/// with no linear part, so the stage weights are the classical 1/6, 1/3, 1/3, 1/6.
fn step_with_dissipation(
    int: &Integrator,
    s: &StateVector,
    p: &PhysicalParams,
) -> Result<(StateVector, f64)> {
    let (next, stages) = int.step_with_stages(s)?;
    let d: Vec<f64> = stages.0.iter().map(|st| dissipation_rate(st, p)).collect();
    let q = int.dt / 6.0 * (d[0] + 2.0 * d[1] + 2.0 * d[2] + d[3]);
    Ok((next, q))
}

/// `½(‖v‖² + ‖B‖²)`
pub(crate) fn mhd_energy(s: &StateVector) -> f64 {
    0.5 * (s.v.inner(&s.v) + s.b.inner(&s.b))
}

/// `μ‖∇v‖² + η‖curl B‖²`
pub(crate) fn dissipation_rate(s: &StateVector, p: &PhysicalParams) -> f64 {
    let g = *s.grid();
    let grad_v_sq: f64 = gradient_vec(&s.v)
        .values()
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        * g.volume()
        / g.len() as f64;
    let j = curl(&s.b);
    p.mu * grad_v_sq + p.eta * j.inner(&j)
}
