//! Evaluator for the generalised Gronwall bound: if
//! `u(t) <= α + ∫ₐᵗ β(s) g(u(s)) ds` then `u(t) <= G⁻¹(∫ₐᵗ β)` with
//! `G(σ) = ∫_α^σ ds / g(s)`, as long as `∫ₐᵗ β` stays in the range of `G`.

use crate::error::{Error, Result};

pub const QUAD_ABS_TOL: f64 = 1e-10;
pub const QUAD_REL_TOL: f64 = 1e-8;

const MAX_BISECTIONS: usize = 2200;

/// The nondecreasing function `g` of the integral inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum GSpec {
    /// `g(s) = s^p`, `p >= 1`.
    Power(f64),
    /// Piecewise-linear interpolation of `(s, g)` nodes. The bound is only
    /// available up to the last node.
    Tabulated { s: Vec<f64>, g: Vec<f64> },
}

impl GSpec {
    fn validate(&self, alpha: f64) -> Result<()> {
        match self {
            GSpec::Power(p) => {
                if !(p.is_finite() && *p >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power g needs an exponent >= 1, got {p}"
                    )));
                }
            }
            GSpec::Tabulated { s, g } => {
                if s.len() < 2 || s.len() != g.len() {
                    return Err(Error::InvalidParameter(
                        "tabulated g needs at least two (s, g) nodes of equal length".into(),
                    ));
                }
                if s.windows(2).any(|w| !(w[1] > w[0])) || s.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter(
                        "tabulated g nodes must be finite and strictly increasing".into(),
                    ));
                }
                if g.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "tabulated g values must be positive and finite".into(),
                    ));
                }
                if g.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::InvalidParameter(
                        "tabulated g must be nondecreasing".into(),
                    ));
                }
                if alpha < s[0] || alpha > s[s.len() - 1] {
                    return Err(Error::InvalidParameter(format!(
                        "alpha = {alpha} lies outside the tabulated range [{}, {}]",
                        s[0],
                        s[s.len() - 1]
                    )));
                }
            }
        }
        Ok(())
    }

    /// `sup G = G(∞)`, or `G(last node)` for a table.
    fn g_limit(&self, alpha: f64) -> f64 {
        match self {
            GSpec::Power(p) if *p == 1.0 => f64::INFINITY,
            GSpec::Power(p) => alpha.powf(1.0 - p) / (p - 1.0),
            GSpec::Tabulated { s, .. } => self.big_g(alpha, s[s.len() - 1]),
        }
    }

    /// `G(σ)` by adaptive quadrature.
    fn big_g(&self, alpha: f64, sigma: f64) -> f64 {
        match self {
            GSpec::Power(p) => {
                // s = α/u maps [α, σ] onto [α/σ, 1] with a polynomial integrand for p >= 2.
                let w = alpha / sigma;
                let scale = alpha.powf(1.0 - p);
                scale * integrate(|u| u.powf(p - 2.0), w, 1.0)
            }
            GSpec::Tabulated { s, g } => {
                let mut total = 0.0;
                for i in 0..s.len() - 1 {
                    let lo = s[i].max(alpha);
                    let hi = s[i + 1].min(sigma);
                    if hi <= lo {
                        continue;
                    }
                    let (s0, s1, g0, g1) = (s[i], s[i + 1], g[i], g[i + 1]);
                    total += integrate(|x| 1.0 / (g0 + (g1 - g0) * (x - s0) / (s1 - s0)), lo, hi);
                }
                total
            }
        }
    }

    /// `σ` with `G(σ) = y`, for `0 <= y < g_limit`.
    fn inverse(&self, alpha: f64, y: f64) -> f64 {
        if y == 0.0 {
            return alpha;
        }
        match self {
            GSpec::Power(_) => {
                // Bisection on w = α/σ ∈ (0, 1], G decreasing in w.
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                for _ in 0..MAX_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.big_g(alpha, alpha / mid) > y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if lo > 0.0 && hi - lo <= 1e-16 * hi {
                        break;
                    }
                }
                alpha / (0.5 * (lo + hi))
            }
            GSpec::Tabulated { s, .. } => {
                let (mut lo, mut hi) = (alpha, s[s.len() - 1]);
                for _ in 0..MAX_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.big_g(alpha, mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Samples of `β(t)`, linearly interpolated between nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSamples {
    t: Vec<f64>,
    beta: Vec<f64>,
}

impl BetaSamples {
    pub fn new(t: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if t.is_empty() || t.len() != beta.len() {
            return Err(Error::InvalidParameter(
                "beta samples need matching, nonempty t and beta arrays".into(),
            ));
        }
        if t.iter().any(|x| !x.is_finite()) || t.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "beta sample times must be finite and strictly increasing".into(),
            ));
        }
        if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "beta must be nonnegative and finite, got {b}"
            )));
        }
        Ok(Self { t, beta })
    }

    /// `β ≡ c` on `[a, b]`.
    pub fn constant(c: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![c, c])
    }

    pub fn start(&self) -> f64 {
        self.t[0]
    }

    pub fn end(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// `∫ₐᵗ β` (trapezoid on the samples, exact for the interpolant).
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for i in 0..self.t.len().saturating_sub(1) {
            let (t0, t1) = (self.t[i], self.t[i + 1]);
            if t <= t0 {
                break;
            }
            let (b0, b1) = (self.beta[i], self.beta[i + 1]);
            let hi = t.min(t1);
            let b_hi = b0 + (b1 - b0) * (hi - t0) / (t1 - t0);
            total += 0.5 * (b0 + b_hi) * (hi - t0);
        }
        total
    }
}

/// Result of [`gronwall_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GronwallBound {
    Bound(f64),
    /// `∫β` has left the range of `G`; the bound has broken down.
    OutOfDomain {
        integral: f64,
        limit: f64,
    },
}

impl GronwallBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            GronwallBound::Bound(x) => Some(*x),
            GronwallBound::OutOfDomain { .. } => None,
        }
    }
}

pub fn gronwall_bound(
    alpha: f64,
    beta: &BetaSamples,
    g: &GSpec,
    t_query: f64,
) -> Result<GronwallBound> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    g.validate(alpha)?;
    let span = (beta.end() - beta.start()).abs().max(1.0);
    if !(t_query >= beta.start() - 1e-12 * span && t_query <= beta.end() + 1e-12 * span) {
        return Err(Error::InvalidParameter(format!(
            "t = {t_query} lies outside the beta samples [{}, {}]",
            beta.start(),
            beta.end()
        )));
    }
    let integral = beta.integral_to(t_query);
    let limit = g.g_limit(alpha);
    if integral >= limit {
        return Ok(GronwallBound::OutOfDomain { integral, limit });
    }
    Ok(GronwallBound::Bound(g.inverse(alpha, integral)))
}

/// First sampled time at which `∫β` reaches the range limit of `G`.
pub fn breakdown_time(alpha: f64, beta: &BetaSamples, g: &GSpec) -> Result<Option<f64>> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    g.validate(alpha)?;
    let limit = g.g_limit(alpha);
    if !limit.is_finite() {
        return Ok(None);
    }
    let mut acc = 0.0;
    for i in 0..beta.t.len().saturating_sub(1) {
        let (t0, t1) = (beta.t[i], beta.t[i + 1]);
        let (b0, b1) = (beta.beta[i], beta.beta[i + 1]);
        let h = t1 - t0;
        let seg = 0.5 * (b0 + b1) * h;
        if acc + seg >= limit {
            // acc + b0 τ + (b1 - b0) τ²/(2h) = limit
            let need = limit - acc;
            let a = (b1 - b0) / (2.0 * h);
            let tau = if a.abs() < 1e-300 {
                need / b0
            } else {
                (-b0 + (b0 * b0 + 4.0 * a * need).sqrt()) / (2.0 * a)
            };
            return Ok(Some(t0 + tau));
        }
        acc += seg;
    }
    Ok(None)
}

/// Measured `E(t)` against the bound from the fitted inequality
/// `E(t) <= E(0) + C ∫₀ᵗ E¹⁵`, written in `u = E/E(0)` as
/// `u <= 1 + C' ∫ u¹⁵`.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallEcho {
    pub e0: f64,
    /// Smallest `C'` for which the scaled inequality holds at every sample,
    /// with `∫u¹⁵` taken as a lower sum of the piecewise-linear interpolant.
    pub c_fit: f64,
    /// Bound on `E(t)` per sample; `None` past the breakdown of the bound.
    pub bound: Vec<Option<f64>>,
    /// `E(t)` stays below the bound wherever the bound exists.
    pub dominated: bool,
    /// Breakdown time of the bound, `1/(14 C')`.
    pub breakdown: Option<f64>,
}

pub fn fit_gronwall_echo(times: &[f64], e: &[f64]) -> Result<GronwallEcho> {
    const P: f64 = 15.0;
    if times.len() != e.len() || times.is_empty() {
        return Err(Error::InvalidParameter(
            "echo needs matching, nonempty time and E series".into(),
        ));
    }
    let e0 = e[0];
    if !(e0.is_finite() && e0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "echo needs a positive initial E, got {e0}"
        )));
    }
    let u: Vec<f64> = e.iter().map(|x| x / e0).collect();
    let mut integral = 0.0;
    let mut c_fit = 0.0f64;
    for i in 1..u.len() {
        // Lower sum: u¹⁵ is monotone on each linear piece, so this never
        // overestimates the integral and the fitted constant stays conservative.
        integral += u[i - 1].powf(P).min(u[i].powf(P)) * (times[i] - times[i - 1]);
        if integral > 0.0 {
            c_fit = c_fit.max((u[i] - 1.0) / integral);
        }
    }
    let t_end = times[times.len() - 1];
    let g = GSpec::Power(P);
    let mut bound = Vec::with_capacity(u.len());
    let mut dominated = true;
    let breakdown = if c_fit > 0.0 {
        Some(1.0 / ((P - 1.0) * c_fit))
    } else {
        None
    };
    let beta = BetaSamples::constant(c_fit, times[0], t_end.max(times[0] + 1.0))?;
    for (i, &t) in times.iter().enumerate() {
        let b = gronwall_bound(1.0, &beta, &g, t)?.value().map(|x| x * e0);
        if let Some(b) = b {
            // The bound is exact up to the quadrature tolerance.
            if e[i] > b * (1.0 + 1e-7) {
                dominated = false;
            }
        }
        bound.push(b);
    }
    Ok(GronwallEcho {
        e0,
        c_fit,
        bound,
        dominated,
        breakdown,
    })
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Gauss–Kronrod 7/15 on one panel: `(kronrod, |kronrod - gauss|)`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut gs = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            gs += WG[j / 2] * s;
        }
    }
    (k * h, ((k - gs) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature to `QUAD_ABS_TOL`/`QUAD_REL_TOL`.
fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, _) = gk15(&f, a, b);
    let tol = QUAD_ABS_TOL.max(QUAD_REL_TOL * whole.abs());
    let width = (b - a).abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&f, lo, hi);
        let share = tol * (hi - lo).abs() / width;
        if err <= share || depth >= 48 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_log() {
        assert!((integrate(|x| x.powi(13), 0.0, 1.0) - 1.0 / 14.0).abs() < 1e-15);
        assert!((integrate(|x| 1.0 / x, 1.0, std::f64::consts::E) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_constant_g_is_linear_growth() {
        // g ≡ 2 gives u ≤ α + 2∫β.
        let g = GSpec::Tabulated {
            s: vec![0.5, 100.0],
            g: vec![2.0, 2.0],
        };
        let beta = BetaSamples::constant(1.0, 0.0, 3.0).unwrap();
        let b = gronwall_bound(1.0, &beta, &g, 3.0)
            .unwrap()
            .value()
            .unwrap();
        assert!((b - 7.0).abs() < 1e-9, "{b}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let beta = BetaSamples::constant(1.0, 0.0, 1.0).unwrap();
        assert!(gronwall_bound(1.0, &beta, &GSpec::Power(0.5), 0.5).is_err());
        assert!(gronwall_bound(0.0, &beta, &GSpec::Power(1.0), 0.5).is_err());
        assert!(gronwall_bound(1.0, &beta, &GSpec::Power(1.0), 2.0).is_err());
        assert!(BetaSamples::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        let decreasing = GSpec::Tabulated {
            s: vec![0.0, 2.0],
            g: vec![2.0, 1.0],
        };
        assert!(gronwall_bound(1.0, &beta, &decreasing, 0.5).is_err());
    }
}
