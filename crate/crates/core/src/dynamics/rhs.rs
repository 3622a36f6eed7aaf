//! Time derivatives of `(v, B, m)` in the projected form
//!
//! ```text
//! ∂t v = P[-(v·∇)v + curl B × B + (B·∇)m - (∇m)ᵀΔm] + μΔv
//! ∂t B = -η curl²B + curl(v × B)
//! ∂t m = -(v·∇)m + χ(Δm + |∇m|²m) + γ m × (Δm + B) - χ m × (m × B)
//! ```
//!
//! The gradient terms of the momentum equation (pressure, `m·B - ½|∇m|²`)
//! are annihilated by `P` and never formed.

use num_complex::Complex64;

use super::Truncation;
use crate::calculus::{advect_parts, cross_parts, curl, derivative, laplacian, leray_project};
use crate::error::{Error, Result};
use crate::fields::{
    forward_many, inverse_many, Model, PhysicalParams, SpectralField, StateVector,
};

/// The three time derivatives at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub v: SpectralField,
    pub b: SpectralField,
    pub m: SpectralField,
}

/// Everything except the diagonal diffusion `μΔv`, `ηΔB`, `χΔm`, masked to the
/// Galerkin modes.
pub(crate) fn nonlinear_terms(s: &StateVector, p: &PhysicalParams, mask: &[bool]) -> Result<Rhs> {
    let g = *s.grid();
    if p.model == Model::Diffusion {
        return Ok(Rhs {
            v: SpectralField::zeros(g),
            b: SpectralField::zeros(g),
            m: SpectralField::zeros(g),
        });
    }
    let len = g.len();

    let grad = |f: &SpectralField| -> Vec<Vec<Complex64>> {
        (0..9)
            .map(|slot| derivative(&g, f.component(slot / 3), slot % 3))
            .collect()
    };
    let grad_v = grad(&s.v);
    let grad_m = grad(&s.m);
    let curl_b = curl(&s.b);
    let lap_m = laplacian(&s.m);

    let mut spectral: Vec<&[Complex64]> = Vec::with_capacity(33);
    for f in [&s.v, &s.b, &s.m, &curl_b, &lap_m] {
        for c in 0..3 {
            spectral.push(f.component(c));
        }
    }
    spectral.extend(grad_v.iter().map(|c| c.as_slice()));
    spectral.extend(grad_m.iter().map(|c| c.as_slice()));
    let phys = inverse_many(&g, &spectral);
    let vec3 = |at: usize| -> [&[f64]; 3] { [&phys[at][..], &phys[at + 1][..], &phys[at + 2][..]] };
    let v = vec3(0);
    let b = vec3(3);
    let m = vec3(6);
    let jb = vec3(9);
    let lm = vec3(12);
    let gv = &phys[15..24];
    let gm = &phys[24..33];

    // momentum
    let adv_v = named("(v·∇)v", advect_parts(v, gv))?;
    let lorentz = named("curl B × B", cross_parts(jb, b))?;
    let b_grad_m = named("(B·∇)m", advect_parts(b, gm))?;
    let mut exchange = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (j, e) in exchange.iter_mut().enumerate() {
        for pt in 0..len {
            e[pt] = gm[j][pt] * lm[0][pt] + gm[3 + j][pt] * lm[1][pt] + gm[6 + j][pt] * lm[2][pt];
        }
    }
    let exchange = named("(∇m)ᵀΔm", exchange)?;
    let coupled = if p.model == Model::Mhd { 0.0 } else { 1.0 };
    let mut force_v = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for c in 0..3 {
        for pt in 0..len {
            force_v[c][pt] =
                -adv_v[c][pt] + lorentz[c][pt] + coupled * (b_grad_m[c][pt] - exchange[c][pt]);
        }
    }

    // induction
    let v_cross_b = named("v × B", cross_parts(v, b))?;

    // magnetisation
    let adv_m = named("(v·∇)m", advect_parts(v, gm))?;
    let grad_m_sq: Vec<f64> = (0..len)
        .map(|pt| gm.iter().map(|d| d[pt] * d[pt]).sum())
        .collect();
    let heff: [Vec<f64>; 3] =
        std::array::from_fn(|c| (0..len).map(|pt| lm[c][pt] + b[c][pt]).collect());
    let precession = named(
        "m × (Δm + B)",
        cross_parts(m, [&heff[0], &heff[1], &heff[2]]),
    )?;
    let m_cross_b = cross_parts(m, b);
    let damping = named(
        "m × (m × B)",
        cross_parts(m, [&m_cross_b[0], &m_cross_b[1], &m_cross_b[2]]),
    )?;
    let mut force_m = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for c in 0..3 {
        for pt in 0..len {
            force_m[c][pt] = coupled
                * (-adv_m[c][pt] + p.chi * grad_m_sq[pt] * m[c][pt] + p.gamma * precession[c][pt]
                    - p.chi * damping[c][pt]);
        }
    }
    let force_m = named("|∇m|²m", force_m)?;

    let outs = forward_many(
        &g,
        &[
            &force_v[0],
            &force_v[1],
            &force_v[2],
            &v_cross_b[0],
            &v_cross_b[1],
            &v_cross_b[2],
            &force_m[0],
            &force_m[1],
            &force_m[2],
        ],
    );
    let mut outs = outs.into_iter();
    let mut take3 = || -> SpectralField {
        let comps = [
            outs.next().unwrap(),
            outs.next().unwrap(),
            outs.next().unwrap(),
        ];
        let mut f = SpectralField::from_components(g, comps);
        f.apply_mask(mask);
        f
    };
    let nv = take3();
    let vxb = take3();
    let nm = take3();

    let mut nv = leray_project(&nv);
    nv.apply_mask(mask);
    let mut nb = curl(&vxb);
    nb.apply_mask(mask);
    Ok(Rhs {
        v: nv,
        b: nb,
        m: nm,
    })
}

fn named(what: &str, parts: [Vec<f64>; 3]) -> Result<[Vec<f64>; 3]> {
    if parts.iter().all(|c| c.iter().all(|x| x.is_finite())) {
        Ok(parts)
    } else {
        Err(Error::NonFinite {
            what: format!("term {what}"),
        })
    }
}

/// Full time derivatives, truncated to the Galerkin modes.
pub fn rhs(s: &StateVector, p: &PhysicalParams, trunc: &Truncation) -> Result<Rhs> {
    let g = *s.grid();
    let mask = trunc.mask(&g);
    let mut out = nonlinear_terms(s, p, &mask)?;
    out.v.axpy(p.mu, &laplacian(&s.v));
    out.b.axpy(-p.eta, &curl(&curl(&s.b)));
    if p.model != Model::Mhd {
        out.m.axpy(p.chi, &laplacian(&s.m));
    }
    out.v.apply_mask(&mask);
    out.b.apply_mask(&mask);
    out.m.apply_mask(&mask);
    Ok(out)
}

pub fn rhs_velocity(
    s: &StateVector,
    p: &PhysicalParams,
    trunc: &Truncation,
) -> Result<SpectralField> {
    Ok(rhs(s, p, trunc)?.v)
}

/// Divergence-free by construction; audited against `1e-12`.
pub fn rhs_magnetic(
    s: &StateVector,
    p: &PhysicalParams,
    trunc: &Truncation,
) -> Result<SpectralField> {
    let b = rhs(s, p, trunc)?.b;
    let drift = divergence_drift(&b);
    let scale = b.max_abs().max(1.0);
    if drift > 1e-12 * scale {
        return Err(Error::Invariant(format!(
            "induction right side has divergence {drift:e}"
        )));
    }
    Ok(b)
}

pub fn rhs_magnetisation(
    s: &StateVector,
    p: &PhysicalParams,
    trunc: &Truncation,
) -> Result<SpectralField> {
    Ok(rhs(s, p, trunc)?.m)
}

/// Largest spectral divergence `max_k |k·û(k)|`.
pub fn divergence_drift(u: &SpectralField) -> f64 {
    let g = *u.grid();
    let len = g.len();
    let c = u.coeffs();
    let ks = g.wavevectors();
    (0..len)
        .map(|idx| {
            let k = ks[idx];
            (c[idx] * k[0] + c[len + idx] * k[1] + c[2 * len + idx] * k[2]).norm()
        })
        .fold(0.0, f64::max)
}
