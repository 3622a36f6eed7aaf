//! Differential and algebraic operators on periodic fields.
//!
//! Derivatives are spectral (`∂ⱼ ↦ i kⱼ`, Nyquist zeroed). Products are formed
//! pointwise on the collocation grid and dealiased on the way back.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fields::{
    forward_many, inverse_many, PhysicalField, PhysicalScalar, SpectralField, SpectralScalar,
};
use crate::grid::Grid;

/// Default pass threshold for the identity suite (relative residual).
pub const IDENTITY_THRESHOLD: f64 = 1e-11;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Velocity gradient `(∇u)_{ij} = ∂ⱼ uᵢ` sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    grid: Grid,
    values: Vec<f64>,
}

impl TensorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Samples of `∂ⱼ uᵢ`.
    pub fn entry(&self, i: usize, j: usize) -> &[f64] {
        let len = self.grid.len();
        let slot = 3 * i + j;
        &self.values[slot * len..(slot + 1) * len]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn trace(&self) -> Vec<f64> {
        let len = self.grid.len();
        (0..len)
            .map(|p| self.entry(0, 0)[p] + self.entry(1, 1)[p] + self.entry(2, 2)[p])
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `∂_axis` of one component array.
pub(crate) fn derivative(grid: &Grid, comp: &[Complex64], axis: usize) -> Vec<Complex64> {
    let ks = grid.wavevectors();
    comp.iter()
        .zip(ks.iter())
        .map(|(c, k)| c * (I * k[axis]))
        .collect()
}

pub fn curl(u: &SpectralField) -> SpectralField {
    let g = *u.grid();
    let (ux, uy, uz) = (u.component(0), u.component(1), u.component(2));
    let mut out = SpectralField::zeros(g);
    let ks = g.wavevectors();
    for idx in 0..g.len() {
        let k = ks[idx];
        let cx = I * (k[1] * uz[idx] - k[2] * uy[idx]);
        let cy = I * (k[2] * ux[idx] - k[0] * uz[idx]);
        let cz = I * (k[0] * uy[idx] - k[1] * ux[idx]);
        out.component_mut(0)[idx] = cx;
        out.component_mut(1)[idx] = cy;
        out.component_mut(2)[idx] = cz;
    }
    out
}

pub fn divergence(u: &SpectralField) -> SpectralScalar {
    let g = *u.grid();
    let ks = g.wavevectors();
    let coeffs = (0..g.len())
        .map(|idx| {
            let k = ks[idx];
            I * (k[0] * u.component(0)[idx]
                + k[1] * u.component(1)[idx]
                + k[2] * u.component(2)[idx])
        })
        .collect();
    SpectralScalar::from_coeffs(g, coeffs).expect("length preserved")
}

/// Gradient of a scalar.
pub fn gradient(q: &SpectralScalar) -> SpectralField {
    let g = *q.grid();
    let comps = [0, 1, 2].map(|axis| derivative(&g, q.coeffs(), axis));
    SpectralField::from_components(g, comps)
}

pub fn laplacian(u: &SpectralField) -> SpectralField {
    let g = *u.grid();
    let mut out = u.clone();
    let len = g.len();
    let ks = g.wavevectors();
    for comp in out.coeffs_mut().chunks_exact_mut(len) {
        for (c, k) in comp.iter_mut().zip(ks.iter()) {
            *c *= -(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        }
    }
    out
}

/// All nine partials, returned on the grid.
pub fn gradient_vec(u: &SpectralField) -> TensorField {
    let g = *u.grid();
    let parts: Vec<Vec<Complex64>> = (0..9)
        .map(|slot| derivative(&g, u.component(slot / 3), slot % 3))
        .collect();
    let refs: Vec<&[Complex64]> = parts.iter().map(|p| p.as_slice()).collect();
    let values = inverse_many(&g, &refs).concat();
    TensorField { grid: g, values }
}

/// Leray projection `(I - kkᵀ/|k|²)û` per mode; modes with `k = 0` pass through.
pub fn leray_project(w: &SpectralField) -> SpectralField {
    let g = *w.grid();
    let mut out = w.clone();
    let len = g.len();
    let ks = g.wavevectors();
    for idx in 0..len {
        let k = ks[idx];
        let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if ksq == 0.0 {
            continue;
        }
        let c = out.coeffs();
        let kdotu = (c[idx] * k[0] + c[len + idx] * k[1] + c[2 * len + idx] * k[2]) / ksq;
        let cm = out.coeffs_mut();
        for (a, ka) in k.iter().enumerate() {
            cm[a * len + idx] -= kdotu * *ka;
        }
    }
    out
}

/// Stokes operator `A w = -P Δ w`.
pub fn stokes(w: &SpectralField) -> SpectralField {
    leray_project(&laplacian(w)).scaled(-1.0)
}

pub fn cross(u: &PhysicalField, v: &PhysicalField) -> Result<PhysicalField> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let g = *u.grid();
    Ok(PhysicalField::from_components(
        g,
        cross_parts(
            [u.component(0), u.component(1), u.component(2)],
            [v.component(0), v.component(1), v.component(2)],
        ),
    ))
}

pub(crate) fn cross_parts(u: [&[f64]; 3], v: [&[f64]; 3]) -> [Vec<f64>; 3] {
    let len = u[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for p in 0..len {
        out[0][p] = u[1][p] * v[2][p] - u[2][p] * v[1][p];
        out[1][p] = u[2][p] * v[0][p] - u[0][p] * v[2][p];
        out[2][p] = u[0][p] * v[1][p] - u[1][p] * v[0][p];
    }
    out
}

pub fn dot(u: &PhysicalField, v: &PhysicalField) -> Result<PhysicalScalar> {
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let len = u.grid().len();
    let values = (0..len)
        .map(|p| (0..3).map(|c| u.component(c)[p] * v.component(c)[p]).sum())
        .collect();
    PhysicalScalar::from_values(*u.grid(), values)
}

/// `(u·∇)w` on the grid: `Σⱼ uⱼ ∂ⱼ wᵢ`.
pub(crate) fn advect_parts(u: [&[f64]; 3], grad_w: &[Vec<f64>]) -> [Vec<f64>; 3] {
    let len = u[0].len();
    let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for (i, o) in out.iter_mut().enumerate() {
        for p in 0..len {
            o[p] = u[0][p] * grad_w[3 * i][p]
                + u[1][p] * grad_w[3 * i + 1][p]
                + u[2][p] * grad_w[3 * i + 2][p];
        }
    }
    out
}

/// Forward-transform three physical components and zero the modes outside `mask`.
pub(crate) fn to_spectral_masked(
    grid: &Grid,
    parts: &[Vec<f64>; 3],
    mask: &[bool],
) -> SpectralField {
    let refs = [
        parts[0].as_slice(),
        parts[1].as_slice(),
        parts[2].as_slice(),
    ];
    let comps = forward_many(grid, &refs);
    let mut f = SpectralField::from_components(*grid, comps.try_into().expect("three components"));
    f.apply_mask(mask);
    f
}

/// Convective derivative `(u·∇)w`, pseudo-spectral and dealiased.
pub fn convective(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    u.same_grid(w)?;
    let g = *u.grid();
    let up = inverse_many(&g, &[u.component(0), u.component(1), u.component(2)]);
    let gw = gradient_vec(w);
    let len = g.len();
    let grad: Vec<Vec<f64>> = gw.values.chunks_exact(len).map(|c| c.to_vec()).collect();
    let parts = advect_parts([&up[0], &up[1], &up[2]], &grad);
    Ok(to_spectral_masked(&g, &parts, &g.dealias_mask()))
}

/// One line of the identity table.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub residual: f64,
    pub threshold: f64,
}

impl IdentityResidual {
    pub fn pass(&self) -> bool {
        self.residual < self.threshold
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub n: usize,
    pub seed: u64,
    pub rows: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(IdentityResidual::pass)
    }

    /// Plain-text table: identity, residual, threshold, pass/fail.
    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<28} {:>12} {:>12}  {}\n",
            "identity", "residual", "threshold", "status"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<28} {:>12.3e} {:>12.1e}  {}\n",
                r.name,
                r.residual,
                r.threshold,
                if r.pass() { "pass" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Input data for the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityInputs {
    /// Random fields on half the dealias band.
    Random { seed: u64 },
    /// All fields zero.
    Zero,
}

/// Options for [`identity_suite_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityOptions {
    pub inputs: IdentityInputs,
    pub threshold: f64,
    /// Flip the sign of `(u·∇)v` in the curl-of-cross right side. Only for
    /// checking that the suite can fail.
    pub mis_signed_curl_cross: bool,
}

/// Residuals of the four vector-calculus identities on random
/// half-band-limited fields.
pub fn identity_suite(grid: Grid, seed: u64) -> IdentityReport {
    identity_suite_with(
        grid,
        IdentityOptions {
            inputs: IdentityInputs::Random { seed },
            threshold: IDENTITY_THRESHOLD,
            mis_signed_curl_cross: false,
        },
    )
}

pub fn identity_suite_with(grid: Grid, opts: IdentityOptions) -> IdentityReport {
    let (u, v, w, seed) = match opts.inputs {
        IdentityInputs::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let band = ((grid.dealias_cutoff() / grid.k_unit()) / 2.0).floor() as u64;
            (
                half_band_field(&grid, &mut rng, band),
                half_band_field(&grid, &mut rng, band),
                half_band_field(&grid, &mut rng, band),
                seed,
            )
        }
        IdentityInputs::Zero => (
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
            SpectralField::zeros(grid),
            0,
        ),
    };
    let t = opts.threshold;
    let (lhs, rhs) = curl_cross_sides(&u, &v, opts.mis_signed_curl_cross);
    let rows = vec![
        IdentityResidual {
            name: "curl(u x v) expansion",
            residual: relative(&lhs.sub(&rhs), &lhs, &rhs),
            threshold: t,
        },
        IdentityResidual {
            name: "curl^2 u = grad div u - lap u",
            residual: curl_squared_residual(&u),
            threshold: t,
        },
        IdentityResidual {
            name: "triple cross product",
            residual: triple_cross_residual(&u, &v, &w),
            threshold: t,
        },
        IdentityResidual {
            name: "lap |u|^2 expansion",
            residual: laplacian_of_square_residual(&u),
            threshold: t,
        },
    ];
    IdentityReport {
        n: grid.n(),
        seed,
        rows,
    }
}

fn half_band_field(grid: &Grid, rng: &mut ChaCha8Rng, band: u64) -> SpectralField {
    let len = grid.len();
    let mut f = SpectralField::zeros(*grid);
    for c in 0..3 {
        let comp = f.component_mut(c);
        for (idx, coeff) in comp.iter_mut().enumerate() {
            let (ix, iy, iz) = grid.unflat(idx);
            if [ix, iy, iz]
                .iter()
                .all(|&i| grid.mode(i).unsigned_abs() <= band)
            {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                *coeff = Complex64::new(re, im);
            }
        }
        let raw = comp.to_vec();
        for idx in 0..len {
            comp[idx] = (raw[idx] + raw[grid.negate_flat(idx)].conj()) * 0.5;
        }
    }
    f
}

fn relative(diff: &SpectralField, a: &SpectralField, b: &SpectralField) -> f64 {
    let scale = a.l2_norm().max(b.l2_norm());
    if scale == 0.0 {
        diff.l2_norm()
    } else {
        diff.l2_norm() / scale
    }
}

/// Both sides of `curl(u×v) = u(div v) - v(div u) + (v·∇)u - (u·∇)v`, in spectral space.
pub fn curl_cross_sides(
    u: &SpectralField,
    v: &SpectralField,
    mis_signed: bool,
) -> (SpectralField, SpectralField) {
    let g = *u.grid();
    let all = vec![true; g.len()];
    let up = inverse_many(&g, &[u.component(0), u.component(1), u.component(2)]);
    let vp = inverse_many(&g, &[v.component(0), v.component(1), v.component(2)]);
    let uxv = cross_parts([&up[0], &up[1], &up[2]], [&vp[0], &vp[1], &vp[2]]);
    let lhs = curl(&to_spectral_masked(&g, &uxv, &all));

    let len = g.len();
    let split = |t: TensorField| -> Vec<Vec<f64>> {
        t.values.chunks_exact(len).map(|c| c.to_vec()).collect()
    };
    let gu = split(gradient_vec(u));
    let gv = split(gradient_vec(v));
    let div_u: Vec<f64> = (0..len).map(|p| gu[0][p] + gu[4][p] + gu[8][p]).collect();
    let div_v: Vec<f64> = (0..len).map(|p| gv[0][p] + gv[4][p] + gv[8][p]).collect();
    let v_grad_u = advect_parts([&vp[0], &vp[1], &vp[2]], &gu);
    let u_grad_v = advect_parts([&up[0], &up[1], &up[2]], &gv);
    let sign = if mis_signed { 1.0 } else { -1.0 };
    let parts: [Vec<f64>; 3] = std::array::from_fn(|i| {
        (0..len)
            .map(|p| {
                up[i][p] * div_v[p] - vp[i][p] * div_u[p] + v_grad_u[i][p] + sign * u_grad_v[i][p]
            })
            .collect()
    });
    let rhs = to_spectral_masked(&g, &parts, &all);
    (lhs, rhs)
}

fn curl_squared_residual(u: &SpectralField) -> f64 {
    let lhs = curl(&curl(u));
    let rhs = gradient(&divergence(u)).sub(&laplacian(u));
    relative(&lhs.sub(&rhs), &lhs, &rhs)
}

fn triple_cross_residual(u: &SpectralField, v: &SpectralField, w: &SpectralField) -> f64 {
    let g = *u.grid();
    let len = g.len();
    let up = inverse_many(&g, &[u.component(0), u.component(1), u.component(2)]);
    let vp = inverse_many(&g, &[v.component(0), v.component(1), v.component(2)]);
    let wp = inverse_many(&g, &[w.component(0), w.component(1), w.component(2)]);
    let vxw = cross_parts([&vp[0], &vp[1], &vp[2]], [&wp[0], &wp[1], &wp[2]]);
    let lhs = cross_parts([&up[0], &up[1], &up[2]], [&vxw[0], &vxw[1], &vxw[2]]);
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for p in 0..len {
        let uw: f64 = (0..3).map(|c| up[c][p] * wp[c][p]).sum();
        let uv: f64 = (0..3).map(|c| up[c][p] * vp[c][p]).sum();
        for c in 0..3 {
            let r = uw * vp[c][p] - uv * wp[c][p];
            diff += (lhs[c][p] - r).powi(2);
            scale = scale.max(lhs[c][p].abs()).max(r.abs());
        }
    }
    let diff = (diff / (3 * len) as f64).sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn laplacian_of_square_residual(u: &SpectralField) -> f64 {
    let g = *u.grid();
    let len = g.len();
    let up = inverse_many(&g, &[u.component(0), u.component(1), u.component(2)]);
    let sq: Vec<f64> = (0..len)
        .map(|p| up[0][p].powi(2) + up[1][p].powi(2) + up[2][p].powi(2))
        .collect();
    let sq_hat = forward_many(&g, &[&sq]).pop().unwrap();
    let lap_sq: Vec<Complex64> = sq_hat
        .iter()
        .enumerate()
        .map(|(idx, c)| c * -g.ksq(idx))
        .collect();

    let gu = gradient_vec(u);
    let lu = laplacian(u);
    let lup = inverse_many(&g, &[lu.component(0), lu.component(1), lu.component(2)]);
    let rhs: Vec<f64> = (0..len)
        .map(|p| {
            let grad_sq: f64 = gu.values.chunks_exact(len).map(|c| c[p] * c[p]).sum();
            let u_lap: f64 = (0..3).map(|c| up[c][p] * lup[c][p]).sum();
            2.0 * grad_sq + 2.0 * u_lap
        })
        .collect();
    let rhs_hat = forward_many(&g, &[&rhs]).pop().unwrap();
    let diff: f64 = lap_sq
        .iter()
        .zip(&rhs_hat)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let na: f64 = lap_sq.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let nb: f64 = rhs_hat.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let scale = na.max(nb);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
