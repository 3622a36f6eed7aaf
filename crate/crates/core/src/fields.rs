//! Field representations and spectral/physical transforms.
//!
//! Spectral coefficients are Fourier-series coefficients: the forward
//! transform divides by `n³`, so the `k = 0` mode is the mean and
//! `Σ|û|² = ⟨|u|²⟩` (grid average). Vector fields are stored component-major,
//! with flat index `(c·n + kx)·n² + ky·n + kz`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::calculus::leray_project;
use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::grid::Grid;

/// Relative imaginary residue tolerated by [`to_physical`].
pub const IMAG_RESIDUE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralScalar {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalScalar {
    grid: Grid,
    values: Vec<f64>,
}

fn check_len<T>(grid: &Grid, data: &[T], comps: usize) -> Result<()> {
    if data.len() != comps * grid.len() {
        return Err(Error::Input(format!(
            "expected {} entries for a {}-component field on {}³, got {}",
            comps * grid.len(),
            comps,
            grid.n(),
            data.len()
        )));
    }
    Ok(())
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); 3 * grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, &coeffs, 3)?;
        Ok(Self { grid, coeffs })
    }

    pub fn from_components(grid: Grid, comps: [Vec<Complex64>; 3]) -> Self {
        let mut coeffs = Vec::with_capacity(3 * grid.len());
        for c in comps {
            assert_eq!(c.len(), grid.len());
            coeffs.extend(c);
        }
        Self { grid, coeffs }
    }

    /// Spatially uniform field with value `c`.
    pub fn constant(grid: Grid, c: [f64; 3]) -> Self {
        let mut f = Self::zeros(grid);
        for (i, &ci) in c.iter().enumerate() {
            f.component_mut(i)[0] = Complex64::new(ci, 0.0);
        }
        f
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    pub fn same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self += a·x`
    pub fn axpy(&mut self, a: f64, x: &SpectralField) {
        debug_assert_eq!(self.grid, x.grid);
        for (s, xi) in self.coeffs.iter_mut().zip(&x.coeffs) {
            *s += xi * a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Zero every mode where `mask` is false.
    pub fn apply_mask(&mut self, mask: &[bool]) {
        let len = self.grid.len();
        for comp in self.coeffs.chunks_exact_mut(len) {
            for (c, &keep) in comp.iter_mut().zip(mask) {
                if !keep {
                    *c = Complex64::default();
                }
            }
        }
    }

    /// `L²(Ω)` inner product via Parseval.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        s * self.grid.volume()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Sum of `|û|²` over all modes and components.
    pub fn coeff_energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|û(k) - conj(û(-k))|`.
    pub fn symmetry_defect(&self) -> f64 {
        symmetry_defect(&self.grid, &self.coeffs)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn to_physical(&self) -> Result<PhysicalField> {
        to_physical(self)
    }
}

impl SpectralScalar {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, &coeffs, 1)?;
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        (self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume()).sqrt()
    }

    pub fn to_physical(&self) -> Result<PhysicalScalar> {
        let values = inverse_checked(&self.grid, &self.coeffs)?;
        Ok(PhysicalScalar {
            grid: self.grid,
            values,
        })
    }
}

impl PhysicalField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; 3 * grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values, 3)?;
        Ok(Self { grid, values })
    }

    pub(crate) fn from_components(grid: Grid, comps: [Vec<f64>; 3]) -> Self {
        let mut values = Vec::with_capacity(3 * grid.len());
        for c in comps {
            values.extend(c);
        }
        Self { grid, values }
    }

    /// Samples `f(x, y, z)` at the collocation points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let len = grid.len();
        let mut values = vec![0.0; 3 * len];
        for idx in 0..len {
            let (ix, iy, iz) = grid.unflat(idx);
            let u = f(grid.point(ix), grid.point(iy), grid.point(iz));
            for c in 0..3 {
                values[c * len + idx] = u[c];
            }
        }
        Self { grid, values }
    }

    pub fn uniform(grid: Grid, c: [f64; 3]) -> Self {
        Self::from_fn(grid, |_, _, _| c)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    pub fn at(&self, idx: usize) -> [f64; 3] {
        let len = self.grid.len();
        [
            self.values[idx],
            self.values[len + idx],
            self.values[2 * len + idx],
        ]
    }

    pub fn set(&mut self, idx: usize, u: [f64; 3]) {
        let len = self.grid.len();
        self.values[idx] = u[0];
        self.values[len + idx] = u[1];
        self.values[2 * len + idx] = u[2];
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn sub(&self, other: &PhysicalField) -> PhysicalField {
        PhysicalField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn to_spectral(&self) -> Result<SpectralField> {
        to_spectral(self)
    }
}

impl PhysicalScalar {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, &values, 1)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let (ix, iy, iz) = grid.unflat(idx);
                f(grid.point(ix), grid.point(iy), grid.point(iz))
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_spectral(&self) -> Result<SpectralScalar> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: format!("scalar field at point {i}"),
            });
        }
        let coeffs = forward_many(&self.grid, &[&self.values]).pop().unwrap();
        Ok(SpectralScalar {
            grid: self.grid,
            coeffs,
        })
    }
}

/// Forward transform. Rejects non-finite samples; the result is exactly
/// conjugate-symmetric.
pub fn to_spectral(f: &PhysicalField) -> Result<SpectralField> {
    if let Some(i) = f.values.iter().position(|v| !v.is_finite()) {
        let len = f.grid.len();
        return Err(Error::NonFinite {
            what: format!("physical field component {} at point {}", i / len, i % len),
        });
    }
    let comps = forward_many(&f.grid, &[f.component(0), f.component(1), f.component(2)]);
    let mut coeffs = Vec::with_capacity(3 * f.grid.len());
    for c in comps {
        coeffs.extend(c);
    }
    Ok(SpectralField {
        grid: f.grid,
        coeffs,
    })
}

/// Inverse transform. An imaginary residue above [`IMAG_RESIDUE_TOL`]
/// (relative to the largest real sample) means the coefficients were not
/// conjugate-symmetric and is reported as corrupted state.
pub fn to_physical(f: &SpectralField) -> Result<PhysicalField> {
    let mut values = Vec::with_capacity(3 * f.grid.len());
    for c in 0..3 {
        values.extend(inverse_checked(&f.grid, f.component(c))?);
    }
    Ok(PhysicalField {
        grid: f.grid,
        values,
    })
}

fn inverse_checked(grid: &Grid, coeffs: &[Complex64]) -> Result<Vec<f64>> {
    let fft = Fft3::for_size(grid.n());
    let mut data = coeffs.to_vec();
    fft.inverse(&mut data);
    let max_re = data.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
    let max_im = data.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
    if !(max_re.is_finite() && max_im.is_finite()) {
        return Err(Error::NonFinite {
            what: "spectral coefficients".into(),
        });
    }
    if max_im > 0.0 {
        let residue = if max_re > 0.0 {
            max_im / max_re
        } else {
            f64::INFINITY
        };
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::BrokenSymmetry { residue });
        }
    }
    Ok(data.into_iter().map(|c| c.re).collect())
}

/// Inverse transforms of conjugate-symmetric component arrays, two per FFT.
/// No symmetry audit; callers guarantee it.
pub(crate) fn inverse_many(grid: &Grid, comps: &[&[Complex64]]) -> Vec<Vec<f64>> {
    let fft = Fft3::for_size(grid.n());
    let len = grid.len();
    let mut out = Vec::with_capacity(comps.len());
    let i = Complex64::new(0.0, 1.0);
    for pair in comps.chunks(2) {
        let mut data: Vec<Complex64> = match pair {
            [a, b] => a.iter().zip(b.iter()).map(|(x, y)| x + i * y).collect(),
            [a] => a.to_vec(),
            _ => unreachable!(),
        };
        debug_assert_eq!(data.len(), len);
        fft.inverse(&mut data);
        out.push(data.iter().map(|c| c.re).collect());
        if pair.len() == 2 {
            out.push(data.iter().map(|c| c.im).collect());
        }
    }
    out
}

/// Forward transforms of real arrays, two per FFT, scaled by `1/n³` and
/// split into exactly conjugate-symmetric spectra.
pub(crate) fn forward_many(grid: &Grid, comps: &[&[f64]]) -> Vec<Vec<Complex64>> {
    let fft = Fft3::for_size(grid.n());
    let len = grid.len();
    let scale = 1.0 / len as f64;
    let neg: Vec<usize> = (0..len).map(|idx| grid.negate_flat(idx)).collect();
    let mut out = Vec::with_capacity(comps.len());
    for pair in comps.chunks(2) {
        let mut data: Vec<Complex64> = match pair {
            [a, b] => a
                .iter()
                .zip(b.iter())
                .map(|(&x, &y)| Complex64::new(x, y))
                .collect(),
            [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            _ => unreachable!(),
        };
        fft.forward(&mut data);
        for c in data.iter_mut() {
            *c *= scale;
        }
        let mut first = vec![Complex64::default(); len];
        let mut second = if pair.len() == 2 {
            vec![Complex64::default(); len]
        } else {
            Vec::new()
        };
        for idx in 0..len {
            let h = data[idx];
            let hm = data[neg[idx]].conj();
            first[idx] = (h + hm) * 0.5;
            if pair.len() == 2 {
                let d = h - hm;
                second[idx] = Complex64::new(0.5 * d.im, -0.5 * d.re);
            }
        }
        out.push(first);
        if pair.len() == 2 {
            out.push(second);
        }
    }
    out
}

pub(crate) fn symmetry_defect(grid: &Grid, coeffs: &[Complex64]) -> f64 {
    let len = grid.len();
    let mut worst = 0.0f64;
    for comp in coeffs.chunks_exact(len) {
        for idx in 0..len {
            let d = comp[idx] - comp[grid.negate_flat(idx)].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// The unknowns `(v, B, m)` at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub v: SpectralField,
    pub b: SpectralField,
    pub m: SpectralField,
    pub time: f64,
}

impl StateVector {
    pub fn new(v: SpectralField, b: SpectralField, m: SpectralField, time: f64) -> Result<Self> {
        v.same_grid(&b)?;
        v.same_grid(&m)?;
        Ok(Self { v, b, m, time })
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.b.is_finite() && self.m.is_finite()
    }

    pub fn fields(&self) -> [&SpectralField; 3] {
        [&self.v, &self.b, &self.m]
    }
}

/// Which right-hand side the dynamics evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Model {
    /// The full coupled system.
    #[default]
    Full,
    /// Only the diffusive terms `μΔv`, `ηΔB`, `χΔm`; every nonlinear and
    /// coupling term is switched off.
    Diffusion,
    /// Viscous resistive MHD for `(v, B)` with `m` frozen: the magnetisation
    /// equation and its coupling forces are switched off.
    Mhd,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Full => "full",
            Model::Diffusion => "diffusion",
            Model::Mhd => "mhd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Model::Full),
            "diffusion" => Some(Model::Diffusion),
            "mhd" => Some(Model::Mhd),
            _ => None,
        }
    }
}

/// Viscosity `mu`, magnetic diffusivity `eta`, gyromagnetic ratio `gamma`, damping `chi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mu: f64,
    pub eta: f64,
    pub gamma: f64,
    pub chi: f64,
    pub model: Model,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            eta: 1.0,
            gamma: 1.0,
            chi: 1.0,
            model: Model::Full,
        }
    }
}

impl PhysicalParams {
    pub fn new(mu: f64, eta: f64, gamma: f64, chi: f64) -> Result<Self> {
        let p = Self {
            mu,
            eta,
            gamma,
            chi,
            model: Model::Full,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = model;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("mu", self.mu), ("eta", self.eta), ("chi", self.chi)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.gamma.is_finite() && self.gamma != 0.0) {
            return Err(Error::InvalidParameter("gamma must be nonzero".into()));
        }
        Ok(())
    }
}

/// Direction of the constant part of the initial magnetisation.
pub const M_BASE: [f64; 3] = [0.0, 0.0, 1.0];

/// Largest per-axis integer mode of the random velocity and magnetic data:
/// half the dealias cutoff, so quadratic products stay alias-free.
pub fn flow_band(grid: &Grid) -> usize {
    ((grid.dealias_cutoff() / grid.k_unit()) / 2.0)
        .floor()
        .max(1.0) as usize
}

/// Largest per-axis integer mode of the magnetisation perturbation: a quarter
/// of the cutoff, so the cubic harmonics created by pointwise normalization
/// stay inside the retained band.
pub fn magnetisation_band(grid: &Grid) -> usize {
    ((grid.dealias_cutoff() / grid.k_unit()) / 4.0)
        .floor()
        .max(1.0) as usize
}

/// Smooth random initial data.
///
/// `v` and `B` have Gaussian coefficients with standard deviation
/// `amplitude·(2/(1+|k|))^decay_exponent` on the modes with every
/// `|k_i| <= flow_band`, Leray-projected. `m` is the pointwise normalization
/// of `M_BASE` plus a perturbation drawn the same way on the
/// `magnetisation_band` modes.
pub fn random_state(
    grid: Grid,
    seed: u64,
    decay_exponent: f64,
    amplitude: f64,
) -> Result<StateVector> {
    if !(decay_exponent >= 4.0) {
        return Err(Error::InvalidParameter(format!(
            "decay_exponent must be at least 4, got {decay_exponent}"
        )));
    }
    if !amplitude.is_finite() {
        return Err(Error::InvalidParameter("amplitude must be finite".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = random_band_field(&grid, &mut rng, flow_band(&grid), decay_exponent, amplitude);
    let b = random_band_field(&grid, &mut rng, flow_band(&grid), decay_exponent, amplitude);
    let v = leray_project(&v);
    let b = leray_project(&b);

    let dm = random_band_field(
        &grid,
        &mut rng,
        magnetisation_band(&grid),
        decay_exponent,
        amplitude,
    );
    let mut m_phys = to_physical(&dm)?;
    for idx in 0..grid.len() {
        let p = m_phys.at(idx);
        let u = [M_BASE[0] + p[0], M_BASE[1] + p[1], M_BASE[2] + p[2]];
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidParameter(
                "magnetisation perturbation cancels the base direction; lower the amplitude".into(),
            ));
        }
        m_phys.set(idx, [u[0] / norm, u[1] / norm, u[2] / norm]);
    }
    let m = to_spectral(&m_phys)?;
    StateVector::new(v, b, m, 0.0)
}

fn random_band_field(
    grid: &Grid,
    rng: &mut ChaCha8Rng,
    band: usize,
    decay_exponent: f64,
    amplitude: f64,
) -> SpectralField {
    let len = grid.len();
    let mut f = SpectralField::zeros(*grid);
    if amplitude == 0.0 {
        return f;
    }
    let band = band as u64;
    for c in 0..3 {
        let comp = f.component_mut(c);
        for (idx, coeff) in comp.iter_mut().enumerate() {
            let (ix, iy, iz) = grid.unflat(idx);
            let modes = [grid.mode(ix), grid.mode(iy), grid.mode(iz)];
            if modes == [0, 0, 0] || modes.iter().any(|m| m.unsigned_abs() > band) {
                continue;
            }
            let kmag = (modes.iter().map(|&m| (m * m) as f64).sum::<f64>()).sqrt() * grid.k_unit();
            let sd = amplitude * (2.0 / (1.0 + kmag)).powf(decay_exponent);
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            *coeff = Complex64::new(re, im) * sd;
        }
        // Hermitian part, exactly symmetric
        let raw = comp.to_vec();
        for idx in 0..len {
            comp[idx] = (raw[idx] + raw[grid.negate_flat(idx)].conj()) * 0.5;
        }
    }
    f
}
