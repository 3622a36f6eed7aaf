use crate::dynamics::Rhs;
use crate::fields::{inverse_many, SpectralField, StateVector};

/// `(Σ_k (1+|k|²)^order |û(k)|²)^{1/2}`, scaled by the box volume so that
/// order 0 is the `L²(Ω)` norm.
///
/// # Panics
/// If `order > 3`.
pub fn sobolev_norm(u: &SpectralField, order: u32) -> f64 {
    assert!(order <= 3, "Sobolev order must be in 0..=3, got {order}");
    let g = u.grid();
    let len = g.len();
    let weights: Vec<f64> = (0..len)
        .map(|idx| {
            let (ix, iy, iz) = g.unflat(idx);
            let k = [g.wavenumber(ix), g.wavenumber(iy), g.wavenumber(iz)];
            (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).powi(order as i32)
        })
        .collect();
    let sum: f64 = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| weights[i % len] * c.norm_sqr())
        .sum();
    (sum * g.volume()).sqrt()
}

fn sq(u: &SpectralField, order: u32) -> f64 {
    sobolev_norm(u, order).powi(2)
}

/// `‖v‖²_{H²} + ‖B‖²_{H²} + ‖m‖²_{H³} + ‖∂t v‖² + ‖∂t B‖² + ‖∂t m‖²_{H¹}`
pub fn energy_j(s: &StateVector, sdot: &Rhs) -> f64 {
    sq(&s.v, 2) + sq(&s.b, 2) + sq(&s.m, 3) + sq(&sdot.v, 0) + sq(&sdot.b, 0) + sq(&sdot.m, 1)
}

/// `‖v‖²_{H¹} + ‖B‖²_{H¹} + ‖m‖²_{H²} + ‖∂t v‖² + ‖∂t B‖² + ‖∂t m‖²_{H¹}`
pub fn energy_e(s: &StateVector, sdot: &Rhs) -> f64 {
    sq(&s.v, 1) + sq(&s.b, 1) + sq(&s.m, 2) + sq(&sdot.v, 0) + sq(&sdot.b, 0) + sq(&sdot.m, 1)
}

/// `max_x | |m(x)|² - 1 |` over the collocation points.
pub fn unit_drift(m: &SpectralField) -> f64 {
    let phys = inverse_many(m.grid(), &[m.component(0), m.component(1), m.component(2)]);
    (0..m.grid().len())
        .map(|p| {
            let s = phys[0][p] * phys[0][p] + phys[1][p] * phys[1][p] + phys[2][p] * phys[2][p];
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}
