#![allow(dead_code)]

use fmhd::calculus::leray_project;
use fmhd::{Grid, PhysicalField, SpectralField, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random field `Σ a cos(k·x) + b sin(k·x)` over `|k|∞ <= 1`.
pub fn band_one_field(grid: Grid, rng: &mut ChaCha8Rng, amp: f64) -> SpectralField {
    let mut terms = Vec::new();
    for kx in -1i32..=1 {
        for ky in -1i32..=1 {
            for kz in -1i32..=1 {
                let k = [kx as f64, ky as f64, kz as f64];
                let a: [f64; 3] = std::array::from_fn(|_| amp * rng.random_range(-1.0..1.0));
                let b: [f64; 3] = std::array::from_fn(|_| amp * rng.random_range(-1.0..1.0));
                terms.push((k, a, b));
            }
        }
    }
    PhysicalField::from_fn(grid, |x, y, z| {
        let mut out = [0.0; 3];
        for (k, a, b) in &terms {
            let phase = k[0] * x + k[1] * y + k[2] * z;
            let (s, c) = phase.sin_cos();
            for i in 0..3 {
                out[i] += a[i] * c + b[i] * s;
            }
        }
        out
    })
    .to_spectral()
    .unwrap()
}

/// Random state with every field supported on `|k|∞ <= 1`; `v` and `B`
/// divergence-free, `m` a unit-ish perturbation of `(0, 0, 1)`.
pub fn band_one_state(grid: Grid, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = leray_project(&band_one_field(grid, &mut rng, 0.5));
    let b = leray_project(&band_one_field(grid, &mut rng, 0.5));
    let mut m = band_one_field(grid, &mut rng, 0.2);
    m.component_mut(2)[0].re += 1.0;
    StateVector::new(v, b, m, 0.0).unwrap()
}

/// Fourth-order central differences on the periodic collocation grid.
pub struct Stencil {
    grid: Grid,
}

impl Stencil {
    pub fn new(grid: Grid) -> Self {
        Self { grid }
    }

    fn shift(&self, idx: usize, axis: usize, by: isize) -> usize {
        let n = self.grid.n();
        let (ix, iy, iz) = self.grid.unflat(idx);
        let mut c = [ix, iy, iz];
        c[axis] = (c[axis] as isize + by).rem_euclid(n as isize) as usize;
        self.grid.flat(c[0], c[1], c[2])
    }

    pub fn d1(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let h = self.grid.spacing();
        (0..f.len())
            .map(|i| {
                let p1 = f[self.shift(i, axis, 1)];
                let p2 = f[self.shift(i, axis, 2)];
                let m1 = f[self.shift(i, axis, -1)];
                let m2 = f[self.shift(i, axis, -2)];
                (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h)
            })
            .collect()
    }

    pub fn d2(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let h = self.grid.spacing();
        (0..f.len())
            .map(|i| {
                let p1 = f[self.shift(i, axis, 1)];
                let p2 = f[self.shift(i, axis, 2)];
                let m1 = f[self.shift(i, axis, -1)];
                let m2 = f[self.shift(i, axis, -2)];
                (-p2 + 16.0 * p1 - 30.0 * f[i] + 16.0 * m1 - m2) / (12.0 * h * h)
            })
            .collect()
    }

    /// `grad[c][j] = ∂_j u_c`
    pub fn grad(&self, u: &PhysicalField) -> [[Vec<f64>; 3]; 3] {
        std::array::from_fn(|c| std::array::from_fn(|j| self.d1(u.component(c), j)))
    }

    pub fn laplacian(&self, u: &PhysicalField) -> [Vec<f64>; 3] {
        std::array::from_fn(|c| {
            let f = u.component(c);
            let mut out = self.d2(f, 0);
            for axis in 1..3 {
                for (o, x) in out.iter_mut().zip(self.d2(f, axis)) {
                    *o += x;
                }
            }
            out
        })
    }
}

/// `(u·∇)w` from a precomputed gradient of `w`.
pub fn advect(u: &PhysicalField, grad_w: &[[Vec<f64>; 3]; 3]) -> [Vec<f64>; 3] {
    let len = u.grid().len();
    std::array::from_fn(|c| {
        (0..len)
            .map(|p| (0..3).map(|j| u.component(j)[p] * grad_w[c][j][p]).sum())
            .collect()
    })
}

pub fn cross_at(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn from_parts(grid: Grid, parts: &[Vec<f64>; 3]) -> PhysicalField {
    let mut values = Vec::with_capacity(3 * grid.len());
    for c in parts {
        values.extend_from_slice(c);
    }
    PhysicalField::from_values(grid, values).unwrap()
}

/// `‖a - b‖₂ / ‖b‖₂` over the collocation points.
pub fn relative_l2(a: &PhysicalField, b: &PhysicalField) -> f64 {
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let den: f64 = b.values().iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Right sides rebuilt from finite differences; only the Leray projection is
/// spectral. The induction term uses `(B·∇)v - (v·∇)B`, valid for
/// divergence-free `v` and `B`, and `-η curl²B = ηΔB`.
pub struct FdRhs {
    pub v: PhysicalField,
    pub b: PhysicalField,
    pub m: PhysicalField,
}

pub fn fd_rhs(s: &StateVector, p: &fmhd::PhysicalParams) -> FdRhs {
    let g = *s.grid();
    let len = g.len();
    let st = Stencil::new(g);
    let v = s.v.to_physical().unwrap();
    let b = s.b.to_physical().unwrap();
    let m = s.m.to_physical().unwrap();
    let gv = st.grad(&v);
    let gb = st.grad(&b);
    let gm = st.grad(&m);
    let lv = st.laplacian(&v);
    let lb = st.laplacian(&b);
    let lm = st.laplacian(&m);
    let curl_b: [Vec<f64>; 3] = [
        (0..len).map(|i| gb[2][1][i] - gb[1][2][i]).collect(),
        (0..len).map(|i| gb[0][2][i] - gb[2][0][i]).collect(),
        (0..len).map(|i| gb[1][0][i] - gb[0][1][i]).collect(),
    ];
    let at = |f: &PhysicalField, i: usize| f.at(i);
    let at3 = |f: &[Vec<f64>; 3], i: usize| [f[0][i], f[1][i], f[2][i]];

    let v_grad_v = advect(&v, &gv);
    let b_grad_m = advect(&b, &gm);
    let b_grad_v = advect(&b, &gv);
    let v_grad_b = advect(&v, &gb);
    let v_grad_m = advect(&v, &gm);

    let mut force = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut db = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    let mut dm = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
    for i in 0..len {
        let lorentz = cross_at(at3(&curl_b, i), at(&b, i));
        let mi = at(&m, i);
        let lmi = at3(&lm, i);
        let bi = at(&b, i);
        let grad_m_sq: f64 = (0..3)
            .flat_map(|c| (0..3).map(move |j| (c, j)))
            .map(|(c, j)| gm[c][j][i] * gm[c][j][i])
            .sum();
        let heff = [lmi[0] + bi[0], lmi[1] + bi[1], lmi[2] + bi[2]];
        let prec = cross_at(mi, heff);
        let damp = cross_at(mi, cross_at(mi, bi));
        for c in 0..3 {
            let exchange: f64 = (0..3).map(|k| gm[k][c][i] * lmi[k]).sum();
            force[c][i] = -v_grad_v[c][i] + lorentz[c] + b_grad_m[c][i] - exchange;
            db[c][i] = p.eta * lb[c][i] + b_grad_v[c][i] - v_grad_b[c][i];
            dm[c][i] = -v_grad_m[c][i] + p.chi * (lmi[c] + grad_m_sq * mi[c]) + p.gamma * prec[c]
                - p.chi * damp[c];
        }
    }
    let projected = leray_project(&from_parts(g, &force).to_spectral().unwrap())
        .to_physical()
        .unwrap();
    let mut dv = projected;
    for c in 0..3 {
        for (o, l) in dv.component_mut(c).iter_mut().zip(&lv[c]) {
            *o += p.mu * l;
        }
    }
    FdRhs {
        v: dv,
        b: from_parts(g, &db),
        m: from_parts(g, &dm),
    }
}
