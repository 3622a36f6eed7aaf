//! Periodic box discretization.
//!
//! Index `i` along an axis maps to the integer wavenumber `i` for `i <= n/2` and
//! `i - n` above, so the retained set is `{-n/2+1, ..., n/2}`. Physical
//! wavenumbers carry the factor `2π/box_length`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use crate::error::{Error, Result};

type Wavevectors = Rc<Vec<[f64; 3]>>;

/// Default retained-mode fraction (2/3 rule).
pub const DEFAULT_DEALIAS: f64 = 2.0 / 3.0;

const MASK_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    box_length: f64,
    dealias_fraction: f64,
}

impl Grid {
    pub fn new(n: usize, box_length: f64, dealias_fraction: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two and at least 4, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "box_length must be positive and finite, got {box_length}"
            )));
        }
        if !(dealias_fraction > 0.0 && dealias_fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction must lie in (0, 1], got {dealias_fraction}"
            )));
        }
        Ok(Self {
            n,
            box_length,
            dealias_fraction,
        })
    }

    /// `n³` grid on `[0, 2π)³` with the 2/3 rule.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI, DEFAULT_DEALIAS)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Points (or modes) per scalar component, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn dealias_fraction(&self) -> f64 {
        self.dealias_fraction
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    /// Wavenumber spacing `2π/box_length`.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Integer wavenumber of axis index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        let half = self.n / 2;
        if i <= half {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        self.mode(i) as f64 * self.k_unit()
    }

    /// Wavenumber used for odd derivatives: the Nyquist mode is zeroed.
    pub fn derivative_wavenumber(&self, i: usize) -> f64 {
        if i == self.n / 2 {
            0.0
        } else {
            self.wavenumber(i)
        }
    }

    /// Index of `-k` along one axis.
    pub fn negate(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    pub fn flat(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.n + iy) * self.n + iz
    }

    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Flat index of the mode `-k` for the mode at `idx`.
    pub fn negate_flat(&self, idx: usize) -> usize {
        let (ix, iy, iz) = self.unflat(idx);
        self.flat(self.negate(ix), self.negate(iy), self.negate(iz))
    }

    /// Collocation coordinate of axis index `i`.
    pub fn point(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Largest retained wavenumber magnitude per axis, `fraction·(n/2)·(2π/L)`.
    pub fn dealias_cutoff(&self) -> f64 {
        self.dealias_fraction * (self.n / 2) as f64 * self.k_unit()
    }

    /// Per-axis test `|k_i| <= cutoff`.
    pub fn axis_within(&self, i: usize, cutoff: f64) -> bool {
        (self.mode(i).unsigned_abs() as f64) * self.k_unit() <= cutoff * (1.0 + MASK_EPS)
    }

    pub fn in_dealias(&self, ix: usize, iy: usize, iz: usize) -> bool {
        let c = self.dealias_cutoff();
        self.axis_within(ix, c) && self.axis_within(iy, c) && self.axis_within(iz, c)
    }

    /// Derivative wavevector of flat mode `idx`.
    pub fn kvec(&self, idx: usize) -> [f64; 3] {
        let (ix, iy, iz) = self.unflat(idx);
        [
            self.derivative_wavenumber(ix),
            self.derivative_wavenumber(iy),
            self.derivative_wavenumber(iz),
        ]
    }

    /// Derivative wavevectors of every flat mode, cached per thread.
    pub(crate) fn wavevectors(&self) -> Wavevectors {
        thread_local! {
            static TABLES: RefCell<HashMap<(usize, u64), Wavevectors>> =
                RefCell::new(HashMap::new());
        }
        TABLES.with(|t| {
            t.borrow_mut()
                .entry((self.n, self.box_length.to_bits()))
                .or_insert_with(|| {
                    let axis: Vec<f64> =
                        (0..self.n).map(|i| self.derivative_wavenumber(i)).collect();
                    let mut out = Vec::with_capacity(self.len());
                    for &kx in &axis {
                        for &ky in &axis {
                            for &kz in &axis {
                                out.push([kx, ky, kz]);
                            }
                        }
                    }
                    Rc::new(out)
                })
                .clone()
        })
    }

    /// `|k|²` built from derivative wavenumbers, so that `Δ = Σ ∂ⱼ∂ⱼ` holds mode by mode.
    pub fn ksq(&self, idx: usize) -> f64 {
        let k = self.kvec(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Boolean dealias mask over all flat modes.
    pub fn dealias_mask(&self) -> Vec<bool> {
        self.mask_for(self.dealias_cutoff())
    }

    /// Modes with every `|k_i| <= cutoff`.
    pub fn mask_for(&self, cutoff: f64) -> Vec<bool> {
        let n = self.n;
        let axis: Vec<bool> = (0..n).map(|i| self.axis_within(i, cutoff)).collect();
        let mut mask = Vec::with_capacity(self.len());
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    mask.push(axis[ix] && axis[iy] && axis[iz]);
                }
            }
        }
        mask
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(Grid::cube(2).is_err());
        assert!(Grid::cube(12).is_err());
        assert!(Grid::cube(8).is_ok());
        assert!(Grid::new(8, -1.0, 0.5).is_err());
        assert!(Grid::new(8, 1.0, 0.0).is_err());
        assert!(Grid::new(8, 1.0, 1.2).is_err());
    }

    #[test]
    fn wavenumber_set() {
        let g = Grid::cube(8).unwrap();
        let modes: Vec<i64> = (0..8).map(|i| g.mode(i)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, 4, -3, -2, -1]);
        assert_eq!(g.derivative_wavenumber(4), 0.0);
        assert_eq!(g.wavenumber(4), 4.0);
        let g2 = Grid::new(8, PI, 1.0).unwrap();
        assert_eq!(g2.wavenumber(1), 2.0);
    }

    #[test]
    fn dealias_mask_counts() {
        // n = 16: cutoff 16/3 ≈ 5.33 keeps |k_i| <= 5, 11 modes per axis.
        let g = Grid::cube(16).unwrap();
        let kept = g.dealias_mask().iter().filter(|&&b| b).count();
        assert_eq!(kept, 11 * 11 * 11);
        // fraction 1 keeps everything, including Nyquist.
        let g = Grid::new(8, 2.0 * PI, 1.0).unwrap();
        assert!(g.dealias_mask().iter().all(|&b| b));
    }

    #[test]
    fn negate_round_trip() {
        let g = Grid::cube(8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.negate_flat(g.negate_flat(idx)), idx);
        }
        assert_eq!(g.negate(0), 0);
        assert_eq!(g.negate(4), 4);
    }
}
