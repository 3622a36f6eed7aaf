//! Unnormalized 3-D complex FFTs on `n³` cubes, built from 1-D rustfft plans.
//!
//! Planning is cached per thread and per `n`. The forward transform uses
//! `e^{-ik·x}`; scaling by `1/n³` is left to callers.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: RefCell<Vec<Complex64>>,
    scratch: RefCell<Vec<Complex64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Rc<Fft3>>> = RefCell::new(HashMap::new());
}

impl Fft3 {
    pub(crate) fn for_size(n: usize) -> Rc<Fft3> {
        PLANS.with(|plans| {
            plans
                .borrow_mut()
                .entry(n)
                .or_insert_with(|| Rc::new(Fft3::plan(n)))
                .clone()
        })
    }

    fn plan(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            n,
            forward,
            inverse,
            buf: RefCell::new(vec![Complex64::default(); n * n * n]),
            scratch: RefCell::new(vec![Complex64::default(); scratch_len]),
        }
    }

    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Forward);
    }

    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Inverse);
    }

    fn transform(&self, data: &mut [Complex64], dir: FftDirection) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "cube size mismatch");
        let fft = match dir {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        };
        let mut scratch = self.scratch.borrow_mut();
        let mut buf = self.buf.borrow_mut();

        // z: contiguous rows
        fft.process_with_scratch(data, &mut scratch);

        // y: transpose each (y, z) plane
        for plane in data.chunks_exact_mut(n * n) {
            transpose(plane, &mut buf[..n * n], n, n);
            fft.process_with_scratch(&mut buf[..n * n], &mut scratch);
            transpose(&buf[..n * n], plane, n, n);
        }

        // x: transpose (x, yz) to (yz, x)
        transpose(data, &mut buf, n, n * n);
        fft.process_with_scratch(&mut buf, &mut scratch);
        transpose(&buf, data, n * n, n);
    }
}

/// Row-major `rows × cols` to `cols × rows`.
fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
