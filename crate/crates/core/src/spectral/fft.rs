//! Three-dimensional complex FFTs on `m^3` cubes.
//!
//! Band-limited data is handled through a compact cube holding only the kept
//! indices along each axis (`0..=K` and `m-K..m`). The inverse pads one axis
//! at a time, so every pass runs batched FFTs over contiguous lines and only
//! the last pass touches the full `m^3` array; the forward transform mirrors
//! this.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

/// Shared plan for size `m`; plans are immutable once built.
pub(crate) fn plan(m: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|p| p.into_inner());
    map.entry(m).or_insert_with(|| Arc::new(Fft3::new(m))).clone()
}

/// Indices `0..=band` followed by `m-band..m`, in increasing order.
pub(crate) fn band_indices(m: usize, band: usize) -> Vec<usize> {
    debug_assert!(2 * band < m);
    (0..=band).chain(m - band..m).collect()
}

fn run(fft: &dyn Fft<f64>, data: &mut [Complex64]) {
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    fft.process_with_scratch(data, &mut scratch);
}

impl Fft3 {
    fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    /// Unnormalized forward transform, `X(k) = Σ x(j) e^{-2πi jk/m}`.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        let all: Vec<usize> = (0..self.m).collect();
        let mut cube = vec![Complex64::default(); buf.len()];
        self.forward_to_cube(buf, &all, &mut cube);
        buf.copy_from_slice(&cube);
    }

    /// Unnormalized inverse transform, `x(j) = Σ X(k) e^{+2πi jk/m}`.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        let all: Vec<usize> = (0..self.m).collect();
        let cube = buf.to_vec();
        self.inverse_from_cube(&cube, &all, buf);
    }

    /// Inverse transform of a spectrum supported on `kept³`. `cube` holds
    /// those coefficients row-major (`kept.len()³` entries); `out` receives
    /// all `m³` physical values.
    pub(crate) fn inverse_from_cube(&self, cube: &[Complex64], kept: &[usize], out: &mut [Complex64]) {
        let m = self.m;
        let b = kept.len();
        debug_assert_eq!(cube.len(), b * b * b);
        debug_assert_eq!(out.len(), m * m * m);
        let fft = &*self.inverse;
        let zero = Complex64::default();

        // axis 0: lines (j1, j2), padded to m
        let mut t0 = vec![zero; b * b * m];
        for (j0, &i0) in kept.iter().enumerate() {
            for j1 in 0..b {
                for j2 in 0..b {
                    t0[(j1 * b + j2) * m + i0] = cube[(j0 * b + j1) * b + j2];
                }
            }
        }
        run(fft, &mut t0);
        // axis 1: lines (i0, j2), padded to m
        let mut t1 = vec![zero; m * b * m];
        for (j1, &i1) in kept.iter().enumerate() {
            for j2 in 0..b {
                let src = &t0[(j1 * b + j2) * m..(j1 * b + j2 + 1) * m];
                for (i0, v) in src.iter().enumerate() {
                    t1[(i0 * b + j2) * m + i1] = *v;
                }
            }
        }
        run(fft, &mut t1);
        // axis 2: every line of the output
        out.fill(zero);
        for i0 in 0..m {
            for (j2, &i2) in kept.iter().enumerate() {
                let src = &t1[(i0 * b + j2) * m..(i0 * b + j2 + 1) * m];
                for (i1, v) in src.iter().enumerate() {
                    out[(i0 * m + i1) * m + i2] = *v;
                }
            }
        }
        run(fft, out);
    }

    /// Forward transform of `buf` (overwritten), returning only the
    /// coefficients on `kept³` in `cube`.
    pub(crate) fn forward_to_cube(&self, buf: &mut [Complex64], kept: &[usize], cube: &mut [Complex64]) {
        let m = self.m;
        let b = kept.len();
        debug_assert_eq!(cube.len(), b * b * b);
        debug_assert_eq!(buf.len(), m * m * m);
        let fft = &*self.forward;
        let zero = Complex64::default();

        run(fft, buf);
        let mut t1 = vec![zero; m * b * m];
        for i0 in 0..m {
            for (j2, &i2) in kept.iter().enumerate() {
                let dst = &mut t1[(i0 * b + j2) * m..(i0 * b + j2 + 1) * m];
                for (i1, v) in dst.iter_mut().enumerate() {
                    *v = buf[(i0 * m + i1) * m + i2];
                }
            }
        }
        run(fft, &mut t1);
        let mut t0 = vec![zero; b * b * m];
        for (j1, &i1) in kept.iter().enumerate() {
            for j2 in 0..b {
                let dst = &mut t0[(j1 * b + j2) * m..(j1 * b + j2 + 1) * m];
                for (i0, v) in dst.iter_mut().enumerate() {
                    *v = t1[(i0 * b + j2) * m + i1];
                }
            }
        }
        run(fft, &mut t0);
        for (j0, &i0) in kept.iter().enumerate() {
            for j1 in 0..b {
                for j2 in 0..b {
                    cube[(j0 * b + j1) * b + j2] = t0[(j1 * b + j2) * m + i0];
                }
            }
        }
    }
}
