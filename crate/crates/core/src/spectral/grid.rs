use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Periodic cube `[0, L)^3` sampled at `n` points per dimension.
///
/// Spectral arrays are stored in FFT order: flat index `(i0 * n + i1) * n + i2`,
/// where index `i` carries the integer wavenumber `i` for `i < n/2` and `i - n`
/// otherwise. The physical wavenumber is `2π/L` times the integer one, so with
/// the default box `L = 2π` the two coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    box_length: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 4;

    pub fn new(n: usize, box_length: f64) -> Result<Self> {
        if n < Self::MIN_POINTS {
            return Err(CoreError::InvalidGrid(format!(
                "n_per_dim = {n} is below the minimum of {}",
                Self::MIN_POINTS
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(CoreError::InvalidGrid(format!(
                "box_length = {box_length} must be positive and finite"
            )));
        }
        Ok(Self { n, box_length })
    }

    /// Grid on the `2π` box.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.box_length.powi(3)
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// `2π / L`, the physical wavenumber of integer mode 1.
    pub fn base_wavenumber(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    #[inline]
    pub fn flat(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> [usize; 3] {
        let n = self.n;
        [idx / (n * n), (idx / n) % n, idx % n]
    }

    /// Signed integer wavenumber of array index `i`.
    #[inline]
    pub fn signed(&self, i: usize) -> i64 {
        signed_index(i, self.n)
    }

    /// Array index of integer wavenumber `k` (taken modulo `n`).
    #[inline]
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// True when index `i` is the unpaired Nyquist index `n/2` (even `n` only).
    #[inline]
    pub fn is_nyquist(&self, i: usize) -> bool {
        self.n % 2 == 0 && i == self.n / 2
    }

    /// True if any of the three indices is a Nyquist index.
    #[inline]
    pub fn on_nyquist_plane(&self, idx: [usize; 3]) -> bool {
        idx.iter().any(|&i| self.is_nyquist(i))
    }

    /// Physical wavevector of a mode.
    #[inline]
    pub fn wavevector(&self, idx: [usize; 3]) -> [f64; 3] {
        let c = self.base_wavenumber();
        [
            c * self.signed(idx[0]) as f64,
            c * self.signed(idx[1]) as f64,
            c * self.signed(idx[2]) as f64,
        ]
    }

    #[inline]
    pub fn wavevector_sq(&self, idx: [usize; 3]) -> f64 {
        let k = self.wavevector(idx);
        k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn mirror(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        self.flat((n - idx[0]) % n, (n - idx[1]) % n, (n - idx[2]) % n)
    }

    /// Physical coordinate of collocation index `i`.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Largest physical wavenumber magnitude present on the grid.
    pub fn max_wavenumber(&self) -> f64 {
        self.base_wavenumber() * (self.n / 2) as f64 * 3f64.sqrt()
    }
}

#[inline]
pub(crate) fn signed_index(i: usize, n: usize) -> i64 {
    if 2 * i < n {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Smallest integer `>= m` whose only prime factors are 2, 3 and 5.
pub(crate) fn next_smooth(m: usize) -> usize {
    let mut c = m.max(1);
    loop {
        let mut r = c;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return c;
        }
        c += 1;
    }
}
