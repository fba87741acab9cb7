//! Compact storage for band-limited fields and transfers between a compact
//! mode list and a (usually zero-padded) collocation grid.

use std::sync::Arc;

use num_complex::Complex64;

use super::fft::{self, band_indices, Fft3};
use super::field::SpectralVectorField;
use super::grid::{next_smooth, Grid};
use crate::error::{CoreError, Result};

/// An ordered, mirror-symmetric list of modes of a grid.
///
/// Nyquist planes are never members: they have no partner `-k` and carry no
/// divergence-free content after projection.
#[derive(Debug)]
pub struct ModeSet {
    grid: Grid,
    radius: Option<f64>,
    band: usize,
    flat: Vec<usize>,
    signed: Vec<[i64; 3]>,
    wave: Vec<[f64; 3]>,
    k2: Vec<f64>,
    mirror: Vec<usize>,
    position: Vec<Option<u32>>,
}

impl ModeSet {
    /// Modes with physical wavenumber strictly inside the ball `|ξ| < radius`.
    pub fn ball(grid: Grid, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(CoreError::param("radius", format!("{radius} must be positive")));
        }
        Ok(Self::build(grid, Some(radius)))
    }

    /// Every non-Nyquist mode of the grid.
    pub fn full(grid: Grid) -> Self {
        Self::build(grid, None)
    }

    fn build(grid: Grid, radius: Option<f64>) -> Self {
        let n = grid.n();
        let mut flat = Vec::new();
        let mut signed = Vec::new();
        let mut wave = Vec::new();
        let mut k2s = Vec::new();
        let mut position = vec![None; grid.len()];
        let mut band = 0usize;
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let idx = [i0, i1, i2];
                    if grid.on_nyquist_plane(idx) {
                        continue;
                    }
                    let k2 = grid.wavevector_sq(idx);
                    if let Some(r) = radius {
                        if k2.sqrt() >= r {
                            continue;
                        }
                    }
                    let s = [grid.signed(i0), grid.signed(i1), grid.signed(i2)];
                    band = band.max(s.iter().map(|v| v.unsigned_abs() as usize).max().unwrap());
                    position[grid.flat(i0, i1, i2)] = Some(flat.len() as u32);
                    flat.push(grid.flat(i0, i1, i2));
                    signed.push(s);
                    wave.push(grid.wavevector(idx));
                    k2s.push(k2);
                }
            }
        }
        let mirror = signed
            .iter()
            .map(|s| {
                let j = grid.flat(grid.index_of(-s[0]), grid.index_of(-s[1]), grid.index_of(-s[2]));
                position[j].expect("mode sets are mirror symmetric") as usize
            })
            .collect();
        Self {
            grid,
            radius,
            band,
            flat,
            signed,
            wave,
            k2: k2s,
            mirror,
            position,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn radius(&self) -> Option<f64> {
        self.radius
    }

    /// Largest `|k_i|` (integer index) over the members.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn flat(&self) -> &[usize] {
        &self.flat
    }

    pub fn signed(&self) -> &[[i64; 3]] {
        &self.signed
    }

    pub fn wave(&self) -> &[[f64; 3]] {
        &self.wave
    }

    pub fn k2(&self) -> &[f64] {
        &self.k2
    }

    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    /// Position in the set of the grid mode with flat index `flat`.
    pub fn position(&self, flat: usize) -> Option<usize> {
        self.position[flat].map(|p| p as usize)
    }

    pub fn gather(&self, field: &SpectralVectorField) -> BandVec {
        let mut out = BandVec::zeros(self.len());
        for c in 0..3 {
            let src = field.component(c);
            for (dst, &f) in out.c[c].iter_mut().zip(&self.flat) {
                *dst = src[f];
            }
        }
        out
    }

    /// Expands onto the full grid; modes outside the set are zero.
    pub fn scatter(&self, v: &BandVec, divfree: bool) -> SpectralVectorField {
        let mut coeffs = [
            vec![Complex64::default(); self.grid.len()],
            vec![Complex64::default(); self.grid.len()],
            vec![Complex64::default(); self.grid.len()],
        ];
        for c in 0..3 {
            for (&f, z) in self.flat.iter().zip(&v.c[c]) {
                coeffs[c][f] = *z;
            }
        }
        SpectralVectorField::from_parts(self.grid, coeffs, divfree)
    }

    /// Leray projection in place, mode by mode. The mean mode passes through.
    pub fn project(&self, v: &mut BandVec) {
        for i in 0..self.len() {
            let k2 = self.k2[i];
            if k2 == 0.0 {
                continue;
            }
            let k = self.wave[i];
            let kd = (v.c[0][i] * k[0] + v.c[1][i] * k[1] + v.c[2][i] * k[2]) / k2;
            for (c, kc) in k.iter().enumerate() {
                v.c[c][i] -= kd * *kc;
            }
        }
    }

    /// `‖u‖²_{L²}` of a band vector.
    pub fn l2_sq(&self, v: &BandVec) -> f64 {
        self.grid.volume() * v.c.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `‖∇u‖²_{L²}` of a band vector.
    pub fn grad_sq(&self, v: &BandVec) -> f64 {
        let mut acc = 0.0;
        for (i, &k2) in self.k2.iter().enumerate() {
            acc += k2 * (v.c[0][i].norm_sqr() + v.c[1][i].norm_sqr() + v.c[2][i].norm_sqr());
        }
        self.grid.volume() * acc
    }

    /// Real `L²` inner product of two band vectors.
    pub fn inner(&self, a: &BandVec, b: &BandVec) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            for (x, y) in a.c[c].iter().zip(&b.c[c]) {
                acc += (x * y.conj()).re;
            }
        }
        self.grid.volume() * acc
    }

    /// `‖a - b‖²_{H^{-s}}` (`s = 0` gives the `L²` distance).
    pub fn hneg_dist_sq(&self, a: &BandVec, b: &BandVec, s: f64) -> f64 {
        let mut acc = 0.0;
        for (i, &k2) in self.k2.iter().enumerate() {
            let w = if s == 0.0 { 1.0 } else { (1.0 + k2).powf(-s) };
            let mut d = 0.0;
            for c in 0..3 {
                d += (a.c[c][i] - b.c[c][i]).norm_sqr();
            }
            acc += w * d;
        }
        self.grid.volume() * acc
    }
}

/// Coefficients of a three-component field on the members of a [`ModeSet`].
#[derive(Clone, Debug, PartialEq)]
pub struct BandVec {
    pub c: [Vec<Complex64>; 3],
}

impl BandVec {
    pub fn zeros(len: usize) -> Self {
        let z = vec![Complex64::default(); len];
        Self {
            c: [z.clone(), z.clone(), z],
        }
    }

    pub fn len(&self) -> usize {
        self.c[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.c[0].is_empty()
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &BandVec) {
        for c in 0..3 {
            for (y, xv) in self.c[c].iter_mut().zip(&x.c[c]) {
                *y += xv * a;
            }
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.c.iter_mut().flatten().for_each(|z| *z *= a);
    }

    pub fn negated(mut self) -> Self {
        self.scale(-1.0);
        self
    }

    /// Multiplies mode `i` of every component by `f[i]`.
    pub fn scale_modes(&mut self, f: &[f64]) {
        for c in 0..3 {
            for (y, &s) in self.c[c].iter_mut().zip(f) {
                *y *= s;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().flatten().all(|z| z.re == 0.0 && z.im == 0.0)
    }
}

/// A collocation grid of size `m` attached to a mode set, used to evaluate
/// pointwise nonlinearities of band-limited fields.
#[derive(Clone)]
pub struct WorkGrid {
    m: usize,
    box_length: f64,
    modes: Arc<ModeSet>,
    plan: Arc<Fft3>,
    kept: Vec<usize>,
    /// Position of each mode in the compact `kept³` cube.
    cube_flat: Vec<usize>,
}

impl std::fmt::Debug for WorkGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkGrid")
            .field("m", &self.m)
            .field("band", &self.modes.band())
            .field("modes", &self.modes.len())
            .finish()
    }
}

impl WorkGrid {
    /// Work grid of exactly `m` points per dimension.
    pub fn with_size(modes: Arc<ModeSet>, m: usize) -> Result<Self> {
        let band = modes.band();
        if m < 2 * band + 1 {
            return Err(CoreError::param(
                "work grid",
                format!("m = {m} cannot represent band {band}"),
            ));
        }
        let b = 2 * band + 1;
        let cube_flat = modes
            .signed()
            .iter()
            .map(|s| {
                let w = |k: i64| k.rem_euclid(b as i64) as usize;
                (w(s[0]) * b + w(s[1])) * b + w(s[2])
            })
            .collect();
        Ok(Self {
            m,
            box_length: modes.grid().box_length(),
            plan: fft::plan(m),
            kept: band_indices(m, band),
            modes,
            cube_flat,
        })
    }

    /// Smallest FFT-friendly grid on which quadratic products of band fields
    /// are alias-free on the band (`m > 3K`) and which oversamples the band
    /// grid `2K + 1` by at least `oversample`.
    pub fn dealiased(modes: Arc<ModeSet>, oversample: f64) -> Result<Self> {
        if !(oversample.is_finite() && oversample >= 1.0) {
            return Err(CoreError::param("oversample", format!("{oversample} must be >= 1")));
        }
        let k = modes.band();
        let need = (3 * k + 1).max((oversample * (2 * k + 1) as f64).ceil() as usize);
        Self::with_size(modes, next_smooth(need.max(4)))
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    /// Quadrature weight `L³ / m³`.
    pub fn weight(&self) -> f64 {
        self.box_length.powi(3) / self.len() as f64
    }

    /// Collocation grid of the work size (for building physical fields).
    pub fn collocation_grid(&self) -> Grid {
        Grid::new(self.m, self.box_length).expect("work grid is valid")
    }

    /// Writes `a + i b` onto the work grid and transforms it to physical
    /// space, so that `buf[x].re = a(x)` and `buf[x].im = b(x)`.
    pub fn load_pair(&self, buf: &mut Vec<Complex64>, a: &[Complex64], b: Option<&[Complex64]>) {
        let nb = self.kept.len();
        let mut cube = vec![Complex64::default(); nb * nb * nb];
        match b {
            Some(b) => {
                let i = Complex64::i();
                for ((&w, x), y) in self.cube_flat.iter().zip(a).zip(b) {
                    cube[w] = x + i * y;
                }
            }
            None => {
                for (&w, x) in self.cube_flat.iter().zip(a) {
                    cube[w] = *x;
                }
            }
        }
        buf.resize(self.len(), Complex64::default());
        self.plan.inverse_from_cube(&cube, &self.kept, buf);
    }

    /// Inverse of [`WorkGrid::load_pair`]: band coefficients of the real and
    /// imaginary parts of `buf`. The buffer is overwritten.
    pub fn unload_pair(&self, buf: &mut [Complex64], want_b: bool) -> (Vec<Complex64>, Vec<Complex64>) {
        let nb = self.kept.len();
        let mut cube = vec![Complex64::default(); nb * nb * nb];
        self.plan.forward_to_cube(buf, &self.kept, &mut cube);
        let scale = 1.0 / self.len() as f64;
        let gathered: Vec<Complex64> = self.cube_flat.iter().map(|&w| cube[w] * scale).collect();
        if !want_b {
            // only the real part was loaded, so the spectrum is Hermitian
            return (gathered, Vec::new());
        }
        let mirror = self.modes.mirror();
        let mut fa = Vec::with_capacity(gathered.len());
        let mut fb = Vec::with_capacity(gathered.len());
        for (p, z) in gathered.iter().enumerate() {
            let zm = gathered[mirror[p]].conj();
            fa.push((z + zm) * 0.5);
            // (z - zm) / (2i)
            let d = (z - zm) * 0.5;
            fb.push(Complex64::new(d.im, -d.re));
        }
        (fa, fb)
    }

    /// Physical values of two real band fields, packed into one inverse FFT.
    pub fn to_physical_pair(&self, a: &[Complex64], b: Option<&[Complex64]>) -> (Vec<f64>, Vec<f64>) {
        let mut buf = Vec::new();
        self.load_pair(&mut buf, a, b);
        let re = buf.iter().map(|z| z.re).collect();
        let im = if b.is_some() {
            buf.iter().map(|z| z.im).collect()
        } else {
            Vec::new()
        };
        (re, im)
    }

    /// Physical values of a band vector field, three components.
    pub fn to_physical(&self, v: &BandVec) -> [Vec<f64>; 3] {
        let (u0, u1) = self.to_physical_pair(&v.c[0], Some(&v.c[1]));
        let (u2, _) = self.to_physical_pair(&v.c[2], None);
        [u0, u1, u2]
    }

    /// Band coefficients of two real collocated fields from one forward FFT.
    pub fn from_physical_pair(&self, a: &[f64], b: Option<&[f64]>) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut buf: Vec<Complex64> = match b {
            Some(b) => a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect(),
            None => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        };
        self.unload_pair(&mut buf, b.is_some())
    }

    /// Band coefficients of a collocated vector field.
    pub fn from_physical(&self, f: &[Vec<f64>; 3]) -> BandVec {
        let (a, b) = self.from_physical_pair(&f[0], Some(&f[1]));
        let (c, _) = self.from_physical_pair(&f[2], None);
        BandVec { c: [a, b, c] }
    }
}
