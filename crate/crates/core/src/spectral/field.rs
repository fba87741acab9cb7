use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{CoreError, Result};

/// Velocity samples at the `n^3` collocation points of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RealVectorField {
    grid: Grid,
    values: [Vec<f64>; 3],
}

impl RealVectorField {
    pub fn new(grid: Grid, values: [Vec<f64>; 3]) -> Result<Self> {
        for (c, v) in values.iter().enumerate() {
            if v.len() != grid.len() {
                return Err(CoreError::param(
                    "values",
                    format!("component {c} has {} samples, grid needs {}", v.len(), grid.len()),
                ));
            }
            if let Some(index) = v.iter().position(|x| !x.is_finite()) {
                return Err(CoreError::NonFinite {
                    component: c,
                    index,
                });
            }
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts_unchecked(grid: Grid, values: [Vec<f64>; 3]) -> Self {
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self {
            grid,
            values: [z.clone(), z.clone(), z],
        }
    }

    /// Samples `f` at the collocation points `x_j = j L / n`.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let n = grid.n();
        let mut values = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let v = f([grid.coordinate(i0), grid.coordinate(i1), grid.coordinate(i2)]);
                    for c in 0..3 {
                        values[c].push(v[c]);
                    }
                }
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.values[c]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.values
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.values
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.values[0][idx], self.values[1][idx], self.values[2][idx]]
    }

    pub fn speed_sq(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.len()).map(move |i| {
            let v = self.at(i);
            v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
        })
    }

    pub fn max_speed(&self) -> f64 {
        self.speed_sq().fold(0.0, f64::max).sqrt()
    }

    /// Collocation quadrature of `|u|^p` over the box.
    pub fn lp_pow(&self, p: f64) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * self.speed_sq().map(|s| s.powf(0.5 * p)).sum::<f64>()
    }

    pub fn l2_sq(&self) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * self.speed_sq().sum::<f64>()
    }

    /// Collocation quadrature of the pointwise Euclidean norm.
    pub fn l1_norm(&self) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * self.speed_sq().map(f64::sqrt).sum::<f64>()
    }

    pub fn scale(&mut self, a: f64) {
        for v in self.values.iter_mut() {
            v.iter_mut().for_each(|x| *x *= a);
        }
    }
}

/// Scalar samples at the collocation points.
#[derive(Clone, Debug, PartialEq)]
pub struct RealScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl RealScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(CoreError::param("values", "length does not match grid"));
        }
        if let Some(index) = values.iter().position(|x| !x.is_finite()) {
            return Err(CoreError::NonFinite {
                component: 0,
                index,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    values.push(f([grid.coordinate(i0), grid.coordinate(i1), grid.coordinate(i2)]));
                }
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn l1_norm(&self) -> f64 {
        let w = self.grid.volume() / self.grid.len() as f64;
        w * self.values.iter().map(|x| x.abs()).sum::<f64>()
    }
}

/// Fourier coefficients of a real three-component field, normalized so that
/// `u(x) = Σ_k û(k) e^{i k·x}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    coeffs: [Vec<Complex64>; 3],
    divfree: bool,
}

impl SpectralVectorField {
    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex64::default(); grid.len()];
        Self {
            grid,
            coeffs: [z.clone(), z.clone(), z],
            divfree: true,
        }
    }

    /// Wraps raw coefficients. The divergence-free flag starts cleared; use
    /// [`crate::spectral::leray_project`] or [`Self::mark_divfree`] to set it.
    pub fn from_coeffs(grid: Grid, coeffs: [Vec<Complex64>; 3]) -> Result<Self> {
        for (c, v) in coeffs.iter().enumerate() {
            if v.len() != grid.len() {
                return Err(CoreError::param(
                    "coeffs",
                    format!("component {c} has {} entries, grid needs {}", v.len(), grid.len()),
                ));
            }
            if let Some(index) = v.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(CoreError::NonFinite {
                    component: c,
                    index,
                });
            }
        }
        Ok(Self {
            grid,
            coeffs,
            divfree: false,
        })
    }

    pub(crate) fn from_parts(grid: Grid, coeffs: [Vec<Complex64>; 3], divfree: bool) -> Self {
        Self {
            grid,
            coeffs,
            divfree,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Vec<Complex64>; 3] {
        &self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.coeffs[c]
    }

    /// Mutable access clears the divergence-free flag.
    pub fn coeffs_mut(&mut self) -> &mut [Vec<Complex64>; 3] {
        self.divfree = false;
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> [Vec<Complex64>; 3] {
        self.coeffs
    }

    pub fn is_divfree(&self) -> bool {
        self.divfree
    }

    /// Sets the flag after checking `Σ_j k_j û_j(k) = 0` to `1e-12` relative
    /// to the largest coefficient magnitude.
    pub fn mark_divfree(&mut self) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if self.max_divergence() > 1e-12 * scale * self.grid.max_wavenumber().max(1.0) {
            return Err(CoreError::NotDivergenceFree);
        }
        self.divfree = true;
        Ok(())
    }

    #[inline]
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.coeffs[0][idx], self.coeffs[1][idx], self.coeffs[2][idx]]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `max_k |k · û(k)|`.
    pub fn max_divergence(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| {
                let k = self.grid.wavevector(self.grid.unflat(i));
                let u = self.at(i);
                (u[0] * k[0] + u[1] * k[1] + u[2] * k[2]).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `max_k |û(-k) - conj(û(k))|`, zero for real fields (Nyquist planes
    /// included, where the mirror index wraps onto itself).
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|i| {
                let j = g.mirror(g.unflat(i));
                (0..3)
                    .map(|c| (self.coeffs[c][j] - self.coeffs[c][i].conj()).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// `‖u‖²_{L²} = L³ Σ_k |û(k)|²`.
    pub fn l2_sq(&self) -> f64 {
        self.grid.volume()
            * self
                .coeffs
                .iter()
                .flat_map(|c| c.iter())
                .map(|z| z.norm_sqr())
                .sum::<f64>()
    }

    /// Real `L²` inner product `∫ u·v`.
    pub fn inner(&self, other: &SpectralVectorField) -> f64 {
        let mut acc = 0.0;
        for c in 0..3 {
            for (a, b) in self.coeffs[c].iter().zip(&other.coeffs[c]) {
                acc += (a * b.conj()).re;
            }
        }
        self.grid.volume() * acc
    }

    /// `‖∇u‖²_{L²}`.
    pub fn grad_sq(&self) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 0..g.len() {
            let k2 = g.wavevector_sq(g.unflat(i));
            if k2 == 0.0 {
                continue;
            }
            let u = self.at(i);
            acc += k2 * (u[0].norm_sqr() + u[1].norm_sqr() + u[2].norm_sqr());
        }
        g.volume() * acc
    }

    pub fn axpy(&mut self, a: f64, x: &SpectralVectorField) {
        for c in 0..3 {
            for (y, xv) in self.coeffs[c].iter_mut().zip(&x.coeffs[c]) {
                *y += xv * a;
            }
        }
        self.divfree = self.divfree && x.divfree;
    }

    pub fn scaled(&self, a: f64) -> SpectralVectorField {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut() {
            c.iter_mut().for_each(|z| *z *= a);
        }
        out
    }

    pub fn sub(&self, other: &SpectralVectorField) -> SpectralVectorField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }
}

/// Fourier coefficients of a real scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralScalarField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(CoreError::param("coeffs", "length does not match grid"));
        }
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

    pub fn l2_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .map(|i| (self.coeffs[g.mirror(g.unflat(i))] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }
}
