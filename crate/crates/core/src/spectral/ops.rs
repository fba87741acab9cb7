//! Transforms and Fourier multipliers on full-grid fields.
//!
//! Derivative multipliers zero the unpaired Nyquist modes of even grids: `ik`
//! applied there would break Hermitian symmetry. The projector and the cutoff
//! are even in `k` and leave them alone.

use std::sync::Arc;

use num_complex::Complex64;

use super::band::{ModeSet, WorkGrid};
use super::fft;
use super::field::{RealScalarField, RealVectorField, SpectralScalarField, SpectralVectorField};
use super::grid::{next_smooth, Grid};
use crate::error::{CoreError, Result};

fn check_finite(values: &[f64], component: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(CoreError::NonFinite { component, index }),
        None => Ok(()),
    }
}

fn forward_real(grid: &Grid, values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::plan(grid.n()).forward(&mut buf);
    let s = 1.0 / grid.len() as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

fn inverse_real(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft::plan(grid.n()).inverse(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// Fourier coefficients `f̂(k)` with `f(x) = Σ f̂(k) e^{ik·x}`.
pub fn forward_transform(f: &RealVectorField) -> Result<SpectralVectorField> {
    let grid = *f.grid();
    for c in 0..3 {
        check_finite(f.component(c), c)?;
    }
    let coeffs = [
        forward_real(&grid, f.component(0)),
        forward_real(&grid, f.component(1)),
        forward_real(&grid, f.component(2)),
    ];
    Ok(SpectralVectorField::from_parts(grid, coeffs, false))
}

/// Collocation values; the imaginary residue of round-off is discarded.
pub fn inverse_transform(f: &SpectralVectorField) -> RealVectorField {
    let grid = *f.grid();
    let values = [
        inverse_real(&grid, f.component(0)),
        inverse_real(&grid, f.component(1)),
        inverse_real(&grid, f.component(2)),
    ];
    RealVectorField::from_parts_unchecked(grid, values)
}

pub fn forward_transform_scalar(f: &RealScalarField) -> Result<SpectralScalarField> {
    check_finite(f.values(), 0)?;
    SpectralScalarField::from_coeffs(*f.grid(), forward_real(f.grid(), f.values()))
}

pub fn inverse_transform_scalar(f: &SpectralScalarField) -> RealScalarField {
    RealScalarField::new(*f.grid(), inverse_real(f.grid(), f.coeffs())).expect("finite coefficients")
}

fn mode_iter(grid: Grid) -> impl Iterator<Item = (usize, [usize; 3])> {
    (0..grid.len()).map(move |i| (i, grid.unflat(i)))
}

/// Applies `M(k) = I - k kᵀ/|k|²`; the mean mode passes through.
pub fn leray_project(f: &SpectralVectorField) -> SpectralVectorField {
    let grid = *f.grid();
    let mut out = f.coeffs().clone();
    for (i, idx) in mode_iter(grid) {
        let k = grid.wavevector(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let kd = (out[0][i] * k[0] + out[1][i] * k[1] + out[2][i] * k[2]) / k2;
        for c in 0..3 {
            out[c][i] -= kd * k[c];
        }
    }
    SpectralVectorField::from_parts(grid, out, true)
}

/// Keeps the modes with `|k| < radius`.
pub fn friedrich_cutoff(f: &SpectralVectorField, radius: f64) -> Result<SpectralVectorField> {
    if !(radius > 0.0) {
        return Err(CoreError::param("radius", format!("{radius} must be positive")));
    }
    let grid = *f.grid();
    let mut out = f.coeffs().clone();
    for (i, idx) in mode_iter(grid) {
        if grid.wavevector_sq(idx).sqrt() >= radius {
            for c in out.iter_mut() {
                c[i] = Complex64::default();
            }
        }
    }
    Ok(SpectralVectorField::from_parts(grid, out, f.is_divfree()))
}

/// `ℙ J_R f`.
pub fn projected_cutoff(f: &SpectralVectorField, radius: f64) -> Result<SpectralVectorField> {
    Ok(leray_project(&friedrich_cutoff(f, radius)?))
}

/// Derivative multiplier `i k_c` at a mode; zero on Nyquist planes.
#[inline]
fn ik(grid: &Grid, idx: [usize; 3]) -> Option<[f64; 3]> {
    if grid.on_nyquist_plane(idx) {
        None
    } else {
        Some(grid.wavevector(idx))
    }
}

pub fn gradient(f: &SpectralScalarField) -> SpectralVectorField {
    let grid = *f.grid();
    let mut out = [
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
        vec![Complex64::default(); grid.len()],
    ];
    let i = Complex64::i();
    for (m, idx) in mode_iter(grid) {
        if let Some(k) = ik(&grid, idx) {
            for c in 0..3 {
                out[c][m] = i * k[c] * f.coeffs()[m];
            }
        }
    }
    SpectralVectorField::from_parts(grid, out, false)
}

pub fn divergence(f: &SpectralVectorField) -> SpectralScalarField {
    let grid = *f.grid();
    let mut out = SpectralScalarField::zeros(grid);
    let i = Complex64::i();
    let dst = out.coeffs_mut();
    for (m, idx) in mode_iter(grid) {
        if let Some(k) = ik(&grid, idx) {
            dst[m] = i * (f.component(0)[m] * k[0] + f.component(1)[m] * k[1] + f.component(2)[m] * k[2]);
        }
    }
    out
}

pub fn laplacian(f: &SpectralVectorField) -> SpectralVectorField {
    let grid = *f.grid();
    let mut out = f.coeffs().clone();
    for (m, idx) in mode_iter(grid) {
        let s = match ik(&grid, idx) {
            Some(_) => -grid.wavevector_sq(idx),
            None => 0.0,
        };
        for c in out.iter_mut() {
            c[m] *= s;
        }
    }
    SpectralVectorField::from_parts(grid, out, f.is_divfree())
}

pub fn laplacian_scalar(f: &SpectralScalarField) -> SpectralScalarField {
    let grid = *f.grid();
    let mut out = f.clone();
    let dst = out.coeffs_mut();
    for (m, idx) in mode_iter(grid) {
        dst[m] *= match ik(&grid, idx) {
            Some(_) => -grid.wavevector_sq(idx),
            None => 0.0,
        };
    }
    out
}

/// Work grid for exact quadratic products on the full (non-Nyquist) mode set.
pub fn dealiased_work_grid(grid: Grid) -> WorkGrid {
    let modes = Arc::new(ModeSet::full(grid));
    let m = next_smooth(3 * modes.band() + 1);
    WorkGrid::with_size(modes, m.max(4)).expect("padded grid holds the band")
}

/// `F(div(u ⊗ u))` by zero-padded collocation.
///
/// The padded grid has more than `3K` points for a band of half-width `K`, so
/// the result equals the exact convolution sum restricted to the grid modes.
pub fn advection_term(u: &SpectralVectorField) -> Result<SpectralVectorField> {
    if !u.is_divfree() {
        return Err(CoreError::NotDivergenceFree);
    }
    let work = dealiased_work_grid(*u.grid());
    Ok(advection_on(u, &work))
}

pub(crate) fn advection_on(u: &SpectralVectorField, work: &WorkGrid) -> SpectralVectorField {
    let modes = work.modes().clone();
    let band = modes.gather(u);
    let phys = work.to_physical(&band);
    let n = work.len();
    // products u_i u_j, symmetric: 6 distinct
    let prod = |a: usize, b: usize| -> Vec<f64> { (0..n).map(|x| phys[a][x] * phys[b][x]).collect() };
    let p00 = prod(0, 0);
    let p01 = prod(0, 1);
    let p02 = prod(0, 2);
    let p11 = prod(1, 1);
    let p12 = prod(1, 2);
    let p22 = prod(2, 2);
    let (h00, h01) = work.from_physical_pair(&p00, Some(&p01));
    let (h02, h11) = work.from_physical_pair(&p02, Some(&p11));
    let (h12, h22) = work.from_physical_pair(&p12, Some(&p22));
    let t = [[&h00, &h01, &h02], [&h01, &h11, &h12], [&h02, &h12, &h22]];
    let i = Complex64::i();
    let mut out = super::band::BandVec::zeros(modes.len());
    for (p, k) in modes.wave().iter().enumerate() {
        for (c, row) in t.iter().enumerate() {
            out.c[c][p] = i * (row[0][p] * k[0] + row[1][p] * k[1] + row[2][p] * k[2]);
        }
    }
    modes.scatter(&out, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid8() -> Grid {
        Grid::periodic(8).unwrap()
    }

    #[test]
    fn cosine_has_two_half_coefficients() {
        let g = grid8();
        let f = RealVectorField::from_fn(g, |x| [x[0].cos(), 0.0, 0.0]).unwrap();
        let s = forward_transform(&f).unwrap();
        let e1 = g.flat(1, 0, 0);
        let me1 = g.flat(7, 0, 0);
        for (i, z) in s.component(0).iter().enumerate() {
            let want = if i == e1 || i == me1 { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(z.re, want, epsilon = 1e-15);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-15);
        }
        assert!(s.component(1).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn rejects_non_finite_input() {
        let g = grid8();
        let mut v = RealVectorField::zeros(g).into_components();
        v[2][5] = f64::INFINITY;
        let f = RealVectorField::from_parts_unchecked(g, v);
        assert!(matches!(
            forward_transform(&f),
            Err(CoreError::NonFinite { component: 2, index: 5 })
        ));
    }

    #[test]
    fn cutoff_is_strict() {
        let g = grid8();
        let mut c = SpectralVectorField::zeros(g).into_coeffs();
        let k2 = g.flat(2, 0, 0);
        c[1][k2] = Complex64::new(1.0, 0.0);
        let f = SpectralVectorField::from_coeffs(g, c).unwrap();
        assert_eq!(friedrich_cutoff(&f, 2.0).unwrap().max_abs(), 0.0);
        assert_eq!(friedrich_cutoff(&f, 2.0 + 1e-12).unwrap().max_abs(), 1.0);
        assert!(friedrich_cutoff(&f, 0.0).is_err());
    }

    #[test]
    fn constant_field_has_no_advection() {
        let g = grid8();
        let mut c = SpectralVectorField::zeros(g).into_coeffs();
        c[0][0] = Complex64::new(0.3, 0.0);
        c[2][0] = Complex64::new(-1.1, 0.0);
        let mut f = SpectralVectorField::from_coeffs(g, c).unwrap();
        f.mark_divfree().unwrap();
        assert!(advection_term(&f).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn advection_requires_divergence_free_flag() {
        let f = SpectralVectorField::from_coeffs(grid8(), SpectralVectorField::zeros(grid8()).into_coeffs()).unwrap();
        assert!(matches!(advection_term(&f), Err(CoreError::NotDivergenceFree)));
    }
}
