//! Initial velocity fields on the full grid.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::config::InitialCondition;
use crate::error::{CoreError, Result};
use crate::spectral::{forward_transform, leray_project, Grid, RealVectorField, SpectralVectorField};

pub fn initial_field(grid: Grid, ic: &InitialCondition, seed: u64) -> Result<SpectralVectorField> {
    match ic {
        InitialCondition::Zero => Ok(SpectralVectorField::zeros(grid)),
        InitialCondition::TaylorGreen { amplitude } => Ok(initial_taylor_green(grid, *amplitude)),
        InitialCondition::RandomDivfree {
            spectrum_slope,
            energy,
            seed: own,
        } => initial_random_divfree(grid, *spectrum_slope, *energy, own.unwrap_or(seed)),
        InitialCondition::SingleMode { wavevector, amplitude } => {
            initial_single_mode(grid, *wavevector, *amplitude)
        }
    }
}

/// Taylor-Green vortex, written directly in Fourier space: eight modes
/// `(±1, ±1, ±1)` of the box.
pub fn initial_taylor_green(grid: Grid, amplitude: f64) -> SpectralVectorField {
    let mut c = SpectralVectorField::zeros(grid).into_coeffs();
    if amplitude != 0.0 {
        for s0 in [-1i64, 1] {
            for s1 in [-1i64, 1] {
                for s2 in [-1i64, 1] {
                    let f = grid.flat(grid.index_of(s0), grid.index_of(s1), grid.index_of(s2));
                    c[0][f] = Complex64::new(-amplitude * (s1 * s2) as f64 / 8.0, 0.0);
                    c[1][f] = Complex64::new(amplitude * (s0 * s2) as f64 / 8.0, 0.0);
                }
            }
        }
    }
    let mut u = SpectralVectorField::from_coeffs(grid, c).expect("finite coefficients");
    u.mark_divfree().expect("Taylor-Green field is solenoidal");
    u
}

/// `a cos(k·x)`; `a` must be orthogonal to `k`.
pub fn initial_single_mode(grid: Grid, k: [i64; 3], a: [f64; 3]) -> Result<SpectralVectorField> {
    let n = grid.n() as i64;
    if k.iter().any(|&v| 2 * v.abs() >= n) || k == [0, 0, 0] {
        return Err(CoreError::param("wavevector", format!("{k:?} is not a paired nonzero mode")));
    }
    let mut c = SpectralVectorField::zeros(grid).into_coeffs();
    for sign in [1i64, -1] {
        let f = grid.flat(grid.index_of(sign * k[0]), grid.index_of(sign * k[1]), grid.index_of(sign * k[2]));
        for comp in 0..3 {
            c[comp][f] = Complex64::new(a[comp] / 2.0, 0.0);
        }
    }
    let mut u = SpectralVectorField::from_coeffs(grid, c)?;
    u.mark_divfree()
        .map_err(|_| CoreError::param("amplitude", "must be orthogonal to the wavevector"))?;
    Ok(u)
}

/// Gaussian white noise in physical space, shaped by `|k|^slope`, projected,
/// with mean and Nyquist modes removed, then rescaled to `‖u‖² = energy`.
pub fn initial_random_divfree(grid: Grid, slope: f64, energy: f64, seed: u64) -> Result<SpectralVectorField> {
    if !(energy.is_finite() && energy >= 0.0) {
        return Err(CoreError::param("energy", format!("{energy} must be >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: [Vec<f64>; 3] = std::array::from_fn(|_| {
        (0..grid.len())
            .map(|_| StandardNormal.sample(&mut rng))
            .collect()
    });
    let mut s = forward_transform(&RealVectorField::new(grid, noise)?)?.into_coeffs();
    for i in 0..grid.len() {
        let idx = grid.unflat(i);
        let k2 = grid.wavevector_sq(idx);
        let w = if k2 == 0.0 || grid.on_nyquist_plane(idx) {
            0.0
        } else {
            k2.powf(0.5 * slope)
        };
        for comp in s.iter_mut() {
            comp[i] *= w;
        }
    }
    let u = leray_project(&SpectralVectorField::from_coeffs(grid, s)?);
    let e = u.l2_sq();
    if e == 0.0 || energy == 0.0 {
        return Ok(SpectralVectorField::zeros(grid));
    }
    Ok(u.scaled((energy / e).sqrt()))
}
