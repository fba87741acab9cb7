use crate::dynamics::Trajectory;
use crate::error::{CoreError, Result};
use crate::spectral::{forward_transform_scalar, RealScalarField, SpectralScalarField, WorkGrid};

/// Trapezoid rule on sample points.
pub fn trapezoid(t: &[f64], f: &[f64]) -> f64 {
    t.windows(2)
        .zip(f.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum()
}

/// Physical-space access to the snapshots of a trajectory, on the same work
/// grid the solver used.
pub(crate) struct Sampler<'a> {
    pub traj: &'a Trajectory,
    pub work: WorkGrid,
}

impl<'a> Sampler<'a> {
    pub fn new(traj: &'a Trajectory) -> Result<Self> {
        if traj.rows.len() != traj.snapshots.len() {
            return Err(CoreError::param("trajectory", "rows and snapshots differ in length"));
        }
        let work = WorkGrid::dealiased(traj.modes.clone(), traj.config.oversample)?;
        Ok(Self { traj, work })
    }

    pub fn len(&self) -> usize {
        self.traj.rows.len()
    }

    pub fn times(&self) -> Vec<f64> {
        self.traj.times()
    }

    pub fn physical(&self, i: usize) -> [Vec<f64>; 3] {
        self.work.to_physical(&self.traj.snapshots[i])
    }

    /// `Σ_x f(|u(x)|², |u(x)|)` times the quadrature weight, at every row.
    pub fn integrals(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let w = self.work.weight();
        (0..self.len())
            .map(|i| {
                let u = self.physical(i);
                let mut acc = 0.0;
                for x in 0..u[0].len() {
                    let s = u[0][x] * u[0][x] + u[1][x] * u[1][x] + u[2][x] * u[2][x];
                    acc += f(s, s.sqrt());
                }
                w * acc
            })
            .collect()
    }

    /// Fourier coefficients of the pointwise scalar `f(|u|²)` on the work grid.
    pub fn scalar_transform(&self, i: usize, f: impl Fn(f64) -> f64) -> Result<SpectralScalarField> {
        let u = self.physical(i);
        let v = (0..u[0].len())
            .map(|x| f(u[0][x] * u[0][x] + u[1][x] * u[1][x] + u[2][x] * u[2][x]))
            .collect();
        forward_transform_scalar(&RealScalarField::new(self.work.collocation_grid(), v)?)
    }
}

pub(crate) fn need_rows(traj: &Trajectory, n: usize) -> Result<()> {
    if traj.rows.len() < n {
        Err(CoreError::TooFewSamples {
            needed: n,
            found: traj.rows.len(),
        })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let t = [0.0, 0.3, 1.0];
        let f: Vec<f64> = t.iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((trapezoid(&t, &f) - 2.0).abs() < 1e-15);
        assert_eq!(trapezoid(&[1.0], &[5.0]), 0.0);
    }
}
