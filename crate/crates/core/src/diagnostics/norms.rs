use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::spectral::{Grid, RealVectorField, SpectralScalarField, SpectralVectorField};

fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(CoreError::param("s", format!("{s} must be positive")))
    }
}

fn weighted_sum(grid: &Grid, s: f64, mut coeff_sq: impl FnMut(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..grid.len() {
        let k2 = grid.wavevector_sq(grid.unflat(i));
        acc += (1.0 + k2).powf(-s) * coeff_sq(i);
    }
    (grid.volume() * acc).sqrt()
}

/// `‖f‖_{H^{-s}} = (L³ Σ_k (1 + |k|²)^{-s} |f̂(k)|²)^{1/2}`.
pub fn h_neg_s_norm(f: &SpectralVectorField, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(weighted_sum(f.grid(), s, |i| {
        f.at(i).iter().map(|z| z.norm_sqr()).sum()
    }))
}

pub fn h_neg_s_norm_scalar(f: &SpectralScalarField, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(weighted_sum(f.grid(), s, |i| f.coeffs()[i].norm_sqr()))
}

/// `‖u‖_{L^p}^p` by collocation and `‖u‖_{H^{-s}}` by mode sums, keyed by
/// the printed exponent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub lp_pow: BTreeMap<String, f64>,
    pub h_neg: BTreeMap<String, f64>,
}

impl NormReport {
    pub fn lp(&self, p: f64) -> Option<f64> {
        self.lp_pow.get(&key(p)).copied()
    }

    pub fn hneg(&self, s: f64) -> Option<f64> {
        self.h_neg.get(&key(s)).copied()
    }
}

fn key(x: f64) -> String {
    format!("{x:?}")
}

pub fn norm_report(
    u: &SpectralVectorField,
    phys: &RealVectorField,
    ps: &[f64],
    ss: &[f64],
) -> Result<NormReport> {
    if phys.grid() != u.grid() {
        return Err(CoreError::GridMismatch {
            expected: u.grid().n(),
            found: phys.grid().n(),
        });
    }
    let mut lp_pow = BTreeMap::new();
    for &p in ps {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(CoreError::param("p", format!("{p} must be at least 1")));
        }
        lp_pow.insert(key(p), phys.lp_pow(p));
    }
    let mut h_neg = BTreeMap::new();
    for &s in ss {
        h_neg.insert(key(s), h_neg_s_norm(u, s)?);
    }
    Ok(NormReport { lp_pow, h_neg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::inverse_transform;
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    #[test]
    fn single_mode_is_one_term() {
        let g = Grid::periodic(8).unwrap();
        let mut f = SpectralScalarField::zeros(g);
        let i = g.flat(1, 2, 0);
        f.coeffs_mut()[i] = Complex64::new(1.0, 0.0);
        let want = g.volume().sqrt() * 6f64.powf(-1.5);
        assert_relative_eq!(h_neg_s_norm_scalar(&f, 3.0).unwrap(), want, max_relative = 1e-14);
        assert!(h_neg_s_norm_scalar(&f, 0.0).is_err());
    }

    #[test]
    fn l2_entry_matches_spectral_energy() {
        let g = Grid::periodic(8).unwrap();
        let u = crate::dynamics::initial_taylor_green(g, 1.3);
        let phys = inverse_transform(&u);
        let r = norm_report(&u, &phys, &[2.0, 4.0], &[1.0, 3.0]).unwrap();
        assert_relative_eq!(r.lp(2.0).unwrap(), u.l2_sq(), max_relative = 1e-12);
        assert!(r.hneg(3.0).unwrap() <= r.hneg(1.0).unwrap());
        assert!(r.hneg(1.0).unwrap() <= u.l2_sq().sqrt());
    }
}
