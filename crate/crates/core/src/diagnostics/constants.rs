use std::f64::consts::PI;

use crate::error::{CoreError, Result};
use crate::quadrature::integrate;

const REL_TOL: f64 = 1e-12;

fn sphere_area(d: u32) -> Result<f64> {
    match d {
        1 => Ok(2.0),
        2 => Ok(2.0 * PI),
        3 => Ok(4.0 * PI),
        _ => Err(CoreError::param("d", format!("dimension {d} not supported (1..=3)"))),
    }
}

/// `∫₀¹ t^a (1 + t²)^{-s} dt` for `a > -1`; a negative power is removed by
/// the substitution `w = t^{a+1}`.
fn unit_interval_power(a: f64, s: f64) -> Result<f64> {
    if a >= 0.0 {
        integrate(|t| t.powf(a) * (1.0 + t * t).powf(-s), 0.0, 1.0, REL_TOL, 0.0)
    } else {
        let b = a + 1.0;
        let v = integrate(|w| (1.0 + w.powf(2.0 / b)).powf(-s), 0.0, 1.0, REL_TOL, 0.0)?;
        Ok(v / b)
    }
}

/// `∫₀^∞ r^p (1 + r²)^{-s} dr`, split at `r = 1` and mapped to `[0, 1]`
/// with `t = 1/r` on the outer half.
fn radial(p: f64, s: f64) -> Result<f64> {
    let inner = unit_interval_power(p, s)?;
    let outer = unit_interval_power(2.0 * s - p - 2.0, s)?;
    Ok(inner + outer)
}

/// `σ_{s,d} = (∫_{ℝ^d} (1 + |ξ|²)^{-s} dξ)^{1/2}`, the constant of the
/// embedding `L¹ ⊂ H^{-s}`; finite for `s > d/2`.
pub fn sigma_constant(s: f64, d: u32) -> Result<f64> {
    let area = sphere_area(d)?;
    if !(s > 0.5 * d as f64 && s.is_finite()) {
        return Err(CoreError::param("s", format!("{s} must exceed d/2 = {}", 0.5 * d as f64)));
    }
    Ok((area * radial(d as f64 - 1.0, s)?).sqrt())
}

/// `(∫_{ℝ³} (1 + |ξ|²)^{-s} |ξ|^{-2} dξ)^{1/2}`, bounding `(-Δ)^{-1} div`
/// from `L¹` into `H^{-s}`; finite for `s > 1/2`.
pub fn pressure_constant(s: f64) -> Result<f64> {
    if !(s > 0.5 && s.is_finite()) {
        return Err(CoreError::param("s", format!("{s} must exceed 1/2")));
    }
    Ok((4.0 * PI * radial(0.0, s)?).sqrt())
}
