use serde::Serialize;

use super::sampling::need_rows;
use crate::dynamics::Trajectory;
use crate::error::{CoreError, Result};

/// Empirical modulus of continuity in `H^{-s₀}` on a dyadic ladder of lags.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquicontinuityReport {
    pub s0: f64,
    pub lags: Vec<f64>,
    /// `max_t ‖u(t + lag) - u(t)‖_{H^{-s₀}}` for each lag.
    pub modulus: Vec<f64>,
    /// `modulus(lag/2) ≤ modulus(lag)` along the whole ladder.
    pub halving_ok: bool,
}

impl EquicontinuityReport {
    /// Modulus at `lag`, if the ladder has it.
    pub fn at(&self, lag: f64) -> Option<f64> {
        self.lags
            .iter()
            .position(|&l| (l - lag).abs() <= 1e-9 * lag.abs().max(1e-300))
            .map(|i| self.modulus[i])
    }
}

/// Sample spacing, or an error when the rows are not evenly spaced.
fn spacing(t: &[f64]) -> Result<f64> {
    let h = t[1] - t[0];
    let tol = 1e-6 * h;
    if h <= 0.0 || t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(CoreError::param("trajectory", "rows are not uniformly sampled"));
    }
    Ok(h)
}

pub fn equicontinuity_modulus(traj: &Trajectory, s0: f64) -> Result<EquicontinuityReport> {
    need_rows(traj, 2)?;
    if !(s0 > 0.0) {
        return Err(CoreError::param("s0", format!("{s0} must be positive")));
    }
    let h = spacing(&traj.times())?;
    let n = traj.snapshots.len();
    let modes = &traj.modes;
    let mut lags = Vec::new();
    let mut modulus = Vec::new();
    let mut j = 1;
    while j < n {
        let worst = (0..n - j)
            .map(|i| modes.hneg_dist_sq(&traj.snapshots[i + j], &traj.snapshots[i], s0))
            .fold(0.0, f64::max)
            .sqrt();
        lags.push(j as f64 * h);
        modulus.push(worst);
        j *= 2;
    }
    let halving_ok = modulus.windows(2).all(|w| w[0] <= w[1]);
    Ok(EquicontinuityReport {
        s0,
        lags,
        modulus,
        halving_ok,
    })
}

/// Whether every report stays below `(1 + slack)` times the reference curve
/// on the lags they share.
pub fn uniformly_bounded(reports: &[EquicontinuityReport], reference: &EquicontinuityReport, slack: f64) -> bool {
    reports.iter().all(|r| {
        r.lags
            .iter()
            .zip(&r.modulus)
            .all(|(&lag, &m)| reference.at(lag).is_none_or(|b| m <= b * (1.0 + slack)))
    })
}
