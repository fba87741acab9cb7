use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::sampling::{need_rows, trapezoid};
use crate::dynamics::{EvalMode, Solver, Trajectory};
use crate::error::{CoreError, Result};
use crate::spectral::{BandVec, SpectralVectorField};

/// Time factor `φ` of a separable test field `Φ(t, x) = φ(t) ψ(x)`, with
/// `φ(0) = 1` and `φ(T) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TimeProfile {
    /// `1 - t/T`.
    Linear,
    /// `cos(πt / 2T)`.
    Cosine,
}

impl TimeProfile {
    pub fn value(self, t: f64, t_end: f64) -> f64 {
        match self {
            TimeProfile::Linear => 1.0 - t / t_end,
            TimeProfile::Cosine => (FRAC_PI_2 * t / t_end).cos(),
        }
    }

    pub fn derivative(self, t: f64, t_end: f64) -> f64 {
        match self {
            TimeProfile::Linear => -1.0 / t_end,
            TimeProfile::Cosine => -FRAC_PI_2 / t_end * (FRAC_PI_2 * t / t_end).sin(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeakFormReport {
    /// `-∫(u, ∂_tΦ)`.
    pub time_term: f64,
    /// `ν ∫(∇u, ∇Φ)`.
    pub viscous_term: f64,
    /// `∫((u·∇)u, Φ)`.
    pub advective_term: f64,
    /// `α ∫((e^{β|u|²} - 1)u, Φ)`.
    pub damping_term: f64,
    /// `(u⁰, Φ(0))`.
    pub rhs: f64,
    /// `|lhs - rhs| / (‖u⁰‖ ‖Φ‖_{L^∞H¹})`.
    pub residual: f64,
}

/// Residual of the weak formulation against `Φ = φ(t) ψ(x)`. `ψ` must be
/// flagged divergence-free and supported in the trajectory's mode set. The
/// nonlinear pairings are taken with the projected terms, which agree with
/// the unprojected ones on such `ψ`.
pub fn weak_form_residual(traj: &Trajectory, psi: &SpectralVectorField, profile: TimeProfile) -> Result<WeakFormReport> {
    need_rows(traj, 2)?;
    if !psi.is_divfree() {
        return Err(CoreError::NotDivergenceFree);
    }
    let modes = &traj.modes;
    if psi.grid() != modes.grid() {
        return Err(CoreError::GridMismatch {
            expected: modes.grid().n(),
            found: psi.grid().n(),
        });
    }
    let pb = modes.gather(psi);
    let outside = psi.l2_sq() - modes.l2_sq(&pb);
    if outside > 1e-24 * psi.l2_sq().max(1e-300) {
        return Err(CoreError::param("test field", "has modes outside the cutoff ball"));
    }
    let solver = Solver::new(traj.config.clone())?;
    let t_end = traj.rows.last().map_or(0.0, |r| r.t);
    if !(t_end > 0.0) {
        return Err(CoreError::param("trajectory", "has zero length"));
    }
    let nu = traj.config.nu;
    let vol = modes.grid().volume();
    let grad_inner = |u: &BandVec| -> f64 {
        let mut acc = 0.0;
        for (p, &k2) in modes.k2().iter().enumerate() {
            for c in 0..3 {
                acc += k2 * (u.c[c][p] * pb.c[c][p].conj()).re;
            }
        }
        vol * acc
    };
    let n = traj.snapshots.len();
    let t = traj.times();
    let (mut g, mut visc, mut adv, mut damp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let u = &traj.snapshots[i];
        let phi = profile.value(t[i], t_end);
        g[i] = -profile.derivative(t[i], t_end) * modes.inner(u, &pb);
        visc[i] = phi * nu * grad_inner(u);
        let e = solver.evaluate(u, EvalMode::Split)?;
        if let Some((a, d)) = &e.parts {
            adv[i] = phi * modes.inner(a, &pb);
            damp[i] = phi * modes.inner(d, &pb);
        }
    }
    let time_term = trapezoid(&t, &g);
    let viscous_term = trapezoid(&t, &visc);
    let advective_term = trapezoid(&t, &adv);
    let damping_term = trapezoid(&t, &damp);
    let rhs = profile.value(0.0, t_end) * modes.inner(&traj.snapshots[0], &pb);
    let lhs = time_term + viscous_term + advective_term + damping_term;
    let phi_sup = (0..=64)
        .map(|j| profile.value(t_end * j as f64 / 64.0, t_end).abs())
        .fold(0.0, f64::max);
    let scale = traj.initial_energy.sqrt() * phi_sup * (modes.l2_sq(&pb) + modes.grad_sq(&pb)).sqrt();
    let gap = (lhs - rhs).abs();
    let residual = if scale > 0.0 { gap / scale } else { 0.0 };
    Ok(WeakFormReport {
        time_term,
        viscous_term,
        advective_term,
        damping_term,
        rhs,
        residual,
    })
}
