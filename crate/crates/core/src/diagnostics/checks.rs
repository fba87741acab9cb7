//! Checkable forms of the energy estimates. Every report carries both sides of
//! its inequality and a `pass` flag; time integrals use the trapezoid rule on
//! the recorded rows.

use num_complex::Complex64;
use serde::Serialize;

use super::constants::{pressure_constant, sigma_constant};
use super::norms::h_neg_s_norm_scalar;
use super::sampling::{need_rows, trapezoid, Sampler};
use crate::damping::{damping_dissipation, m_beta_r, p_m_eval, sup_ratio_lempn1, tail_gap};
use crate::dynamics::Trajectory;
use crate::error::{CoreError, Result};
use crate::spectral::{
    forward_transform_scalar, ModeSet, RealScalarField, RealVectorField, SpectralVectorField, WorkGrid,
};

/// Relative allowance on the right-hand side of bounds whose two sides are
/// computed by different quadratures.
pub const BOUND_TOL: f64 = 1e-6;
/// Accepted relative slack of the energy ledger.
pub const LEDGER_TOL: f64 = 1e-6;
/// Largest `β max|u|²` accepted by [`series_identity_check`].
pub const SERIES_BUDGET: f64 = 50.0;
/// Largest accepted ratio of the last integrand sample to the integral.
pub const TAIL_TOL: f64 = 1e-3;

fn within(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs * (1.0 + tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `‖f‖_{H^{-s}} ≤ σ_{s,3} ‖f‖_{L¹}` with the `L¹` norm by collocation.
pub fn embedding_check_lff1(f: &RealScalarField, s: f64) -> Result<EmbeddingReport> {
    let sigma = sigma_constant(s, 3)?;
    let lhs = h_neg_s_norm_scalar(&forward_transform_scalar(f)?, s)?;
    let rhs = sigma * f.l1_norm();
    Ok(EmbeddingReport {
        s,
        lhs,
        rhs,
        pass: within(lhs, rhs, 1e-9),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerReport {
    pub initial_energy: f64,
    /// `max_t (ledger_lhs - ‖u⁰‖²) / ‖u⁰‖²`.
    pub worst_slack: f64,
    pub worst_t: f64,
    /// `max_t |ledger_lhs - ‖u⁰‖²| / ‖u⁰‖²`; zero for an exact identity.
    pub worst_abs_gap: f64,
    /// Largest growth of `ledger_lhs` between consecutive rows, relative.
    pub worst_step_excess: f64,
    /// Largest growth of `‖u‖²` between consecutive rows, relative.
    pub worst_l2_increase: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn ledger_inequality_check(traj: &Trajectory) -> Result<LedgerReport> {
    need_rows(traj, 2)?;
    let e0 = traj.initial_energy;
    let scale = if e0 > 0.0 { 1.0 / e0 } else { 1.0 };
    let mut worst = f64::NEG_INFINITY;
    let mut worst_t = 0.0;
    let mut gap = 0.0f64;
    for r in &traj.rows {
        let d = (r.ledger_lhs - e0) * scale;
        if d > worst {
            worst = d;
            worst_t = r.t;
        }
        gap = gap.max(d.abs());
    }
    let mut step_excess = f64::NEG_INFINITY;
    let mut l2_increase = f64::NEG_INFINITY;
    for w in traj.rows.windows(2) {
        step_excess = step_excess.max((w[1].ledger_lhs - w[0].ledger_lhs) * scale);
        l2_increase = l2_increase.max((w[1].l2_sq - w[0].l2_sq) * scale);
    }
    Ok(LedgerReport {
        initial_energy: e0,
        worst_slack: worst,
        worst_t,
        worst_abs_gap: gap,
        worst_step_excess: step_excess,
        worst_l2_increase: l2_increase,
        tol: LEDGER_TOL,
        pass: worst <= LEDGER_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesReport {
    pub beta: f64,
    pub k_max: u32,
    /// `∫ (e^{β|u|²} - 1)|u|²`.
    pub lhs: f64,
    /// `Σ_{k=1}^{k_max} β^k/k! ‖u‖^{2k+2}_{L^{2k+2}}`.
    pub partial_sum: f64,
    pub relative_gap: f64,
    /// `‖u‖² (e^X - 1 - P_{k_max}(X)) / lhs` with `X = β max|u|²`, plus a
    /// round-off allowance.
    pub remainder_bound: f64,
    pub pass: bool,
}

pub fn series_identity_check(u: &RealVectorField, beta: f64, k_max: u32) -> Result<SeriesReport> {
    if k_max == 0 {
        return Err(CoreError::param("k_max", "must be at least 1"));
    }
    let max_sq = u.speed_sq().fold(0.0, f64::max);
    let x = beta * max_sq;
    if x > SERIES_BUDGET {
        return Err(CoreError::SeriesBudget {
            exponent: x,
            budget: SERIES_BUDGET,
        });
    }
    let lhs = damping_dissipation(u, beta)?;
    let w = u.grid().volume() / u.grid().len() as f64;
    // moments[k-1] = ∫ |u|^{2k+2}
    let mut moments = vec![0.0; k_max as usize];
    for s in u.speed_sq() {
        let mut p = s;
        for m in moments.iter_mut() {
            p *= s;
            *m += p;
        }
    }
    let mut terms = Vec::with_capacity(k_max as usize);
    let mut c = 1.0;
    for (k, m) in moments.iter().enumerate() {
        c *= beta / (k + 1) as f64;
        terms.push(c * w * m);
    }
    let partial_sum: f64 = terms.iter().rev().sum();
    if lhs == 0.0 {
        return Ok(SeriesReport {
            beta,
            k_max,
            lhs,
            partial_sum,
            relative_gap: 0.0,
            remainder_bound: 0.0,
            pass: partial_sum == 0.0,
        });
    }
    let r = max_sq.sqrt();
    let tail = tail_gap(r, k_max, beta)? / r;
    let roundoff = 64.0 * f64::EPSILON * (k_max as f64 + 1.0);
    let remainder_bound = u.l2_sq() * tail / lhs + roundoff;
    let relative_gap = (lhs - partial_sum).abs() / lhs;
    Ok(SeriesReport {
        beta,
        k_max,
        lhs,
        partial_sum,
        relative_gap,
        remainder_bound,
        pass: relative_gap <= remainder_bound,
    })
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Integral of a nonnegative integrand over the rows, with the last sample
/// as witness of the truncated tail.
fn tail_integral(t: &[f64], f: &[f64]) -> (f64, f64, f64, bool) {
    let integral = trapezoid(t, f);
    let witness = *f.last().unwrap_or(&0.0);
    let ratio = if integral > 0.0 { witness / integral } else { 0.0 };
    let ok = if integral > 0.0 { ratio < TAIL_TOL } else { witness == 0.0 };
    (integral, witness, ratio, ok)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub k: u32,
    /// `∫₀^{t_end} ‖u‖^{2k+2}_{L^{2k+2}}`.
    pub integral: f64,
    /// `k! ‖u⁰‖² / (2αβ^k)`, the form that follows from the ledger.
    pub bound: f64,
    /// `k! 2α / β^k`, the constant as printed. It does not scale with the
    /// data, so it is flagged inconsistent and reported, not checked.
    pub printed_bound: f64,
    pub printed_bound_consistent: bool,
    /// Whether this run happens to satisfy the printed constant.
    pub printed_bound_holds: bool,
    pub tail_witness: f64,
    pub tail_ratio: f64,
    pub tail_ok: bool,
    pub pass: bool,
}

pub fn moment_bound_check(traj: &Trajectory, k: u32) -> Result<MomentReport> {
    if k == 0 {
        return Err(CoreError::param("k", "must be at least 1"));
    }
    need_rows(traj, 2)?;
    let sampler = Sampler::new(traj)?;
    let f = sampler.integrals(|s, _| s.powi(k as i32 + 1));
    let (integral, witness, ratio, tail_ok) = tail_integral(&sampler.times(), &f);
    let d = traj.config.damping;
    let bound = if d.alpha > 0.0 && d.beta > 0.0 {
        factorial(k) * traj.initial_energy / (2.0 * d.alpha * d.beta.powi(k as i32))
    } else {
        f64::INFINITY
    };
    let printed = if d.beta > 0.0 {
        factorial(k) * 2.0 * d.alpha / d.beta.powi(k as i32)
    } else {
        f64::INFINITY
    };
    Ok(MomentReport {
        k,
        integral,
        bound,
        printed_bound: printed,
        printed_bound_consistent: false,
        printed_bound_holds: integral <= printed,
        tail_witness: witness,
        tail_ratio: ratio,
        tail_ok,
        pass: within(integral, bound, BOUND_TOL) && tail_ok,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyBoundReport {
    pub m: u32,
    /// `∫₀^{t_end} ∫ P_m(β|u|²)²`.
    pub integral: f64,
    /// `integral / ‖u⁰‖²`.
    pub ratio: f64,
    /// `c_{m,β} / (2α)`.
    pub constant: f64,
    pub tail_witness: f64,
    pub tail_ratio: f64,
    pub tail_ok: bool,
    pub pass: bool,
}

/// Space-time `L²` bound on `P_m(β|u|²)`: the pointwise ratio bound
/// `P_m(βz²)² ≤ c_{m,β}(e^{βz²} - 1)z²` composed with the ledger.
pub fn prop2_polybound_check(traj: &Trajectory, m: u32) -> Result<PolyBoundReport> {
    need_rows(traj, 2)?;
    let d = traj.config.damping;
    p_m_eval(0.0, m)?;
    let sampler = Sampler::new(traj)?;
    let f = sampler.integrals(|s, _| {
        let p = p_m_eval(d.beta * s, m).unwrap_or(f64::INFINITY);
        p * p
    });
    let (integral, witness, tail_ratio, tail_ok) = tail_integral(&sampler.times(), &f);
    let e0 = traj.initial_energy;
    let ratio = if e0 > 0.0 { integral / e0 } else { 0.0 };
    let constant = if d.alpha > 0.0 && d.beta > 0.0 {
        sup_ratio_lempn1(m, d.beta)?.sup / (2.0 * d.alpha)
    } else {
        f64::INFINITY
    };
    Ok(PolyBoundReport {
        m,
        integral,
        ratio,
        constant,
        tail_witness: witness,
        tail_ratio,
        tail_ok,
        pass: within(ratio, constant, BOUND_TOL),
    })
}

/// `σ (M_{β,R} T + 1/(2Rα)) E₀`.
pub fn hneg_time_rhs(sigma: f64, beta: f64, alpha: f64, t_end: f64, e0: f64, r: f64) -> Result<f64> {
    let m = m_beta_r(beta, r)?;
    let tail = if alpha > 0.0 { 1.0 / (2.0 * r * alpha) } else { f64::INFINITY };
    Ok(sigma * (m * t_end + tail) * e0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HnegTimeReport {
    pub s: f64,
    pub r: f64,
    /// `∫₀^T ‖(e^{β|u|²} - 1)|u|‖_{H^{-s}}`.
    pub lhs: f64,
    pub rhs: f64,
    pub sigma: f64,
    pub m_beta_r: f64,
    pub t_end: f64,
    pub pass: bool,
}

fn hneg_magnitude_integrand(sampler: &Sampler, s: f64) -> Result<Vec<f64>> {
    let d = sampler.traj.config.damping;
    (0..sampler.len())
        .map(|i| {
            let f = sampler.scalar_transform(i, |q| d.factor(q) * q.sqrt())?;
            h_neg_s_norm_scalar(&f, s)
        })
        .collect()
}

/// `H^{-s}` time integral of the damping magnitude against the split at
/// `|u| = R`. The magnitude uses the run's own damping factor, which is at
/// most the exponential one, so the bound carries over to truncated runs.
pub fn prop2_hneg_timeintegral_check(traj: &Trajectory, s: f64, r: f64) -> Result<HnegTimeReport> {
    Ok(hneg_time_reports(traj, s, &[r])?.remove(0))
}

/// [`prop2_hneg_timeintegral_check`] for several radii sharing one left-hand
/// side.
pub fn hneg_time_reports(traj: &Trajectory, s: f64, radii: &[f64]) -> Result<Vec<HnegTimeReport>> {
    need_rows(traj, 2)?;
    if radii.is_empty() {
        return Err(CoreError::param("R", "no radius given"));
    }
    let sigma = sigma_constant(s, 3)?;
    let sampler = Sampler::new(traj)?;
    let lhs = trapezoid(&sampler.times(), &hneg_magnitude_integrand(&sampler, s)?);
    let d = traj.config.damping;
    let t_end = traj.rows.last().map_or(0.0, |r| r.t);
    radii
        .iter()
        .map(|&r| {
            let rhs = hneg_time_rhs(sigma, d.beta, d.alpha, t_end, traj.initial_energy, r)?;
            Ok(HnegTimeReport {
                s,
                r,
                lhs,
                rhs,
                sigma,
                m_beta_r: m_beta_r(d.beta, r)?,
                t_end,
                pass: within(lhs, rhs, BOUND_TOL),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusSearch {
    pub radii: Vec<f64>,
    pub rhs: Vec<f64>,
    pub best_r: f64,
    pub best_rhs: f64,
}

/// Minimizes the right-hand side of the `H^{-s}` bound over a grid of radii.
pub fn optimize_radius(sigma: f64, beta: f64, alpha: f64, t_end: f64, e0: f64, radii: &[f64]) -> Result<RadiusSearch> {
    if radii.is_empty() {
        return Err(CoreError::param("R", "no radius given"));
    }
    let rhs = radii
        .iter()
        .map(|&r| hneg_time_rhs(sigma, beta, alpha, t_end, e0, r))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, v) in rhs.iter().enumerate() {
        if *v < rhs[best] {
            best = i;
        }
    }
    Ok(RadiusSearch {
        radii: radii.to_vec(),
        best_r: radii[best],
        best_rhs: rhs[best],
        rhs,
    })
}

/// Log-spaced radii in `[lo, hi]`.
pub fn radius_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampingL1Report {
    pub t: f64,
    /// `∫₀^T ‖(e^{β|u|²} - 1)u‖_{L¹}`.
    pub lhs: f64,
    /// `M_{β,1}`.
    pub m_beta: f64,
    pub sup_l2_sq: f64,
    /// `∫₀^T ‖(e^{β|u|²} - 1)|u|²‖_{L¹}`.
    pub damp_integral: f64,
    /// `M_β T sup‖u‖² + damp_integral`.
    pub rhs: f64,
    pub pass: bool,
}

/// Splits at `|u| = 1`: below, `(e^{β|u|²} - 1)|u| ≤ M_β|u|²`; above,
/// `(e^{β|u|²} - 1)|u| ≤ (e^{β|u|²} - 1)|u|²`.
pub fn damping_l1_bound_check(traj: &Trajectory, t: f64) -> Result<DampingL1Report> {
    need_rows(traj, 2)?;
    let end = traj.rows.last().map_or(0.0, |r| r.t);
    if !(t > 0.0 && t <= end * (1.0 + 1e-12)) {
        return Err(CoreError::param("T", format!("{t} outside (0, {end}]")));
    }
    let n = traj.rows.iter().take_while(|r| r.t <= t * (1.0 + 1e-12)).count();
    let d = traj.config.damping;
    let m_beta = m_beta_r(d.beta, 1.0)?;
    let sampler = Sampler::new(traj)?;
    let times = &sampler.times()[..n];
    let l1: Vec<f64> = (0..n)
        .map(|i| {
            let u = sampler.physical(i);
            let mut acc = 0.0;
            for x in 0..u[0].len() {
                let s = u[0][x] * u[0][x] + u[1][x] * u[1][x] + u[2][x] * u[2][x];
                acc += d.factor(s) * s.sqrt();
            }
            acc * sampler.work.weight()
        })
        .collect();
    let lhs = trapezoid(times, &l1);
    let diss: Vec<f64> = traj.rows[..n].iter().map(|r| r.damp_diss).collect();
    let damp_integral = trapezoid(times, &diss);
    let sup_l2_sq = traj.rows[..n].iter().map(|r| r.l2_sq).fold(0.0, f64::max);
    let t_cov = times[n - 1];
    let rhs = m_beta * t_cov * sup_l2_sq + damp_integral;
    Ok(DampingL1Report {
        t: t_cov,
        lhs,
        m_beta,
        sup_l2_sq,
        damp_integral,
        rhs,
        pass: within(lhs, rhs, BOUND_TOL),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureReport {
    pub s: f64,
    /// `‖(-Δ)^{-1} div((u·∇)u)‖_{H^{-s}}`.
    pub adv_lhs: f64,
    /// `c_s ‖u‖²`.
    pub adv_rhs: f64,
    /// `‖(-Δ)^{-1} div((e^{β|u|²} - 1)u)‖_{H^{-s}}`.
    pub damp_lhs: f64,
    /// `C_s ‖(e^{β|u|²} - 1)u‖_{L¹}`.
    pub damp_rhs: f64,
    pub c_s: f64,
    pub cap_c_s: f64,
    pub pass: bool,
}

/// Both pressure bounds at one time. Products are formed on a grid of more
/// than `4K` points so their coefficients are exact on every mode they reach.
pub fn pressure_hneg_bound_check(u: &SpectralVectorField, beta: f64, s: f64) -> Result<PressureReport> {
    if !(s > 1.5) {
        return Err(CoreError::param("s", format!("{s} must exceed 3/2")));
    }
    if !(beta > 0.0) {
        return Err(CoreError::param("beta", format!("{beta} must be positive")));
    }
    let c_s = sigma_constant(s, 3)?;
    let cap_c_s = pressure_constant(s)?;
    let modes = std::sync::Arc::new(ModeSet::full(*u.grid()));
    let m = crate::spectral::next_smooth(4 * modes.band() + 1);
    let work = WorkGrid::with_size(modes.clone(), m)?;
    let phys = work.to_physical(&modes.gather(u));
    let grid = work.collocation_grid();
    let npts = work.len();
    let transform = |v: Vec<f64>| -> Result<Vec<Complex64>> {
        Ok(forward_transform_scalar(&RealScalarField::new(grid, v)?)?.coeffs().to_vec())
    };
    let mut prod = Vec::with_capacity(6);
    for (a, b) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
        prod.push(transform((0..npts).map(|x| phys[a][x] * phys[b][x]).collect())?);
    }
    let mut g = Vec::with_capacity(3);
    let mut l1 = 0.0;
    let mut max_sq = 0.0f64;
    let speed_sq: Vec<f64> = (0..npts)
        .map(|x| phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x])
        .collect();
    for &q in &speed_sq {
        max_sq = max_sq.max(q);
    }
    crate::DampingParams::new(1.0, beta, None)?.check_exponent(max_sq)?;
    for c in 0..3 {
        g.push(transform(
            (0..npts).map(|x| (beta * speed_sq[x]).exp_m1() * phys[c][x]).collect(),
        )?);
    }
    for &q in &speed_sq {
        l1 += (beta * q).exp_m1() * q.sqrt();
    }
    l1 *= work.weight();
    let idx = |a: usize, b: usize| match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    };
    let (mut adv, mut damp) = (0.0, 0.0);
    for i in 0..grid.len() {
        let k = grid.wavevector(grid.unflat(i));
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            continue;
        }
        let w = (1.0 + k2).powf(-s);
        let mut pa = Complex64::default();
        let mut pd = Complex64::default();
        for a in 0..3 {
            for b in 0..3 {
                pa -= prod[idx(a, b)][i] * (k[a] * k[b]);
            }
            pd += g[a][i] * k[a];
        }
        adv += w * (pa / k2).norm_sqr();
        damp += w * (pd / k2).norm_sqr();
    }
    let vol = grid.volume();
    let adv_lhs = (vol * adv).sqrt();
    let damp_lhs = (vol * damp).sqrt();
    let adv_rhs = c_s * u.l2_sq();
    let damp_rhs = cap_c_s * l1;
    Ok(PressureReport {
        s,
        adv_lhs,
        adv_rhs,
        damp_lhs,
        damp_rhs,
        c_s,
        cap_c_s,
        pass: within(adv_lhs, adv_rhs, 1e-9) && within(damp_lhs, damp_rhs, 1e-9),
    })
}
