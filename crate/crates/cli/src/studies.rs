use expdamp_core::damping::tail_gap;
use expdamp_core::diagnostics::{equicontinuity_modulus, uniformly_bounded, EquicontinuityReport};
use expdamp_core::dynamics::{initial_field, Ensemble, SimConfig, Trajectory};
use expdamp_core::spectral::{ModeSet, WorkGrid};
use serde::Serialize;

use crate::error::CliError;
use crate::output::OutDir;
use crate::run::Outcome;

pub const LADDER_JSON: &str = "ladder.json";
pub const POLYORDER_JSON: &str = "polyorder.json";

/// Order of the negative Sobolev norm for sup-in-time distances and moduli.
pub const S_STUDY: f64 = 3.0;
/// Growth allowed on the last rung of the ladder.
pub const LAST_RUNG_SLACK: f64 = 0.1;
/// Growth allowed over the reference modulus curve.
pub const MODULUS_SLACK: f64 = 0.1;
/// Agreement required with the closed-form ladder of a linear run.
pub const CLOSED_FORM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct Rung {
    pub lower: f64,
    pub upper: f64,
    /// `‖u_upper - u_lower‖_{L²(0,T; L²)}`.
    pub l2_time: f64,
    /// `sup_t ‖u_upper - u_lower‖_{H^{-3}}`.
    pub hneg_sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormLadder {
    pub rungs: Vec<Rung>,
    pub max_rel_error: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberModulus {
    pub cutoff: f64,
    pub report: EquicontinuityReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusStudy {
    pub reference_cutoff: f64,
    pub members: Vec<MemberModulus>,
    pub halving_ok: bool,
    pub uniform: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LadderReport {
    /// What the ladder measures: distances between consecutive cutoffs, an
    /// empirical surrogate for convergence to an unknown limit.
    pub label: String,
    pub cutoffs: Vec<f64>,
    pub rungs: Vec<Rung>,
    pub nonincreasing: bool,
    pub closed_form: Option<ClosedFormLadder>,
    pub equicontinuity: Option<ModulusStudy>,
    pub pass: bool,
}

pub struct CutoffStudy {
    pub report: LadderReport,
    pub trajectories: Vec<Trajectory>,
}

/// `d_{i+1} ≤ d_i`, with `LAST_RUNG_SLACK` on the last rung.
pub fn ladder_nonincreasing(d: &[f64]) -> bool {
    let n = d.len();
    d.windows(2).enumerate().all(|(i, w)| {
        let slack = if i + 2 == n { 1.0 + LAST_RUNG_SLACK } else { 1.0 };
        w[1] <= w[0] * slack
    })
}

/// Ladder of a linear run (no advection, no damping) from the initial
/// coefficients: each rung is the heat decay of the shell between the two
/// cutoffs.
pub fn closed_form_ladder(base: &SimConfig, cutoffs: &[f64]) -> Result<Vec<Rung>, CliError> {
    let grid = base.grid()?;
    let u0 = initial_field(grid, &base.ic, base.seed)?;
    let sets = cutoffs
        .iter()
        .map(|&c| ModeSet::ball(grid, c))
        .collect::<Result<Vec<_>, _>>()?;
    let vol = grid.volume();
    let nu = base.nu;
    let t = base.t_end;
    let mut rungs = Vec::new();
    for (i, w) in sets.windows(2).enumerate() {
        let (mut l2, mut h) = (0.0, 0.0);
        let (small, large) = if cutoffs[i] <= cutoffs[i + 1] { (&w[0], &w[1]) } else { (&w[1], &w[0]) };
        for (p, &f) in large.flat().iter().enumerate() {
            if small.position(f).is_some() {
                continue;
            }
            let k2 = large.k2()[p];
            let a: f64 = u0.at(f).iter().map(|z| z.norm_sqr()).sum();
            let lam = 2.0 * nu * k2;
            l2 += a * if lam > 0.0 { -(-lam * t).exp_m1() / lam } else { t };
            h += a * (1.0 + k2).powf(-S_STUDY);
        }
        rungs.push(Rung {
            lower: cutoffs[i],
            upper: cutoffs[i + 1],
            l2_time: (vol * l2).sqrt(),
            hneg_sup: (vol * h).sqrt(),
        });
    }
    Ok(rungs)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn validate_members(configs: &[SimConfig]) -> Result<(), CliError> {
    for c in configs {
        c.validate()?;
    }
    Ok(())
}

/// Runs one member per cutoff in lockstep and measures the distances between
/// neighbours on the ladder.
pub fn cutoff_study(base: &SimConfig, cutoffs: &[f64]) -> Result<CutoffStudy, CliError> {
    if cutoffs.len() < 2 {
        return Err(CliError::Config("cutoff study needs at least two cutoffs".into()));
    }
    let configs: Vec<SimConfig> = cutoffs
        .iter()
        .map(|&c| SimConfig {
            cutoff: c,
            ..base.clone()
        })
        .collect();
    validate_members(&configs)?;
    let pairs = (0..cutoffs.len() - 1).map(|i| (i, i + 1)).collect();
    let result = Ensemble::new(configs, pairs)?.run(S_STUDY)?;
    if let Some((i, e)) = result.error {
        return Err(CliError::Numerical(format!("member with cutoff {}: {e}", cutoffs[i])));
    }
    let rungs: Vec<Rung> = result
        .distances
        .iter()
        .map(|d| Rung {
            lower: cutoffs[d.a],
            upper: cutoffs[d.b],
            l2_time: d.l2_time(),
            hneg_sup: d.hneg_sup,
        })
        .collect();
    let l2: Vec<f64> = rungs.iter().map(|r| r.l2_time).collect();
    let nonincreasing = ladder_nonincreasing(&l2);
    let closed_form = if !base.advection && !base.damping.is_active() {
        let exact = closed_form_ladder(base, cutoffs)?;
        let err = exact
            .iter()
            .zip(&rungs)
            .map(|(e, r)| rel(e.l2_time, r.l2_time).max(rel(e.hneg_sup, r.hneg_sup)))
            .fold(0.0, f64::max);
        Some(ClosedFormLadder {
            rungs: exact,
            max_rel_error: err,
            pass: err <= CLOSED_FORM_TOL,
        })
    } else {
        None
    };
    let equicontinuity = modulus_study(cutoffs, &result.trajectories);
    let pass = nonincreasing
        && closed_form.as_ref().is_none_or(|c| c.pass)
        && equicontinuity.as_ref().is_none_or(|m| m.halving_ok && m.uniform);
    Ok(CutoffStudy {
        report: LadderReport {
            label: "Cauchy ladder over cutoffs (empirical surrogate for strong convergence)".into(),
            cutoffs: cutoffs.to_vec(),
            rungs,
            nonincreasing,
            closed_form,
            equicontinuity,
            pass,
        },
        trajectories: result.trajectories,
    })
}

/// Moduli of continuity of every member against the member with the largest
/// cutoff. `None` when the rows are not evenly spaced.
pub fn modulus_study(cutoffs: &[f64], trajectories: &[Trajectory]) -> Option<ModulusStudy> {
    let members = cutoffs
        .iter()
        .zip(trajectories)
        .map(|(&cutoff, t)| {
            equicontinuity_modulus(t, S_STUDY)
                .ok()
                .map(|report| MemberModulus { cutoff, report })
        })
        .collect::<Option<Vec<_>>>()?;
    let top = members
        .iter()
        .max_by(|a, b| a.cutoff.total_cmp(&b.cutoff))?
        .clone();
    let reports: Vec<EquicontinuityReport> = members.iter().map(|m| m.report.clone()).collect();
    Some(ModulusStudy {
        reference_cutoff: top.cutoff,
        halving_ok: members.iter().all(|m| m.report.halving_ok),
        uniform: uniformly_bounded(&reports, &top.report, MODULUS_SLACK),
        members,
    })
}

pub fn cmd_cutoff_study(base: &SimConfig, cutoffs: &[f64], out: &mut OutDir) -> Result<Outcome, CliError> {
    let study = cutoff_study(base, cutoffs)?;
    for (c, t) in cutoffs.iter().zip(&study.trajectories) {
        out.ledger(&format!("ledger_cutoff_{c}.csv"), &t.rows)?;
    }
    out.json(LADDER_JSON, &study.report)?;
    Ok(Outcome {
        passed: study.report.pass,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderRow {
    pub m: u32,
    /// `‖u_m - u‖_{L²(0,T; L²)}` against the run with the full exponential.
    pub l2_time: f64,
    pub hneg_sup: f64,
    /// `(e^{βR₀²} - 1 - P_m(βR₀²)) R₀`.
    pub tail_gap: f64,
    /// `l2_time / tail_gap`, when the gap is nonzero.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyOrderReport {
    pub r0: f64,
    pub beta: f64,
    /// `β max|u⁰|²` on the solver's collocation grid.
    pub beta_max_speed_sq: f64,
    pub rows: Vec<OrderRow>,
    /// Distances nonincreasing in `m`.
    pub monotone: bool,
    /// For `m ≥ 50` and `β max|u⁰|² ≤ 1`: every distance below `1e-10`.
    pub large_order_ok: Option<bool>,
    pub pass: bool,
}

pub struct PolyOrderStudy {
    pub report: PolyOrderReport,
    pub trajectories: Vec<Trajectory>,
}

/// Runs the full damping next to its truncations `P_m` for each order.
pub fn polyorder_study(base: &SimConfig, orders: &[u32], r0: f64) -> Result<PolyOrderStudy, CliError> {
    if orders.is_empty() {
        return Err(CliError::Config("order list is empty".into()));
    }
    if !(r0 >= 0.0 && r0.is_finite()) {
        return Err(CliError::Config(format!("r0 = {r0} must be nonnegative")));
    }
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    let mut full = base.clone();
    full.damping.poly_order = None;
    let mut configs = vec![full.clone()];
    for &m in &sorted {
        let mut c = full.clone();
        c.damping.poly_order = Some(m);
        configs.push(c);
    }
    validate_members(&configs)?;
    let pairs = (1..configs.len()).map(|i| (0, i)).collect();
    let ensemble = Ensemble::new(configs, pairs)?;
    let beta = full.damping.beta;
    let beta_max_speed_sq = {
        let solver = &ensemble.solvers()[0];
        let work: &WorkGrid = solver.work_grid();
        let s = solver.initial_state()?;
        let phys = work.to_physical(&s.coeffs);
        let max_sq = (0..work.len())
            .map(|x| phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x])
            .fold(0.0, f64::max);
        beta * max_sq
    };
    let result = ensemble.run(S_STUDY)?;
    if let Some((i, e)) = result.error {
        return Err(CliError::Numerical(format!("member {i}: {e}")));
    }
    let rows = result
        .distances
        .iter()
        .zip(&sorted)
        .map(|(d, &m)| {
            let gap = tail_gap(r0, m, beta)?;
            Ok(OrderRow {
                m,
                l2_time: d.l2_time(),
                hneg_sup: d.hneg_sup,
                tail_gap: gap,
                ratio: (gap > 0.0).then(|| d.l2_time() / gap),
            })
        })
        .collect::<Result<Vec<_>, expdamp_core::CoreError>>()?;
    let monotone = rows.windows(2).all(|w| w[1].l2_time <= w[0].l2_time);
    let large: Vec<&OrderRow> = rows.iter().filter(|r| r.m >= 50).collect();
    let large_order_ok = (beta_max_speed_sq <= 1.0 && !large.is_empty()).then(|| large.iter().all(|r| r.l2_time < 1e-10));
    let pass = monotone && large_order_ok != Some(false);
    Ok(PolyOrderStudy {
        report: PolyOrderReport {
            r0,
            beta,
            beta_max_speed_sq,
            rows,
            monotone,
            large_order_ok,
            pass,
        },
        trajectories: result.trajectories,
    })
}

pub fn cmd_polyorder_study(base: &SimConfig, orders: &[u32], r0: f64, out: &mut OutDir) -> Result<Outcome, CliError> {
    let study = polyorder_study(base, orders, r0)?;
    out.ledger("ledger_full.csv", &study.trajectories[0].rows)?;
    for (m, t) in study.report.rows.iter().zip(&study.trajectories[1..]) {
        out.ledger(&format!("ledger_m{}.csv", m.m), &t.rows)?;
    }
    out.json(POLYORDER_JSON, &study.report)?;
    Ok(Outcome {
        passed: study.report.pass,
    })
}
