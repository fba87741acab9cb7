//! Time integration of the cut-off, projected, damped system on the ball
//! `|k| < R`.
//!
//! The state lives on the members of a [`ModeSet`]. Nonlinear terms are
//! formed on a zero-padded collocation grid: the quadratic term in rotational
//! form `ω × u` (its gradient part is removed by the projector), the damping
//! term pointwise on the same grid. Time stepping is the Lawson (integrating
//! factor) variant of classical RK4 with `E(h) = e^{-ν|k|²h}`.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::ic::initial_field;
use crate::diagnostics::EnergyLedgerRow;
use crate::error::{CoreError, Result};
use crate::spectral::{BandVec, Grid, ModeSet, SpectralScalarField, SpectralVectorField, WorkGrid};

/// Smallest accepted step, apart from a final step clipped to `t_end`.
pub const DT_MIN: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    /// Coefficients on the solver's mode set.
    pub coeffs: BandVec,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RhsNorms {
    /// `‖ν Δ u‖_{L²}`.
    pub viscous: f64,
    /// `‖ℙ J div(u ⊗ u)‖_{L²}`.
    pub advective: f64,
    /// `‖α ℙ J g(u)‖_{L²}`.
    pub damping: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub dt_used: f64,
    /// `max|u|` at the start of the step, on the collocation grid.
    pub max_speed: f64,
    pub rhs_norms: RhsNorms,
}

/// Nonlinear part of the right-hand side at one state, with the scalar
/// quantities gathered on the way.
#[derive(Clone, Debug)]
pub struct Eval {
    /// `-ℙ J (ω × u + α g(u))`.
    pub rhs: BandVec,
    /// Advective and damping parts separately, when requested.
    pub parts: Option<(BandVec, BandVec)>,
    pub grad_sq: f64,
    /// `∫ factor(|u|²)|u|²` on the collocation grid.
    pub damp_diss: f64,
    /// `None` when the physical-space pass was skipped (linear problems).
    pub max_speed: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Only what the time stepper needs.
    Stage,
    /// Always visits physical space, so `max_speed` and `damp_diss` are set.
    Full,
    /// As `Full`, keeping the advective and damping parts apart.
    Split,
}

pub struct Solver {
    config: SimConfig,
    grid: Grid,
    modes: Arc<ModeSet>,
    work: WorkGrid,
    scratch: Mutex<[Vec<Complex64>; 3]>,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("cutoff", &self.config.cutoff)
            .field("modes", &self.modes.len())
            .field("work", &self.work.size())
            .finish()
    }
}

impl Solver {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.grid()?;
        let modes = Arc::new(ModeSet::ball(grid, config.cutoff)?);
        let work = WorkGrid::dealiased(modes.clone(), config.oversample)?;
        Ok(Self {
            config,
            grid,
            modes,
            work,
            scratch: Mutex::new(Default::default()),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn work_grid(&self) -> &WorkGrid {
        &self.work
    }

    /// `J_R u⁰` for the configured initial condition.
    pub fn initial_state(&self) -> Result<State> {
        let u0 = initial_field(self.grid, &self.config.ic, self.config.seed)?;
        self.state_from_field(0.0, &u0)
    }

    /// Restricts a divergence-free full-grid field to the ball.
    pub fn state_from_field(&self, t: f64, u: &SpectralVectorField) -> Result<State> {
        if u.grid() != &self.grid {
            return Err(CoreError::GridMismatch {
                expected: self.grid.n(),
                found: u.grid().n(),
            });
        }
        if !u.is_divfree() {
            return Err(CoreError::NotDivergenceFree);
        }
        Ok(State {
            t,
            coeffs: self.modes.gather(u),
        })
    }

    pub fn field(&self, state: &State) -> SpectralVectorField {
        self.modes.scatter(&state.coeffs, true)
    }

    fn is_linear(&self) -> bool {
        !self.config.advection && !self.config.damping.is_active()
    }

    fn curl(&self, u: &BandVec) -> BandVec {
        let mut w = BandVec::zeros(u.len());
        let i = Complex64::i();
        for (p, k) in self.modes.wave().iter().enumerate() {
            let (a, b, c) = (u.c[0][p], u.c[1][p], u.c[2][p]);
            w.c[0][p] = i * (b.scale(-k[2]) + c.scale(k[1]));
            w.c[1][p] = i * (c.scale(-k[0]) + a.scale(k[2]));
            w.c[2][p] = i * (a.scale(-k[1]) + b.scale(k[0]));
        }
        w
    }

    /// Nonlinear right-hand side and gathered scalars at `u`.
    pub fn evaluate(&self, u: &BandVec, mode: EvalMode) -> Result<Eval> {
        let grad_sq = self.modes.grad_sq(u);
        if self.is_linear() && mode == EvalMode::Stage {
            return Ok(Eval {
                rhs: BandVec::zeros(u.len()),
                parts: None,
                grad_sq,
                damp_diss: 0.0,
                max_speed: None,
            });
        }
        let work = &self.work;
        let adv = self.config.advection;
        let damping = self.config.damping;
        let damping_on = damping.is_active();
        let n = work.len();
        let mut guard = self.scratch.lock().unwrap_or_else(|p| p.into_inner());
        let [b1, b2, b3] = &mut *guard;

        // b1 = (u0, u1), b2 = (u2, w0), b3 = (w1, w2)
        work.load_pair(b1, &u.c[0], Some(&u.c[1]));
        if adv {
            let w = self.curl(u);
            work.load_pair(b2, &u.c[2], Some(&w.c[0]));
            work.load_pair(b3, &w.c[1], Some(&w.c[2]));
        } else {
            work.load_pair(b2, &u.c[2], None);
        }

        let mut max_sq = 0.0f64;
        for x in 0..n {
            max_sq = max_sq.max(b1[x].norm_sqr() + b2[x].re * b2[x].re);
        }
        damping.check_exponent(max_sq)?;

        let split = mode == EvalMode::Split && adv && damping_on;
        let mut diss = 0.0;
        for x in 0..n {
            let (u0, u1, u2) = (b1[x].re, b1[x].im, b2[x].re);
            let s = u0 * u0 + u1 * u1 + u2 * u2;
            let f = damping.factor(s);
            diss += f * s;
            let af = damping.alpha * f;
            let g = [af * u0, af * u1, af * u2];
            let a = if adv {
                let (w0, w1, w2) = (b2[x].im, b3[x].re, b3[x].im);
                [w1 * u2 - w2 * u1, w2 * u0 - w0 * u2, w0 * u1 - w1 * u0]
            } else {
                [0.0; 3]
            };
            if split {
                b1[x] = Complex64::new(a[0], a[1]);
                b2[x] = Complex64::new(a[2], g[0]);
                b3[x] = Complex64::new(g[1], g[2]);
            } else {
                b1[x] = Complex64::new(a[0] + g[0], a[1] + g[1]);
                b2[x] = Complex64::new(a[2] + g[2], 0.0);
            }
        }
        let damp_diss = diss * work.weight();

        let zeros = || BandVec::zeros(u.len());
        let (rhs, parts) = if split {
            let (a0, a1) = work.unload_pair(b1, true);
            let (a2, g0) = work.unload_pair(b2, true);
            let (g1, g2) = work.unload_pair(b3, true);
            let mut ah = BandVec { c: [a0, a1, a2] };
            let mut gh = BandVec { c: [g0, g1, g2] };
            self.modes.project(&mut ah);
            self.modes.project(&mut gh);
            let mut rhs = zeros();
            rhs.axpy(-1.0, &ah);
            rhs.axpy(-1.0, &gh);
            (rhs, Some((ah, gh)))
        } else {
            let mut h = if adv || damping_on {
                let (n0, n1) = work.unload_pair(b1, true);
                let (n2, _) = work.unload_pair(b2, false);
                BandVec { c: [n0, n1, n2] }
            } else {
                zeros()
            };
            self.modes.project(&mut h);
            h.scale(-1.0);
            let parts = match mode {
                EvalMode::Split if adv => Some((h.clone().negated(), zeros())),
                EvalMode::Split => Some((zeros(), h.clone().negated())),
                _ => None,
            };
            (h, parts)
        };
        Ok(Eval {
            rhs,
            parts,
            grad_sq,
            damp_diss,
            max_speed: Some(max_sq.sqrt()),
        })
    }

    /// Full right-hand side of the projected system on the full grid:
    /// `ν Δ u - ℙ J div(u ⊗ u) - α ℙ J g(u)`.
    pub fn rhs_sn(&self, state: &State) -> Result<SpectralVectorField> {
        let mut r = self.evaluate(&state.coeffs, EvalMode::Full)?.rhs;
        let nu = self.config.nu;
        for c in 0..3 {
            for (p, &k2) in self.modes.k2().iter().enumerate() {
                r.c[c][p] -= state.coeffs.c[c][p] * (nu * k2);
            }
        }
        Ok(self.modes.scatter(&r, true))
    }

    /// `J(div(u ⊗ u) + α g(u))` in conservative form, before projection.
    fn forcing(&self, u: &BandVec) -> Result<BandVec> {
        let work = &self.work;
        let n = work.len();
        let phys = work.to_physical(u);
        let max_sq = (0..n)
            .map(|x| phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x])
            .fold(0.0, f64::max);
        self.config.damping.check_exponent(max_sq)?;
        let mut out = if self.config.damping.is_active() {
            let d = self.config.damping;
            let g: [Vec<f64>; 3] = std::array::from_fn(|c| {
                (0..n)
                    .map(|x| {
                        let s = phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x];
                        d.alpha * d.factor(s) * phys[c][x]
                    })
                    .collect()
            });
            work.from_physical(&g)
        } else {
            BandVec::zeros(u.len())
        };
        if self.config.advection {
            let prod = |a: usize, b: usize| -> Vec<f64> { (0..n).map(|x| phys[a][x] * phys[b][x]).collect() };
            let (h00, h01) = work.from_physical_pair(&prod(0, 0), Some(&prod(0, 1)));
            let (h02, h11) = work.from_physical_pair(&prod(0, 2), Some(&prod(1, 1)));
            let (h12, h22) = work.from_physical_pair(&prod(1, 2), Some(&prod(2, 2)));
            let t = [[&h00, &h01, &h02], [&h01, &h11, &h12], [&h02, &h12, &h22]];
            let i = Complex64::i();
            for (p, k) in self.modes.wave().iter().enumerate() {
                for (c, row) in t.iter().enumerate() {
                    out.c[c][p] += i * (row[0][p] * k[0] + row[1][p] * k[1] + row[2][p] * k[2]);
                }
            }
        }
        Ok(out)
    }

    /// Right-hand side without the projector: `ν Δ u - J div(u ⊗ u) - α J g(u)`.
    /// It differs from [`Solver::rhs_sn`] by exactly the pressure gradient.
    pub fn rhs_unprojected(&self, state: &State) -> Result<SpectralVectorField> {
        let mut r = self.forcing(&state.coeffs)?;
        let nu = self.config.nu;
        for c in 0..3 {
            for (p, &k2) in self.modes.k2().iter().enumerate() {
                r.c[c][p] = -r.c[c][p] - state.coeffs.c[c][p] * (nu * k2);
            }
        }
        Ok(self.modes.scatter(&r, false))
    }

    /// Pressure `(-Δ)^{-1} div F` with `F = J(div(u ⊗ u) + α g(u))`, zero mean.
    pub fn pressure_recover(&self, state: &State) -> Result<SpectralScalarField> {
        let f = self.forcing(&state.coeffs)?;
        let mut p = vec![Complex64::default(); self.grid.len()];
        let i = Complex64::i();
        for (pos, (k, &k2)) in self.modes.wave().iter().zip(self.modes.k2()).enumerate() {
            if k2 == 0.0 {
                continue;
            }
            let kf = f.c[0][pos] * k[0] + f.c[1][pos] * k[1] + f.c[2][pos] * k[2];
            p[self.modes.flat()[pos]] = i * kf / k2;
        }
        SpectralScalarField::from_coeffs(self.grid, p)
    }

    /// Largest step allowed by `dt_max` and the two stability limits at a
    /// state with collocation maximum speed `max_speed`.
    pub fn stable_dt(&self, max_speed: f64) -> f64 {
        let c = &self.config;
        let mut dt = c.dt_max;
        if c.advection && max_speed > 0.0 {
            dt = dt.min(c.cfl_adv * self.grid.spacing() / max_speed);
        }
        let lg = c.damping.lipschitz(max_speed);
        if lg > 0.0 {
            dt = dt.min(c.cfl_damp / lg);
        }
        dt
    }

    fn factors(&self, h: f64) -> (Vec<f64>, Vec<f64>) {
        let nu = self.config.nu;
        let half: Vec<f64> = self.modes.k2().iter().map(|&k2| (-nu * k2 * 0.5 * h).exp()).collect();
        let full: Vec<f64> = self.modes.k2().iter().map(|&k2| (-nu * k2 * h).exp()).collect();
        (half, full)
    }

    /// One Lawson-RK4 step of size `h` from `u` with `k1 = N(u)` already known.
    pub fn advance(&self, u: &BandVec, k1: &Eval, h: f64) -> Result<StepResult> {
        let (eh, ef) = self.factors(h);

        let mut u2 = u.clone();
        u2.axpy(0.5 * h, &k1.rhs);
        u2.scale_modes(&eh);
        let k2 = self.evaluate(&u2, EvalMode::Stage)?;

        let mut u3 = u.clone();
        u3.scale_modes(&eh);
        u3.axpy(0.5 * h, &k2.rhs);
        let k3 = self.evaluate(&u3, EvalMode::Stage)?;

        let mut u4 = u.clone();
        u4.scale_modes(&ef);
        let mut t3 = k3.rhs.clone();
        t3.scale_modes(&eh);
        u4.axpy(h, &t3);
        let k4 = self.evaluate(&u4, EvalMode::Stage)?;

        let mut acc = k1.rhs.clone();
        acc.scale_modes(&eh);
        acc.axpy(2.0, &k2.rhs);
        acc.axpy(2.0, &k3.rhs);
        acc.scale_modes(&eh);
        acc.axpy(1.0, &k4.rhs);
        let mut next = u.clone();
        next.scale_modes(&ef);
        next.axpy(h / 6.0, &acc);
        self.modes.project(&mut next);

        let nu = self.config.nu;
        let alpha = self.config.damping.alpha;
        let w = h / 6.0;
        let grad = w * (k1.grad_sq + 2.0 * k2.grad_sq + 2.0 * k3.grad_sq + k4.grad_sq);
        let damp = w * (k1.damp_diss + 2.0 * k2.damp_diss + 2.0 * k3.damp_diss + k4.damp_diss);
        Ok(StepResult {
            next,
            stages: [u2, u3, u4],
            d_cum_grad: 2.0 * nu * grad,
            d_cum_damp: 2.0 * alpha * damp,
        })
    }
}

/// Output of [`Solver::advance`].
#[derive(Clone, Debug)]
pub struct StepResult {
    pub next: BandVec,
    /// Stage states `u₂, u₃, u₄`; with `uₙ` they carry the RK4 quadrature
    /// weights `1, 2, 2, 1` (times `h/6`).
    pub stages: [BandVec; 3],
    pub d_cum_grad: f64,
    pub d_cum_damp: f64,
}

/// Rows and snapshots of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub config: SimConfig,
    pub modes: Arc<ModeSet>,
    /// `‖J_R u⁰‖²`.
    pub initial_energy: f64,
    pub rows: Vec<EnergyLedgerRow>,
    /// Coefficients at each row.
    pub snapshots: Vec<BandVec>,
    pub steps: usize,
    pub last_stats: Option<StepStats>,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<State> {
        match (self.rows.last(), self.snapshots.last()) {
            (Some(r), Some(s)) => Some(State {
                t: r.t,
                coeffs: s.clone(),
            }),
            _ => None,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

/// A run in progress: current state, its evaluation and the accumulated rows.
pub struct Run<'a> {
    solver: &'a Solver,
    state: State,
    current: Eval,
    cum_grad: f64,
    cum_damp: f64,
    traj: Trajectory,
}

impl<'a> Run<'a> {
    pub fn new(solver: &'a Solver) -> Result<Self> {
        let state = solver.initial_state()?;
        Self::from_state(solver, state)
    }

    pub fn from_state(solver: &'a Solver, state: State) -> Result<Self> {
        let current = solver.evaluate(&state.coeffs, EvalMode::Split)?;
        let e0 = solver.modes().l2_sq(&state.coeffs);
        let mut run = Self {
            solver,
            current,
            cum_grad: 0.0,
            cum_damp: 0.0,
            traj: Trajectory {
                config: solver.config().clone(),
                modes: solver.modes().clone(),
                initial_energy: e0,
                rows: Vec::new(),
                snapshots: Vec::new(),
                steps: 0,
                last_stats: None,
            },
            state,
        };
        run.record();
        Ok(run)
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn current(&self) -> &Eval {
        &self.current
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.traj
    }

    pub fn solver(&self) -> &Solver {
        self.solver
    }

    pub fn is_done(&self) -> bool {
        self.state.t >= self.solver.config().t_end
    }

    /// Stable step at the current state, before clipping to `t_end`.
    pub fn proposed_dt(&self) -> f64 {
        self.solver.stable_dt(self.current.max_speed.unwrap_or(0.0))
    }

    fn record(&mut self) {
        let l2 = self.solver.modes().l2_sq(&self.state.coeffs);
        self.traj.rows.push(EnergyLedgerRow {
            t: self.state.t,
            l2_sq: l2,
            grad_sq: self.current.grad_sq,
            damp_diss: self.current.damp_diss,
            cum_grad: self.cum_grad,
            cum_damp: self.cum_damp,
            ledger_lhs: l2 + self.cum_grad + self.cum_damp,
            max_speed: self.current.max_speed.unwrap_or(0.0),
        });
        self.traj.snapshots.push(self.state.coeffs.clone());
    }

    fn rhs_norms(&self) -> RhsNorms {
        let modes = self.solver.modes();
        let nu = self.solver.config().nu;
        let vol = modes.grid().volume();
        let visc = modes
            .k2()
            .iter()
            .enumerate()
            .map(|(p, &k2)| {
                let u = &self.state.coeffs;
                (nu * k2).powi(2) * (u.c[0][p].norm_sqr() + u.c[1][p].norm_sqr() + u.c[2][p].norm_sqr())
            })
            .sum::<f64>();
        let (a, d) = match &self.current.parts {
            Some((a, d)) => (modes.l2_sq(a).sqrt(), modes.l2_sq(d).sqrt()),
            None => (0.0, 0.0),
        };
        RhsNorms {
            viscous: (vol * visc).sqrt(),
            advective: a,
            damping: d,
        }
    }

    /// Advances by exactly `h`; `t_end` is set exactly when `last` is true.
    /// Returns the step output so ensembles can read the stage states.
    pub fn step(&mut self, h: f64, last: bool, record: bool) -> Result<StepResult> {
        if !(h >= DT_MIN || (last && h > 0.0)) {
            return Err(CoreError::DtUnderflow { t: self.state.t, dt: h });
        }
        let stats = StepStats {
            dt_used: h,
            max_speed: self.current.max_speed.unwrap_or(0.0),
            rhs_norms: self.rhs_norms(),
        };
        let out = self.solver.advance(&self.state.coeffs, &self.current, h)?;
        let next_eval = self.solver.evaluate(&out.next, EvalMode::Split)?;
        self.state = State {
            t: if last {
                self.solver.config().t_end
            } else {
                self.state.t + h
            },
            coeffs: out.next.clone(),
        };
        self.current = next_eval;
        self.cum_grad += out.d_cum_grad;
        self.cum_damp += out.d_cum_damp;
        self.traj.steps += 1;
        self.traj.last_stats = Some(stats);
        if record || last {
            self.record();
        }
        Ok(out)
    }

    /// Step size for the next step and whether it lands on `t_end`.
    pub fn plan_step(&self, dt: f64) -> (f64, bool) {
        let remaining = self.solver.config().t_end - self.state.t;
        if remaining <= dt * (1.0 + 1e-9) {
            (remaining, true)
        } else {
            (dt, false)
        }
    }

    /// Takes one step at the stable size.
    pub fn step_auto(&mut self) -> Result<StepResult> {
        let (h, last) = self.plan_step(self.proposed_dt());
        let record = (self.traj.steps + 1) % self.solver.config().diag_every == 0;
        self.step(h, last, record)
    }

    pub fn finish(self) -> Trajectory {
        self.traj
    }
}

/// Runs a configuration to `t_end`.
pub fn simulate(config: &SimConfig) -> Result<Trajectory> {
    match simulate_partial(config)? {
        (traj, None) => Ok(traj),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`simulate`], but a numerical failure mid-run still returns the rows
/// recorded so far together with the error. Configuration errors are
/// returned directly.
pub fn simulate_partial(config: &SimConfig) -> Result<(Trajectory, Option<CoreError>)> {
    let solver = Solver::new(config.clone())?;
    let mut run = Run::new(&solver)?;
    while !run.is_done() {
        if let Err(e) = run.step_auto() {
            return Ok((run.finish(), Some(e)));
        }
    }
    Ok((run.finish(), None))
}
