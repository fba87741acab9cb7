//! Several runs advanced in lockstep with a shared step size, so distances
//! between members can be integrated in time with the RK4 stage states.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::solver::{Run, Solver, Trajectory};
use crate::error::{CoreError, Result};
use crate::spectral::{BandVec, ModeSet};

/// Distances between two members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub a: usize,
    pub b: usize,
    /// `∫₀ᵀ ‖u_a - u_b‖²_{L²} dt`.
    pub l2_time_sq: f64,
    /// `sup_t ‖u_a(t) - u_b(t)‖_{H^{-s}}` over the recorded rows.
    pub hneg_sup: f64,
}

impl PairDistance {
    /// `‖u_a - u_b‖_{L²(0,T; L²)}`.
    pub fn l2_time(&self) -> f64 {
        self.l2_time_sq.sqrt()
    }
}

pub struct EnsembleResult {
    pub trajectories: Vec<Trajectory>,
    pub distances: Vec<PairDistance>,
    /// First failure, with the index of the member that raised it.
    pub error: Option<(usize, CoreError)>,
}

/// Positions of the modes of `a` inside `b`, and the modes only `b` has.
struct ModeMap {
    a_in_b: Vec<Option<usize>>,
    b_only: Vec<usize>,
}

impl ModeMap {
    fn new(a: &ModeSet, b: &ModeSet) -> Self {
        let a_in_b: Vec<Option<usize>> = a.flat().iter().map(|&f| b.position(f)).collect();
        let b_only = (0..b.len()).filter(|&q| a.position(b.flat()[q]).is_none()).collect();
        Self { a_in_b, b_only }
    }

    /// `L³ Σ w(|k|²) |â - b̂|²` over the union of the two sets.
    fn dist_sq(&self, ma: &ModeSet, ua: &BandVec, mb: &ModeSet, ub: &BandVec, w: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (p, q) in self.a_in_b.iter().enumerate() {
            let mut d = 0.0;
            for c in 0..3 {
                d += match q {
                    Some(q) => (ua.c[c][p] - ub.c[c][*q]).norm_sqr(),
                    None => ua.c[c][p].norm_sqr(),
                };
            }
            acc += w(ma.k2()[p]) * d;
        }
        for &q in &self.b_only {
            let d: f64 = (0..3).map(|c| ub.c[c][q].norm_sqr()).sum();
            acc += w(mb.k2()[q]) * d;
        }
        ma.grid().volume() * acc
    }
}

pub struct Ensemble {
    solvers: Vec<Solver>,
    pairs: Vec<(usize, usize)>,
    maps: Vec<ModeMap>,
}

impl Ensemble {
    /// Members must share grid, `t_end` and `diag_every`.
    pub fn new(configs: Vec<SimConfig>, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if configs.is_empty() {
            return Err(CoreError::param("members", "ensemble is empty"));
        }
        let first = &configs[0];
        for c in &configs[1..] {
            if c.n_per_dim != first.n_per_dim || c.box_length != first.box_length {
                return Err(CoreError::param("members", "grids differ"));
            }
            if c.t_end != first.t_end || c.diag_every != first.diag_every {
                return Err(CoreError::param("members", "t_end and diag_every must agree"));
            }
        }
        for &(a, b) in &pairs {
            if a >= configs.len() || b >= configs.len() {
                return Err(CoreError::param("pairs", format!("({a}, {b}) out of range")));
            }
        }
        let solvers = configs.into_iter().map(Solver::new).collect::<Result<Vec<_>>>()?;
        let maps = pairs
            .iter()
            .map(|&(a, b)| ModeMap::new(solvers[a].modes(), solvers[b].modes()))
            .collect();
        Ok(Self { solvers, pairs, maps })
    }

    pub fn solvers(&self) -> &[Solver] {
        &self.solvers
    }

    fn pair_dist(&self, i: usize, ua: &BandVec, ub: &BandVec, w: impl Fn(f64) -> f64) -> f64 {
        let (a, b) = self.pairs[i];
        self.maps[i].dist_sq(self.solvers[a].modes(), ua, self.solvers[b].modes(), ub, w)
    }

    /// Runs every member to `t_end`. `s` is the order of the negative Sobolev
    /// norm used for the sup-in-time distances.
    pub fn run(&self, s: f64) -> Result<EnsembleResult> {
        let mut runs = self.solvers.iter().map(Run::new).collect::<Result<Vec<_>>>()?;
        let hw = |k2: f64| (1.0 + k2).powf(-s);
        let mut distances: Vec<PairDistance> = self
            .pairs
            .iter()
            .map(|&(a, b)| PairDistance {
                a,
                b,
                l2_time_sq: 0.0,
                hneg_sup: 0.0,
            })
            .collect();
        let update_sup = |distances: &mut Vec<PairDistance>, runs: &[Run]| {
            for (i, d) in distances.iter_mut().enumerate() {
                let v = self
                    .pair_dist(i, &runs[d.a].state().coeffs, &runs[d.b].state().coeffs, hw)
                    .sqrt();
                d.hneg_sup = d.hneg_sup.max(v);
            }
        };
        update_sup(&mut distances, &runs);
        let diag_every = self.solvers[0].config().diag_every;
        let mut error = None;
        let mut steps = 0usize;
        while !runs[0].is_done() {
            let dt = runs.iter().map(|r| r.proposed_dt()).fold(f64::INFINITY, f64::min);
            let (h, last) = runs[0].plan_step(dt);
            steps += 1;
            let record = steps % diag_every == 0;
            let before: Vec<BandVec> = runs.iter().map(|r| r.state().coeffs.clone()).collect();
            let outs: Vec<Result<_>> = runs.par_iter_mut().map(|r| r.step(h, last, record)).collect();
            let mut stages = Vec::with_capacity(outs.len());
            for (i, o) in outs.into_iter().enumerate() {
                match o {
                    Ok(o) => stages.push(o.stages),
                    Err(e) => {
                        error.get_or_insert((i, e));
                    }
                }
            }
            if error.is_some() {
                break;
            }
            let one = |_: f64| 1.0;
            for (i, d) in distances.iter_mut().enumerate() {
                let (a, b) = (d.a, d.b);
                let f1 = self.pair_dist(i, &before[a], &before[b], one);
                let f2 = self.pair_dist(i, &stages[a][0], &stages[b][0], one);
                let f3 = self.pair_dist(i, &stages[a][1], &stages[b][1], one);
                let f4 = self.pair_dist(i, &stages[a][2], &stages[b][2], one);
                d.l2_time_sq += h / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
            }
            if record || last {
                update_sup(&mut distances, &runs);
            }
        }
        Ok(EnsembleResult {
            trajectories: runs.into_iter().map(Run::finish).collect(),
            distances,
            error,
        })
    }
}
