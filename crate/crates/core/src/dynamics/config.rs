use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::damping::DampingParams;
use crate::error::{CoreError, Result};
use crate::spectral::Grid;

fn default_box() -> f64 {
    2.0 * PI
}
fn default_nu() -> f64 {
    1.0
}
fn default_cfl() -> f64 {
    0.5
}
fn default_one() -> usize {
    1
}
fn default_oversample() -> f64 {
    2.0
}
fn default_true() -> bool {
    true
}

/// Initial velocity. Every variant is divergence-free with zero mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Zero,
    /// `A(cos x₁ sin x₂ sin x₃, -sin x₁ cos x₂ sin x₃, 0)`.
    TaylorGreen { amplitude: f64 },
    /// Gaussian coefficients with amplitude `|k|^slope`, rescaled to `energy`
    /// (`‖u⁰‖²`). `seed` overrides the run seed.
    RandomDivfree {
        spectrum_slope: f64,
        energy: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// `a cos(k·x)` with integer wavevector `k` and `a ⊥ k`.
    SingleMode { wavevector: [i64; 3], amplitude: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_per_dim: usize,
    #[serde(default = "default_box")]
    pub box_length: f64,
    /// Radius of the Friedrichs ball, `|k| < cutoff`.
    pub cutoff: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
    pub damping: DampingParams,
    pub t_end: f64,
    pub dt_max: f64,
    #[serde(default = "default_cfl")]
    pub cfl_adv: f64,
    #[serde(default = "default_cfl")]
    pub cfl_damp: f64,
    /// A ledger row is recorded every `diag_every` steps and at `t_end`.
    #[serde(default = "default_one")]
    pub diag_every: usize,
    pub ic: InitialCondition,
    #[serde(default)]
    pub seed: u64,
    /// Switches the quadratic term off (linear test problems).
    #[serde(default = "default_true")]
    pub advection: bool,
    /// Damping collocation grid, relative to the band grid.
    #[serde(default = "default_oversample")]
    pub oversample: f64,
}

impl SimConfig {
    /// The reference setup: `N = 32`, `ν = α = β = 1`, `t_end = 1`,
    /// `dt = 1e-3` (CFL limits loose enough that the step stays fixed).
    pub fn reference(ic: InitialCondition, cutoff: f64) -> Self {
        Self {
            n_per_dim: 32,
            box_length: default_box(),
            cutoff,
            nu: 1.0,
            damping: DampingParams {
                alpha: 1.0,
                beta: 1.0,
                poly_order: None,
            },
            t_end: 1.0,
            dt_max: 1e-3,
            cfl_adv: 1.0,
            cfl_damp: 1.0,
            diag_every: 10,
            ic,
            seed: 0,
            advection: true,
            oversample: default_oversample(),
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_per_dim, self.box_length)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        self.damping.validate()?;
        let kmax = grid.base_wavenumber() * 3f64.sqrt() * self.n_per_dim as f64 / 2.0;
        if !(self.cutoff > 0.0 && self.cutoff <= kmax) {
            return Err(CoreError::param(
                "cutoff",
                format!("{} must lie in (0, {kmax:.6}] for n_per_dim = {}", self.cutoff, self.n_per_dim),
            ));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(CoreError::param("nu", format!("{} must be positive", self.nu)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(CoreError::param("t_end", format!("{} must be >= 0", self.t_end)));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return Err(CoreError::param("dt_max", format!("{} must be positive", self.dt_max)));
        }
        for (name, v) in [("cfl_adv", self.cfl_adv), ("cfl_damp", self.cfl_damp)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(CoreError::param(name, format!("{v} must lie in (0, 1]")));
            }
        }
        if self.diag_every == 0 {
            return Err(CoreError::param("diag_every", "must be at least 1"));
        }
        if !(self.oversample.is_finite() && self.oversample >= 1.0) {
            return Err(CoreError::param("oversample", format!("{} must be >= 1", self.oversample)));
        }
        match &self.ic {
            InitialCondition::Zero => {}
            InitialCondition::TaylorGreen { amplitude } => {
                if !amplitude.is_finite() {
                    return Err(CoreError::param("ic.amplitude", "must be finite"));
                }
            }
            InitialCondition::RandomDivfree {
                spectrum_slope, energy, ..
            } => {
                if !spectrum_slope.is_finite() {
                    return Err(CoreError::param("ic.spectrum_slope", "must be finite"));
                }
                if !(energy.is_finite() && *energy >= 0.0) {
                    return Err(CoreError::param("ic.energy", "must be >= 0"));
                }
            }
            InitialCondition::SingleMode { wavevector, amplitude } => {
                let n = self.n_per_dim as i64;
                if wavevector.iter().all(|&k| k == 0) {
                    return Err(CoreError::param("ic.wavevector", "must be nonzero"));
                }
                if wavevector.iter().any(|&k| 2 * k.abs() >= n) {
                    return Err(CoreError::param(
                        "ic.wavevector",
                        format!("{wavevector:?} is not a paired mode of an n = {n} grid"),
                    ));
                }
                if amplitude.iter().any(|a| !a.is_finite()) {
                    return Err(CoreError::param("ic.amplitude", "must be finite"));
                }
                let dot: f64 = wavevector.iter().zip(amplitude).map(|(&k, a)| k as f64 * a).sum();
                let scale = amplitude.iter().map(|a| a.abs()).fold(0.0, f64::max)
                    * wavevector.iter().map(|k| k.abs()).max().unwrap() as f64;
                if dot.abs() > 1e-12 * scale {
                    return Err(CoreError::param("ic.amplitude", "must be orthogonal to the wavevector"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_defaults() {
        let text = r#"{
            "n_per_dim": 16, "cutoff": 4.5,
            "damping": {"alpha": 1.0, "beta": 0.5},
            "t_end": 0.1, "dt_max": 0.001,
            "ic": {"kind": "taylor_green", "amplitude": 1.0}
        }"#;
        let c: SimConfig = serde_json::from_str(text).unwrap();
        assert_eq!(c.nu, 1.0);
        assert_eq!(c.diag_every, 1);
        assert!(c.advection);
        c.validate().unwrap();
        let back: SimConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"n_per_dim": 16, "cutoff": 4.5, "damping": {"alpha": 1.0, "beta": 1.0, "gamma": 2},
            "t_end": 0.1, "dt_max": 0.001, "ic": {"kind": "zero"}}"#;
        assert!(serde_json::from_str::<SimConfig>(text).is_err());
    }

    #[test]
    fn cutoff_must_be_resolvable() {
        let mut c = SimConfig::reference(InitialCondition::Zero, 4.5);
        c.n_per_dim = 8;
        c.cutoff = 7.0;
        assert!(c.validate().is_err());
        c.cutoff = 6.9;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn single_mode_must_be_transverse() {
        let mut c = SimConfig::reference(
            InitialCondition::SingleMode {
                wavevector: [1, 0, 0],
                amplitude: [1.0, 0.0, 0.0],
            },
            4.5,
        );
        assert!(c.validate().is_err());
        c.ic = InitialCondition::SingleMode {
            wavevector: [1, 0, 0],
            amplitude: [0.0, 1.0, 0.0],
        };
        assert!(c.validate().is_ok());
    }
}
