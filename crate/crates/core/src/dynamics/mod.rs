//! The cut-off system: configuration, initial data, time stepping, pressure
//! and checkpoints.

mod checkpoint;
mod config;
mod ensemble;
mod ic;
mod solver;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint};
pub use config::{InitialCondition, SimConfig};
pub use ensemble::{Ensemble, EnsembleResult, PairDistance};
pub use ic::{initial_field, initial_random_divfree, initial_single_mode, initial_taylor_green};
pub use solver::{
    simulate, simulate_partial, Eval, EvalMode, RhsNorms, Run, Solver, State, StepResult, StepStats,
    Trajectory, DT_MIN,
};
