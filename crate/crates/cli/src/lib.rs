//! Experiment drivers behind the `expdamp` binary: single runs with every
//! check, cutoff and polynomial-order studies, and a constants report.

pub mod error;
pub mod output;
pub mod run;
pub mod studies;
pub mod verify;

pub use error::CliError;
pub use output::{CheckEntry, OutDir, RunManifest, Status};
pub use run::{cmd_run, load_config, Outcome};
pub use studies::{cmd_cutoff_study, cmd_polyorder_study, cutoff_study, polyorder_study};
pub use verify::{cmd_verify_constants, verify_constants};
