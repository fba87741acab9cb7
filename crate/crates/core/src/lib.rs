//! Friedrichs-Galerkin pseudo-spectral solver for the incompressible
//! Navier-Stokes equations with exponential damping on the periodic cube,
//! together with numerical checks of the associated energy estimates.

pub mod damping;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod quadrature;
pub mod spectral;

pub use damping::DampingParams;
pub use error::{CoreError, Result};
pub use spectral::Grid;
