//! Fourier field algebra on the periodic cube.

mod band;
pub(crate) mod fft;
mod field;
mod grid;
mod ops;

pub use band::{BandVec, ModeSet, WorkGrid};
pub use field::{RealScalarField, RealVectorField, SpectralScalarField, SpectralVectorField};
pub use grid::Grid;
pub(crate) use grid::next_smooth;
pub use ops::{
    advection_term, dealiased_work_grid, divergence, forward_transform, forward_transform_scalar,
    friedrich_cutoff, gradient, inverse_transform, inverse_transform_scalar, laplacian,
    laplacian_scalar, leray_project, projected_cutoff,
};
