//! Norms, embedding constants and checkable forms of the energy estimates.

mod checks;
mod constants;
mod equicontinuity;
mod io;
mod norms;
mod row;
mod sampling;
mod weak_form;

pub use checks::{
    damping_l1_bound_check, embedding_check_lff1, hneg_time_reports, hneg_time_rhs, ledger_inequality_check,
    moment_bound_check, optimize_radius, pressure_hneg_bound_check, prop2_hneg_timeintegral_check,
    prop2_polybound_check, radius_grid, series_identity_check, DampingL1Report, EmbeddingReport, HnegTimeReport,
    LedgerReport, MomentReport, PolyBoundReport, PressureReport, RadiusSearch, SeriesReport, BOUND_TOL, LEDGER_TOL,
    SERIES_BUDGET, TAIL_TOL,
};
pub use constants::{pressure_constant, sigma_constant};
pub use equicontinuity::{equicontinuity_modulus, uniformly_bounded, EquicontinuityReport};
pub use io::{read_ledger_csv, write_ledger_csv};
pub use norms::{h_neg_s_norm, h_neg_s_norm_scalar, norm_report, NormReport};
pub use row::EnergyLedgerRow;
pub use sampling::trapezoid;
pub use weak_form::{weak_form_residual, TimeProfile, WeakFormReport};
