use serde::{Deserialize, Serialize};

/// One sample of the energy ledger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedgerRow {
    pub t: f64,
    /// `‖u‖²_{L²}`.
    pub l2_sq: f64,
    /// `‖∇u‖²_{L²}`.
    pub grad_sq: f64,
    /// `∫ (e^{β|u|²} - 1)|u|²`, with `P_m` in place of the exponential for
    /// truncated runs.
    pub damp_diss: f64,
    /// `2ν ∫₀ᵗ grad_sq`.
    pub cum_grad: f64,
    /// `2α ∫₀ᵗ damp_diss`.
    pub cum_damp: f64,
    /// `l2_sq + cum_grad + cum_damp`.
    pub ledger_lhs: f64,
    pub max_speed: f64,
}

impl EnergyLedgerRow {
    pub const COLUMNS: [&'static str; 8] = [
        "t",
        "l2_sq",
        "grad_sq",
        "damp_diss",
        "cum_grad",
        "cum_damp",
        "ledger_lhs",
        "max_speed",
    ];

    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.l2_sq,
            self.grad_sq,
            self.damp_diss,
            self.cum_grad,
            self.cum_damp,
            self.ledger_lhs,
            self.max_speed,
        ]
    }

    pub fn from_values(v: [f64; 8]) -> Self {
        Self {
            t: v[0],
            l2_sq: v[1],
            grad_sq: v[2],
            damp_diss: v[3],
            cum_grad: v[4],
            cum_damp: v[5],
            ledger_lhs: v[6],
            max_speed: v[7],
        }
    }
}
