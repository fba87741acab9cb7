use std::f64::consts::PI;

use expdamp_core::damping::{lipschitz_check_lempn2, sup_ratio_lempn1, LipschitzReport, SupRatio};
use expdamp_core::diagnostics::{pressure_constant, sigma_constant};
use serde::Serialize;

use crate::error::CliError;
use crate::output::OutDir;
use crate::run::Outcome;

pub const CONSTANTS_JSON: &str = "constants.json";
pub const SIGMA_TOL: f64 = 1e-5;
pub const ORDERS: [u32; 4] = [1, 2, 3, 5];
pub const BETAS: [f64; 3] = [0.5, 1.0, 2.0];
const LIPSCHITZ_SAMPLES: usize = 20_000;
const LIPSCHITZ_RADIUS: f64 = 2.0;

#[derive(Debug, Serialize)]
pub struct SigmaEntry {
    pub s: f64,
    pub value: f64,
    /// `4π ∫ r²(1 + r²)^{-s} dr = 2π B(3/2, s - 3/2)`, where known.
    pub closed_form: Option<f64>,
    pub abs_error: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct PressureEntry {
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct ConstantsReport {
    pub sigma: Vec<SigmaEntry>,
    pub pressure: Vec<PressureEntry>,
    pub sup_ratio: Vec<SupRatio>,
    pub lipschitz: Vec<LipschitzReport>,
    pub all_pass: bool,
}

pub fn verify_constants(seed: u64) -> Result<ConstantsReport, CliError> {
    let known = [(2.0, Some(PI)), (2.5, Some((4.0 * PI / 3.0).sqrt())), (3.0, Some(PI / 2.0)), (1.75, None), (4.0, None)];
    let sigma = known
        .iter()
        .map(|&(s, closed_form)| {
            let value = sigma_constant(s, 3)?;
            let abs_error = closed_form.map(|c: f64| (value - c).abs());
            Ok(SigmaEntry {
                s,
                value,
                closed_form,
                abs_error,
                pass: value.is_finite() && abs_error.is_none_or(|e| e <= SIGMA_TOL),
            })
        })
        .collect::<Result<Vec<_>, expdamp_core::CoreError>>()?;
    let pressure = [2.0, 3.0]
        .iter()
        .map(|&s| Ok(PressureEntry { s, value: pressure_constant(s)? }))
        .collect::<Result<Vec<_>, expdamp_core::CoreError>>()?;
    let mut sup_ratio = Vec::new();
    let mut lipschitz = Vec::new();
    for (i, &m) in ORDERS.iter().enumerate() {
        for (j, &beta) in BETAS.iter().enumerate() {
            sup_ratio.push(sup_ratio_lempn1(m, beta)?);
            let s = seed.wrapping_add((i * BETAS.len() + j) as u64);
            lipschitz.push(lipschitz_check_lempn2(m, beta, LIPSCHITZ_SAMPLES, LIPSCHITZ_RADIUS, s)?);
        }
    }
    let all_pass = sigma.iter().all(|e| e.pass)
        && lipschitz.iter().all(|l| l.pass)
        && sup_ratio.iter().all(|r| r.sup.is_finite() && r.sup > 0.0);
    Ok(ConstantsReport {
        sigma,
        pressure,
        sup_ratio,
        lipschitz,
        all_pass,
    })
}

pub fn cmd_verify_constants(seed: u64, out: &mut OutDir) -> Result<Outcome, CliError> {
    let report = verify_constants(seed)?;
    out.json(CONSTANTS_JSON, &report)?;
    Ok(Outcome {
        passed: report.all_pass,
    })
}
