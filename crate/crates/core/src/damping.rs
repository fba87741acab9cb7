//! The exponential damping nonlinearity `α(e^{β|u|²} - 1)u`, its truncations
//! by the partial sums `P_m`, and the scalar constants built from them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::spectral::RealVectorField;

/// Largest exponent `β|u|²` the damping factor will evaluate.
pub const OVERFLOW_EXPONENT: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingParams {
    pub alpha: f64,
    pub beta: f64,
    /// When set, `e^X - 1` is replaced by `P_m(X)`.
    #[serde(default)]
    pub poly_order: Option<u32>,
}

impl DampingParams {
    /// `alpha = 0` is accepted and switches the damping off.
    pub fn new(alpha: f64, beta: f64, poly_order: Option<u32>) -> Result<Self> {
        let p = Self {
            alpha,
            beta,
            poly_order,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(CoreError::param("alpha", format!("{} must be >= 0 and finite", self.alpha)));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(CoreError::param("beta", format!("{} must be positive and finite", self.beta)));
        }
        if self.poly_order == Some(0) {
            return Err(CoreError::param("poly_order", "must be at least 1"));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.alpha > 0.0
    }

    /// Scalar factor `e^{βz²} - 1` (or `P_m(βz²)`) at `z² = speed_sq`.
    #[inline]
    pub fn factor(&self, speed_sq: f64) -> f64 {
        let x = self.beta * speed_sq;
        match self.poly_order {
            None => x.exp_m1(),
            Some(m) => p_m_unchecked(x, m),
        }
    }

    /// Errors if `β max|u|²` exceeds [`OVERFLOW_EXPONENT`].
    pub fn check_exponent(&self, max_speed_sq: f64) -> Result<()> {
        let exponent = self.beta * max_speed_sq;
        if !(exponent <= OVERFLOW_EXPONENT) {
            return Err(CoreError::DampingOverflow {
                max_speed: max_speed_sq.sqrt(),
                exponent,
                limit: OVERFLOW_EXPONENT,
            });
        }
        Ok(())
    }

    /// Lipschitz constant of `z ↦ α(e^{βz²} - 1)z` on `[0, U]`; it also bounds
    /// the truncated map.
    pub fn lipschitz(&self, max_speed: f64) -> f64 {
        let x = self.beta * max_speed * max_speed;
        self.alpha * ((1.0 + 2.0 * x) * x.exp() - 1.0)
    }

    /// `∫ factor(|u|²)|u|²` by collocation quadrature.
    pub fn dissipation(&self, u: &RealVectorField) -> Result<f64> {
        self.check_exponent(max_speed_sq(u))?;
        let w = u.grid().volume() / u.grid().len() as f64;
        Ok(w * u.speed_sq().map(|s| self.factor(s) * s).sum::<f64>())
    }
}

fn max_speed_sq(u: &RealVectorField) -> f64 {
    u.speed_sq().fold(0.0, f64::max)
}

fn p_m_unchecked(x: f64, m: u32) -> f64 {
    // terms summed smallest first
    let mut terms = Vec::with_capacity(m as usize);
    let mut t = 1.0;
    for k in 1..=m {
        t *= x / k as f64;
        terms.push(t);
    }
    terms.iter().rev().sum()
}

/// `P_m(x) = Σ_{k=1}^m x^k / k!`.
pub fn p_m_eval(x: f64, m: u32) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(CoreError::param("x", format!("{x} must be nonnegative")));
    }
    if m == 0 {
        return Err(CoreError::param("m", "must be at least 1"));
    }
    Ok(p_m_unchecked(x, m))
}

/// `α · factor(β|u|²) · u` at every collocation point.
pub fn damping_pointwise(u: &RealVectorField, params: &DampingParams) -> Result<RealVectorField> {
    params.validate()?;
    params.check_exponent(max_speed_sq(u))?;
    let mut out = [
        Vec::with_capacity(u.grid().len()),
        Vec::with_capacity(u.grid().len()),
        Vec::with_capacity(u.grid().len()),
    ];
    for (i, s) in u.speed_sq().enumerate() {
        let f = params.alpha * params.factor(s);
        let v = u.at(i);
        for c in 0..3 {
            out[c].push(f * v[c]);
        }
    }
    RealVectorField::new(*u.grid(), out)
}

/// `∫ (e^{β|u|²} - 1)|u|²` by collocation quadrature.
pub fn damping_dissipation(u: &RealVectorField, beta: f64) -> Result<f64> {
    DampingParams::new(1.0, beta, None)?.dissipation(u)
}

/// `sup_{0<r≤R} (e^{βr²} - 1)/r`. The quotient is increasing in `r`, so the
/// supremum sits at `r = R`.
pub fn m_beta_r(beta: f64, radius: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(CoreError::param("beta", format!("{beta} must be positive")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CoreError::param("R", format!("{radius} must be positive")));
    }
    let x = beta * radius * radius;
    if x > OVERFLOW_EXPONENT {
        return Err(CoreError::DampingOverflow {
            max_speed: radius,
            exponent: x,
            limit: OVERFLOW_EXPONENT,
        });
    }
    Ok(x.exp_m1() / radius)
}

/// Result of the search for `c_{m,β}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupRatio {
    pub m: u32,
    pub beta: f64,
    /// Empirical supremum of `P_m(βz²)² / ((e^{βz²} - 1)z²)`.
    pub sup: f64,
    /// Maximizer, or `None` when the supremum is the limit `z → 0`.
    pub argmax: Option<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub ratio_at_z_min: f64,
    pub ratio_at_z_max: f64,
}

fn ln_p_m(x: f64, m: u32) -> f64 {
    let lx = x.ln();
    let mut lf = 0.0;
    let mut logs = Vec::with_capacity(m as usize);
    for k in 1..=m {
        lf += (k as f64).ln();
        logs.push(k as f64 * lx - lf);
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
}

fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// `ln` of the ratio as a function of `X = βz²`: `β P_m(X)² / (X (e^X - 1))`.
fn ln_ratio(x: f64, m: u32, beta: f64) -> f64 {
    beta.ln() + 2.0 * ln_p_m(x, m) - x.ln() - ln_expm1(x)
}

/// Estimates `c_{m,β}` by a log-spaced grid in `z` followed by golden-section
/// refinement. The upper end of the grid is pushed out while the ratio still
/// grows there.
pub fn sup_ratio_lempn1(m: u32, beta: f64) -> Result<SupRatio> {
    if m == 0 {
        return Err(CoreError::param("m", "must be at least 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(CoreError::param("beta", format!("{beta} must be positive")));
    }
    const POINTS: usize = 4001;
    let z_min = 1e-6;
    // the ratio decays like X^{2m-1} e^{-X}; start past its peak region
    let mut x_hi = (4.0 * m as f64 + 50.0).max(1.0);
    let lx_lo = (beta * z_min * z_min).ln();
    let (best_ln, best_i, lx_step, ln_vals) = loop {
        let lx_hi = x_hi.ln();
        let step = (lx_hi - lx_lo) / (POINTS - 1) as f64;
        let vals: Vec<f64> = (0..POINTS).map(|i| ln_ratio((lx_lo + step * i as f64).exp(), m, beta)).collect();
        let (bi, bv) = vals
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        if bi + 1 == POINTS && x_hi < 1e6 {
            x_hi *= 4.0;
            continue;
        }
        break (bv, bi, step, vals);
    };
    let z_of = |lx: f64| ((lx.exp()) / beta).sqrt();
    let ratio_at_z_min = ln_vals[0].exp();
    let ratio_at_z_max = ln_vals[POINTS - 1].exp();
    let limit_at_zero = beta; // P_m(X) ~ X as X -> 0
    if best_i == 0 {
        return Ok(SupRatio {
            m,
            beta,
            sup: limit_at_zero.max(best_ln.exp()),
            argmax: None,
            z_min,
            z_max: z_of(lx_lo + lx_step * (POINTS - 1) as f64),
            ratio_at_z_min,
            ratio_at_z_max,
        });
    }
    // golden-section refinement on ln X over the bracketing cells
    let f = |lx: f64| ln_ratio(lx.exp(), m, beta);
    let mut a = lx_lo + lx_step * (best_i as f64 - 1.0);
    let mut b = lx_lo + lx_step * ((best_i + 1).min(POINTS - 1) as f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let (lx_star, ln_star) = if fc > fd { (c, fc) } else { (d, fd) };
    let (lx_star, ln_star) = if ln_star >= best_ln {
        (lx_star, ln_star)
    } else {
        (lx_lo + lx_step * best_i as f64, best_ln)
    };
    Ok(SupRatio {
        m,
        beta,
        sup: ln_star.exp().max(limit_at_zero),
        argmax: Some(z_of(lx_star)),
        z_min,
        z_max: z_of(lx_lo + lx_step * (POINTS - 1) as f64),
        ratio_at_z_min,
        ratio_at_z_max,
    })
}

/// Monte-Carlo estimate of `C_{m,β}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub m: u32,
    pub beta: f64,
    pub samples: usize,
    pub skipped: usize,
    pub worst_ratio: f64,
    pub witness_x: [f64; 3],
    pub witness_y: [f64; 3],
    /// `1 + 2m`.
    pub bound: f64,
    pub pass: bool,
}

fn lipschitz_ratio(x: [f64; 3], y: [f64; 3], m: u32, beta: f64) -> Option<f64> {
    let n2 = |v: [f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    let px = p_m_unchecked(beta * n2(x), m);
    let py = p_m_unchecked(beta * n2(y), m);
    let d = [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let dist = n2(d).sqrt();
    let den = (px + py) * dist;
    if den == 0.0 {
        return None;
    }
    let l = [px * x[0] - py * y[0], px * x[1] - py * y[1], px * x[2] - py * y[2]];
    Some(n2(l).sqrt() / den)
}

/// Samples `samples` pairs uniformly from the ball of radius `radius` and
/// records the worst ratio `|P_m(β|x|²)x - P_m(β|y|²)y| / ((P_m + P_m)|x - y|)`.
pub fn lipschitz_check_lempn2(m: u32, beta: f64, samples: usize, radius: f64, seed: u64) -> Result<LipschitzReport> {
    if samples == 0 {
        return Err(CoreError::param("samples", "must be at least 1"));
    }
    if m == 0 {
        return Err(CoreError::param("m", "must be at least 1"));
    }
    if !(beta > 0.0 && radius > 0.0) {
        return Err(CoreError::param("beta", "beta and radius must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| loop {
        let p: [f64; 3] = [
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        ];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            break [p[0] * radius, p[1] * radius, p[2] * radius];
        }
    };
    let mut worst = 0.0;
    let mut wx = [0.0; 3];
    let mut wy = [0.0; 3];
    let mut skipped = 0;
    for _ in 0..samples {
        let x = point(&mut rng);
        let y = point(&mut rng);
        match lipschitz_ratio(x, y, m, beta) {
            Some(r) if r > worst => {
                worst = r;
                wx = x;
                wy = y;
            }
            Some(_) => {}
            None => skipped += 1,
        }
    }
    let bound = 1.0 + 2.0 * m as f64;
    Ok(LipschitzReport {
        m,
        beta,
        samples,
        skipped,
        worst_ratio: worst,
        witness_x: wx,
        witness_y: wy,
        bound,
        pass: worst.is_finite() && worst <= bound,
    })
}

/// `(e^{βR₀²} - 1 - P_{m₀}(βR₀²)) R₀`, summed from the tail series so small
/// gaps keep full relative accuracy.
pub fn tail_gap(r0: f64, m0: u32, beta: f64) -> Result<f64> {
    if !(r0 >= 0.0 && beta > 0.0) {
        return Err(CoreError::param("R0", "R0 must be nonnegative and beta positive"));
    }
    let x = beta * r0 * r0;
    if x > OVERFLOW_EXPONENT {
        return Err(CoreError::DampingOverflow {
            max_speed: r0,
            exponent: x,
            limit: OVERFLOW_EXPONENT,
        });
    }
    // first tail term x^{m0+1}/(m0+1)!, built in log space
    let k0 = m0 as f64 + 1.0;
    let ln_first = k0 * x.ln() - (1..=m0 + 1).map(|k| (k as f64).ln()).sum::<f64>();
    let mut term = ln_first.exp();
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1.0;
        term *= x / k;
        if (k > x && term <= sum * 1e-18) || term == 0.0 {
            break;
        }
    }
    Ok(sum * r0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use approx::assert_relative_eq;

    #[test]
    fn partial_sums() {
        assert_eq!(p_m_eval(0.0, 7).unwrap(), 0.0);
        assert_relative_eq!(p_m_eval(1.0, 3).unwrap(), 1.0 + 0.5 + 1.0 / 6.0, max_relative = 1e-15);
        assert!((p_m_eval(1.0, 50).unwrap() - std::f64::consts::E + 1.0).abs() < 1e-15);
        assert!(p_m_eval(-1e-3, 2).is_err());
        assert!(p_m_eval(1.0, 0).is_err());
    }

    #[test]
    fn ln2_constant_speed_reproduces_input() {
        let g = Grid::periodic(4).unwrap();
        let s = 1.0 / 3f64.sqrt();
        let u = RealVectorField::from_fn(g, |_| [s, -s, s]).unwrap();
        let p = DampingParams::new(1.0, 2f64.ln(), None).unwrap();
        let out = damping_pointwise(&u, &p).unwrap();
        for c in 0..3 {
            for (a, b) in out.component(c).iter().zip(u.component(c)) {
                assert!((a - b).abs() < 1e-15);
            }
        }
        let d = damping_dissipation(&u, 2f64.ln()).unwrap();
        assert_relative_eq!(d, (2.0 * std::f64::consts::PI).powi(3), max_relative = 1e-14);
    }

    #[test]
    fn overflow_names_the_speed() {
        let g = Grid::periodic(4).unwrap();
        let u = RealVectorField::from_fn(g, |_| [30.0, 0.0, 0.0]).unwrap();
        let p = DampingParams::new(1.0, 1.0, None).unwrap();
        match damping_pointwise(&u, &p) {
            Err(CoreError::DampingOverflow { max_speed, .. }) => assert_eq!(max_speed, 30.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tail_gap_values() {
        assert_relative_eq!(
            tail_gap(1.0, 2, 1.0).unwrap(),
            std::f64::consts::E - 2.5,
            max_relative = 1e-14
        );
        assert!(tail_gap(1.0, 5, 1.0).unwrap() < tail_gap(1.0, 2, 1.0).unwrap());
        assert!(tail_gap(1.0, 60, 1.0).unwrap() < 1e-80);
    }

    #[test]
    fn sup_ratio_order_one_is_beta() {
        let r = sup_ratio_lempn1(1, 1.0).unwrap();
        assert!((r.sup - 1.0).abs() < 1e-3);
        assert!(r.argmax.is_none());
        let r = sup_ratio_lempn1(3, 2.0).unwrap();
        assert!(r.sup > r.ratio_at_z_min && r.sup > r.ratio_at_z_max);
        assert!(r.argmax.is_some());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(DampingParams::new(-1.0, 1.0, None).is_err());
        assert!(DampingParams::new(1.0, 0.0, None).is_err());
        assert!(DampingParams::new(1.0, 1.0, Some(0)).is_err());
        assert!(m_beta_r(1.0, 0.0).is_err());
    }
}
