use std::f64::consts::{E, PI};

use expdamp_core::diagnostics::*;
use expdamp_core::dynamics::*;
use expdamp_core::spectral::*;
use expdamp_core::DampingParams;
use proptest::prelude::*;

fn small(n: usize, cutoff: f64, ic: InitialCondition) -> SimConfig {
    let mut c = SimConfig::reference(ic, cutoff);
    c.n_per_dim = n;
    c
}

fn stokes_mode(k: [i64; 3], a: [f64; 3], t_end: f64) -> SimConfig {
    let mut c = small(8, 3.0, InitialCondition::SingleMode { wavevector: k, amplitude: a });
    c.damping.alpha = 0.0;
    c.advection = false;
    c.t_end = t_end;
    c
}

fn random(energy: f64, seed: u64) -> InitialCondition {
    InitialCondition::RandomDivfree {
        spectrum_slope: -1.0,
        energy,
        seed: Some(seed),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hneg_is_below_l2(v in proptest::collection::vec(-1.0f64..1.0, 3 * 216), s in 0.1f64..4.0) {
        let g = Grid::periodic(6).unwrap();
        let comps = [v[..216].to_vec(), v[216..432].to_vec(), v[432..].to_vec()];
        let f = forward_transform(&RealVectorField::new(g, comps).unwrap()).unwrap();
        prop_assert!(h_neg_s_norm(&f, s).unwrap() <= f.l2_sq().sqrt() * (1.0 + 1e-14));
    }

    #[test]
    fn embedding_holds_for_signed_fields(v in proptest::collection::vec(-1.0f64..1.0, 512), s in 1.6f64..4.0) {
        let g = Grid::periodic(8).unwrap();
        let mean = v.iter().sum::<f64>() / 512.0;
        let zero_mean: Vec<f64> = v.iter().map(|x| x - mean).collect();
        for vals in [v.clone(), zero_mean] {
            let r = embedding_check_lff1(&RealScalarField::new(g, vals).unwrap(), s).unwrap();
            prop_assert!(r.pass, "{:?}", r);
        }
    }

    #[test]
    fn series_identity_on_random_fields(seed in 0u64..1000, beta in 0.1f64..2.0) {
        let g = Grid::periodic(8).unwrap();
        let u = inverse_transform(&initial_random_divfree(g, -1.0, 1.0, seed).unwrap());
        let m = u.max_speed();
        let beta = beta / (m * m);
        let r = series_identity_check(&u, beta, 25).unwrap();
        prop_assert!(r.pass && r.relative_gap < 1e-10, "{:?}", r);
    }
}

#[test]
fn embedding_on_a_bump() {
    let g = Grid::periodic(16).unwrap();
    let f = RealScalarField::from_fn(g, |x| (-((x[0] - PI).powi(2) + (x[1] - PI).powi(2) + (x[2] - PI).powi(2))).exp()).unwrap();
    let r = embedding_check_lff1(&f, 2.0).unwrap();
    assert!(r.pass && r.lhs < 0.5 * r.rhs);
    let z = embedding_check_lff1(&RealScalarField::new(g, vec![0.0; g.len()]).unwrap(), 2.0).unwrap();
    assert!(z.pass && z.lhs == 0.0 && z.rhs == 0.0);
    assert!(embedding_check_lff1(&f, 1.5).is_err());
}

#[test]
fn series_identity_for_unit_speed() {
    let g = Grid::periodic(4).unwrap();
    let s = 1.0 / 3f64.sqrt();
    let u = RealVectorField::from_fn(g, |_| [s, s, -s]).unwrap();
    let r = series_identity_check(&u, 1.0, 20).unwrap();
    let vol = g.volume();
    assert!((r.lhs - (E - 1.0) * vol).abs() < 1e-14 * vol);
    assert!((r.lhs - r.partial_sum).abs() / r.lhs < 1e-12);
    assert!(r.pass);

    let zero = series_identity_check(&RealVectorField::zeros(g), 1.0, 5).unwrap();
    assert!(zero.pass && zero.lhs == 0.0 && zero.partial_sum == 0.0);
    assert!(series_identity_check(&u, 51.0, 5).is_err());
}

#[test]
fn ledger_of_zero_data_is_exact() {
    let mut c = small(8, 3.0, InitialCondition::Zero);
    c.t_end = 0.02;
    let tr = simulate(&c).unwrap();
    let r = ledger_inequality_check(&tr).unwrap();
    assert_eq!(r.worst_slack, 0.0);
    assert!(r.pass);
    for k in 1..=3 {
        let m = moment_bound_check(&tr, k).unwrap();
        assert!(m.pass && m.integral == 0.0);
    }
    assert_eq!(prop2_polybound_check(&tr, 2).unwrap().integral, 0.0);
    let h = prop2_hneg_timeintegral_check(&tr, 3.0, 1.0).unwrap();
    assert!(h.pass && h.lhs == 0.0);
    assert!(equicontinuity_modulus(&tr, 3.0).unwrap().modulus.iter().all(|&m| m == 0.0));
    let l1 = damping_l1_bound_check(&tr, 0.02).unwrap();
    assert!(l1.pass && l1.lhs == 0.0 && l1.rhs == 0.0);
}

#[test]
fn ledger_is_an_identity_for_heat_decay() {
    let mut c = stokes_mode([1, 2, 0], [2.0, -1.0, 0.4], 0.5);
    c.dt_max = 1e-3;
    let tr = simulate(&c).unwrap();
    let r = ledger_inequality_check(&tr).unwrap();
    assert!(r.worst_abs_gap < 1e-8, "{r:?}");
    assert!(ledger_inequality_check(&Trajectory { rows: tr.rows[..1].to_vec(), snapshots: tr.snapshots[..1].to_vec(), ..tr.clone() }).is_err());
}

#[test]
fn polybound_of_order_one_is_the_first_moment() {
    let mut c = small(12, 4.5, random(20.0, 4));
    c.damping = DampingParams::new(1.0, 0.7, None).unwrap();
    c.t_end = 0.2;
    let tr = simulate(&c).unwrap();
    let p = prop2_polybound_check(&tr, 1).unwrap();
    let m = moment_bound_check(&tr, 1).unwrap();
    assert!((p.integral - 0.49 * m.integral).abs() < 1e-12 * p.integral);
    assert!(p.pass && m.integral <= m.bound);
    // a short horizon leaves a heavy tail, which the witness reports
    assert!(!m.tail_ok && !m.pass);
    assert!(!m.printed_bound_consistent);
}

#[test]
fn stronger_damping_lowers_the_polybound_ratio() {
    let ratio = |alpha: f64| {
        let mut c = small(12, 4.5, random(60.0, 5));
        c.damping.alpha = alpha;
        c.t_end = 0.2;
        prop2_polybound_check(&simulate(&c).unwrap(), 2).unwrap().ratio
    };
    assert!(ratio(4.0) < ratio(1.0));
}

#[test]
fn radius_argmin_ignores_the_energy_scale() {
    let radii = [0.5, 1.0, 2.0];
    let a = optimize_radius(PI / 2.0, 1.0, 1.0, 1.0, 62.0, &radii).unwrap();
    let b = optimize_radius(PI / 2.0, 1.0, 1.0, 1.0, 62.0e-3, &radii).unwrap();
    assert_eq!(a.best_r, b.best_r);
    for (x, y) in a.rhs.iter().zip(&b.rhs) {
        assert!((x * 1e-3 - y).abs() < 1e-12 * y);
    }
}

#[test]
fn stokes_modulus_matches_closed_form() {
    let mut c = stokes_mode([1, 1, 1], [1.0, -2.0, 1.0], 0.64);
    c.dt_max = 1e-3;
    let tr = simulate(&c).unwrap();
    let r = equicontinuity_modulus(&tr, 3.0).unwrap();
    assert!(r.halving_ok);
    let vol = (2.0 * PI).powi(3);
    // two coefficients a/2 at ±k
    let coeff = (2.0 * 6.0f64 / 4.0).sqrt();
    for (&lag, &m) in r.lags.iter().zip(&r.modulus) {
        let want = vol.sqrt() * 4f64.powf(-1.5) * (1.0 - (-3.0 * lag).exp()) * coeff;
        assert!((m - want).abs() <= 1e-8 * want, "lag {lag}: {m} vs {want}");
    }
}

#[test]
fn modulus_needs_uniform_rows() {
    let mut c = stokes_mode([1, 0, 0], [0.0, 1.0, 0.0], 0.035);
    c.dt_max = 0.01;
    c.diag_every = 1;
    let tr = simulate(&c).unwrap();
    assert!(equicontinuity_modulus(&tr, 3.0).is_err());
}

#[test]
fn damping_l1_ratio_stays_finite_as_beta_shrinks() {
    for beta in [1.0, 0.1, 0.01] {
        let mut c = small(12, 4.5, random(20.0, 6));
        c.damping.beta = beta;
        c.t_end = 0.1;
        let r = damping_l1_bound_check(&simulate(&c).unwrap(), 0.1).unwrap();
        assert!(r.pass && r.lhs > 0.0 && r.lhs / r.rhs <= 1.0, "{r:?}");
    }
}

#[test]
fn pressure_bounds() {
    let g = Grid::periodic(8).unwrap();
    let z = pressure_hneg_bound_check(&SpectralVectorField::zeros(g), 1.0, 2.0).unwrap();
    assert!(z.pass && z.adv_lhs == 0.0 && z.damp_lhs == 0.0);
    let shear = initial_single_mode(g, [0, 1, 2], [1.5, 0.0, 0.0]).unwrap();
    let r = pressure_hneg_bound_check(&shear, 1.0, 2.0).unwrap();
    assert!(r.pass && r.adv_lhs < 1e-14 && r.damp_lhs < 1e-14);
    for seed in 0..8 {
        let u = initial_random_divfree(g, -1.0, 5.0, seed).unwrap();
        assert!(pressure_hneg_bound_check(&u, 1.0, 2.0).unwrap().pass);
    }
    assert!(pressure_hneg_bound_check(&shear, 1.0, 1.5).is_err());
}

#[test]
fn weak_form_of_a_heat_mode() {
    let k = [0, 1, 0];
    let mut c = stokes_mode(k, [1.0, 0.0, 0.5], 0.5);
    c.dt_max = 1e-3;
    c.diag_every = 1;
    let tr = simulate(&c).unwrap();
    let psi = initial_single_mode(*tr.modes.grid(), k, [0.3, 0.0, 1.0]).unwrap();
    for profile in [TimeProfile::Linear, TimeProfile::Cosine] {
        let r = weak_form_residual(&tr, &psi, profile).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }
    let mut bad = SpectralVectorField::zeros(*tr.modes.grid()).into_coeffs();
    bad[1][tr.modes.grid().flat(0, 1, 0)] = num_complex::Complex64::new(1.0, 0.0);
    let bad = SpectralVectorField::from_coeffs(*tr.modes.grid(), bad).unwrap();
    assert!(weak_form_residual(&tr, &bad, TimeProfile::Linear).is_err());
    let far = initial_single_mode(*tr.modes.grid(), [3, 0, 0], [0.0, 1.0, 0.0]).unwrap();
    assert!(weak_form_residual(&tr, &far, TimeProfile::Linear).is_err());
}

#[test]
fn weak_form_of_zero_data_vanishes() {
    let mut c = small(8, 3.0, InitialCondition::Zero);
    c.t_end = 0.05;
    let tr = simulate(&c).unwrap();
    let psi = initial_single_mode(*tr.modes.grid(), [1, 0, 0], [0.0, 0.0, 1.0]).unwrap();
    assert_eq!(weak_form_residual(&tr, &psi, TimeProfile::Cosine).unwrap().residual, 0.0);
}

#[test]
fn checks_are_pure() {
    let mut c = small(12, 4.5, random(20.0, 7));
    c.t_end = 0.05;
    c.diag_every = 5;
    let tr = simulate(&c).unwrap();
    assert_eq!(moment_bound_check(&tr, 2).unwrap(), moment_bound_check(&tr, 2).unwrap());
    assert_eq!(
        prop2_hneg_timeintegral_check(&tr, 3.0, 1.0).unwrap(),
        prop2_hneg_timeintegral_check(&tr, 3.0, 1.0).unwrap()
    );
}
