use expdamp_core::spectral::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    Grid::periodic(n).unwrap()
}

/// Real random field from collocation values, so Hermitian symmetry holds.
fn random_field(n: usize, vals: &[f64]) -> SpectralVectorField {
    let g = grid(n);
    let len = g.len();
    let comps = [vals[..len].to_vec(), vals[len..2 * len].to_vec(), vals[2 * len..3 * len].to_vec()];
    forward_transform(&RealVectorField::new(g, comps).unwrap()).unwrap()
}

fn values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, 3 * n * n * n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leray_is_idempotent_and_solenoidal(v in values(6)) {
        let f = random_field(6, &v);
        let p = leray_project(&f);
        let pp = leray_project(&p);
        prop_assert!(p.sub(&pp).max_abs() <= 1e-14 * f.max_abs().max(1.0));
        prop_assert!(p.max_divergence() <= 1e-12);
        prop_assert!(p.l2_sq() <= f.l2_sq() * (1.0 + 1e-14));
    }

    #[test]
    fn leray_annihilates_gradients(v in proptest::collection::vec(-1.0f64..1.0, 216)) {
        let g = grid(6);
        let phi = forward_transform_scalar(&RealScalarField::new(g, v).unwrap()).unwrap();
        let grad = gradient(&phi);
        prop_assert!(leray_project(&grad).max_abs() <= 1e-13 * grad.max_abs().max(1.0));
    }

    #[test]
    fn round_trip_and_parseval(v in values(6)) {
        let f = random_field(6, &v);
        let back = inverse_transform(&f);
        let w = grid(6).volume() / 216.0;
        let coll: f64 = w * back.components().iter().flatten().map(|x| x * x).sum::<f64>();
        prop_assert!((coll - f.l2_sq()).abs() <= 1e-12 * coll.max(1e-300));
        for c in 0..3 {
            for (a, b) in back.component(c).iter().zip(&v[c * 216..(c + 1) * 216]) {
                prop_assert!((a - b).abs() < 1e-14);
            }
        }
        prop_assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn advection_is_energy_neutral(v in values(8), r in 1.5f64..3.5) {
        let f = projected_cutoff(&random_field(8, &v), r).unwrap();
        let a = advection_term(&f).unwrap();
        let scale = f.l2_sq() * f.grad_sq().sqrt() + 1e-300;
        prop_assert!(a.inner(&f).abs() <= 1e-12 * scale);
        prop_assert!(a.hermitian_defect() <= 1e-14 * a.max_abs().max(1.0));
    }

    #[test]
    fn cutoff_is_a_projection(v in values(6), r in 0.5f64..5.0) {
        let f = random_field(6, &v);
        let c = friedrich_cutoff(&f, r).unwrap();
        prop_assert_eq!(friedrich_cutoff(&c, r).unwrap(), c.clone());
        prop_assert!(c.l2_sq() <= f.l2_sq());
    }
}

#[test]
fn advection_matches_direct_collocation() {
    // u = (sin y, 0, 0) gives (u·∇)u = 0; u = (sin y, sin x, 0) gives
    // (u·∇)u = (sin x cos y, sin y cos x, 0).
    let g = grid(8);
    let mut u = forward_transform(&RealVectorField::from_fn(g, |x| [x[1].sin(), x[0].sin(), 0.0]).unwrap()).unwrap();
    u.mark_divfree().unwrap();
    let a = inverse_transform(&advection_term(&u).unwrap());
    let want = RealVectorField::from_fn(g, |x| [x[0].sin() * x[1].cos(), x[1].sin() * x[0].cos(), 0.0]).unwrap();
    for c in 0..3 {
        for (p, q) in a.component(c).iter().zip(want.component(c)) {
            assert!((p - q).abs() < 1e-13, "{p} vs {q}");
        }
    }
}

#[test]
fn derivatives_skip_nyquist_planes() {
    let g = grid(8);
    let mut s = SpectralScalarField::zeros(g);
    s.coeffs_mut()[g.flat(4, 1, 0)] = Complex64::new(1.0, 0.0);
    assert_eq!(gradient(&s).max_abs(), 0.0);
    assert_eq!(laplacian_scalar(&s).max_abs(), 0.0);
    let mut v = SpectralVectorField::zeros(g).into_coeffs();
    v[1][g.flat(0, 4, 0)] = Complex64::new(1.0, 0.0);
    let v = SpectralVectorField::from_coeffs(g, v).unwrap();
    assert_eq!(divergence(&v).max_abs(), 0.0);
    assert_eq!(laplacian(&v).max_abs(), 0.0);
}

#[test]
fn band_transforms_match_full_grid() {
    let g = grid(12);
    let modes = std::sync::Arc::new(ModeSet::ball(g, 3.5).unwrap());
    let vals: Vec<f64> = (0..3 * g.len()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
    let f = leray_project(&friedrich_cutoff(&random_field(12, &vals), 3.5).unwrap());
    let band = modes.gather(&f);
    assert_eq!(modes.scatter(&band, true), f);
    let work = WorkGrid::with_size(modes.clone(), 12).unwrap();
    let phys = work.to_physical(&band);
    let full = inverse_transform(&f);
    for c in 0..3 {
        for (a, b) in phys[c].iter().zip(full.component(c)) {
            assert!((a - b).abs() < 1e-13);
        }
    }
    let back = work.from_physical(&phys);
    for c in 0..3 {
        for (a, b) in back.c[c].iter().zip(&band.c[c]) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
