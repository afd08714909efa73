use axiflow::elliptic::stream_function_velocity;
use axiflow::transport::{advect_a_over_r, advect_scalar, max_stable_dt};
use axiflow::{GridSpec, ScalarFieldRZ, Staggering, VelocityFieldRZ};

fn swirl(g: &GridSpec) -> VelocityFieldRZ {
    let w = ScalarFieldRZ::from_fn(g, Staggering::Node, |r, z| {
        r * (-((r - 1.0).powi(2) + z * z) / 0.2).exp()
    });
    stream_function_velocity(&w, 1e-12).unwrap()
}

#[test]
fn uniform_axial_translation_converges() {
    // u^z ≡ 1 away from the walls; the profile moves by 1 in z.
    let l1_err = |n: usize| {
        let g = GridSpec::new(n, 2 * n, 3.0, -3.0, 3.0).unwrap();
        let mut u = VelocityFieldRZ::from_fn(&g, |_, _| 0.0, |_, _| 1.0);
        u.pin_boundaries();
        let bump = |r: f64, z: f64| (-(r * r + z * z) / 0.25).exp();
        let mut f = ScalarFieldRZ::from_fn(&g, Staggering::Center, bump);
        let dt = 0.5 * max_stable_dt(&u, 0.5);
        let steps = (1.0 / dt).round() as usize;
        let dt = 1.0 / steps as f64;
        for _ in 0..steps {
            f = advect_scalar(&f, &u, dt).unwrap();
        }
        let exact = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| bump(r, z - 1.0));
        f.values().iter().zip(exact.values()).map(|(a, b)| (a - b).abs()).sum::<f64>()
            / (g.nr * g.nz) as f64
    };
    // Forward Euler with limited slopes: below second order at fixed Courant
    // number, but the error must fall with every refinement.
    let e: Vec<f64> = [16, 32, 64, 128].iter().map(|&n| l1_err(n)).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
    assert!(e[0] / e[3] > 3.0, "{e:?}");
}

#[test]
fn rotating_flow_keeps_two_valued_density_in_range() {
    let g = GridSpec::new(48, 96, 3.0, -3.0, 3.0).unwrap();
    let u = swirl(&g);
    let mut rho = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| {
        if (r - 1.3).powi(2) + z * z < 0.09 {
            2.0
        } else {
            1.0
        }
    });
    let dt = max_stable_dt(&u, 0.6);
    for _ in 0..300 {
        rho = advect_scalar(&rho, &u, dt).unwrap();
        assert!(rho.min() >= 1.0 - 1e-12 && rho.max() <= 2.0 + 1e-12);
    }
}

#[test]
fn constant_is_preserved_by_solenoidal_transport() {
    let g = GridSpec::new(32, 64, 3.0, -3.0, 3.0).unwrap();
    let u = swirl(&g);
    let f = ScalarFieldRZ::constant(&g, Staggering::Center, 1.7);
    let out = advect_scalar(&f, &u, max_stable_dt(&u, 0.5)).unwrap();
    assert!(out.values().iter().all(|v| (v - 1.7).abs() < 1e-12));
}

#[test]
fn zero_a_over_r_stays_zero() {
    let g = GridSpec::new(32, 64, 3.0, -3.0, 3.0).unwrap();
    let u = swirl(&g);
    let q = ScalarFieldRZ::zeros(&g, Staggering::Center);
    let out = advect_a_over_r(&q, &u, max_stable_dt(&u, 0.5)).unwrap();
    assert_eq!(out.max_abs(), 0.0);
}

#[test]
fn cfl_violation_is_reported() {
    let g = GridSpec::new(16, 32, 3.0, -3.0, 3.0).unwrap();
    let u = swirl(&g);
    let f = ScalarFieldRZ::zeros(&g, Staggering::Center);
    let dt = 10.0 * max_stable_dt(&u, 0.5);
    assert!(matches!(advect_scalar(&f, &u, dt), Err(axiflow::Error::Cfl { .. })));
}
