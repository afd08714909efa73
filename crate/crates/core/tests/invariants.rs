use axiflow::config::SimConfig;
use axiflow::diagnostics::{bracket, decay_fit, kinetic_energy, DecaySample};
use axiflow::elliptic::{pressure_operator, solve_pressure, stream_function_velocity};
use axiflow::mesh::{divergence, weighted_inner};
use axiflow::state::{grid_file_string, parse_grid_file};
use axiflow::transport::{advect_a_over_r, advect_scalar, max_stable_dt};
use axiflow::{GridSpec, ScalarFieldRZ, Staggering, VelocityFieldRZ};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = GridSpec> {
    (4usize..14, 4usize..20, 0.5f64..4.0, 0.5f64..4.0)
        .prop_map(|(nr, nz, r_max, h)| GridSpec::new(nr, nz, r_max, -h, h).unwrap())
}

/// A grid plus random values for one staggering.
fn field_strategy(stag: Staggering) -> impl Strategy<Value = ScalarFieldRZ> {
    grid_strategy().prop_flat_map(move |g| {
        let n = ScalarFieldRZ::zeros(&g, stag).values().len();
        proptest::collection::vec(-1.0f64..1.0, n)
            .prop_map(move |v| ScalarFieldRZ::from_values(&g, stag, v).unwrap())
    })
}

/// Node vorticity with the wall rows cleared.
fn interior_vorticity() -> impl Strategy<Value = ScalarFieldRZ> {
    field_strategy(Staggering::Node).prop_map(|mut w| {
        let (ni, nj) = w.shape();
        for i in 0..ni {
            for j in 0..nj {
                if i == 0 || j == 0 || i + 1 == ni || j + 1 == nj {
                    w.set(i, j, 0.0);
                }
            }
        }
        w
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stream_velocity_is_solenoidal(w in interior_vorticity()) {
        let u = stream_function_velocity(&w, 1e-12).unwrap();
        let scale = u.max_abs().max(1.0);
        prop_assert!(divergence(&u).unwrap().max_abs() <= 1e-10 * scale);
    }

    #[test]
    fn transport_respects_the_initial_range(
        w in interior_vorticity(),
        seed in proptest::collection::vec(0.5f64..3.0, 1..400),
        courant in 0.05f64..0.66,
    ) {
        let u = stream_function_velocity(&w, 1e-12).unwrap();
        let g = u.grid().clone();
        let n = g.nr * g.nz;
        let vals: Vec<f64> = (0..n).map(|k| seed[k % seed.len()]).collect();
        let f = ScalarFieldRZ::from_values(&g, Staggering::Center, vals).unwrap();
        let dt = max_stable_dt(&u, courant);
        prop_assume!(dt.is_finite());
        let (lo, hi) = (f.min(), f.max());
        let mut out = f;
        for _ in 0..5 {
            out = advect_scalar(&out, &u, dt).unwrap();
        }
        let tol = 1e-12 * hi;
        prop_assert!(out.min() >= lo - tol && out.max() <= hi + tol);
    }

    #[test]
    fn a_over_r_transport_keeps_sign(w in interior_vorticity(), q0 in 0.0f64..2.0) {
        let u = stream_function_velocity(&w, 1e-12).unwrap();
        let g = u.grid().clone();
        let q = ScalarFieldRZ::constant(&g, Staggering::Center, q0);
        let dt = max_stable_dt(&u, 0.5);
        prop_assume!(dt.is_finite());
        let out = advect_a_over_r(&q, &u, dt).unwrap();
        prop_assert!(out.min() >= 0.0);
    }

    #[test]
    fn pressure_solve_inverts_its_operator(p in field_strategy(Staggering::Center), bump in 0.0f64..3.0) {
        let g = p.grid().clone();
        let rho = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, z| {
            1.0 + bump * (-(r * r + z * z)).exp()
        });
        let rhs = pressure_operator(&rho, &p).unwrap();
        let (sol, _) = solve_pressure(&rho, &rhs, 1e-12).unwrap();
        let back = pressure_operator(&rho, &sol).unwrap();
        let mut d = back.clone();
        d.axpy(-1.0, &rhs);
        let norm = weighted_inner(&rhs, &rhs).sqrt().max(1e-300);
        prop_assert!(weighted_inner(&d, &d).sqrt() <= 1e-8 * norm.max(1.0));
    }

    #[test]
    fn grid_files_round_trip_bit_exactly(
        stag in prop_oneof![
            Just(Staggering::Center), Just(Staggering::RFace),
            Just(Staggering::ZFace), Just(Staggering::Node)
        ],
        g in grid_strategy(),
        bits in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..50),
    ) {
        let n = ScalarFieldRZ::zeros(&g, stag).values().len();
        let vals: Vec<f64> = (0..n).map(|k| bits[k % bits.len()]).collect();
        let f = ScalarFieldRZ::from_values(&g, stag, vals).unwrap();
        let back = parse_grid_file(&grid_file_string(&f)).unwrap();
        prop_assert_eq!(back.grid(), f.grid());
        prop_assert_eq!(back.staggering(), stag);
        let same = back.values().iter().zip(f.values()).all(|(a, b)| a.to_bits() == b.to_bits());
        prop_assert!(same);
    }

    #[test]
    fn config_text_round_trips(
        nr in 4usize..512, nz in 4usize..512,
        r_max in 0.1f64..100.0, h in 0.1f64..100.0,
        cfl in 0.01f64..0.66, t_end in 0.0f64..1e3,
        amp in -5.0f64..5.0, sigma in 0.01f64..2.0,
        implicit in any::<bool>(),
    ) {
        let mode = if implicit { "implicit" } else { "explicit" };
        let text = format!(
            "grid.nr = {nr}\ngrid.nz = {nz}\ngrid.r_max = {r_max}\ngrid.z_min = {}\n\
             grid.z_max = {h}\ntime.cfl = {cfl}\ntime.t_end = {t_end}\ninit.A = {amp}\n\
             init.sigma = {sigma}\nsolver.diffusion_mode = {mode}\n",
            -h
        );
        let c = SimConfig::parse(&text).unwrap();
        let again = SimConfig::parse(&c.to_text()).unwrap();
        prop_assert_eq!(&again, &c);
        prop_assert_eq!(again.resume_hash(), c.resume_hash());
    }

    #[test]
    fn kinetic_energy_is_quadratic(
        ur in field_strategy(Staggering::RFace),
        scale in -4.0f64..4.0,
    ) {
        let g = ur.grid().clone();
        let uz = ScalarFieldRZ::from_fn(&g, Staggering::ZFace, |r, z| (r - z).sin());
        let u = VelocityFieldRZ::new(ur, uz).unwrap();
        let rho = ScalarFieldRZ::from_fn(&g, Staggering::Center, |r, _| 1.0 + r);
        let e = kinetic_energy(&rho, &u).unwrap();
        let mut v = u.clone();
        v.ur = v.ur.map(|x| scale * x);
        v.uz = v.uz.map(|x| scale * x);
        let es = kinetic_energy(&rho, &v).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert!((es - scale * scale * e).abs() <= 1e-12 * e.max(1e-300) * scale.abs().max(1.0).powi(2));
    }

    #[test]
    fn decay_slopes_ignore_amplitudes(
        k in -4.0f64..0.0, c1 in 1e-3f64..1e3, c2 in 1e-3f64..1e3,
    ) {
        let s: Vec<_> = (1..60)
            .map(|n| {
                let t = n as f64;
                DecaySample { t, u_sq: c1 * bracket(t).powf(k), grad_sq: c2 * bracket(t).powf(k - 1.0), higher: None }
            })
            .collect();
        let fit = decay_fit(&s, (1.0, 59.0), 1.5).unwrap();
        prop_assert!((fit.slope_u - k).abs() < 1e-9);
        prop_assert!((fit.slope_grad - (k - 1.0)).abs() < 1e-9);
        prop_assert!(fit.slope_higher.is_none());
    }
}
