//! Cross-module invariants on randomized reservoirs.

use proptest::prelude::*;
use qdecay_core::*;

fn grid(h: f64, t_end: f64) -> TimeGrid64 {
    TimeGrid::spanning(h, t_end).unwrap()
}

fn mode_set() -> impl Strategy<Value = ModeSet64> {
    proptest::collection::vec((0.01..0.6f64, -2.0..2.0f64, -3.0..3.0f64), 1..6).prop_map(|v| {
        let modes = v
            .into_iter()
            .map(|(r, phase, omega)| Mode {
                coupling: C64::from_polar(r, phase),
                omega,
            })
            .collect();
        ModeSet::new(0.3, modes).unwrap()
    })
}

fn correlation() -> impl Strategy<Value = CorrelationFunction64> {
    prop_oneof![
        (0.01..5.0f64, 0.5..3.0f64)
            .prop_map(|(g0, l)| CorrelationFunction::lorentzian(g0, l).unwrap()),
        mode_set().prop_map(CorrelationFunction::DiscreteModes),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_map_is_contractive(cf in correlation()) {
        let g = grid(5e-3, 10.0);
        let sol = solve_amplitude(&cf, &g).unwrap();
        for v in sol.g.values() {
            prop_assert!(v.norm() <= 1.0 + 1e-10);
            prop_assert!(min_choi_eigenvalue(DynamicalMapPoint::new(*v)) >= -1e-12);
        }
    }

    #[test]
    fn propagated_states_keep_unit_trace(cf in correlation(), theta in 0.0..1.5f64, phi in 0.0..6.2f64) {
        let g = grid(1e-2, 5.0);
        let rho0 = QubitState::pure(theta, phi);
        let k = nz_kernel_perturbative(&cf, &g, 2).unwrap();
        for s in nz_propagate(&k, &rho0, &g).unwrap().states {
            prop_assert!((s.trace() - 1.0).abs() <= f64::EPSILON);
        }
    }

    #[test]
    fn tcl_reconstructs_exact_map_before_breakdown(g0 in 0.05..=1.0f64, theta in 0.0..1.5f64, phi in 0.0..6.2f64) {
        let cf = CorrelationFunction::lorentzian(g0, 1.0).unwrap();
        let g = grid(1e-3, 10.0);
        let sol = solve_amplitude(&cf, &g).unwrap();
        let coeffs = tcl_coefficients(&sol.g, &sol.gdot, DEFAULT_BREAKDOWN_THRESHOLD).unwrap();
        let rho0 = QubitState::pure(theta, phi);
        let traj = tcl_propagate(&coeffs, &rho0, &g).unwrap();
        for (s, gv) in traj.states.iter().zip(sol.g.values()) {
            prop_assert!(s.max_entry_diff(&apply_map(DynamicalMapPoint::new(*gv), &rho0)) <= 1e-6);
        }
    }

    #[test]
    fn breakdown_tracks_first_zero(g0 in 0.6..5.0f64) {
        let p = LorentzianParams::new(g0, 1.0).unwrap();
        let h = 1e-3;
        let tz = p.first_zero_time().unwrap();
        let g = grid(h, tz + 1.0);
        let sol = solve_amplitude(&CorrelationFunction::Lorentzian(p), &g).unwrap();
        let c = tcl_coefficients(&sol.g, &sol.gdot, DEFAULT_BREAKDOWN_THRESHOLD).unwrap();
        let tb = c.breakdown_time().unwrap();
        prop_assert!((tb - tz).abs() <= 2.0 * h, "{} vs {}", tb, tz);
    }

    #[test]
    fn weak_coupling_never_breaks_down(g0 in 0.01..0.49f64, lambda in 0.5..2.0f64) {
        let cf = CorrelationFunction::lorentzian(g0 * lambda, lambda).unwrap();
        let g = grid(1e-2, 40.0);
        let sol = solve_amplitude(&cf, &g).unwrap();
        let c = tcl_coefficients(&sol.g, &sol.gdot, DEFAULT_BREAKDOWN_THRESHOLD).unwrap();
        prop_assert!(c.breakdown.is_none());
    }

    #[test]
    fn second_order_rate_is_nonnegative(cf in prop_oneof![
        (0.01..5.0f64, 0.5..3.0f64).prop_map(|(g0, l)| CorrelationFunction::lorentzian(g0, l).unwrap()),
        (0.01..2.0f64).prop_map(|r| CorrelationFunction::DiscreteModes(
            ModeSet::new(0.0, vec![Mode { coupling: C64::new(r, 0.0), omega: 0.0 }]).unwrap())),
    ]) {
        let g = grid(1e-2, 10.0);
        let r = tcl_rates_perturbative(&cf, &g, 2).unwrap();
        prop_assert!(r.gamma.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn memory_kernel_constraints_hold(g0 in 0.05..3.0f64) {
        let (g, cf) = (grid(5e-3, 8.0), CorrelationFunction::lorentzian(g0, 1.0).unwrap());
        let sol = solve_amplitude(&cf, &g).unwrap();
        let exact = nz_kernel_exact(&cf, &sol.g, &g).unwrap();
        let analytic = nz_kernel_lorentzian(cf.as_lorentzian().unwrap(), &g).unwrap();
        for k in [&exact, &analytic] {
            let (sum, eps) = k.constraint_residuals(&cf).unwrap();
            prop_assert!(sum <= 1e-12 && eps <= 1e-12);
        }
    }

    #[test]
    fn identity_residual_is_quadrature_limited(cf in correlation()) {
        // The residual is pure trapezoid error, ≈ (h f(0))²/4 for a Lorentzian.
        let h = 2e-3;
        let g = grid(h, 4.0);
        let scale = cf.sample(&g).unwrap().max_modulus();
        let coarse = check_kernel_identity(&cf, &g).unwrap();
        prop_assert!(coarse <= (h * scale).powi(2), "{} vs {}", coarse, (h * scale).powi(2));
    }
}

#[test]
fn deconvolution_round_trip() {
    for g0 in [0.2, 1.0, 3.0] {
        let p = LorentzianParams::new(g0, 1.0).unwrap();
        let cf = CorrelationFunction::Lorentzian(p);
        let g = grid(1e-3, 10.0);
        let sol = solve_amplitude(&cf, &g).unwrap();
        let z = sol.population();
        let forward = g
            .times()
            .zip(z.values())
            .map(|(t, v)| (v - p.amplitude(t).powi(2)).abs())
            .fold(0.0, f64::max);
        let dec = deconvolve_first_kind(
            &z,
            &sol.population_derivative(),
            &g,
            Some(2.0 * p.correlation(0.0)),
        )
        .unwrap();
        let back = propagate_scalar_volterra(&ConvolutionKernel::new(dec.kernel), 1.0, &g).unwrap();
        let trip = back.value.max_abs_diff(&z).unwrap();
        assert!(
            trip <= 10.0 * forward,
            "g0={g0}: round trip {trip:e} vs forward {forward:e}"
        );
    }
}

#[test]
fn gdot_converges_at_second_order() {
    let p = LorentzianParams::new(1.0, 1.0).unwrap();
    let err = |h: f64| {
        let g = grid(h, 8.0);
        let sol = solve_amplitude(&CorrelationFunction::Lorentzian(p), &g).unwrap();
        g.times()
            .zip(sol.gdot.values())
            .map(|(t, v)| (v.re - p.amplitude_derivative(t)).abs())
            .fold(0.0, f64::max)
    };
    let ratio = err(2e-3) / err(1e-3);
    assert!((3.5..=4.5).contains(&ratio), "{ratio}");
}

#[test]
fn weak_coupling_expansion_improves_with_order() {
    let cf = CorrelationFunction::lorentzian(0.1, 1.0).unwrap();
    let g = grid(1e-3, 10.0);
    let sol = solve_amplitude(&cf, &g).unwrap();
    let terms = expand_g(&cf, &g, 4).unwrap();
    let err = |order| terms.partial_sum(order).max_abs_diff(&sol.g).unwrap();
    assert!(err(4) <= err(2), "{} > {}", err(4), err(2));
}

#[test]
fn exact_kernel_has_nonvanishing_projection_term() {
    let g = grid(1e-3, 10.0);
    for g0 in [0.5, 1.0, 2.0] {
        let cf = CorrelationFunction::lorentzian(g0, 1.0).unwrap();
        let sol = solve_amplitude(&cf, &g).unwrap();
        let k = nz_kernel_exact(&cf, &sol.g, &g).unwrap();
        assert!(k.k2.max_modulus() > 1e-4 * g0 * g0);
    }
}

#[test]
fn nz_survives_where_tcl_breaks_down() {
    let g = grid(1e-3, 10.0);
    let p = LorentzianParams::new(1.0, 1.0).unwrap();
    let cf = CorrelationFunction::Lorentzian(p);
    let sol = solve_amplitude(&cf, &g).unwrap();
    let rho0 = QubitState::pure(0.3, 1.1);

    let coeffs = tcl_coefficients(&sol.g, &sol.gdot, DEFAULT_BREAKDOWN_THRESHOLD).unwrap();
    let tcl = tcl_propagate(&coeffs, &rho0, &g).unwrap();
    assert!(coeffs.breakdown.is_some());
    assert!(tcl.states.len() < g.len());
    assert!(coeffs.gamma.values().iter().any(|v| v.is_nan()));

    let nz = nz_propagate(&nz_kernel_exact(&cf, &sol.g, &g).unwrap(), &rho0, &g).unwrap();
    assert_eq!(nz.states.len(), g.len());
    for (t, s) in g.times().zip(&nz.states) {
        let exact = apply_map(DynamicalMapPoint::real(p.amplitude(t)), &rho0);
        assert!(s.max_entry_diff(&exact) < 1e-3);
    }
}

#[test]
fn generic_scalar_runs_in_single_precision() {
    let p = LorentzianParams::<f32>::new(0.2, 1.0).unwrap();
    let g = TimeGrid::<f32>::spanning(1e-2, 5.0).unwrap();
    let sol = solve_amplitude(&CorrelationFunction::Lorentzian(p), &g).unwrap();
    for (t, v) in g.times().zip(sol.g.values()) {
        assert!((v.re - p.amplitude(t)).abs() < 1e-4);
    }
    let k = nz_kernel_lorentzian(&p, &g).unwrap();
    let traj = nz_propagate(&k, &QubitState::<f32>::excited(), &g).unwrap();
    assert!(traj.all_valid());
}
