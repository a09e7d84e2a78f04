//! Property-based invariants spanning kernels, the solver, thresholds and
//! the Riccati machinery.

use nsl_core::{
    blowup_time_closed_form, convolve, kernel_mass, nonlocal_derivatives, riccati_solve, Boundary,
    DetectorConfig, FluxModel, Grid1D, InitialData, KernelSpec, RiccatiProblem, Solver,
    threshold_constant, threshold_linear,
};
use proptest::prelude::*;

fn periodic_grid(n: usize, length: f64) -> Grid1D {
    Grid1D::from_length(n, 0.0, length, Boundary::Periodic).unwrap()
}

fn kernel_strategy() -> impl Strategy<Value = KernelSpec> {
    // Periodic L = 4 with L ≥ 2γ admits γ ≤ 2.
    (0.2f64..1.5, prop_oneof![Just(0usize), Just(1usize)], 0.5f64..2.0).prop_map(
        |(gamma, kind, k0)| match kind {
            0 => KernelSpec::constant(gamma, k0).unwrap(),
            _ => KernelSpec::linear(gamma).unwrap(),
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_is_linear(
        k in kernel_strategy(),
        u in proptest::collection::vec(0.0f64..1.0, 64),
        w in proptest::collection::vec(0.0f64..1.0, 64),
        lam in -2.0f64..2.0,
        mu in -2.0f64..2.0,
    ) {
        let g = periodic_grid(64, 4.0);
        let combo: Vec<f64> = u.iter().zip(&w).map(|(a, b)| lam * a + mu * b).collect();
        let cu = convolve(&k, &g, &u).unwrap();
        let cw = convolve(&k, &g, &w).unwrap();
        let cc = convolve(&k, &g, &combo).unwrap();
        for i in 0..64 {
            let expect = lam * cu[i] + mu * cw[i];
            prop_assert!((cc[i] - expect).abs() <= 1e-12 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn averages_stay_between_scaled_extrema(
        k in kernel_strategy(),
        u in proptest::collection::vec(0.0f64..1.0, 64),
    ) {
        let g = periodic_grid(64, 4.0);
        let mass = kernel_mass(&k);
        let lo = u.iter().cloned().fold(f64::INFINITY, f64::min) * mass;
        let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max) * mass;
        for v in convolve(&k, &g, &u).unwrap() {
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12, "ubar {v} outside [{lo}, {hi}]");
        }
    }

    #[test]
    fn average_slope_is_bounded_by_the_kernel_jump(
        k in kernel_strategy(),
        u in proptest::collection::vec(0.0f64..1.0, 64),
    ) {
        // Constant: ū_x = K(0)(u(x+γ) − u(x)); linear: ū_x = −K(0)(u − ū_c).
        // Either way |ū_x| ≤ K(0)·osc(u).
        let g = periodic_grid(64, 4.0);
        let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let bound = k.k_at_zero() * (hi - lo);
        let d = nonlocal_derivatives(&k, &g, &u).unwrap();
        for v in d.ubar_x {
            prop_assert!(v.abs() <= bound + 1e-12, "ubar_x {v} exceeds {bound}");
        }
    }

    #[test]
    fn thresholds_are_monotone_and_ordered(
        gamma in 0.05f64..20.0,
        inf_a in -8.0f64..0.0,
        shrink in 0.0f64..1.0,
    ) {
        let inf_b = inf_a * shrink; // inf_a ≤ inf_b ≤ 0
        let ca = threshold_constant(gamma, inf_a).unwrap();
        let cb = threshold_constant(gamma, inf_b).unwrap();
        prop_assert!(ca >= cb - 1e-12, "constant threshold not monotone");
        let la = threshold_linear(gamma, inf_a).unwrap();
        let lb = threshold_linear(gamma, inf_b).unwrap();
        prop_assert!(la >= lb - 1e-12, "linear threshold not monotone");
        prop_assert!(la > ca, "linear must dominate constant");
        prop_assert!(ca > 0.0 && la > 0.0);
    }

    #[test]
    fn riccati_matches_closed_form_blowup(
        a in 0.2f64..3.0,
        b1 in -2.0f64..0.0,
        gap in 0.1f64..2.0,
        above in 0.05f64..3.0,
    ) {
        let b2 = b1 + gap;
        let a0 = b2 + above;
        let exact = blowup_time_closed_form(a, b1, b2, a0).unwrap();
        let p = RiccatiProblem::constant(a, b1, b2, a0, 2.0 * exact + 1.0).unwrap();
        let sol = riccati_solve(&p).unwrap();
        let t = sol.blowup_time.expect("supercritical data must blow up");
        prop_assert!((t - exact).abs() <= 1e-4 * exact.max(1e-3), "{t} vs {exact}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_preserves_bounds_and_mass(
        seed in any::<u64>(),
        gamma in 0.3f64..1.0,
        order in 1u8..=2,
    ) {
        let flux = FluxModel::arrhenius(1.0).unwrap();
        let kernel = KernelSpec::constant(gamma, 1.0).unwrap();
        let solver = Solver::new(flux, kernel).with_order(order).unwrap();
        let g = periodic_grid(128, 4.0);
        let ic = InitialData::RandomFourier { base: 0.5, amplitude: 0.3, modes: 4, seed };
        ic.validate(1.0).unwrap();
        let mut s = solver.prepare(g.clone(), ic.discretize(&g)).unwrap();
        let mass0 = s.mass();
        for _ in 0..30 {
            solver.step(&mut s, f64::INFINITY).unwrap();
            for &v in &s.u {
                prop_assert!((-1e-10..=1.0 + 1e-10).contains(&v), "u = {v}");
            }
            prop_assert!((s.mass() - mass0).abs() <= 1e-13 * mass0.abs());
            // Periodic non-constant data has slopes of both signs.
            prop_assert!(s.m_slope >= 0.0 && s.n_slope <= 0.0);
        }
    }

    #[test]
    fn flat_states_never_trigger_detection(
        value in 0.05f64..0.95,
        gamma in 0.3f64..1.0,
    ) {
        let flux = FluxModel::arrhenius(1.0).unwrap();
        let kernel = KernelSpec::constant(gamma, 1.0).unwrap();
        let solver = Solver::new(flux, kernel);
        let g = periodic_grid(64, 4.0);
        let s0 = solver.prepare(g, vec![value; 64]).unwrap();
        let out = solver.run(s0, 1.0, &DetectorConfig::default()).unwrap();
        prop_assert!(!out.event.detected);
        for &v in &out.state.u {
            prop_assert!((v - value).abs() <= 1e-12);
        }
    }
}
