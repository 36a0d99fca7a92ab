use halfline::bochner::positive_type_check;
use halfline::grid::{KGrid, RadialGrid};
use halfline::marchenko::kernel_iterates;
use halfline::phase_shift::{phase_shift_table, PhaseMethod};
use halfline::potential::{choose_truncation, Potential};
use halfline::schrodinger::{jost_solution, regular_solution, zero_energy_pair};
use halfline::transforms::{
    invert_volterra, push_measure, volterra_envelope_check, SampledFunction, StieltjesEvaluator, StieltjesMeasure,
};
use halfline::marchenko::solve_kernel;
use num_complex::Complex64;
use proptest::prelude::*;

fn potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.1f64..3.0, 0.3f64..2.0).prop_map(|(g, a)| Potential::exponential(g, a).unwrap()),
        (0.1f64..3.0, 0.2f64..2.0).prop_map(|(h, w)| Potential::square_barrier(h, w).unwrap()),
        (0.1f64..3.0, 0.3f64..2.0).prop_map(|(g, w)| Potential::gaussian(g, w).unwrap()),
    ]
}

fn smooth_potential() -> impl Strategy<Value = Potential> {
    prop_oneof![
        (0.1f64..2.0, 0.5f64..2.0).prop_map(|(g, a)| Potential::exponential(g, a).unwrap()),
        (0.1f64..2.0, 0.5f64..2.0).prop_map(|(g, w)| Potential::gaussian(g, w).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn potentials_are_non_negative(v in potential(), rs in prop::collection::vec(0.0f64..50.0, 200)) {
        for r in rs {
            prop_assert!(v.value(r) >= 0.0);
        }
    }

    #[test]
    fn truncation_grows_as_eps_shrinks(v in potential(), e in -12.0f64..-3.0, d in 0.1f64..3.0) {
        let loose = choose_truncation(&v, 10f64.powf(e + d)).unwrap();
        let tight = choose_truncation(&v, 10f64.powf(e)).unwrap();
        prop_assert!(tight >= loose);
    }

    #[test]
    fn wronskian_of_regular_and_jost_is_constant(v in potential(), k in 0.2f64..8.0) {
        let grid = RadialGrid::uniform(15.0, 600).unwrap();
        let phi = regular_solution(&v, k, &grid).unwrap();
        let f = jost_solution(&v, k, &grid).unwrap();
        let w: Vec<Complex64> = (0..grid.len())
            .map(|i| f.values()[i] * phi.derivatives()[i] - f.derivatives()[i] * phi.values()[i])
            .collect();
        let drift = w.iter().map(|x| (x - w[0]).norm()).fold(0.0, f64::max) / w[0].norm();
        prop_assert!(drift <= 1e-8, "drift {drift:e}");
    }

    #[test]
    fn zero_energy_pair_shape(v in potential()) {
        let grid = RadialGrid::uniform(20.0, 800).unwrap();
        let (phi0, chi0) = zero_energy_pair(&v, &grid).unwrap();
        let p = phi0.real_values();
        let c = chi0.real_values();
        for i in 1..p.len() - 1 {
            prop_assert!(p[i + 1] - 2.0 * p[i] + p[i - 1] >= -1e-10);
            prop_assert!(c[i + 1] - 2.0 * c[i] + c[i - 1] >= -1e-10);
            prop_assert!(c[i + 1] - c[i] <= 1e-10, "{v:?} r={} dc={:e}", grid.nodes()[i], c[i + 1] - c[i]);
        }
    }

    #[test]
    fn phase_shift_is_negative(v in smooth_potential()) {
        let grid = RadialGrid::uniform(30.0, 1500).unwrap();
        let kgrid = KGrid::uniform(0.3, 10.0, 12).unwrap();
        let table = phase_shift_table(&v, &kgrid, &grid, PhaseMethod::PruferIntegral).unwrap();
        prop_assert!(table.delta.iter().all(|&d| d < 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn kernel_iterates_increase(v in potential()) {
        let its = kernel_iterates(&v, &RadialGrid::uniform(5.0, 50).unwrap(), 4).unwrap();
        for w in its.windows(2) {
            for (x, y) in w[0].values().iter().zip(w[1].values()) {
                prop_assert!(y >= x);
            }
        }
    }

    #[test]
    fn volterra_round_trip(
        v in smooth_potential(),
        b in 0.3f64..2.0,
        c in 0.0f64..0.9,
        d in 0.5f64..5.0,
        atom in prop::option::of((0.0f64..5.0, 0.1f64..2.0)),
    ) {
        let grid = RadialGrid::uniform(8.0, 160).unwrap();
        let a = solve_kernel(&v, &grid, 1e-13, 500).unwrap();
        let dens = SampledFunction::from_fn(&grid, |r| (-b * r).exp() * (1.0 + c * (d * r).sin())).unwrap();
        let alpha = StieltjesMeasure::density_only(dens.clone()).unwrap();
        let beta = push_measure(&alpha, &a).unwrap();
        prop_assert!(beta.density().values().iter().all(|&x| x >= 0.0));
        let back = invert_volterra(beta.density(), &a).unwrap();
        for (r, x) in back.nodes().iter().zip(back.values()) {
            prop_assert!((x - dens.interpolate(*r)).abs() <= 1e-10);
        }
        prop_assert!(volterra_envelope_check(&back, beta.density(), &a).unwrap().pass);
        if let Some((t, w)) = atom {
            let with_atom = StieltjesMeasure::new(vec![(t, w)], dens).unwrap();
            let pushed = push_measure(&with_atom, &a).unwrap();
            prop_assert!(pushed.density().values().iter().all(|&x| x >= 0.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn conical_sums_stay_positive_type(
        t1 in 0.0f64..4.0,
        t2 in 0.0f64..4.0,
        c1 in 0.0f64..2.0,
        c2 in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let v = Potential::exponential(1.0, 1.0).unwrap();
        let grid = RadialGrid::uniform(10.0, 100).unwrap();
        let m1 = StieltjesMeasure::new(vec![(t1, 1.0)], SampledFunction::zero(&grid)).unwrap();
        let m2 = StieltjesMeasure::new(
            vec![(t2, 0.5)],
            SampledFunction::from_fn(&grid, |r| (-r).exp()).unwrap(),
        ).unwrap();
        let e1 = StieltjesEvaluator::new(&m1, &v).unwrap();
        let e2 = StieltjesEvaluator::new(&m2, &v).unwrap();
        let sum = |k: f64| Ok(e1.eval(k)? * c1 + e2.eval(k)? * c2);
        let rep = positive_type_check(sum, 10.0, 6, 3, 1e-8, seed).unwrap();
        prop_assert!(rep.pass, "{:?}", rep.relative_margin);
    }
}
