use proptest::prelude::*;
use qwork_core::duality::{effectiveness, predictability, report_from_decomposition, SplitRoute};
use qwork_core::linalg::{expm_reference, frobenius_distance};
use qwork_core::model::two_level_state;
use qwork_core::workdist::trace_distance;
use qwork_core::*;
use std::f64::consts::FRAC_PI_2;

fn hermitian(d: usize, re: &[f64], im: &[f64]) -> Operator {
    let mut h = Operator::zeros(d);
    let mut k = 0;
    for i in 0..d {
        h.set(i, i, C64::new(re[k], 0.0));
        k += 1;
        for j in (i + 1)..d {
            let z = C64::new(re[k], im[k]);
            h.set(i, j, z);
            h.set(j, i, z.conj());
            k += 1;
        }
    }
    h
}

fn density(d: usize, re: &[f64], im: &[f64]) -> Operator {
    let mut a = Operator::zeros(d);
    for i in 0..d {
        for j in 0..d {
            a.set(i, j, C64::new(re[i * d + j], im[i * d + j]));
        }
    }
    let m = &a * &a.adjoint();
    let tr = m.trace().re;
    m.scale(C64::new(1.0 / tr, 0.0))
}

/// A random process on `d` levels: initial energies, final eigensystem,
/// propagator and state.
fn random_case(d: usize, v: &[f64]) -> (Operator, EigenSystem, EigenSystem, Operator) {
    let n = d * d;
    let mut e0: Vec<f64> = v[..d].to_vec();
    e0.sort_by(f64::total_cmp);
    let e0 = EigenSystem::canonical(&e0).unwrap();
    let et = hermitian_eigensystem(&hermitian(d, &v[d..d + n], &v[d + n..d + 2 * n])).unwrap();
    let u = expm_reference(&hermitian(d, &v[d + 2 * n..d + 3 * n], &v[d + 3 * n..d + 4 * n]), 1.0);
    let rho = density(d, &v[d + 4 * n..d + 5 * n], &v[d + 5 * n..d + 6 * n]);
    (rho, e0, et, u)
}

fn case_strategy() -> impl Strategy<Value = (usize, Vec<f64>, f64)> {
    (2usize..=4).prop_flat_map(|d| {
        (
            Just(d),
            prop::collection::vec(-1.0f64..1.0, d + 6 * d * d),
            prop_oneof![Just(0.0), 0.01f64..2.0],
        )
    })
}

fn scheme(sigma: f64) -> MeasurementScheme {
    if sigma == 0.0 {
        MeasurementScheme::Projective
    } else {
        MeasurementScheme::gaussian(sigma).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn duality_bound_holds((d, v, sigma) in case_strategy()) {
        let (rho, e0, et, u) = random_case(d, &v);
        let dec = build_work_distribution(&rho, &e0, &et, &u, scheme(sigma)).unwrap();
        // report_from_decomposition fails with BoundViolation on any breach
        let r = report_from_decomposition(&dec, 1e-10, SplitRoute::Initial).unwrap();
        prop_assert!(r.bound_residual >= -1e-9);
        prop_assert!(r.d_w <= 1.0 + 1e-9 && r.d_w >= 0.0);
        prop_assert!(r.v_w <= r.c / (d - 1) as f64 + 1e-9);
        prop_assert!(r.sum_residual >= -1e-9);
    }

    #[test]
    fn evolved_route_obeys_bound((d, v, sigma) in case_strategy()) {
        let (rho, e0, et, u) = random_case(d, &v);
        let r = duality::evolved_basis_report(&rho, &u, &e0, &et, scheme(sigma), 1e-10).unwrap();
        prop_assert!(r.bound_residual >= -1e-9);
    }

    #[test]
    fn full_is_incoherent_plus_coherent((d, v, sigma) in case_strategy(), x in 0.0f64..1.0) {
        let (rho, e0, et, u) = random_case(d, &v);
        let dec = build_work_distribution(&rho, &e0, &et, &u, scheme(sigma)).unwrap();
        let total = dec.full.total_weight();
        prop_assert!((total.re - 1.0).abs() < 1e-10 && total.im.abs() < 1e-12);
        prop_assert!(dec.coherent.total_weight().norm() < 1e-10);
        for (i, p) in dec.per_level.iter().enumerate() {
            let w = p.total_weight();
            prop_assert!((w.re - 1.0).abs() < 1e-10, "level {} weight {}", i, w);
        }
        if sigma > 0.0 {
            let (lo, hi) = dec.full.support_window().unwrap();
            let w = lo + x * (hi - lo);
            let lhs = dec.full.evaluate(w).unwrap();
            let rhs = dec.incoherent.evaluate(w).unwrap() + dec.coherent.evaluate(w).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            let per_level: f64 = (0..d).map(|i| dec.populations[i] * dec.per_level[i].evaluate(w).unwrap()).sum();
            prop_assert!((per_level - dec.incoherent.evaluate(w).unwrap()).abs() < 1e-10 * (1.0 + lhs.abs()));
            prop_assert!(lhs >= -1e-12);
        }
    }

    #[test]
    fn effectiveness_is_twice_trace_distance((d, v, sigma) in case_strategy()) {
        let (rho, e0, et, u) = random_case(d, &v);
        let dec = build_work_distribution(&rho, &e0, &et, &u, scheme(sigma)).unwrap();
        let v_w = effectiveness(&dec, 1e-11).unwrap();
        let td = trace_distance(&dec.full, &dec.incoherent, 1e-11).unwrap();
        prop_assert!((v_w - 2.0 * td / (d - 1) as f64).abs() < 1e-8, "{} vs {}", v_w, td);
    }

    #[test]
    fn eigensystem_reconstructs((d, v, _sigma) in case_strategy()) {
        let n = d * d;
        let h = hermitian(d, &v[d..d + n], &v[d + n..d + 2 * n]);
        let e = hermitian_eigensystem(&h).unwrap();
        prop_assert!(frobenius_distance(&e.reconstruct(), &h).unwrap() < 1e-10);
        prop_assert!(e.orthonormality_defect() < 1e-10);
        prop_assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn two_level_bound_over_parameters(
        theta in 0.0f64..FRAC_PI_2,
        log_sigma in -3.0f64..2.0,
        t in 0.5f64..120.0,
        omega0 in 0.0f64..0.5,
    ) {
        let model = DrivenTwoLevel::new(omega0, 0.01).unwrap();
        let process = DrivenProcess::new(&model, t, 1e-8).unwrap();
        let dec = process.decompose(&two_level_state(theta), MeasurementScheme::gaussian(10f64.powf(log_sigma)).unwrap()).unwrap();
        let d_w = predictability(&dec, &dec.populations, 1e-10).unwrap();
        let v_w = effectiveness(&dec, 1e-10).unwrap();
        prop_assert!(d_w * d_w + v_w * v_w <= 1.0 + 1e-9);
        prop_assert!(d_w >= (2.0 * theta).cos() - 1e-9, "coarse graining cannot beat the state: {} < {}", d_w, (2.0 * theta).cos());
    }

    #[test]
    fn propagator_is_unitary(omega0 in 0.0f64..1.0, omega in 0.01f64..2.0, t in 0.0f64..30.0) {
        let model = DrivenTwoLevel::new(omega0, omega).unwrap();
        let r = evolve(&model, t, 1e-9).unwrap();
        prop_assert!(r.unitarity_residual < 1e-9);
    }
}
