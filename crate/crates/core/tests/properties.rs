use proptest::prelude::*;

use qregress::analysis::{
    analytic_continuation_eval, deviation_of_samples, kms_residual, thermal_weight, KmsPair,
    ModelParams,
};
use qregress::engine::{
    bohr_decompose, build_adjoint_generator, mqrt_correlator, ops, CMatrix, EngineOptions,
    SystemSpec, TimePoint,
};
use qregress::mathkit::{
    complementary_occupation, occupation, QuadratureSpec, SpectralDensity, Statistics,
};
use qregress::models::{
    linspace, mqrt_two_point_eq, sb_mqrt_eq, BFParams, CorrelatorKind, Method, SBParams,
};
use qregress::oracle::{two_point_exact, OracleSystem};
use qregress::Complex64;

fn stats() -> impl Strategy<Value = Statistics> {
    prop_oneof![Just(Statistics::Fermion), Just(Statistics::Boson)]
}

fn matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), d * d).prop_map(move |v| {
        CMatrix::from_iterator(d, d, v.into_iter().map(|(re, im)| Complex64::new(re, im)))
    })
}

fn hermitian(d: usize) -> impl Strategy<Value = CMatrix> {
    matrix(d).prop_map(|m| (&m + m.adjoint()) * Complex64::new(0.5, 0.0))
}

fn density_matrix(d: usize) -> impl Strategy<Value = CMatrix> {
    matrix(d).prop_map(|m| {
        let p = &m * m.adjoint();
        let tr = p.trace();
        p / tr
    })
}

fn curve(tau: &[f64], amp: f64, freq: f64, phase: f64) -> Vec<Complex64> {
    tau.iter()
        .map(|&t| Complex64::from_polar(amp / (1.0 + t), freq * t + phase))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn complement_is_boltzmann_multiple(
        s in stats(),
        omega in -8.0..8.0f64,
        beta in 0.05..10.0f64,
    ) {
        prop_assume!((beta * omega).abs() > 1e-6);
        let n = occupation(omega, beta, s).unwrap();
        let c = complementary_occupation(omega, beta, s).unwrap();
        let rel = (c - n * (beta * omega).exp()).abs() / c.abs();
        prop_assert!(rel < 1e-12, "rel {rel}");
        prop_assert!((c - (1.0 - s.eta() * n)).abs() < 1e-12 * c.abs().max(1.0));
    }

    #[test]
    fn thermal_weight_orders_add(
        s in stats(),
        omega in -6.0..6.0f64,
        beta in 0.1..4.0f64,
        k1 in -1.0..1.0f64,
        k2 in -1.0..1.0f64,
    ) {
        let j = SpectralDensity::rational_quartic(0.3);
        let joint = thermal_weight(&j, omega, beta, s, k1 + k2);
        let split = thermal_weight(&j, omega, beta, s, k1) * (k2 * beta * omega).exp();
        prop_assert!((joint - split).abs() <= 1e-12 * joint.abs().max(1e-300));
    }

    #[test]
    fn deviation_metric_axioms(
        a in (0.2..2.0f64, -3.0..3.0f64, -3.0..3.0f64),
        b in (0.2..2.0f64, -3.0..3.0f64, -3.0..3.0f64),
        c in (0.2..2.0f64, -3.0..3.0f64, -3.0..3.0f64),
        tau_f in 0.5..6.0f64,
    ) {
        let tau = linspace(0.0, tau_f, 81);
        let (x, y, z) = (curve(&tau, a.0, a.1, a.2), curve(&tau, b.0, b.1, b.2), curve(&tau, c.0, c.1, c.2));
        let d = |p: &[Complex64], q: &[Complex64]| deviation_of_samples(&tau, p, q, tau_f).unwrap();
        prop_assert_eq!(d(&x, &x), 0.0);
        prop_assert!(d(&x, &y) >= 0.0);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-14);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bohr_components_sum_and_rotate(
        (d, h, x) in (2usize..6).prop_flat_map(|d| (Just(d), hermitian(d), matrix(d))),
    ) {
        let parts = bohr_decompose(&h, &x, 1e-9).unwrap();
        let err = (parts.reconstruct(d) - &x).norm() / x.norm();
        prop_assert!(err < 1e-10, "reconstruction {err}");
        for c in &parts.components {
            let lhs = &h * &c.op - &c.op * &h;
            let rhs = &c.op * Complex64::new(-c.omega, 0.0);
            prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + h.norm()) * x.norm());
        }
    }

    #[test]
    fn generator_duality(
        (n_max, rho, x) in (2usize..6).prop_flat_map(|n| (Just(n), density_matrix(n), matrix(n))),
        beta in 0.3..3.0f64,
        delta in 0.02..0.3f64,
    ) {
        let j = SpectralDensity::rational_quartic(delta);
        let quad = QuadratureSpec::for_model(1.0, beta);
        let spec = SystemSpec::truncated_boson(1.0, beta, j, quad, n_max).unwrap();
        let gen = build_adjoint_generator(&spec).unwrap();
        let lhs = (gen.apply_dual(&rho) * &x).trace();
        let rhs = (&rho * gen.apply(&x)).trace();
        prop_assert!((lhs - rhs).norm() < 1e-11 * (1.0 + lhs.norm()));
        let tr = gen.apply_dual(&rho).trace();
        prop_assert!(tr.norm() < 1e-11, "trace not preserved: {tr}");
    }

    #[test]
    fn oracle_is_unitary_and_canonical(
        s in stats(),
        n in 20usize..160,
        beta in 0.3..3.0f64,
        n0 in 0.0..1.0f64,
        t in 0.0..40.0f64,
        tau in 0.0..5.0f64,
    ) {
        let window = if s == Statistics::Boson { (0.2, 5.0) } else { (-5.0, 5.0) };
        let j = SpectralDensity::flat(0.3, 5.0).windowed(window.0, window.1);
        let sys = OracleSystem::from_density(1.0, &j, n, window, s, beta, n0).unwrap().without_recurrence_guard();
        let norm: f64 = sys.propagator_row(t).iter().map(|u| u.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() < 1e-10, "row norm {norm}");
        let lesser = two_point_exact(&sys, t, 0.0, CorrelatorKind::ADagA).unwrap();
        let greater = two_point_exact(&sys, t, 0.0, CorrelatorKind::AADag).unwrap();
        prop_assert!((greater + s.eta() * lesser - 1.0).norm() < 1e-10);
        let forward = two_point_exact(&sys, t, tau, CorrelatorKind::ADagA).unwrap();
        prop_assert!(forward.is_finite());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn continuation_reduces_to_real_axis(
        s in stats(),
        beta in 0.5..3.0f64,
        tau in 0.0..8.0f64,
    ) {
        let j = SpectralDensity::rational_quartic(0.1).windowed(if s == Statistics::Boson { 0.0 } else { -40.0 }, 40.0);
        let p = BFParams::new(1.0, beta, s, j);
        let real = mqrt_two_point_eq(&p, CorrelatorKind::ADagA, &[tau]).unwrap().values[0];
        let cont = analytic_continuation_eval(
            Method::Mqrt,
            CorrelatorKind::ADagA,
            &ModelParams::BosonFermion(p),
            tau,
            0.0,
        ).unwrap();
        prop_assert!((real - cont).norm() < 1e-8 * real.norm().max(1e-3));
    }

    #[test]
    fn mqrt_satisfies_kms(
        s in stats(),
        beta in 0.3..4.0f64,
        delta in 0.05..0.3f64,
        spin in any::<bool>(),
    ) {
        let taus = linspace(-3.0, 3.0, 13);
        let j = SpectralDensity::rational_quartic(delta);
        let (params, pair) = if spin {
            (ModelParams::SpinBoson(SBParams::new(1.0, beta, j)), KmsPair::Spin)
        } else {
            (ModelParams::BosonFermion(BFParams::new(1.0, beta, s, j)), KmsPair::Mode)
        };
        let r = kms_residual(&params, Method::Mqrt, pair, &taus).unwrap();
        prop_assert!(r.passes(), "residual {} threshold {}", r.residual, r.pass_threshold);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn rk4_error_is_fourth_order(beta in 0.5..3.0f64, delta in 0.05..0.2f64) {
        let j = SpectralDensity::rational_quartic(delta);
        let quad = QuadratureSpec::for_model(1.0, beta);
        let spec = SystemSpec::spin_boson(1.0, beta, j.clone(), quad).unwrap();
        let p = SBParams::new(1.0, beta, j).with_quad(quad);
        let loose = EngineOptions { ode_rel_tol: 1.0, ..Default::default() };
        let error = |h: f64| {
            let taus = linspace(0.0, 4.0, (4.0 / h).round() as usize + 1);
            let c = mqrt_correlator(&spec, &ops::sigma_plus(), &ops::sigma_minus(), &TimePoint::Infinity, &taus, &loose).unwrap();
            let e = sb_mqrt_eq(&p, CorrelatorKind::PlusMinus, &taus).unwrap();
            c.values.iter().zip(&e.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
        };
        let ratio = error(0.2) / error(0.1);
        prop_assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
    }
}
