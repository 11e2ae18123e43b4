use super::*;
use crate::levy::{Atom, LevyMeasure};
use crate::math::sin;
use crate::scaling::{default_sample_grid, derive_constants, ScalingFn};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cauchy(horizon: f64) -> AdditiveModel {
    AdditiveModel::stationary(LevyMeasure::isotropic_stable_normalized(1, 1.0, 1.0).unwrap(), horizon).unwrap()
}

#[test]
fn axis_example_exponent() {
    let mu = LevyMeasure::axis_stable_normalized(1.0, &[1.0, 1.0]).unwrap();
    let m = AdditiveModel::stationary(mu, 1.0).unwrap();
    let v = m.psi(0.5, &[1.5, -2.0]).unwrap();
    assert!((v - c(-3.5, 0.0)).norm() < 1e-14);
    assert_eq!(m.psi(0.5, &[0.0, 0.0]).unwrap(), c(0.0, 0.0));
}

#[test]
fn single_atom_exponent() {
    let mu = LevyMeasure::finite_atomic(1, vec![Atom { location: vec![1.0], mass: 1.0 }]).unwrap();
    let m = AdditiveModel::stationary(mu, 2.0).unwrap();
    let x = 0.7;
    let want = c(0.0, x).exp() - 1.0 - c(0.0, x);
    assert!((m.psi(1.0, &[x]).unwrap() - want).norm() < 1e-15);
    assert!((m.integrated_exponent(0.5, 2.0, &[x]).unwrap() - want * 1.5).norm() < 1e-14);
}

#[test]
fn piecewise_exponent_by_hand() {
    let mu = LevyMeasure::isotropic_stable_normalized(1, 1.0, 1.0).unwrap();
    let prof = ScalarProfile::piecewise(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap();
    let m = AdditiveModel::new(1, 1.0).unwrap().with_jumps(prof, mu).unwrap();
    let e = m.integrated_exponent(0.0, 1.0, &[3.0]).unwrap();
    assert!((e - c(-4.5, 0.0)).norm() < 1e-14);
    assert_eq!(m.integrated_exponent(0.3, 0.3, &[3.0]).unwrap(), c(0.0, 0.0));
    assert!(matches!(m.integrated_exponent(0.6, 0.2, &[1.0]), Err(Error::TimeOrder { .. })));
    assert!(matches!(m.integrated_exponent(0.0, 2.0, &[1.0]), Err(Error::OutsideHorizon { .. })));
}

#[test]
fn time_independent_exponent_is_linear() {
    let m = cauchy(3.0);
    let e = m.integrated_exponent(0.4, 2.9, &[-1.25]).unwrap();
    assert!((e - c(-2.5 * 1.25, 0.0)).norm() < 1e-14);
}

#[test]
fn closed_profile_integral_and_additivity() {
    let prof = ScalarProfile::closed(|t| 1.0 + 0.5 * sin(3.0 * t), 4.0);
    let exact = |a: f64, b: f64| (b - a) - (libm::cos(3.0 * b) - libm::cos(3.0 * a)) / 6.0;
    assert!((prof.integral(0.3, 3.7) - exact(0.3, 3.7)).abs() < 1e-13);
    // split at a panel boundary (panel width 0.25)
    let whole = prof.integral(0.1, 2.9);
    let parts = prof.integral(0.1, 1.5) + prof.integral(1.5, 2.9);
    assert!((whole - parts).abs() < 1e-14);
}

#[test]
fn oscillation_profile_preserves_mean() {
    let p = ScalarProfile::dyadic_oscillation(2.0, 4, 3.0).unwrap();
    assert_eq!(p.breakpoints().len(), 17);
    assert!((p.integral(0.0, 2.0) - (1.0 / 3.0 + 3.0)).abs() < 1e-14);
    assert_eq!(p.value(0.0), 1.0 / 3.0);
    assert_eq!(p.value(0.125), 3.0);
    assert_eq!(p.value(2.0), 3.0);
}

#[test]
fn symmetric_scaling_keeps_zero_drift() {
    let m = AdditiveModel::stationary(LevyMeasure::axis_stable(0.9, vec![1.0, 2.0]).unwrap(), 1.0).unwrap();
    let triple = ScalingTriple::power(0.9).unwrap();
    for j in 0..5 {
        let sj = m.scaled_process(&triple, j).unwrap();
        assert!(sj.drift_terms().is_empty());
        assert!(sj.drift_integral(0.0, 1.0).iter().all(|&x| x == 0.0));
    }
}

fn scaling_residual(m: &AdditiveModel, triple: &ScalingTriple, j: u32, xis: &[f64]) -> f64 {
    let sj = m.scaled_process(triple, j).unwrap();
    let cj = powf(triple.base(), -(j as f64));
    let sc = triple.eval(cj);
    let d = m.dim();
    xis.chunks(d)
        .map(|xi| {
            let lhs = m.psi(0.37, xi).unwrap();
            let scaled_xi: Vec<f64> = xi.iter().map(|x| x * cj).collect();
            let rhs = sj.psi(0.37, &scaled_xi).unwrap() / sc;
            (lhs - rhs).norm() / lhs.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

#[test]
fn scaling_identity_for_stable_power_triple() {
    for &alpha in &[0.5, 1.0, 1.5] {
        let m = AdditiveModel::stationary(LevyMeasure::axis_stable(alpha, vec![1.0]).unwrap(), 1.0).unwrap();
        let triple = ScalingTriple::power(alpha).unwrap();
        let xis: Vec<f64> = (0..64).map(|i| -40.0 + 1.3 * i as f64).collect();
        for j in 0..=10 {
            assert!(scaling_residual(&m, &triple, j, &xis) < 1e-10);
        }
    }
}

#[test]
fn scaling_identity_with_asymmetric_jumps_and_drift() {
    let atoms = vec![
        Atom { location: vec![0.3, 0.0], mass: 1.0 },
        Atom { location: vec![-0.02, 0.01], mass: 3.0 },
        Atom { location: vec![2.0, -1.0], mass: 0.5 },
    ];
    let mu = LevyMeasure::finite_atomic(2, atoms).unwrap();
    let prof = ScalarProfile::piecewise(vec![0.0, 0.2, 1.0], vec![0.5, 1.5]).unwrap();
    let m = AdditiveModel::new(2, 1.0)
        .unwrap()
        .with_jumps(prof, mu)
        .unwrap()
        .with_drift(ScalarProfile::Constant(1.0), vec![0.4, -0.1])
        .unwrap();
    let s = ScalingFn::custom(|r| r * (2.0 + sin(libm::log(r))) / 2.0);
    let triple = derive_constants(
        s,
        ScalingFn::Power { coef: 1.0 / 3.0, exponent: 1.0 },
        ScalingFn::Power { coef: 3.0, exponent: 1.0 },
        &default_sample_grid(),
    )
    .unwrap();
    let xis: Vec<f64> = (0..32).flat_map(|i| [0.7 * i as f64 - 11.0, 0.3 * i as f64]).collect();
    for j in 0..=6 {
        let r = scaling_residual(&m, &triple, j, &xis);
        assert!(r < 1e-11, "j={j}: {r}");
    }
}

#[test]
fn exponent_table_matches_pointwise() {
    let mu = LevyMeasure::finite_atomic(1, vec![Atom { location: vec![0.5], mass: 2.0 }]).unwrap();
    let m = AdditiveModel::new(1, 2.0)
        .unwrap()
        .with_jumps(ScalarProfile::dyadic_oscillation(2.0, 3, 2.0).unwrap(), mu)
        .unwrap()
        .with_drift(ScalarProfile::Constant(-0.3), vec![1.0])
        .unwrap();
    let pts = [0.0, 1.0, -2.5, 7.0];
    let table = m.exponent_table(&pts).unwrap();
    let e = m.exponent_from_table(&table, 0.3, 1.9).unwrap();
    for (x, v) in pts.iter().zip(&e) {
        assert!((m.integrated_exponent(0.3, 1.9, &[*x]).unwrap() - v).norm() < 1e-14);
    }
}

#[test]
fn negative_intensity_rejected() {
    let mu = LevyMeasure::isotropic_stable(1, 1.0, 1.0).unwrap();
    let p = ScalarProfile::piecewise(vec![0.0, 1.0], vec![-1.0]).unwrap();
    assert!(AdditiveModel::new(1, 1.0).unwrap().with_jumps(p, mu).is_err());
}

proptest! {
    #[test]
    fn exponent_invariants(
        s in 0.0..1.0f64, dt in 0.0..1.0f64, x in -30.0..30.0f64,
        loc in 0.05..3.0f64, v in -2.0..2.0f64, big_c in 1.0..5.0f64,
    ) {
        let mu = LevyMeasure::finite_atomic(1, vec![Atom { location: vec![loc], mass: 1.0 }]).unwrap();
        let m = AdditiveModel::new(1, 2.0).unwrap()
            .with_jumps(ScalarProfile::dyadic_oscillation(2.0, 4, big_c).unwrap(), mu).unwrap()
            .with_jumps(ScalarProfile::Constant(1.0), LevyMeasure::isotropic_stable(1, 1.2, 0.5).unwrap()).unwrap()
            .with_drift(ScalarProfile::Constant(v), vec![1.0]).unwrap();
        let t = s + dt;
        let e = m.integrated_exponent(s, t, &[x]).unwrap();
        prop_assert!(e.re <= 1e-15);
        let en = m.integrated_exponent(s, t, &[-x]).unwrap();
        prop_assert!((en - e.conj()).norm() <= 1e-12 * (1.0 + e.norm()));
        // additivity at an arbitrary interior point is exact for piecewise-constant profiles
        let u = s + 0.5 * dt;
        let sum = m.integrated_exponent(s, u, &[x]).unwrap() + m.integrated_exponent(u, t, &[x]).unwrap();
        prop_assert!((sum - e).norm() <= 1e-12 * (1.0 + e.norm()));
    }
}

#[test]
fn model_breakpoints_union() {
    let mu = LevyMeasure::isotropic_stable(1, 1.0, 1.0).unwrap();
    let m = AdditiveModel::new(1, 1.0)
        .unwrap()
        .with_jumps(ScalarProfile::piecewise(vec![0.0, 0.5, 1.0], vec![1.0, 2.0]).unwrap(), mu.clone())
        .unwrap()
        .with_jumps(ScalarProfile::piecewise(vec![0.0, 0.25, 0.5, 1.0], vec![1.0, 2.0, 1.0]).unwrap(), mu)
        .unwrap();
    assert_eq!(m.breakpoints(), vec![0.0, 0.25, 0.5, 1.0]);
    assert!(m.is_piecewise_constant());
    assert!((m.triplet_bound().unwrap() - 4.0 * 4.0).abs() < 1e-12);
    let _ = cauchy(1.0);
}
