use super::*;
use crate::levy::{Atom, LevyMeasure};
use crate::math::{exp, powf};
use crate::process::ScalarProfile;
use proptest::prelude::*;

fn delta_one(horizon: f64) -> AdditiveModel {
    let mu = LevyMeasure::finite_atomic(1, vec![Atom { location: vec![1.0], mass: 1.0 }]).unwrap();
    AdditiveModel::stationary(mu, horizon).unwrap()
}

fn stable(alpha: f64) -> AdditiveModel {
    AdditiveModel::stationary(LevyMeasure::axis_stable_normalized(alpha, &[1.0]).unwrap(), 1.0).unwrap()
}

fn bump(x: &[f64]) -> f64 {
    exp(-x[0] * x[0])
}

fn poisson_sum(u0: impl Fn(f64) -> f64, x: f64, t: f64) -> f64 {
    let mut term = exp(-t);
    let mut s = 0.0;
    for k in 0..60 {
        s += term * u0(x + k as f64 - t);
        term *= t / (k + 1) as f64;
    }
    s
}

#[test]
fn delta_one_increment_is_centred_poisson() {
    let m = delta_one(1.0);
    let cfg = SimConfig::new(0.5, 100_000, 7);
    let est = estimate_expectation(&m, &|z: &[f64]| z[0], &[0.0], 1.0, &cfg).unwrap();
    assert!(est.mean.abs() < 3.0 * est.stderr, "{est:?}");
    // every draw is an integer minus one
    let s = Sampler::new(&m, 1.0, &cfg).unwrap();
    let mut rng = path_rng(1, 0);
    for _ in 0..200 {
        let z = s.sample(&mut rng).unwrap()[0];
        assert!(z >= -1.0 && (z + 1.0).fract() == 0.0);
    }
}

#[test]
fn delta_one_matches_poisson_sum() {
    let m = delta_one(1.0);
    let cfg = SimConfig::new(0.5, 100_000, 11);
    for x in [-1.0, 0.3, 1.5] {
        let est = estimate_expectation(&m, &bump, &[x], 1.0, &cfg).unwrap();
        let want = poisson_sum(|y| exp(-y * y), x, 1.0);
        assert!((est.mean - want).abs() < 3.0 * est.stderr, "x={x} {est:?} vs {want}");
    }
}

#[test]
fn pure_drift_is_deterministic() {
    let m = AdditiveModel::new(2, 3.0).unwrap().with_drift(ScalarProfile::Constant(1.5), vec![1.0, -2.0]).unwrap();
    let cfg = SimConfig::new(0.1, 10, 0);
    let mut rng = path_rng(0, 3);
    assert_eq!(sample_increment(&m, 2.0, &cfg, &mut rng).unwrap(), vec![3.0, -6.0]);
}

#[test]
fn constant_payoff_has_zero_stderr() {
    let cfg = SimConfig::new(0.2, 5000, 3);
    let est = estimate_expectation(&stable(0.8), &|_: &[f64]| 1.0, &[0.4], 1.0, &cfg).unwrap();
    assert_eq!(est.mean, 1.0);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn same_seed_is_bit_identical() {
    let m = stable(1.2);
    let cfg = SimConfig::new(0.1, 9000, 42);
    let xs = vec![vec![0.0], vec![0.5]];
    let a = estimate_expectations(&m, &bump, &xs, 1.0, &cfg).unwrap();
    let b = estimate_expectations(&m, &bump, &xs, 1.0, &cfg).unwrap();
    assert_eq!(a, b);
    let c = estimate_expectations(&m, &bump, &xs, 1.0, &SimConfig { seed: 43, ..cfg }).unwrap();
    assert_ne!(a, c);
}

#[test]
fn char_fn_matches_exponent() {
    let m = stable(0.8);
    let eps = 0.1;
    let n = 40_000;
    let cfg = SimConfig::new(eps, n, 5);
    let xis: Vec<Vec<f64>> = [0.5, 1.0, 2.0].iter().map(|x| vec![*x]).collect();
    let emp = empirical_char_fn(&m, &xis, 1.0, &cfg).unwrap();
    let cut = truncated_model(&m, eps).unwrap();
    for (xi, (phi, _)) in xis.iter().zip(&emp) {
        let want = cut.integrated_exponent(0.0, 1.0, xi).unwrap().exp();
        assert!((phi - want).norm() < 3.0 / (n as f64).sqrt(), "xi={xi:?} {phi} vs {want}");
    }
}

#[test]
fn char_fn_error_decays_like_inverse_root() {
    let m = stable(1.5);
    let eps = 0.2;
    let cut = truncated_model(&m, eps).unwrap();
    let xis: Vec<Vec<f64>> = (1..=16).map(|k| vec![0.25 * k as f64]).collect();
    let want: Vec<Complex64> = xis.iter().map(|xi| cut.integrated_exponent(0.0, 1.0, xi).unwrap().exp()).collect();
    let mut pts = Vec::new();
    for n in [1_000usize, 10_000, 100_000] {
        let emp = empirical_char_fn(&m, &xis, 1.0, &SimConfig::new(eps, n, 9)).unwrap();
        let rms = (emp.iter().zip(&want).map(|((p, _), w)| (p - w).norm_sqr()).sum::<f64>() / xis.len() as f64).sqrt();
        pts.push(((n as f64).ln(), rms.ln()));
    }
    let slope = crate::solver::least_squares_slope(&pts);
    assert!((-0.8..=-0.2).contains(&slope), "slope {slope}");
}

#[test]
fn oscillating_intensity_uses_every_piece() {
    let mu = LevyMeasure::finite_atomic(1, vec![Atom { location: vec![1.0], mass: 1.0 }]).unwrap();
    let prof = ScalarProfile::dyadic_oscillation(1.0, 3, 4.0).unwrap();
    let m = AdditiveModel::new(1, 1.0).unwrap().with_jumps(prof.clone(), mu).unwrap();
    let n = 40_000;
    let cfg = SimConfig::new(0.5, n, 2);
    let xis = vec![vec![0.7], vec![1.9]];
    let emp = empirical_char_fn(&m, &xis, 0.8, &cfg).unwrap();
    for (xi, (phi, _)) in xis.iter().zip(&emp) {
        let want = m.integrated_exponent(0.0, 0.8, xi).unwrap().exp();
        assert!((phi - want).norm() < 3.0 / (n as f64).sqrt());
    }
    let est = estimate_expectation(&m, &|z: &[f64]| z[0], &[0.0], 0.8, &cfg).unwrap();
    assert!(est.mean.abs() < 3.0 * est.stderr);
}

#[test]
fn envelope_thinning() {
    let m = delta_one(1.0);
    let low = SimConfig { envelope: Some(vec![0.5]), ..SimConfig::new(0.5, 10, 0) };
    assert!(matches!(Sampler::new(&m, 1.0, &low), Err(Error::EnvelopeFail { .. })));
    let n = 40_000;
    let high = SimConfig { envelope: Some(vec![3.0]), ..SimConfig::new(0.5, n, 4) };
    let xi = vec![vec![1.3]];
    let (phi, _) = empirical_char_fn(&m, &xi, 1.0, &high).unwrap()[0];
    let want = m.integrated_exponent(0.0, 1.0, &xi[0]).unwrap().exp();
    assert!((phi - want).norm() < 3.0 / (n as f64).sqrt());
    let short = SimConfig { envelope: Some(vec![]), ..SimConfig::new(0.5, 10, 0) };
    assert!(Sampler::new(&m, 1.0, &short).is_err());
}

#[test]
fn halving_epsilon_within_bias_bound() {
    let m = stable(0.8);
    let eps = 0.2;
    let u0 = |x: &[f64]| crate::math::cos(x[0]);
    let a = estimate_expectation(&m, &u0, &[0.3], 1.0, &SimConfig::new(eps, 100_000, 1)).unwrap();
    let b = estimate_expectation(&m, &u0, &[0.3], 1.0, &SimConfig::new(eps / 2.0, 100_000, 1)).unwrap();
    let sigma2 = truncation_variance(&m, 1.0, eps).unwrap();
    let noise = 3.0 * (a.stderr * a.stderr + b.stderr * b.stderr).sqrt();
    assert!((a.mean - b.mean).abs() < 0.5 * sigma2 + noise, "{a:?} {b:?} sigma2={sigma2}");
}

#[test]
fn truncation_variance_closed_form() {
    // w |y|^{-1-a} on each side, w = 1/(2 K1)
    let alpha = 0.8;
    let m = stable(alpha);
    let w = match m.jump_terms()[0].1.kind() {
        crate::levy::LevyKind::AxisStable { weights, .. } => weights[0],
        _ => unreachable!(),
    };
    let eps = 0.3;
    let want = 2.0 * w * powf(eps, 2.0 - alpha) / (2.0 - alpha) * 0.7;
    assert!((truncation_variance(&m, 0.7, eps).unwrap() - want).abs() < 1e-10 * want);
}

#[test]
fn rejects_bad_config() {
    let m = delta_one(1.0);
    assert!(Sampler::new(&m, 1.0, &SimConfig::new(1.0, 10, 0)).is_err());
    assert!(Sampler::new(&m, 1.0, &SimConfig::new(0.1, 0, 0)).is_err());
    assert!(Sampler::new(&m, 2.0, &SimConfig::new(0.1, 10, 0)).is_err());
    let closed = AdditiveModel::new(1, 1.0)
        .unwrap()
        .with_jumps(ScalarProfile::closed(|t| 1.0 + t, 1.0), LevyMeasure::axis_stable(1.0, vec![1.0]).unwrap())
        .unwrap();
    assert!(Sampler::new(&closed, 1.0, &SimConfig::new(0.1, 10, 0)).is_err());
}

proptest! {
    #[test]
    fn welford_merge_matches_sequential(xs in proptest::collection::vec(-10.0f64..10.0, 2..200), cut in 0usize..200) {
        let cut = cut.min(xs.len());
        let mut all = Welford::default();
        xs.iter().for_each(|x| all.push(*x));
        let (mut a, mut b) = (Welford::default(), Welford::default());
        xs[..cut].iter().for_each(|x| a.push(*x));
        xs[cut..].iter().for_each(|x| b.push(*x));
        a.merge(&b);
        prop_assert_eq!(a.n, all.n);
        prop_assert!((a.mean - all.mean).abs() < 1e-12);
        prop_assert!((a.m2 - all.m2).abs() < 1e-9 * (1.0 + all.m2));
    }
}
