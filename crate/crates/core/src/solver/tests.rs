use super::*;
use crate::levy::{Atom, LevyMeasure};
use crate::math::{exp, sqrt};
use crate::process::ScalarProfile;
use core::f64::consts::PI;

fn cauchy_model(horizon: f64) -> AdditiveModel {
    AdditiveModel::stationary(LevyMeasure::isotropic_stable_normalized(1, 1.0, 1.0).unwrap(), horizon).unwrap()
}

fn gaussian(grid: SpectralGrid, width: f64) -> GridFunction {
    GridFunction::from_real_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        exp(-0.5 * r2 / (width * width))
    })
}

#[test]
fn single_mode_decays_exactly() {
    let grid = SpectralGrid::new(1, 64, 2.0 * PI).unwrap();
    let u0 = GridFunction::single_mode(grid, &[5]).unwrap();
    let res = propagate(&cauchy_model(2.0), &u0, &[0.1, 0.7, 2.0]).unwrap();
    for (t, u) in res.times.iter().zip(&res.states) {
        let want = u0.scale(exp(-5.0 * t));
        assert!(u.sub(&want).unwrap().max_abs() < 1e-13);
    }
}

#[test]
fn narrow_gaussian_approaches_poisson_kernel() {
    let grid = SpectralGrid::new(1, 4096, 100.0).unwrap();
    let mut prev = f64::INFINITY;
    for width in [0.2, 0.1, 0.05] {
        let norm = 1.0 / (width * sqrt(2.0 * PI));
        let u0 = gaussian(grid, width).scale(norm);
        let u = &propagate(&cauchy_model(1.0), &u0, &[1.0]).unwrap().states[0];
        let center = u.values()[grid.n() / 2].re;
        let err = (center - 1.0 / PI).abs();
        assert!(err < prev);
        prev = err;
    }
    assert!(prev < 1e-3);
}

#[test]
fn continuity_at_zero() {
    let grid = SpectralGrid::new(1, 512, 40.0).unwrap();
    let u0 = gaussian(grid, 1.0);
    let times = [1e-4, 1e-3, 1e-2, 1e-1];
    let res = propagate(&cauchy_model(1.0), &u0, &times).unwrap();
    let d: Vec<f64> = res.states.iter().map(|u| u.sub(&u0).unwrap().lp_norm(2.0).unwrap()).collect();
    assert!(d.windows(2).all(|w| w[0] < w[1]));
    assert!(d[0] < 1e-3);
}

#[test]
fn bad_times_rejected() {
    let grid = SpectralGrid::new(1, 64, 10.0).unwrap();
    let u0 = gaussian(grid, 1.0);
    assert!(matches!(propagate(&cauchy_model(1.0), &u0, &[0.5, 0.2]), Err(Error::TimeOrder { .. })));
    assert!(matches!(propagate(&cauchy_model(1.0), &u0, &[2.0]), Err(Error::OutsideHorizon { .. })));
}

#[test]
fn propagation_invariants() {
    let grid = SpectralGrid::new(1, 1024, 80.0).unwrap();
    let atoms = vec![Atom { location: vec![1.0], mass: 1.0 }, Atom { location: vec![-0.3], mass: 2.5 }];
    let model = AdditiveModel::new(1, 2.0)
        .unwrap()
        .with_jumps(ScalarProfile::dyadic_oscillation(2.0, 4, 3.0).unwrap(), LevyMeasure::finite_atomic(1, atoms).unwrap())
        .unwrap()
        .with_jumps(ScalarProfile::Constant(1.0), LevyMeasure::isotropic_stable(1, 1.3, 0.4).unwrap())
        .unwrap()
        .with_drift(ScalarProfile::Constant(0.7), vec![1.0])
        .unwrap();
    let u0 = GridFunction::from_real_fn(grid, |x| exp(-x[0].abs()) * (1.0 + 0.5 * libm::sin(3.0 * x[0])));
    let hat0 = u0.to_frequency().unwrap();
    let res = propagate(&model, &u0, &[0.3, 0.875, 2.0]).unwrap();
    for u in &res.states {
        let hat = u.to_frequency().unwrap();
        assert!((hat.values()[0] - hat0.values()[0]).norm() < 1e-14);
        assert!(hat.values().iter().zip(hat0.values()).all(|(a, b)| a.norm() <= b.norm() * (1.0 + 1e-12) + 1e-17));
        assert!(u.max_imag() < 1e-10);
    }
    // composition across the piece boundary at t = 0.875
    let prop = Propagator::new(&model, &grid).unwrap();
    let two = prop.apply(&prop.apply(&u0, 0.0, 0.875).unwrap(), 0.875, 2.0).unwrap();
    assert!(two.sub(&res.states[2]).unwrap().max_abs() < 1e-12);
}

#[test]
fn oscillation_refinement_leaves_solution_unchanged() {
    let grid = SpectralGrid::new(1, 512, 40.0).unwrap();
    let mu = LevyMeasure::axis_stable_normalized(0.8, &[1.0]).unwrap();
    let u0 = gaussian(grid, 0.5);
    let coarse = AdditiveModel::new(1, 1.0)
        .unwrap()
        .with_jumps(ScalarProfile::dyadic_oscillation(1.0, 3, 4.0).unwrap(), mu.clone())
        .unwrap();
    let fine = AdditiveModel::new(1, 1.0)
        .unwrap()
        .with_jumps(ScalarProfile::dyadic_oscillation(1.0, 4, 4.0).unwrap(), mu)
        .unwrap();
    let a = &propagate(&coarse, &u0, &[1.0]).unwrap().states[0];
    let b = &propagate(&fine, &u0, &[1.0]).unwrap().states[0];
    assert!(a.sub(b).unwrap().max_abs() < 1e-12);
}

#[test]
fn duhamel_examples() {
    let grid = SpectralGrid::new(1, 256, 20.0).unwrap();
    let model = cauchy_model(2.0);
    let zero = Forcing::constant(GridFunction::zeros(grid, Domain::Space), 2.0);
    let res = duhamel(&model, &zero, &grid, &[1.0]).unwrap();
    assert_eq!(res.states[0].max_abs(), 0.0);

    let one = Forcing::constant(GridFunction::from_real_fn(grid, |_| 1.0), 2.0);
    let res = duhamel(&model, &one, &grid, &[0.5, 1.5]).unwrap();
    for (t, u) in res.times.iter().zip(&res.states) {
        assert!(u.values().iter().all(|v| (v - Complex64::new(*t, 0.0)).norm() < 1e-13));
    }

    let g = gaussian(grid, 0.7);
    let res = duhamel(&model, &Forcing::constant(g.clone(), 2.0), &grid, &[1.3]).unwrap();
    let ghat = g.to_frequency().unwrap();
    let t = 1.3;
    let want: Vec<Complex64> = grid
        .frequency_norms()
        .iter()
        .zip(ghat.values())
        .map(|(&r, v)| if r == 0.0 { v * t } else { v * ((exp(-t * r) - 1.0) / -r) })
        .collect();
    let want = GridFunction::new(grid, Domain::Frequency, want).unwrap().from_frequency().unwrap();
    assert!(res.states[0].sub(&want).unwrap().max_abs() < 1e-13);
}

#[test]
fn duhamel_function_forcing_matches_piecewise() {
    let grid = SpectralGrid::new(1, 128, 20.0).unwrap();
    let model = AdditiveModel::new(1, 1.0)
        .unwrap()
        .with_jumps(
            ScalarProfile::dyadic_oscillation(1.0, 2, 2.0).unwrap(),
            LevyMeasure::isotropic_stable_normalized(1, 1.5, 1.0).unwrap(),
        )
        .unwrap();
    let g = gaussian(grid, 1.0);
    let gc = g.clone();
    let f = Forcing::Function { f: Arc::new(move |_| Ok(gc.clone())), nodes: 12 };
    let a = duhamel(&model, &f, &grid, &[1.0]).unwrap();
    let b = duhamel(&model, &Forcing::constant(g, 1.0), &grid, &[1.0]).unwrap();
    assert!(a.states[0].sub(&b.states[0]).unwrap().max_abs() < 1e-11);
}

#[test]
fn cauchy_transition_density() {
    let grid = SpectralGrid::new(1, 4096, 300.0).unwrap();
    let p = transition_density(&cauchy_model(2.0), 0.5, 1.5, &grid, Resolution::Checked).unwrap();
    let center = p.values()[grid.n() / 2].re;
    assert!((center - 1.0 / PI).abs() < 1e-4);
    assert!((p.integral().unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(p.max_imag() < 1e-10);
    assert!(p.real_parts().iter().all(|&v| v >= -1e-6));
}

#[test]
fn unresolved_density_rejected() {
    let grid = SpectralGrid::new(1, 64, 400.0).unwrap();
    assert!(matches!(
        transition_density(&cauchy_model(2.0), 0.0, 1.0, &grid, Resolution::Checked),
        Err(Error::GridTooCoarse { .. })
    ));
    assert!(transition_density(&cauchy_model(2.0), 0.0, 1.0, &grid, Resolution::Unchecked).is_ok());
    assert!(matches!(
        transition_density(&cauchy_model(2.0), 1.0, 1.0, &grid, Resolution::Unchecked),
        Err(Error::TimeOrder { .. })
    ));
}

#[test]
fn spacetime_norm_examples() {
    let grid = SpectralGrid::new(1, 64, 2.0 * PI).unwrap();
    let u0 = GridFunction::single_mode(grid, &[3]).unwrap();
    let mu = LevyMeasure::isotropic_stable_normalized(1, 1.0, 1.0).unwrap();
    let still = AdditiveModel::new(1, 2.0).unwrap();
    let tg = TimeGrid::graded(2.0, 64, 2.0).unwrap();
    let res = propagate_graded(&still, &u0, &tg).unwrap();
    for q in [1.0, 2.0, 3.0] {
        let v = spacetime_norm(&res, 2.0, q, 0.0, &mu).unwrap();
        let want = powf(2.0, 1.0 / q) * u0.lp_norm(2.0).unwrap();
        assert!((v - want).abs() < 1e-12 * want);
    }
    let res = propagate_graded(&cauchy_model(2.0), &u0, &tg).unwrap();
    let v = spacetime_norm(&res, 2.0, 2.0, 0.0, &mu).unwrap();
    let want = sqrt((1.0 - exp(-12.0)) / 6.0) * u0.lp_norm(2.0).unwrap();
    assert!((v - want).abs() < 1e-3 * want, "{v} vs {want}");
    let ungraded = propagate(&still, &u0, &[1.0]).unwrap();
    assert!(spacetime_norm(&ungraded, 2.0, 2.0, 0.0, &mu).is_err());
}

#[test]
fn graded_grid_integrates_inverse_square_root() {
    for t in [1.0, 4.0] {
        let tg = TimeGrid::graded(t, DEFAULT_STEPS, DEFAULT_GRADING).unwrap();
        let v = tg.integrate(|s| 1.0 / sqrt(s));
        let want = 2.0 * sqrt(t);
        assert!((v - want).abs() < 0.01 * want);
    }
}

#[test]
fn block_decay_for_cauchy() {
    let triple = ScalingTriple::power(1.0).unwrap();
    let grid = SpectralGrid::new(1, 2048, 200.0).unwrap();
    let family = LPFamily::build(triple.c_s, &grid).unwrap();
    let mu = LevyMeasure::axis_stable_normalized(1.0, &[1.0]).unwrap();
    let model = AdditiveModel::stationary(mu, 400.0).unwrap();
    let ts: Vec<f64> = (0..=8).map(|i| 1.0 + 0.5 * i as f64).collect();
    let rows = density_block_decay(&model, &triple, &family, &[1, 2, 3], &ts).unwrap();
    for r in &rows {
        assert!(r.slope < 0.0, "{r:?}");
    }
    let tiny = density_block_decay(&model, &triple, &family, &[2], &[1e-9]).unwrap();
    assert!((tiny[0].masses[0].1 - tiny[0].initial_mass).abs() < 1e-6 * tiny[0].initial_mass);
}

#[test]
fn apriori_flags() {
    let grid = SpectralGrid::new(1, 256, 40.0).unwrap();
    let triple = ScalingTriple::power(1.5).unwrap();
    let family = LPFamily::build(triple.c_s, &grid).unwrap();
    let mu = LevyMeasure::axis_stable_normalized(1.5, &[1.0]).unwrap();
    let model = AdditiveModel::stationary(mu.clone(), 1.0).unwrap();
    let params = AprioriParams { p: 2.0, q: 2.0, gamma: 1.0, horizon: 1.0, steps: 16, grading: 2.0 };
    let zero = GridFunction::zeros(grid, Domain::Space);
    let r = apriori_ratio(&model, &zero, params, &mu, &triple, &family).unwrap();
    assert!(r.degenerate && r.ratio == 0.0);
    let u0 = gaussian(grid, 1.0);
    let r = apriori_ratio(&model, &u0, AprioriParams { q: 0.5, ..params }, &mu, &triple, &family).unwrap();
    assert!(r.experimental && r.ratio > 0.0 && r.ratio.is_finite());
}
