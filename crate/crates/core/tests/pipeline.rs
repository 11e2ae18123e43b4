use nle_core::grid::{GridFunction, SpectralGrid};
use nle_core::levy::{Atom, LevyMeasure};
use nle_core::montecarlo::{estimate_expectations, truncated_model, SimConfig};
use nle_core::process::{AdditiveModel, ScalarProfile};
use nle_core::solver::{propagate, transition_density, Resolution};

fn bump(x: &[f64]) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp()
}

#[test]
fn solution_is_density_convolved_with_data() {
    let grid = SpectralGrid::new(1, 1024, 80.0).unwrap();
    let model = AdditiveModel::stationary(LevyMeasure::axis_stable_normalized(1.3, &[1.0]).unwrap(), 2.0)
        .unwrap()
        .with_drift(ScalarProfile::Constant(0.5), vec![1.0])
        .unwrap();
    let u0 = GridFunction::from_real_fn(grid, bump);
    let u = propagate(&model, &u0, &[1.5]).unwrap().states.remove(0);
    let p = transition_density(&model, 0.0, 1.5, &grid, Resolution::Checked).unwrap();
    let conv = p.convolve(&u0).unwrap();
    assert!(u.sub(&conv).unwrap().max_abs() < 1e-10);
}

#[test]
fn monte_carlo_agrees_with_spectral_in_two_dimensions() {
    let grid = SpectralGrid::new(2, 128, 32.0).unwrap();
    let atoms = vec![Atom { location: vec![1.0, 0.5], mass: 0.8 }, Atom { location: vec![-0.3, -2.0], mass: 0.4 }];
    let model = AdditiveModel::new(2, 1.0)
        .unwrap()
        .with_jumps(ScalarProfile::dyadic_oscillation(1.0, 2, 2.0).unwrap(), LevyMeasure::axis_stable(1.1, vec![0.3, 0.6]).unwrap())
        .unwrap()
        .with_jumps(ScalarProfile::Constant(1.0), LevyMeasure::finite_atomic(2, atoms).unwrap())
        .unwrap()
        .with_drift(ScalarProfile::piecewise(vec![0.0, 0.4, 1.0], vec![1.0, -0.5]).unwrap(), vec![0.2, 0.1])
        .unwrap();
    let eps = 0.05;
    let cut = truncated_model(&model, eps).unwrap();
    let u = propagate(&cut, &GridFunction::from_real_fn(grid, bump), &[0.9]).unwrap().states.remove(0);
    let probes = [(64usize, 64usize), (70, 60), (56, 72)];
    let xs: Vec<Vec<f64>> = probes.iter().map(|&(i, j)| vec![grid.coordinate(i), grid.coordinate(j)]).collect();
    let cfg = SimConfig::new(eps, 40_000, 17);
    let est = estimate_expectations(&model, &bump, &xs, 0.9, &cfg).unwrap();
    for ((i, j), e) in probes.iter().zip(&est) {
        let s = u.values()[grid.flat(&[*i, *j])].re;
        assert!((s - e.mean).abs() < 3.0 * e.stderr + 1e-3, "({i},{j}) spectral {s} mc {e:?}");
    }
}
