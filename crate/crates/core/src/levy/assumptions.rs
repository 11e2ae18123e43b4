//! Sampled checks of the lower-bound and weak-scaling conditions.
//!
//! Both conditions quantify over all `r > 0`, `t >= 0` and all non-negative
//! test functions. Here they are checked on explicit grids and probe
//! families: a failure is a counterexample, a pass is only evidence.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::LevyMeasure;
use crate::math::{cos, hypot, powf, sin};
use crate::process::AdditiveModel;
use crate::scaling::ScalingTriple;
use crate::{Error, GridEnd, Result};

const SLACK: f64 = 1e-12;
/// Number of trailing samples inspected for monotone growth.
const END_WINDOW: usize = 8;
/// Minimal relative growth over the end window that counts as unbounded.
const END_GROWTH: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct WeakScalingReport {
    pub sup: f64,
    pub argmax: f64,
    pub samples: Vec<(f64, f64)>,
}

/// Samples `L(r; s, mu) = s(r) int (1 ^ |y/r|^2) mu(dy)` and returns the
/// supremum, or `Unbounded` if the samples grow monotonically toward an end.
pub fn weak_scaling_sup(mu: &LevyMeasure, triple: &ScalingTriple, r_grid: &[f64]) -> Result<WeakScalingReport> {
    if r_grid.len() < 2 * END_WINDOW {
        return Err(Error::InvalidInput(format!("weak-scaling grid needs at least {} points", 2 * END_WINDOW)));
    }
    let mut samples = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let l = triple.eval(r) * mu.scale_space(r)?.l_functional()?;
        samples.push((r, l));
    }
    let (argmax, sup) = samples.iter().fold((r_grid[0], f64::NEG_INFINITY), |acc, &(r, l)| {
        if l > acc.1 {
            (r, l)
        } else {
            acc
        }
    });
    let vals: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let head = &vals[..END_WINDOW];
    if head.windows(2).all(|w| w[0] > w[1]) && head[0] > head[END_WINDOW - 1] * (1.0 + END_GROWTH) {
        return Err(Error::Unbounded { end: GridEnd::Small, sup, argmax });
    }
    let tail = &vals[vals.len() - END_WINDOW..];
    if tail.windows(2).all(|w| w[1] > w[0]) && tail[END_WINDOW - 1] > tail[0] * (1.0 + END_GROWTH) {
        return Err(Error::Unbounded { end: GridEnd::Large, sup, argmax });
    }
    Ok(WeakScalingReport { sup, argmax, samples })
}

/// Non-negative test functions for the lower-bound inequality.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// `1_{inner < |y| <= outer}`.
    Shell { inner: f64, outer: f64 },
    /// `|y . direction|^2 1_{|y| <= radius}`.
    Quadratic { direction: Vec<f64>, radius: f64 },
}

impl Probe {
    fn integrate(&self, mu: &LevyMeasure) -> Result<f64> {
        match self {
            Probe::Shell { inner, outer } => mu.shell_mass(*inner, *outer),
            Probe::Quadratic { direction, radius } => mu.quadratic_moment(direction, *radius),
        }
    }

    fn label(&self) -> String {
        match self {
            Probe::Shell { inner, outer } => format!("shell({inner:e}, {outer:e}]"),
            Probe::Quadratic { direction, radius } => format!("quadratic(e={direction:?}, R={radius:e})"),
        }
    }
}

/// Unit directions used for quadratic probes and the `N1` infimum.
pub fn unit_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 1 {
        vec![vec![1.0]]
    } else {
        (0..32).map(|k| {
            let th = PI * k as f64 / 32.0;
            vec![cos(th), sin(th)]
        })
        .collect()
    }
}

/// Dyadic shells inside `{|y| <= c_s^{-2}}` plus quadratic probes along [`unit_directions`].
pub fn default_probes(dim: usize, triple: &ScalingTriple) -> Vec<Probe> {
    let top = powf(triple.base(), -2.0);
    let mut probes: Vec<Probe> = (0..10)
        .map(|k| Probe::Shell { inner: top * powf(2.0, -(k as f64) - 1.0), outer: top * powf(2.0, -(k as f64)) })
        .collect();
    probes.extend(unit_directions(dim).into_iter().map(|e| Probe::Quadratic { direction: e, radius: top }));
    probes
}

/// Lower bound `nu` together with `N1 = inf_{|xi|=1} int |y.xi|^2 nu(dy)`.
#[derive(Debug, Clone)]
pub struct LowerBoundWitness {
    pub nu: LevyMeasure,
    pub n1: f64,
}

/// Checks `s(r) int f(y) Lambda_t(r dy) >= int f(y) nu(dy)` for every probe
/// and sampled `(r, t)`.
pub fn lower_bound_check(
    model: &AdditiveModel,
    triple: &ScalingTriple,
    nu: &LevyMeasure,
    r_grid: &[f64],
    t_grid: &[f64],
    probes: &[Probe],
) -> Result<LowerBoundWitness> {
    if nu.dim() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), found: nu.dim() });
    }
    if nu.is_zero() {
        return Err(Error::InvalidInput("lower bound measure must be non-zero".into()));
    }
    let top = powf(triple.base(), -2.0);
    let outside = nu.tail_mass(top * (1.0 + SLACK))?;
    if outside > 0.0 {
        return Err(Error::InvalidInput(format!(
            "lower bound measure puts mass {outside:e} outside |y| <= {top:e}"
        )));
    }
    let rhs: Vec<f64> = probes.iter().map(|p| p.integrate(nu)).collect::<Result<_>>()?;
    for &r in r_grid {
        let sr = triple.eval(r);
        let scaled: Vec<LevyMeasure> =
            model.jump_terms().iter().map(|(_, mu)| mu.scale_space(r)).collect::<Result<_>>()?;
        // per-component probe integrals do not depend on t
        let mut per_component = Vec::with_capacity(scaled.len());
        for mu in &scaled {
            per_component.push(probes.iter().map(|p| p.integrate(mu)).collect::<Result<Vec<f64>>>()?);
        }
        for &t in t_grid {
            let weights: Vec<f64> = model.jump_terms().iter().map(|(p, _)| p.value(t)).collect();
            for (i, probe) in probes.iter().enumerate() {
                let lhs = sr * weights.iter().zip(&per_component).map(|(w, v)| w * v[i]).sum::<f64>();
                if lhs < rhs[i] * (1.0 - SLACK) {
                    return Err(Error::LowerBoundFail { probe: probe.label(), r, t, lhs, rhs: rhs[i] });
                }
            }
        }
    }
    let n1 = unit_directions(nu.dim())
        .iter()
        .map(|e| nu.quadratic_moment(e, top))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if !(n1 > 0.0) {
        return Err(Error::InvalidInput("lower bound measure has N1 = 0".into()));
    }
    Ok(LowerBoundWitness { nu: nu.clone(), n1 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBoundReport {
    /// `max (N1/4) s(|xi|^{-1})^{-1} - int (1 - cos(y.xi)) Lambda_t(dy)`; `<= 0` means the bound holds.
    pub max_violation: f64,
    pub worst_xi: Vec<f64>,
    pub worst_t: f64,
    pub samples: usize,
}

/// Evaluates the symbol lower bound at every `(t, xi)`; `xi_points` has stride `dim`.
pub fn symbol_lower_bound(
    model: &AdditiveModel,
    triple: &ScalingTriple,
    n1: f64,
    xi_points: &[f64],
    t_grid: &[f64],
) -> Result<SymbolBoundReport> {
    let d = model.dim();
    let symbols: Vec<Vec<f64>> = model
        .jump_terms()
        .iter()
        .map(|(_, mu)| Ok(mu.symbols_at(xi_points)?.into_iter().map(|z| z.re).collect()))
        .collect::<Result<_>>()?;
    let mut report =
        SymbolBoundReport { max_violation: f64::NEG_INFINITY, worst_xi: Vec::new(), worst_t: 0.0, samples: 0 };
    for &t in t_grid {
        let weights: Vec<f64> = model.jump_terms().iter().map(|(p, _)| p.value(t)).collect();
        for (i, xi) in xi_points.chunks(d).enumerate() {
            let lhs: f64 = -weights.iter().zip(&symbols).map(|(w, s)| w * s[i]).sum::<f64>();
            let rhs = 0.25 * n1 * triple.inverse_at_frequency(hypot(xi));
            let v = rhs - lhs;
            report.samples += 1;
            if v > report.max_violation {
                report.max_violation = v;
                report.worst_xi = xi.to_vec();
                report.worst_t = t;
            }
        }
    }
    Ok(report)
}
