//! Levy measure models and their symbols.
//!
//! For a Levy measure `mu` on `R^d` the symbol is
//! `psi(xi) = int (e^{i y.xi} - 1 - i y.xi 1_{|y|<=1}) mu(dy)` and the
//! symmetrized symbol is `-int (1 - cos(y.xi)) mu(dy)`, which is real and
//! non-positive.

mod assumptions;
mod radial;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::math::{cos, cos_power_integral, hypot, one_minus_cos, powf, sin, stable_band, stable_constant};
use crate::{Error, Result};

pub use assumptions::{
    default_probes, lower_bound_check, symbol_lower_bound, weak_scaling_sup, LowerBoundWitness, Probe, SymbolBoundReport,
    WeakScalingReport, unit_directions,
};
pub use radial::{RadialDensity, RadialProfile};

/// Radial support band `{lower < |y| <= upper}` of a stable-type density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
}

impl Band {
    pub const FULL: Band = Band { lower: 0.0, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower >= 0.0) || !(upper > lower) {
            return Err(Error::InvalidInput(format!("invalid band ({lower}, {upper}]")));
        }
        Ok(Band { lower, upper })
    }

    pub fn scaled(self, c: f64) -> Band {
        Band { lower: self.lower / c, upper: self.upper / c }
    }

    fn clip(self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let a = self.lower.max(lo);
        let b = self.upper.min(hi);
        (b > a).then_some((a, b))
    }

    pub fn is_full(&self) -> bool {
        self.lower == 0.0 && self.upper.is_infinite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub location: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone)]
pub enum LevyKind {
    /// Sum over axes `j` of `weights[j] |y_j|^{-1-alpha} dy_j` times a Dirac
    /// mass in the other coordinates, restricted to `band`.
    AxisStable { alpha: f64, weights: Vec<f64>, band: Band },
    /// `weight |y|^{-d-alpha} dy` restricted to `band`.
    IsotropicStable { alpha: f64, weight: f64, band: Band },
    FiniteAtomic { atoms: Vec<Atom> },
    /// Radial density evaluated by quadrature.
    Radial(RadialDensity),
}

/// A Levy measure on `R^d`, `d` in `{1, 2}`.
#[derive(Debug, Clone)]
pub struct LevyMeasure {
    dim: usize,
    kind: LevyKind,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("stability index {alpha} outside (0, 2)")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d == 1 || d == 2 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("dimension {d} not supported (1 or 2)")))
    }
}

impl LevyMeasure {
    pub fn axis_stable(alpha: f64, weights: Vec<f64>) -> Result<Self> {
        Self::axis_stable_band(alpha, weights, Band::FULL)
    }

    pub fn axis_stable_band(alpha: f64, weights: Vec<f64>, band: Band) -> Result<Self> {
        check_alpha(alpha)?;
        check_dim(weights.len())?;
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidInput("axis weights must be finite and non-negative".into()));
        }
        Ok(Self { dim: weights.len(), kind: LevyKind::AxisStable { alpha, weights, band } })
    }

    /// Axis-wise stable measure whose symbol is exactly `-sum_j coeffs[j] |xi_j|^alpha`.
    pub fn axis_stable_normalized(alpha: f64, coeffs: &[f64]) -> Result<Self> {
        check_alpha(alpha)?;
        let k = 2.0 * stable_constant(alpha);
        Self::axis_stable(alpha, coeffs.iter().map(|c| c / k).collect())
    }

    pub fn isotropic_stable(dim: usize, alpha: f64, weight: f64) -> Result<Self> {
        Self::isotropic_stable_band(dim, alpha, weight, Band::FULL)
    }

    pub fn isotropic_stable_band(dim: usize, alpha: f64, weight: f64, band: Band) -> Result<Self> {
        check_alpha(alpha)?;
        check_dim(dim)?;
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::InvalidInput("isotropic weight must be finite and non-negative".into()));
        }
        Ok(Self { dim, kind: LevyKind::IsotropicStable { alpha, weight, band } })
    }

    /// Isotropic stable measure whose symbol is exactly `-coeff |xi|^alpha`.
    pub fn isotropic_stable_normalized(dim: usize, alpha: f64, coeff: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_dim(dim)?;
        Self::isotropic_stable(dim, alpha, coeff / isotropic_constant(dim, alpha))
    }

    pub fn finite_atomic(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_dim(dim)?;
        for a in &atoms {
            if a.location.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: a.location.len() });
            }
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(Error::InvalidInput("atom masses must be positive".into()));
            }
            if a.location.iter().all(|&x| x == 0.0) {
                return Err(Error::InvalidInput("a Levy measure has no atom at the origin".into()));
            }
        }
        Ok(Self { dim, kind: LevyKind::FiniteAtomic { atoms } })
    }

    pub fn radial(dim: usize, density: RadialDensity) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, kind: LevyKind::Radial(density) })
    }

    /// The zero measure in dimension `dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        Self::finite_atomic(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &LevyKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            LevyKind::AxisStable { weights, .. } => weights.iter().all(|&w| w == 0.0),
            LevyKind::IsotropicStable { weight, .. } => *weight == 0.0,
            LevyKind::FiniteAtomic { atoms } => atoms.is_empty(),
            LevyKind::Radial(r) => r.mass == 0.0,
        }
    }

    /// True for measures invariant under `y -> -y`.
    pub fn is_symmetric(&self) -> bool {
        match &self.kind {
            LevyKind::FiniteAtomic { atoms } => atoms.iter().all(|a| {
                atoms.iter().any(|b| {
                    b.mass == a.mass && b.location.iter().zip(&a.location).all(|(x, y)| *x == -*y)
                })
            }),
            _ => true,
        }
    }

    fn check_point(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: xi.len() });
        }
        if xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("frequency must be finite".into()));
        }
        Ok(())
    }

    /// `psi^mu(xi)`.
    pub fn symbol(&self, xi: &[f64]) -> Result<Complex64> {
        self.check_point(xi)?;
        match &self.kind {
            LevyKind::FiniteAtomic { atoms } => Ok(atoms
                .iter()
                .map(|a| {
                    let dot: f64 = a.location.iter().zip(xi).map(|(y, x)| y * x).sum();
                    let comp = if hypot(&a.location) <= 1.0 { dot } else { 0.0 };
                    Complex64::new(-one_minus_cos(dot), sin(dot) - comp) * a.mass
                })
                .sum()),
            _ => Ok(Complex64::new(self.symbol_symmetrized(xi)?, 0.0)),
        }
    }

    /// `-int (1 - cos(y.xi)) mu(dy)`, the symbol of the symmetrized measure.
    pub fn symbol_symmetrized(&self, xi: &[f64]) -> Result<f64> {
        self.check_point(xi)?;
        match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => Ok(-weights
                .iter()
                .zip(xi)
                .map(|(&w, &x)| axis_term(*alpha, w, *band, x.abs()))
                .sum::<f64>()),
            LevyKind::IsotropicStable { alpha, weight, band } => {
                let k = hypot(xi);
                if k == 0.0 || *weight == 0.0 {
                    Ok(0.0)
                } else if self.dim == 1 {
                    Ok(-axis_term(*alpha, *weight, *band, k))
                } else if band.is_full() {
                    Ok(-weight * isotropic_constant(2, *alpha) * powf(k, *alpha))
                } else {
                    let rd = RadialDensity::new(RadialProfile::Power { exponent: 2.0 + alpha }, *band, *weight)?;
                    rd.symmetrized(2, k)
                }
            }
            LevyKind::FiniteAtomic { atoms } => Ok(-atoms
                .iter()
                .map(|a| {
                    let dot: f64 = a.location.iter().zip(xi).map(|(y, x)| y * x).sum();
                    a.mass * one_minus_cos(dot)
                })
                .sum::<f64>()),
            LevyKind::Radial(r) => r.symmetrized(self.dim, hypot(xi)),
        }
    }

    /// Symbols at a batch of points stored with stride `dim`. Radial models
    /// reuse quadrature work across points with equal `|xi|`.
    pub fn symbols_at(&self, points: &[f64]) -> Result<Vec<Complex64>> {
        if !points.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: points.len() % self.dim });
        }
        match &self.kind {
            LevyKind::Radial(r) => {
                let norms: Vec<f64> = points.chunks(self.dim).map(hypot).collect();
                let vals = r.symmetrized_batch(self.dim, &norms)?;
                Ok(vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            }
            LevyKind::IsotropicStable { band, .. } if self.dim == 2 && !band.is_full() => {
                let LevyKind::IsotropicStable { alpha, weight, band } = &self.kind else { unreachable!() };
                let rd = RadialDensity::new(RadialProfile::Power { exponent: 2.0 + alpha }, *band, *weight)?;
                let norms: Vec<f64> = points.chunks(2).map(hypot).collect();
                let vals = rd.symmetrized_batch(2, &norms)?;
                Ok(vals.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
            }
            _ => points.chunks(self.dim).map(|p| self.symbol(p)).collect(),
        }
    }

    /// `mu^c(dy) = mu(c dy)`.
    pub fn scale_space(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
        }
        let kind = match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => LevyKind::AxisStable {
                alpha: *alpha,
                weights: weights.iter().map(|w| w * powf(c, -alpha)).collect(),
                band: band.scaled(c),
            },
            LevyKind::IsotropicStable { alpha, weight, band } => LevyKind::IsotropicStable {
                alpha: *alpha,
                weight: weight * powf(c, -alpha),
                band: band.scaled(c),
            },
            LevyKind::FiniteAtomic { atoms } => LevyKind::FiniteAtomic {
                atoms: atoms
                    .iter()
                    .map(|a| Atom { location: a.location.iter().map(|y| y / c).collect(), mass: a.mass })
                    .collect(),
            },
            LevyKind::Radial(r) => LevyKind::Radial(r.scaled_space(c)),
        };
        Ok(Self { dim: self.dim, kind })
    }

    /// `factor * mu`.
    pub fn scale_mass(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0) || !factor.is_finite() {
            return Err(Error::InvalidInput(format!("mass factor {factor} must be non-negative")));
        }
        let kind = match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => LevyKind::AxisStable {
                alpha: *alpha,
                weights: weights.iter().map(|w| w * factor).collect(),
                band: *band,
            },
            LevyKind::IsotropicStable { alpha, weight, band } => {
                LevyKind::IsotropicStable { alpha: *alpha, weight: weight * factor, band: *band }
            }
            LevyKind::FiniteAtomic { atoms } => LevyKind::FiniteAtomic {
                atoms: atoms
                    .iter()
                    .filter(|_| factor > 0.0)
                    .map(|a| Atom { location: a.location.clone(), mass: a.mass * factor })
                    .collect(),
            },
            LevyKind::Radial(r) => LevyKind::Radial(r.scaled_mass(factor)),
        };
        Ok(Self { dim: self.dim, kind })
    }

    /// Restricts the measure to `{|y| > eps}`.
    pub fn truncate_below(&self, eps: f64) -> Result<Self> {
        let cut = |b: Band| Band { lower: b.lower.max(eps), upper: b.upper };
        let kind = match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => {
                LevyKind::AxisStable { alpha: *alpha, weights: weights.clone(), band: cut(*band) }
            }
            LevyKind::IsotropicStable { alpha, weight, band } => {
                LevyKind::IsotropicStable { alpha: *alpha, weight: *weight, band: cut(*band) }
            }
            LevyKind::FiniteAtomic { atoms } => LevyKind::FiniteAtomic {
                atoms: atoms.iter().filter(|a| hypot(&a.location) > eps).cloned().collect(),
            },
            LevyKind::Radial(r) => LevyKind::Radial(r.truncated_below(eps)),
        };
        Ok(Self { dim: self.dim, kind })
    }

    /// `mu({a < |y| <= b})`.
    pub fn shell_mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(b > a) {
            return Ok(0.0);
        }
        match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => Ok(band
                .clip(a, b)
                .map(|(lo, hi)| weights.iter().sum::<f64>() * 2.0 * power_tail(*alpha, lo, hi))
                .unwrap_or(0.0)),
            LevyKind::IsotropicStable { alpha, weight, band } => Ok(band
                .clip(a, b)
                .map(|(lo, hi)| weight * sphere_area(self.dim) * power_tail(*alpha, lo, hi))
                .unwrap_or(0.0)),
            LevyKind::FiniteAtomic { atoms } => Ok(atoms
                .iter()
                .filter(|x| {
                    let r = hypot(&x.location);
                    r > a && r <= b
                })
                .map(|x| x.mass)
                .sum()),
            LevyKind::Radial(r) => r.shell_mass(self.dim, a, b),
        }
    }

    /// `mu({|y| > eps})`.
    pub fn tail_mass(&self, eps: f64) -> Result<f64> {
        self.shell_mass(eps, f64::INFINITY)
    }

    /// `int_{|y| <= radius} |y|^2 mu(dy)`.
    pub fn second_moment(&self, radius: f64) -> Result<f64> {
        match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => Ok(band
                .clip(0.0, radius)
                .map(|(lo, hi)| weights.iter().sum::<f64>() * 2.0 * power_second(*alpha, lo, hi))
                .unwrap_or(0.0)),
            LevyKind::IsotropicStable { alpha, weight, band } => Ok(band
                .clip(0.0, radius)
                .map(|(lo, hi)| weight * sphere_area(self.dim) * power_second(*alpha, lo, hi))
                .unwrap_or(0.0)),
            LevyKind::FiniteAtomic { atoms } => Ok(atoms
                .iter()
                .filter(|x| hypot(&x.location) <= radius)
                .map(|x| x.mass * x.location.iter().map(|y| y * y).sum::<f64>())
                .sum()),
            LevyKind::Radial(r) => r.second_moment(self.dim, radius),
        }
    }

    /// `int_{|y| <= radius} |y.e|^2 mu(dy)`.
    pub fn quadratic_moment(&self, e: &[f64], radius: f64) -> Result<f64> {
        self.check_point(e)?;
        let e2: f64 = e.iter().map(|x| x * x).sum();
        match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => Ok(band
                .clip(0.0, radius)
                .map(|(lo, hi)| {
                    weights.iter().zip(e).map(|(w, x)| w * x * x).sum::<f64>() * 2.0 * power_second(*alpha, lo, hi)
                })
                .unwrap_or(0.0)),
            LevyKind::FiniteAtomic { atoms } => Ok(atoms
                .iter()
                .filter(|x| hypot(&x.location) <= radius)
                .map(|x| {
                    let dot: f64 = x.location.iter().zip(e).map(|(y, v)| y * v).sum();
                    x.mass * dot * dot
                })
                .sum()),
            // rotation invariant: the mean of cos^2 over the sphere is 1/d
            _ => Ok(e2 * self.second_moment(radius)? / self.dim as f64),
        }
    }

    /// `L(mu) = int (1 ^ |y|^2) mu(dy)`.
    pub fn l_functional(&self) -> Result<f64> {
        Ok(self.second_moment(1.0)? + self.tail_mass(1.0)?)
    }

    /// `int_{a < |y| <= b} y mu(dy)`; zero for symmetric models.
    pub fn first_moment(&self, a: f64, b: f64) -> Vec<f64> {
        match &self.kind {
            LevyKind::FiniteAtomic { atoms } => {
                let mut m = vec![0.0; self.dim];
                for x in atoms {
                    let r = hypot(&x.location);
                    if r > a && r <= b {
                        for (mi, yi) in m.iter_mut().zip(&x.location) {
                            *mi += x.mass * yi;
                        }
                    }
                }
                m
            }
            _ => vec![0.0; self.dim],
        }
    }

    /// `int y (1_{c<|y|<=1} - 1_{1<|y|<=c}) mu(dy)`, the drift shift produced
    /// by rescaling space by `c`.
    pub fn rescaling_shift(&self, c: f64) -> Vec<f64> {
        if c < 1.0 {
            self.first_moment(c, 1.0)
        } else {
            self.first_moment(1.0, c).into_iter().map(|x| -x).collect()
        }
    }

    /// Draws one jump from `mu` restricted to `{|y| > eps}` (normalized).
    pub fn sample_jump<R: Rng + ?Sized>(&self, eps: f64, rng: &mut R) -> Result<Vec<f64>> {
        match &self.kind {
            LevyKind::AxisStable { alpha, weights, band } => {
                let (lo, hi) = band.clip(eps, f64::INFINITY).ok_or(Error::InvalidInput(
                    "no mass above the truncation radius".into(),
                ))?;
                let total: f64 = weights.iter().sum();
                let mut pick = rng.random::<f64>() * total;
                let mut axis = weights.len() - 1;
                for (j, w) in weights.iter().enumerate() {
                    if pick < *w {
                        axis = j;
                        break;
                    }
                    pick -= w;
                }
                let r = sample_power_radius(*alpha, lo, hi, rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let mut y = vec![0.0; self.dim];
                y[axis] = sign * r;
                Ok(y)
            }
            LevyKind::IsotropicStable { alpha, band, .. } => {
                let (lo, hi) = band.clip(eps, f64::INFINITY).ok_or(Error::InvalidInput(
                    "no mass above the truncation radius".into(),
                ))?;
                let r = sample_power_radius(*alpha, lo, hi, rng);
                if self.dim == 1 {
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    Ok(vec![sign * r])
                } else {
                    let th = 2.0 * PI * rng.random::<f64>();
                    Ok(vec![r * cos(th), r * sin(th)])
                }
            }
            LevyKind::FiniteAtomic { atoms } => {
                let eligible: Vec<&Atom> = atoms.iter().filter(|a| hypot(&a.location) > eps).collect();
                let total: f64 = eligible.iter().map(|a| a.mass).sum();
                if eligible.is_empty() {
                    return Err(Error::InvalidInput("no atoms above the truncation radius".into()));
                }
                let mut pick = rng.random::<f64>() * total;
                for a in &eligible {
                    if pick < a.mass {
                        return Ok(a.location.clone());
                    }
                    pick -= a.mass;
                }
                Ok(eligible[eligible.len() - 1].location.clone())
            }
            LevyKind::Radial(_) => Err(Error::SamplingUnsupported("quadrature-backed radial densities")),
        }
    }
}

/// `c_d(alpha)` with `int (1 - cos(y.xi)) |y|^{-d-alpha} dy = c_d(alpha) |xi|^alpha`.
pub fn isotropic_constant(dim: usize, alpha: f64) -> f64 {
    match dim {
        1 => 2.0 * stable_constant(alpha),
        _ => stable_constant(alpha) * cos_power_integral(alpha),
    }
}

fn sphere_area(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

/// `int_lo^hi r^{-1-alpha} dr`.
fn power_tail(alpha: f64, lo: f64, hi: f64) -> f64 {
    let top = if hi.is_infinite() { 0.0 } else { powf(hi, -alpha) };
    (powf(lo, -alpha) - top) / alpha
}

/// `int_lo^hi r^{1-alpha} dr`.
fn power_second(alpha: f64, lo: f64, hi: f64) -> f64 {
    (powf(hi, 2.0 - alpha) - powf(lo, 2.0 - alpha)) / (2.0 - alpha)
}

fn axis_term(alpha: f64, weight: f64, band: Band, k: f64) -> f64 {
    if k == 0.0 || weight == 0.0 {
        return 0.0;
    }
    2.0 * weight * powf(k, alpha) * stable_band(alpha, band.lower * k, band.upper * k)
}

fn sample_power_radius<R: Rng + ?Sized>(alpha: f64, lo: f64, hi: f64, rng: &mut R) -> f64 {
    // inverse CDF of r^{-1-alpha} on (lo, hi]
    let a = powf(lo, -alpha);
    let b = if hi.is_infinite() { 0.0 } else { powf(hi, -alpha) };
    let u: f64 = rng.random();
    powf(a - u * (a - b), -1.0 / alpha)
}
