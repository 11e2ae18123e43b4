//! Quadrature-backed radial densities.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use super::Band;
use crate::math::{bessel_j0, cos, one_minus_cos, one_minus_j0, powf};
use crate::quad::{accelerated_tail, adaptive, Estimate, Tolerance};
use crate::scaling::ScalingFn;
use crate::{Error, Result};

/// Relative accuracy demanded of every radial symbol evaluation.
pub const SYMBOL_RTOL: f64 = 1e-8;

const PANEL_TOL: Tolerance = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 400 };
const MAX_PANELS: usize = 200_000;
/// Half periods integrated directly past the split radius before switching
/// to the mass-minus-oscillation form of the tail.
const DIRECT_HALF_PERIODS: f64 = 24.0;

/// Radial profile `g(r)` of a density `|y| -> g(|y|)`.
#[derive(Clone)]
pub enum RadialProfile {
    /// `r^{-exponent}`.
    Power { exponent: f64 },
    /// Log-log interpolated samples.
    Table(ScalingFn),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialProfile::Power { exponent } => write!(f, "Power(r^-{exponent})"),
            RadialProfile::Table(t) => write!(f, "Table({t:?})"),
            RadialProfile::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl RadialProfile {
    pub fn table(samples: Vec<(f64, f64)>) -> Result<Self> {
        Ok(RadialProfile::Table(ScalingFn::table(samples)?))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialProfile::Custom(Arc::new(f))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            RadialProfile::Power { exponent } => powf(r, -exponent),
            RadialProfile::Table(t) => t.eval(r),
            RadialProfile::Custom(f) => f(r),
        }
    }
}

/// Density `mass * spatial^d * g(spatial |y|)` on `{spatial |y| in band}`.
///
/// The `spatial` factor implements `mu(c dy)` without touching the profile.
#[derive(Debug, Clone)]
pub struct RadialDensity {
    pub profile: RadialProfile,
    pub band: Band,
    pub spatial: f64,
    pub mass: f64,
}

fn surface(dim: usize, u: f64) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI * u
    }
}

impl RadialDensity {
    pub fn new(profile: RadialProfile, band: Band, mass: f64) -> Result<Self> {
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(Error::InvalidInput("radial density mass must be non-negative".into()));
        }
        Ok(Self { profile, band, spatial: 1.0, mass })
    }

    pub fn density(&self, dim: usize, r: f64) -> f64 {
        let u = self.spatial * r;
        if u > self.band.lower && u <= self.band.upper {
            self.mass * powf(self.spatial, dim as f64) * self.profile.eval(u)
        } else {
            0.0
        }
    }

    pub(crate) fn scaled_space(&self, c: f64) -> Self {
        Self { spatial: self.spatial * c, ..self.clone() }
    }

    pub(crate) fn scaled_mass(&self, f: f64) -> Self {
        Self { mass: self.mass * f, ..self.clone() }
    }

    pub(crate) fn truncated_below(&self, eps: f64) -> Self {
        let band = Band { lower: self.band.lower.max(self.spatial * eps), upper: self.band.upper };
        Self { band, ..self.clone() }
    }

    /// `int_{lo < u <= hi} h(u) g(u) S_d(u) du` over the band, in profile coordinates.
    fn profile_integral(&self, dim: usize, lo: f64, hi: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
        let (a, b) = match self.band.clip(lo, hi) {
            Some(x) => x,
            None => return Ok(0.0),
        };
        let f = |u: f64| weight(u) * self.profile.eval(u) * surface(dim, u);
        let tol = Tolerance { abs: 1e-300, rel: 1e-12, max_intervals: 2000 };
        if b.is_finite() {
            let mid = if a < 1.0 && b > 1.0 { 1.0 } else { 0.5 * (a + b) };
            let e = adaptive(&f, a, mid, tol)? + adaptive(&f, mid, b, tol)?;
            return Ok(e.value);
        }
        let split = a.max(1.0);
        let head = adaptive(&f, a, split, tol)?;
        let tail = accelerated_tail(&f, split, |k| split * powf(2.0, k as f64), tol, 200)?;
        Ok(head.value + tail.value)
    }

    pub(crate) fn shell_mass(&self, dim: usize, a: f64, b: f64) -> Result<f64> {
        let v = self.profile_integral(dim, self.spatial * a, self.spatial * b, |_| 1.0)?;
        Ok(self.mass * v)
    }

    pub(crate) fn second_moment(&self, dim: usize, radius: f64) -> Result<f64> {
        let v = self.profile_integral(dim, 0.0, self.spatial * radius, |u| u * u)?;
        Ok(self.mass * v / (self.spatial * self.spatial))
    }

    /// `-int (1 - cos(y.xi)) mu(dy)` at `|xi| = k`.
    pub(crate) fn symmetrized(&self, dim: usize, k: f64) -> Result<f64> {
        Ok(self.symmetrized_batch(dim, &[k])?[0])
    }

    pub(crate) fn symmetrized_batch(&self, dim: usize, norms: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; norms.len()];
        let mut order: Vec<usize> = (0..norms.len()).collect();
        order.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]));
        let mut last: Option<(f64, f64)> = None;
        for i in order {
            let k = norms[i];
            let v = match last {
                Some((lk, lv)) if lk == k => lv,
                _ => {
                    let v = if k == 0.0 || self.mass == 0.0 {
                        0.0
                    } else {
                        -self.mass * self.radial_symbol(dim, k / self.spatial)?
                    };
                    last = Some((k, v));
                    v
                }
            };
            out[i] = v;
        }
        Ok(out)
    }

    /// `int_band K_d(u k) g(u) S_d(u) du` with `K_1 = 1 - cos`, `K_2 = 1 - J0`.
    fn radial_symbol(&self, dim: usize, k: f64) -> Result<f64> {
        let band = self.band;
        let kernel = |u: f64| if dim == 1 { one_minus_cos(u * k) } else { one_minus_j0(u * k) };
        let osc = |u: f64| if dim == 1 { cos(u * k) } else { bessel_j0(u * k) };
        let g = |u: f64| self.profile.eval(u) * surface(dim, u);
        let f = |u: f64| kernel(u) * g(u);
        let half = PI / k;

        let split = band.lower.max(1.0).min(band.upper);
        let direct_end = if band.upper.is_finite() {
            band.upper
        } else {
            split + DIRECT_HALF_PERIODS * half
        };
        let mut total = panels(&f, band.lower, direct_end, half)?;
        if band.upper.is_infinite() {
            // the remaining integrand is g minus an oscillation; both tails
            // are summed over panels and accelerated
            let tol = Tolerance { abs: 1e-300, rel: 1e-11, max_intervals: 400 };
            let start = direct_end;
            let mass = accelerated_tail(&g, start, |j| start * powf(2.0, j as f64), tol, 400)?;
            let scale = (total.value + mass.value).abs().max(1e-300);
            let osc_tol = Tolerance { abs: 1e-12 * scale, ..tol };
            let wave = accelerated_tail(|u| osc(u) * g(u), start, |_| half, osc_tol, 20_000)?;
            total = total + Estimate { value: mass.value - wave.value, error: mass.error + wave.error };
        }
        let rel = total.error / total.value.abs().max(1e-300);
        if !total.value.is_finite() || rel > SYMBOL_RTOL {
            return Err(Error::QuadratureFail { tol: SYMBOL_RTOL, estimate: total.value, error: total.error });
        }
        Ok(total.value)
    }
}

/// Sum of adaptive panels of width at most `width` over `[a, b]`; the
/// integrand is non-negative so per-panel relative accuracy carries over.
fn panels(f: &impl Fn(f64) -> f64, a: f64, b: f64, width: f64) -> Result<Estimate> {
    if !(b > a) {
        return Ok(Estimate::ZERO);
    }
    let mut cuts = Vec::new();
    // keep the split at |y| = 1 as a panel boundary
    if a < 1.0 && b > 1.0 {
        cuts.push((a, 1.0));
        cuts.push((1.0, b));
    } else {
        cuts.push((a, b));
    }
    let mut total = Estimate::ZERO;
    for (lo, hi) in cuts {
        let n = libm::ceil((hi - lo) / width).max(1.0);
        if n > MAX_PANELS as f64 {
            return Err(Error::QuadratureFail { tol: SYMBOL_RTOL, estimate: f64::NAN, error: f64::INFINITY });
        }
        let n = n as usize;
        let h = (hi - lo) / n as f64;
        for i in 0..n {
            let x0 = lo + h * i as f64;
            let x1 = if i + 1 == n { hi } else { x0 + h };
            total = total + adaptive(f, x0, x1, PANEL_TOL)?;
        }
    }
    Ok(total)
}
