//! Additive processes with triplet `(a(t), 0, Lambda_t)`.
//!
//! Time dependence is separable: `a(t) = sum_k a_k(t) v_k` and
//! `Lambda_t = sum_k c_k(t) mu_k` with scalar profiles. Piecewise-constant
//! profiles are integrated exactly, closed-form ones by composite
//! Gauss-Legendre on fixed panels.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::levy::LevyMeasure;
use crate::math::{exp, powf};
use crate::quad::GaussLegendre;
use crate::scaling::ScalingTriple;
use crate::{Error, Result};

/// Gauss-Legendre nodes per panel for closed-form profiles.
pub const DEFAULT_NODES: usize = 16;
/// Number of equal panels a closed-form profile is split into over the horizon.
pub const DEFAULT_PANELS: usize = 16;

/// A scalar function of time.
#[derive(Clone)]
pub enum ScalarProfile {
    Constant(f64),
    /// `values[i]` on `[breaks[i], breaks[i+1])`; `t` past the last break uses the last value.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    Closed { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, horizon: f64, panels: usize, nodes: usize },
}

impl fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarProfile::Constant(c) => write!(f, "Constant({c})"),
            ScalarProfile::Piecewise { breaks, values } => {
                write!(f, "Piecewise({} pieces on [{}, {}])", values.len(), breaks[0], breaks[breaks.len() - 1])
            }
            ScalarProfile::Closed { horizon, panels, nodes, .. } => {
                write!(f, "Closed(horizon {horizon}, {panels} panels x {nodes} nodes)")
            }
        }
    }
}

impl ScalarProfile {
    pub fn piecewise(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() != values.len() + 1 || values.is_empty() {
            return Err(Error::InvalidInput("piecewise profile needs one more break than values".into()));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || !(breaks[0] >= 0.0) {
            return Err(Error::InvalidInput("profile breaks must start at t >= 0 and increase".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("profile values must be finite".into()));
        }
        Ok(ScalarProfile::Piecewise { breaks, values })
    }

    /// `2^n` equal pieces on `[0, horizon]` alternating `1/big_c, big_c, ...`.
    pub fn dyadic_oscillation(horizon: f64, n: u32, big_c: f64) -> Result<Self> {
        if !(big_c >= 1.0) {
            return Err(Error::InvalidInput(format!("oscillation amplitude {big_c} must be >= 1")));
        }
        let pieces = 1usize << n;
        let breaks = (0..=pieces).map(|i| horizon * i as f64 / pieces as f64).collect();
        let values = (0..pieces).map(|i| if i % 2 == 0 { 1.0 / big_c } else { big_c }).collect();
        Self::piecewise(breaks, values)
    }

    pub fn closed(f: impl Fn(f64) -> f64 + Send + Sync + 'static, horizon: f64) -> Self {
        ScalarProfile::Closed { f: Arc::new(f), horizon, panels: DEFAULT_PANELS, nodes: DEFAULT_NODES }
    }

    pub fn with_quadrature(self, panels: usize, nodes: usize) -> Self {
        match self {
            ScalarProfile::Closed { f, horizon, .. } => {
                ScalarProfile::Closed { f, horizon, panels: panels.max(1), nodes: nodes.max(1) }
            }
            other => other,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ScalarProfile::Constant(c) => *c,
            ScalarProfile::Piecewise { breaks, values } => values[piece_index(breaks, t)],
            ScalarProfile::Closed { f, .. } => f(t),
        }
    }

    /// `int_s^t value(r) dr` for `s <= t`.
    pub fn integral(&self, s: f64, t: f64) -> f64 {
        match self {
            ScalarProfile::Constant(c) => c * (t - s),
            ScalarProfile::Piecewise { breaks, values } => {
                let mut acc = 0.0;
                let mut lo = s;
                let mut i = piece_index(breaks, s);
                while lo < t {
                    let hi = if i + 1 < values.len() { breaks[i + 1].min(t) } else { t };
                    acc += values[i] * (hi - lo);
                    lo = hi;
                    i += 1;
                }
                acc
            }
            ScalarProfile::Closed { f, horizon, panels, nodes } => {
                let gl = GaussLegendre::new(*nodes);
                let w = horizon / *panels as f64;
                let mut acc = 0.0;
                let mut lo = s;
                while lo < t {
                    let k = libm::floor(lo / w + 1e-12) + 1.0;
                    let hi = (k * w).min(t);
                    let hi = if hi <= lo { t } else { hi };
                    acc += gl.integrate(|r| f(r), lo, hi);
                    lo = hi;
                }
                acc
            }
        }
    }

    /// Interior points where the profile's integration rule changes.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            ScalarProfile::Constant(_) => Vec::new(),
            ScalarProfile::Piecewise { breaks, .. } => breaks.clone(),
            ScalarProfile::Closed { horizon, panels, .. } => {
                (0..=*panels).map(|i| horizon * i as f64 / *panels as f64).collect()
            }
        }
    }

    pub fn is_piecewise_constant(&self) -> bool {
        !matches!(self, ScalarProfile::Closed { .. })
    }

    /// Largest `|value|` on `[0, horizon]`, sampled for closed-form profiles.
    pub fn sup_abs(&self, horizon: f64) -> f64 {
        match self {
            ScalarProfile::Constant(c) => c.abs(),
            ScalarProfile::Piecewise { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
            ScalarProfile::Closed { f, .. } => {
                (0..=1024).map(|i| f(horizon * i as f64 / 1024.0).abs()).fold(0.0, f64::max)
            }
        }
    }

    fn inf(&self, horizon: f64) -> f64 {
        match self {
            ScalarProfile::Constant(c) => *c,
            ScalarProfile::Piecewise { values, .. } => values.iter().cloned().fold(f64::INFINITY, f64::min),
            ScalarProfile::Closed { f, .. } => {
                (0..=1024).map(|i| f(horizon * i as f64 / 1024.0)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn piece_index(breaks: &[f64], t: f64) -> usize {
    let pieces = breaks.len() - 1;
    // first piece whose right end exceeds t
    breaks[1..].partition_point(|&b| b <= t).min(pieces - 1)
}

/// An additive process on `[0, horizon]` given by its separable triplet.
#[derive(Debug, Clone)]
pub struct AdditiveModel {
    dim: usize,
    horizon: f64,
    drift: Vec<(ScalarProfile, Vec<f64>)>,
    jumps: Vec<(ScalarProfile, LevyMeasure)>,
}

impl AdditiveModel {
    pub fn new(dim: usize, horizon: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(format!("dimension {dim} not supported (1 or 2)")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidInput(format!("horizon {horizon} must be positive")));
        }
        Ok(Self { dim, horizon, drift: Vec::new(), jumps: Vec::new() })
    }

    /// Time-independent model with Levy measure `mu` and no drift.
    pub fn stationary(mu: LevyMeasure, horizon: f64) -> Result<Self> {
        Self::new(mu.dim(), horizon)?.with_jumps(ScalarProfile::Constant(1.0), mu)
    }

    pub fn with_drift(mut self, profile: ScalarProfile, direction: Vec<f64>) -> Result<Self> {
        if direction.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: direction.len() });
        }
        if !(profile.sup_abs(self.horizon) * direction.iter().fold(0.0, |m, v| m + v.abs())).is_finite() {
            return Err(Error::InvalidInput("drift must be bounded on the horizon".into()));
        }
        self.drift.push((profile, direction));
        Ok(self)
    }

    pub fn with_jumps(mut self, profile: ScalarProfile, mu: LevyMeasure) -> Result<Self> {
        if mu.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: mu.dim() });
        }
        if profile.inf(self.horizon) < 0.0 {
            return Err(Error::InvalidInput("jump intensity profile must be non-negative".into()));
        }
        if !profile.sup_abs(self.horizon).is_finite() {
            return Err(Error::InvalidInput("jump intensity profile must be bounded".into()));
        }
        let l = mu.l_functional()?;
        if !l.is_finite() {
            return Err(Error::InvalidInput("Levy measure has infinite L(mu)".into()));
        }
        self.jumps.push((profile, mu));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn drift_terms(&self) -> &[(ScalarProfile, Vec<f64>)] {
        &self.drift
    }

    pub fn jump_terms(&self) -> &[(ScalarProfile, LevyMeasure)] {
        &self.jumps
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.drift.iter().all(|d| d.0.is_piecewise_constant()) && self.jumps.iter().all(|j| j.0.is_piecewise_constant())
    }

    /// Sorted union of all profile break points inside `[0, horizon]`, ends included.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = vec![0.0, self.horizon];
        for p in self.drift.iter().map(|d| &d.0).chain(self.jumps.iter().map(|j| &j.0)) {
            b.extend(p.breakpoints().into_iter().filter(|&t| t > 0.0 && t < self.horizon));
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) || t > self.horizon * (1.0 + 1e-12) {
            return Err(Error::OutsideHorizon { t, horizon: self.horizon });
        }
        Ok(())
    }

    fn check_interval(&self, s: f64, t: f64) -> Result<()> {
        if s > t {
            return Err(Error::TimeOrder { s, t });
        }
        self.check_time(s)?;
        self.check_time(t)
    }

    /// `a(t)`.
    pub fn drift_at(&self, t: f64) -> Vec<f64> {
        let mut a = vec![0.0; self.dim];
        for (p, v) in &self.drift {
            let c = p.value(t);
            for (ai, vi) in a.iter_mut().zip(v) {
                *ai += c * vi;
            }
        }
        a
    }

    /// `int_s^t a(r) dr`.
    pub fn drift_integral(&self, s: f64, t: f64) -> Vec<f64> {
        let mut a = vec![0.0; self.dim];
        for (p, v) in &self.drift {
            let c = p.integral(s, t);
            for (ai, vi) in a.iter_mut().zip(v) {
                *ai += c * vi;
            }
        }
        a
    }

    /// `Psi_Z(t, xi)`.
    pub fn psi(&self, t: f64, xi: &[f64]) -> Result<Complex64> {
        self.check_time(t)?;
        let a = self.drift_at(t);
        let dot: f64 = a.iter().zip(xi).map(|(x, y)| x * y).sum();
        let mut acc = Complex64::new(0.0, dot);
        for (p, mu) in &self.jumps {
            let c = p.value(t);
            if c != 0.0 {
                acc += mu.symbol(xi)? * c;
            }
        }
        Ok(acc)
    }

    /// `E(s, t, xi) = int_s^t Psi_Z(r, xi) dr`.
    pub fn integrated_exponent(&self, s: f64, t: f64, xi: &[f64]) -> Result<Complex64> {
        self.check_interval(s, t)?;
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: xi.len() });
        }
        let a = self.drift_integral(s, t);
        let dot: f64 = a.iter().zip(xi).map(|(x, y)| x * y).sum();
        let mut acc = Complex64::new(0.0, dot);
        for (p, mu) in &self.jumps {
            let c = p.integral(s, t);
            if c != 0.0 {
                acc += mu.symbol(xi)? * c;
            }
        }
        Ok(acc)
    }

    /// Precomputes the per-component symbols at `points` (stride `dim`) so
    /// exponents for many time intervals cost one pass each.
    pub fn exponent_table(&self, points: &[f64]) -> Result<ExponentTable> {
        if !points.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch { expected: self.dim, found: points.len() % self.dim });
        }
        let drift = self
            .drift
            .iter()
            .map(|(_, v)| points.chunks(self.dim).map(|x| x.iter().zip(v).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let jumps = self.jumps.iter().map(|(_, mu)| mu.symbols_at(points)).collect::<Result<Vec<_>>>()?;
        Ok(ExponentTable { len: points.len() / self.dim, drift, jumps })
    }

    /// `E(s, t, .)` at the points of `table`.
    pub fn exponent_from_table(&self, table: &ExponentTable, s: f64, t: f64) -> Result<Vec<Complex64>> {
        self.check_interval(s, t)?;
        let mut out = vec![Complex64::new(0.0, 0.0); table.len];
        for ((p, _), dots) in self.drift.iter().zip(&table.drift) {
            let c = p.integral(s, t);
            if c != 0.0 {
                for (o, d) in out.iter_mut().zip(dots) {
                    o.im += c * d;
                }
            }
        }
        for ((p, _), sym) in self.jumps.iter().zip(&table.jumps) {
            let c = p.integral(s, t);
            if c != 0.0 {
                for (o, v) in out.iter_mut().zip(sym) {
                    *o += v * c;
                }
            }
        }
        Ok(out)
    }

    /// The process `Z^c` with `Psi_{Z^c}(t, xi) = Psi_Z(t, xi / c)`: jumps
    /// become `Lambda_t(c dy)` and the drift picks up the compensator shift.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidInput(format!("scale factor {c} must be positive")));
        }
        let mut drift: Vec<(ScalarProfile, Vec<f64>)> =
            self.drift.iter().map(|(p, v)| (p.clone(), v.iter().map(|x| x / c).collect())).collect();
        let mut jumps = Vec::with_capacity(self.jumps.len());
        for (p, mu) in &self.jumps {
            let shift = mu.rescaling_shift(c);
            if shift.iter().any(|&x| x != 0.0) {
                drift.push((p.clone(), shift.iter().map(|x| -x / c).collect()));
            }
            jumps.push((p.clone(), mu.scale_space(c)?));
        }
        Ok(Self { dim: self.dim, horizon: self.horizon, drift, jumps })
    }

    /// Multiplies the whole triplet by `factor`.
    pub fn scale_intensity(&self, factor: f64) -> Result<Self> {
        let drift = self.drift.iter().map(|(p, v)| (p.clone(), v.iter().map(|x| x * factor).collect())).collect();
        let jumps = self
            .jumps
            .iter()
            .map(|(p, mu)| Ok((p.clone(), mu.scale_mass(factor)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: self.dim, horizon: self.horizon, drift, jumps })
    }

    /// `s_j(Z)` with triplet `(s_j(a(t)), 0, s(c^{-j}) Lambda_t(c^{-j} dy))`.
    pub fn scaled_process(&self, triple: &ScalingTriple, j: u32) -> Result<Self> {
        let c = powf(triple.base(), -(j as f64));
        self.scaled(c)?.scale_intensity(triple.eval(c))
    }

    /// `sup_t |a(t)| + sup_t L(Lambda_t)` over the horizon.
    pub fn triplet_bound(&self) -> Result<f64> {
        let mut a = 0.0;
        for (p, v) in &self.drift {
            a += p.sup_abs(self.horizon) * libm::sqrt(v.iter().map(|x| x * x).sum());
        }
        let mut l = 0.0;
        for (p, mu) in &self.jumps {
            l += p.sup_abs(self.horizon) * mu.l_functional()?;
        }
        Ok(a + l)
    }

    /// `|exp(E(s,t,xi))|` helper used by diagnostics.
    pub fn decay_factor(&self, s: f64, t: f64, xi: &[f64]) -> Result<f64> {
        Ok(exp(self.integrated_exponent(s, t, xi)?.re))
    }
}

/// Per-component symbol values at a fixed set of frequencies.
#[derive(Debug, Clone)]
pub struct ExponentTable {
    len: usize,
    drift: Vec<Vec<f64>>,
    jumps: Vec<Vec<Complex64>>,
}

impl ExponentTable {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

#[cfg(test)]
mod tests;
