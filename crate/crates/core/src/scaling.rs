//! Scaling triples `(s, s_L, s_U)`.
//!
//! A triple satisfies `s_L(R/r) <= s(R)/s(r) <= s_U(R/r)` for all `0 < r <= R`.
//! From it we derive the block base `c_s = 2^{m_s}`, the growth exponents
//! `theta0 <= theta1` and the corridor constant `C0`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::math::{exp, ln, powf};
use crate::{Error, Result};

/// Default cap for the `m_s` search; beyond `2^64` a triple is numerically useless.
pub const MS_SEARCH_CAP: u32 = 64;

/// A positive function on `(0, inf)`.
#[derive(Clone)]
pub enum ScalingFn {
    /// `coef * r^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Samples `(r, s(r))` interpolated linearly in `(log r, log s)`; constant
    /// log-slope extrapolation beyond the ends.
    Table(Vec<(f64, f64)>),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for ScalingFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingFn::Power { coef, exponent } => write!(f, "Power({coef} r^{exponent})"),
            ScalingFn::Table(t) => write!(f, "Table({} samples)", t.len()),
            ScalingFn::Custom(_) => f.write_str("Custom"),
        }
    }
}

impl ScalingFn {
    pub fn power(exponent: f64) -> Self {
        ScalingFn::Power { coef: 1.0, exponent }
    }

    pub fn table(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidInput("scaling table needs at least two samples".into()));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in samples.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!("duplicate table abscissa {}", w[0].0)));
            }
        }
        if samples.iter().any(|&(r, v)| !(r > 0.0 && v > 0.0 && r.is_finite() && v.is_finite())) {
            return Err(Error::InvalidInput("scaling table entries must be positive and finite".into()));
        }
        Ok(ScalingFn::Table(samples))
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalingFn::Custom(Arc::new(f))
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ScalingFn::Power { coef, exponent } => coef * powf(r, *exponent),
            ScalingFn::Table(t) => table_eval(t, r),
            ScalingFn::Custom(f) => f(r),
        }
    }

    fn as_power(&self) -> Option<(f64, f64)> {
        match self {
            ScalingFn::Power { coef, exponent } => Some((*coef, *exponent)),
            _ => None,
        }
    }
}

fn table_eval(t: &[(f64, f64)], r: f64) -> f64 {
    let lr = ln(r);
    let i = match t.iter().position(|&(x, _)| x >= r) {
        Some(0) => 1,
        Some(i) => i,
        None => t.len() - 1,
    };
    let (x0, y0) = (ln(t[i - 1].0), ln(t[i - 1].1));
    let (x1, y1) = (ln(t[i].0), ln(t[i].1));
    exp(y0 + (y1 - y0) * (lr - x0) / (x1 - x0))
}

/// Log-uniform sample grid with `n` points over `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (ln(lo), ln(hi));
    (0..n)
        .map(|i| exp(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// The default validation grid: 401 points over `[2^-20, 2^20]`.
pub fn default_sample_grid() -> Vec<f64> {
    log_grid(powf(2.0, -20.0), powf(2.0, 20.0), 401)
}

#[derive(Debug, Clone)]
pub struct ScalingTriple {
    pub s: ScalingFn,
    pub lower: ScalingFn,
    pub upper: ScalingFn,
    pub m_s: u32,
    pub c_s: u64,
    pub theta0: f64,
    pub theta1: f64,
    pub c0: f64,
}

impl ScalingTriple {
    /// `s(r) = s_L(r) = s_U(r) = r^alpha`.
    pub fn power(alpha: f64) -> Result<Self> {
        let f = ScalingFn::power(alpha);
        derive_constants(f.clone(), f.clone(), f, &default_sample_grid())
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.s.eval(r)
    }

    pub fn base(&self) -> f64 {
        self.c_s as f64
    }

    /// `s(c_s^{-j})`.
    pub fn block_scale(&self, j: u32) -> f64 {
        self.s.eval(powf(self.base(), -(j as f64)))
    }

    /// `s(|xi|^{-1})^{-1}` with the convention that it vanishes at `xi = 0`.
    pub fn inverse_at_frequency(&self, xi_norm: f64) -> f64 {
        if xi_norm == 0.0 {
            0.0
        } else {
            1.0 / self.s.eval(1.0 / xi_norm)
        }
    }

    /// Lower and upper corridor envelopes `C0^{-1}(...)` and `C0(...)` at `r`.
    pub fn corridor(&self, r: f64) -> (f64, f64) {
        let (lo, hi) = if r <= 1.0 {
            (powf(r, self.theta1), powf(r, self.theta0))
        } else {
            (powf(r, self.theta0), powf(r, self.theta1))
        };
        (lo / self.c0, hi * self.c0)
    }
}

/// Validates the two-sided scaling inequality on `sample_grid` and derives
/// `m_s`, `c_s`, `theta0`, `theta1` and `C0`.
pub fn derive_constants(
    s: ScalingFn,
    lower: ScalingFn,
    upper: ScalingFn,
    sample_grid: &[f64],
) -> Result<ScalingTriple> {
    derive_constants_with_cap(s, lower, upper, sample_grid, MS_SEARCH_CAP)
}

pub fn derive_constants_with_cap(
    s: ScalingFn,
    lower: ScalingFn,
    upper: ScalingFn,
    sample_grid: &[f64],
    cap: u32,
) -> Result<ScalingTriple> {
    if sample_grid.is_empty() || sample_grid.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput("sample grid must hold positive finite radii".into()));
    }
    let mut grid: Vec<f64> = sample_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    for &r in &grid {
        for (name, f) in [("s", &s), ("s_L", &lower), ("s_U", &upper)] {
            let v = f.eval(r);
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name}({r}) = {v} is not positive")));
            }
        }
    }
    for w in grid.windows(2) {
        for (name, f) in [("s_L", &lower), ("s_U", &upper)] {
            if f.eval(w[1]) < f.eval(w[0]) {
                return Err(Error::InvalidInput(format!("{name} decreases between {} and {}", w[0], w[1])));
            }
        }
    }

    match (s.as_power(), lower.as_power(), upper.as_power()) {
        (Some(sp), Some(lp), Some(up)) => check_powers(sp, lp, up)?,
        _ => check_sampled(&s, &lower, &upper, &grid)?,
    }

    let mut m_s = None;
    for m in 1..=cap {
        if lower.eval(powf(2.0, m as f64)) > 1.0 {
            m_s = Some(m);
            break;
        }
    }
    let m_s = m_s.ok_or(Error::NoMs { cap })?;
    let c_s = 1u64.checked_shl(m_s).filter(|_| m_s < 64).unwrap_or(u64::MAX);
    let c = powf(2.0, m_s as f64);
    let lc = ln(c);
    let theta0 = ln(lower.eval(c)) / lc;
    let theta1 = ln(upper.eval(c)) / lc;

    let s1 = s.eval(1.0);
    let su_c = upper.eval(c);
    let c0 = [
        su_c * s1,
        su_c / (lower.eval(1.0) * s1),
        upper.eval(1.0) * s1 * su_c,
        1.0 / (lower.eval(1.0 / c) * s1),
        1.0,
    ]
    .into_iter()
    .fold(f64::MIN, f64::max);

    Ok(ScalingTriple { s, lower, upper, m_s, c_s, theta0, theta1, c0 })
}

fn check_powers(s: (f64, f64), lower: (f64, f64), upper: (f64, f64)) -> Result<()> {
    // ratio s(R)/s(r) = x^a for x = R/r >= 1; need b x^beta <= x^a <= c x^gamma
    let (_, a) = s;
    let (b, beta) = lower;
    let (c, gamma) = upper;
    if b > 1.0 || beta > a {
        return Err(Error::ScalingViolation {
            r: 1.0,
            big_r: if beta > a { f64::INFINITY } else { 1.0 },
            detail: format!("lower factor {b} x^{beta} exceeds x^{a}"),
        });
    }
    if c < 1.0 || gamma < a {
        return Err(Error::ScalingViolation {
            r: 1.0,
            big_r: if gamma < a { f64::INFINITY } else { 1.0 },
            detail: format!("upper factor {c} x^{gamma} is below x^{a}"),
        });
    }
    Ok(())
}

fn check_sampled(s: &ScalingFn, lower: &ScalingFn, upper: &ScalingFn, grid: &[f64]) -> Result<()> {
    let sv: Vec<f64> = grid.iter().map(|&r| s.eval(r)).collect();
    for (i, &r) in grid.iter().enumerate() {
        for (k, &big_r) in grid.iter().enumerate().skip(i) {
            let ratio = sv[k] / sv[i];
            let x = big_r / r;
            let (lo, hi) = (lower.eval(x), upper.eval(x));
            let slack = 1e-12 * ratio;
            if lo > ratio + slack || ratio > hi + slack {
                return Err(Error::ScalingViolation {
                    r,
                    big_r,
                    detail: format!("need {lo} <= {ratio} <= {hi}"),
                });
            }
        }
    }
    Ok(())
}

/// Result of [`check_corridor`]. A non-positive `max_violation` means the
/// growth corridor holds at every sampled radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorridorReport {
    pub max_violation: f64,
    pub worst_r: f64,
}

/// Relative violation of `C0^{-1} lower(r) <= s(r) <= C0 upper(r)`.
pub fn check_corridor(triple: &ScalingTriple, r_values: &[f64]) -> CorridorReport {
    let mut rep = CorridorReport { max_violation: f64::NEG_INFINITY, worst_r: f64::NAN };
    for &r in r_values {
        let v = triple.eval(r);
        let (lo, hi) = triple.corridor(r);
        let viol = ((lo - v) / v).max((v - hi) / v);
        if viol > rep.max_violation {
            rep = CorridorReport { max_violation: viol, worst_r: r };
        }
    }
    rep
}
