//! Quadrature rules: fixed Gauss-Legendre, adaptive Gauss-Kronrod (7/15),
//! and Wynn's epsilon acceleration for oscillatory and slowly decaying tails.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::cos;
use crate::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Stopping rule for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-15, rel: 1e-10, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl core::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate { value: self.value + o.value, error: self.error + o.error }
    }
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };
}

/// Globally adaptive Gauss-Kronrod quadrature: the panel with the largest
/// error estimate is bisected until the total error meets the tolerance.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol.abs.max(tol.rel * total.abs()) {
        if panels.len() >= tol.max_intervals {
            return Err(Error::QuadratureFail { tol: tol.rel, estimate: total, error: err });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // cannot bisect further in floating point
            return Err(Error::QuadratureFail { tol: tol.rel, estimate: total, error: err });
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    // re-sum to shed accumulated cancellation in the running totals
    let value = panels.iter().map(|p| p.2).sum();
    let error = panels.iter().map(|p| p.3).sum();
    Ok(Estimate { value, error })
}

/// Wynn's epsilon algorithm over a stream of partial sums.
#[derive(Debug, Default, Clone)]
pub struct Wynn {
    table: Vec<f64>,
    best: Option<f64>,
    last_change: f64,
}

impl Wynn {
    pub fn new() -> Self {
        Self { table: Vec::new(), best: None, last_change: f64::INFINITY }
    }

    /// Feed the next partial sum; returns the current extrapolated limit.
    pub fn push(&mut self, s: f64) -> f64 {
        // `table` holds the last anti-diagonal: eps_{-1} = 0 implicit, eps_0 = s
        let mut prev_diag = core::mem::take(&mut self.table);
        let mut diag = Vec::with_capacity(prev_diag.len() + 1);
        diag.push(s);
        let mut aux = 0.0; // eps_{k-1} from the previous diagonal shifted
        for k in 0..prev_diag.len() {
            let d = diag[k] - prev_diag[k];
            let v = if d == 0.0 { f64::INFINITY } else { aux + 1.0 / d };
            aux = prev_diag[k];
            if !v.is_finite() {
                break;
            }
            diag.push(v);
        }
        prev_diag.clear();
        // even columns carry the extrapolants
        let idx = if (diag.len() - 1) % 2 == 0 { diag.len() - 1 } else { diag.len() - 2 };
        let est = diag[idx];
        if let Some(b) = self.best {
            self.last_change = (est - b).abs();
        }
        self.best = Some(est);
        if diag.len() > 40 {
            diag.truncate(40);
        }
        self.table = diag;
        est
    }

    pub fn estimate(&self) -> Option<f64> {
        self.best
    }

    pub fn last_change(&self) -> f64 {
        self.last_change
    }
}

/// `int_a^inf f` where `f` oscillates with half-period `half_period`
/// (or decays slowly); partial sums over consecutive panels are accelerated.
pub fn accelerated_tail<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    panel_width: impl Fn(usize) -> f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<Estimate> {
    let mut wynn = Wynn::new();
    let mut partial = 0.0;
    let mut quad_err = 0.0;
    let mut lo = a;
    let mut agree = 0;
    let mut est = 0.0;
    for k in 0..max_panels {
        let hi = lo + panel_width(k);
        let panel = adaptive(&mut f, lo, hi, Tolerance { rel: tol.rel * 0.1, ..tol })?;
        partial += panel.value;
        quad_err += panel.error;
        est = wynn.push(partial);
        lo = hi;
        if k >= 4 {
            let change = wynn.last_change();
            let scale = est.abs().max(tol.abs / tol.rel.max(1e-300));
            if change <= 0.1 * tol.rel * scale || change <= tol.abs {
                agree += 1;
                if agree >= 3 {
                    return Ok(Estimate { value: est, error: change + quad_err });
                }
            } else {
                agree = 0;
            }
        }
    }
    Err(Error::QuadratureFail { tol: tol.rel, estimate: est, error: wynn.last_change() + quad_err })
}
