//! Exact-in-frequency propagation, Duhamel term, transition densities and
//! space-time norms.
//!
//! Every frequency mode evolves by `exp(E(s, t, xi))`, so propagation has no
//! time-stepping error; the only approximations are the torus and the grid.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::{Domain, GridFunction, SpectralGrid};
use crate::levy::LevyMeasure;
use crate::lp_besov::{besov_norm, bessel_norm, classical_besov_norm, classical_bessel_norm, BesovParams, LPFamily};
use crate::math::{ln, phi1, powf};
use crate::process::{AdditiveModel, ExponentTable};
use crate::quad::GaussLegendre;
use crate::scaling::ScalingTriple;
use crate::{Error, Result};

/// Default number of graded time intervals.
pub const DEFAULT_STEPS: usize = 64;
/// Default grading exponent of `t_i = T (i/M)^g`.
pub const DEFAULT_GRADING: f64 = 2.0;
/// `|exp(E)|` allowed at the Nyquist frequency by [`transition_density`].
pub const NYQUIST_DECAY: f64 = 1e-14;

/// Midpoint rule on the graded intervals `[T((i-1)/M)^g, T(i/M)^g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    pub horizon: f64,
    pub steps: usize,
    pub grading: f64,
}

impl TimeGrid {
    pub fn graded(horizon: f64, steps: usize, grading: f64) -> Result<Self> {
        if !(horizon > 0.0) || steps == 0 || !(grading >= 1.0) {
            return Err(Error::InvalidInput(format!(
                "time grid needs T > 0, M >= 1 and grading >= 1 (got {horizon}, {steps}, {grading})"
            )));
        }
        Ok(Self { horizon, steps, grading })
    }

    pub fn node(&self, i: usize) -> f64 {
        self.horizon * powf(i as f64 / self.steps as f64, self.grading)
    }

    /// Midpoints with their interval lengths as weights.
    pub fn midpoints(&self) -> Vec<(f64, f64)> {
        (1..=self.steps)
            .map(|i| {
                let (a, b) = (self.node(i - 1), self.node(i));
                (0.5 * (a + b), b - a)
            })
            .collect()
    }

    pub fn refined(&self) -> Self {
        Self { steps: 2 * self.steps, ..self.clone() }
    }

    /// `sum_i w_i f(m_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.midpoints().into_iter().map(|(t, w)| w * f(t)).sum()
    }
}

/// States of a solve at increasing times.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub times: Vec<f64>,
    pub states: Vec<GridFunction>,
    /// Quadrature weights when `times` come from a [`TimeGrid`] (the final
    /// time `T` is appended with weight zero).
    pub weights: Option<Vec<f64>>,
}

/// Exponent table on a grid's frequencies (with Nyquist aliases) for one model.
#[derive(Debug, Clone)]
pub struct Propagator<'a> {
    model: &'a AdditiveModel,
    grid: SpectralGrid,
    table: ExponentTable,
    groups: Vec<(usize, usize)>,
}

impl<'a> Propagator<'a> {
    pub fn new(model: &'a AdditiveModel, grid: &SpectralGrid) -> Result<Self> {
        if model.dim() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), found: model.dim() });
        }
        let (pts, groups) = grid.alias_points();
        let table = model.exponent_table(&pts)?;
        Ok(Self { model, grid: *grid, table, groups })
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    /// `E(s, t, .)` per storage index, alias groups averaged.
    pub fn exponent(&self, s: f64, t: f64) -> Result<Vec<Complex64>> {
        let raw = self.model.exponent_from_table(&self.table, s, t)?;
        Ok(SpectralGrid::combine_aliases(&raw, &self.groups))
    }

    /// `exp(E(s, t, .))` per storage index.
    pub fn multiplier(&self, s: f64, t: f64) -> Result<Vec<Complex64>> {
        let raw: Vec<Complex64> = self.model.exponent_from_table(&self.table, s, t)?.into_iter().map(|e| e.exp()).collect();
        Ok(SpectralGrid::combine_aliases(&raw, &self.groups))
    }

    /// Transports `f` from time `s` to time `t`.
    pub fn apply(&self, f: &GridFunction, s: f64, t: f64) -> Result<GridFunction> {
        f.apply_multiplier(&self.multiplier(s, t)?)
    }
}

fn check_times(times: &[f64], horizon: f64) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("no output times".into()));
    }
    let mut prev = 0.0;
    for &t in times {
        if !(t > prev) {
            return Err(Error::TimeOrder { s: prev, t });
        }
        if t > horizon * (1.0 + 1e-12) {
            return Err(Error::OutsideHorizon { t, horizon });
        }
        prev = t;
    }
    Ok(())
}

/// `u(t) = F^{-1}[exp(E(0, t, .)) F u0]` at each of `times` (strictly increasing, in `(0, T]`).
pub fn propagate(model: &AdditiveModel, u0: &GridFunction, times: &[f64]) -> Result<SolveResult> {
    check_times(times, model.horizon())?;
    let prop = Propagator::new(model, u0.grid())?;
    let hat = u0.in_domain(Domain::Frequency)?;
    let states = times
        .iter()
        .map(|&t| hat.apply_multiplier(&prop.multiplier(0.0, t)?)?.from_frequency())
        .collect::<Result<Vec<_>>>()?;
    Ok(SolveResult { times: times.to_vec(), states, weights: None })
}

/// [`propagate`] on the midpoints of `tg`, with the horizon appended.
pub fn propagate_graded(model: &AdditiveModel, u0: &GridFunction, tg: &TimeGrid) -> Result<SolveResult> {
    let mid = tg.midpoints();
    let mut times: Vec<f64> = mid.iter().map(|m| m.0).collect();
    let mut weights: Vec<f64> = mid.iter().map(|m| m.1).collect();
    times.push(tg.horizon);
    weights.push(0.0);
    let mut res = propagate(model, u0, &times)?;
    res.weights = Some(weights);
    Ok(res)
}

/// Right-hand side `f(s, x)` of the inhomogeneous problem.
#[derive(Clone)]
pub enum Forcing {
    /// `values[i]` on `[breaks[i], breaks[i+1])`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<GridFunction> },
    /// Evaluated at Gauss-Legendre nodes inside each time piece.
    Function { f: Arc<dyn Fn(f64) -> Result<GridFunction> + Send + Sync>, nodes: usize },
}

impl core::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Forcing::PiecewiseConstant { breaks, .. } => write!(f, "PiecewiseConstant({} pieces)", breaks.len() - 1),
            Forcing::Function { nodes, .. } => write!(f, "Function({nodes} nodes per piece)"),
        }
    }
}

impl Forcing {
    pub fn constant(g: GridFunction, horizon: f64) -> Self {
        Forcing::PiecewiseConstant { breaks: vec![0.0, horizon], values: vec![g] }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Forcing::PiecewiseConstant { breaks, .. } => breaks.clone(),
            Forcing::Function { .. } => Vec::new(),
        }
    }
}

/// `F(t) = int_0^t F^{-1}[exp(E(s, t, .)) F f(s)] ds`, with the time quadrature
/// split at every model and forcing break point.
pub fn duhamel(model: &AdditiveModel, forcing: &Forcing, grid: &SpectralGrid, times: &[f64]) -> Result<SolveResult> {
    check_times(times, model.horizon())?;
    let prop = Propagator::new(model, grid)?;
    let mut cuts = model.breakpoints();
    cuts.extend(forcing.breakpoints());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut pts: Vec<f64> = cuts.iter().cloned().filter(|&c| c > 0.0 && c < t).collect();
        pts.insert(0, 0.0);
        pts.push(t);
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            match forcing {
                Forcing::PiecewiseConstant { breaks, values } => {
                    let mid = 0.5 * (a + b);
                    let idx = breaks[1..].partition_point(|&x| x <= mid);
                    if idx >= values.len() || mid < breaks[0] {
                        continue;
                    }
                    let g = values[idx].in_domain(Domain::Frequency)?;
                    let piece = prop.exponent(a, b)?;
                    let tail = prop.multiplier(b, t)?;
                    for (k, o) in acc.iter_mut().enumerate() {
                        // int_a^b exp(E(s,b)) ds = (b - a) phi1(E(a,b)) when E is linear in s on [a, b]
                        *o += tail[k] * phi1(piece[k]) * (b - a) * g.values()[k];
                    }
                }
                Forcing::Function { f, nodes } => {
                    let gl = GaussLegendre::new(*nodes);
                    for (s, wt) in gl.mapped(a, b) {
                        let g = f(s)?.in_domain(Domain::Frequency)?;
                        let m = prop.multiplier(s, t)?;
                        for (k, o) in acc.iter_mut().enumerate() {
                            *o += m[k] * g.values()[k] * wt;
                        }
                    }
                }
            }
        }
        states.push(GridFunction::new(*grid, Domain::Frequency, acc)?.from_frequency()?);
    }
    Ok(SolveResult { times: times.to_vec(), states, weights: None })
}

/// Whether [`transition_density`] checks that the kernel is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Checked,
    Unchecked,
}

/// `p(s, t, .) = F^{-1}[exp(E(s, t, .))]` on the torus; coefficients are
/// `exp(E) / L^d`, so the discrete integral is exactly `exp(E(s,t,0)) = 1`.
pub fn transition_density(
    model: &AdditiveModel,
    s: f64,
    t: f64,
    grid: &SpectralGrid,
    resolution: Resolution,
) -> Result<GridFunction> {
    if !(s < t) {
        return Err(Error::TimeOrder { s, t });
    }
    let prop = Propagator::new(model, grid)?;
    density_from(&prop, s, t, resolution)
}

pub fn density_from(prop: &Propagator<'_>, s: f64, t: f64, resolution: Resolution) -> Result<GridFunction> {
    let grid = *prop.grid();
    let m = prop.multiplier(s, t)?;
    if resolution == Resolution::Checked {
        let half = grid.n() / 2;
        let worst = (0..grid.len())
            .filter(|&i| grid.axes(i)[..grid.dim()].contains(&half))
            .map(|i| m[i].norm())
            .fold(0.0, f64::max);
        if worst >= NYQUIST_DECAY {
            return Err(Error::GridTooCoarse {
                detail: format!("|exp(E)| = {worst:e} at the Nyquist frequency (need < {NYQUIST_DECAY:e})"),
            });
        }
    }
    let inv = 1.0 / grid.volume();
    GridFunction::new(grid, Domain::Frequency, m.into_iter().map(|v| v * inv).collect())?.from_frequency()
}

/// `(sum_i w_i ||u(t_i)||^q_{H^{mu;gamma}_p})^{1/q}` over a graded solve.
pub fn spacetime_norm(result: &SolveResult, p: f64, q: f64, gamma: f64, mu: &LevyMeasure) -> Result<f64> {
    spacetime_with(result, q, |u| bessel_norm(u, p, gamma, mu))
}

/// As [`spacetime_norm`] with the classical Bessel potential `(1 + |xi|^2)^{gamma/2}`.
pub fn classical_spacetime_norm(result: &SolveResult, p: f64, q: f64, gamma: f64) -> Result<f64> {
    spacetime_with(result, q, |u| classical_bessel_norm(u, p, gamma))
}

fn spacetime_with(result: &SolveResult, q: f64, norm: impl Fn(&GridFunction) -> Result<f64>) -> Result<f64> {
    let weights = result
        .weights
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("space-time norm needs a graded solve".into()))?;
    if !(q > 0.0) {
        return Err(Error::InvalidInput(format!("time exponent q = {q} must be positive")));
    }
    let mut acc = 0.0;
    for (u, w) in result.states.iter().zip(weights) {
        if *w != 0.0 {
            acc += w * powf(norm(u)?, q);
        }
    }
    Ok(powf(acc, 1.0 / q))
}

/// Block-wise decay diagnostic for one `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub j: u32,
    /// `(t, || F^{-1}[exp(int_0^{t/s(c^{-j})} Psi_{s_j Z}) tilde_phi] ||_1)`.
    pub masses: Vec<(f64, f64)>,
    /// Least-squares slope of `ln mass` against `t` over the samples with `1 <= t <= 5`.
    pub slope: f64,
    pub sup_mass: f64,
    /// `|| F^{-1} tilde_phi ||_1`, the `t -> 0` limit.
    pub initial_mass: f64,
}

/// `L_1` masses of the localized kernels of the scaled processes `s_j(Z)`.
/// The model's horizon must cover `t / s(c_s^{-j})` for every sampled `t`.
pub fn density_block_decay(
    model: &AdditiveModel,
    triple: &ScalingTriple,
    family: &LPFamily,
    js: &[u32],
    t_grid: &[f64],
) -> Result<Vec<DecayRow>> {
    if family.base() != triple.c_s {
        return Err(Error::InvalidInput("family base must equal c_s".into()));
    }
    let grid = *family.grid();
    let tilde: Vec<Complex64> =
        grid.frequency_norms().into_iter().map(|r| Complex64::new(family.tilde_window(r), 0.0)).collect();
    let base = GridFunction::new(grid, Domain::Frequency, tilde.clone())?;
    let initial_mass = base.from_frequency()?.lp_norm(1.0)?;
    let mut rows = Vec::with_capacity(js.len());
    for &j in js {
        let sj = model.scaled_process(triple, j)?;
        let prop = Propagator::new(&sj, &grid)?;
        let time_scale = 1.0 / triple.block_scale(j);
        let mut masses = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let m = prop.multiplier(0.0, t * time_scale)?;
            let vals = m.iter().zip(&tilde).map(|(a, b)| a * b).collect();
            let mass = GridFunction::new(grid, Domain::Frequency, vals)?.from_frequency()?.lp_norm(1.0)?;
            masses.push((t, mass));
        }
        let fit: Vec<(f64, f64)> =
            masses.iter().filter(|(t, _)| *t >= 1.0 && *t <= 5.0).map(|&(t, m)| (t, ln(m))).collect();
        let slope = least_squares_slope(&fit);
        let sup_mass = masses.iter().map(|m| m.1).fold(0.0, f64::max);
        rows.push(DecayRow { j, masses, slope, sup_mass, initial_mass });
    }
    Ok(rows)
}

/// Slope of the least-squares line through `points`; NaN with fewer than two points.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriParams {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub horizon: f64,
    pub steps: usize,
    pub grading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AprioriReport {
    pub horizon: f64,
    pub ratio: f64,
    pub solution_norm: f64,
    pub data_norm: f64,
    /// `|norm(M) - norm(2M)|` for the space-time norm.
    pub refinement: f64,
    /// `u0 = 0`; the ratio is set to 0.
    pub degenerate: bool,
    /// `q < 1`, outside the regime of the estimate.
    pub experimental: bool,
}

fn apriori_core(
    model: &AdditiveModel,
    u0: &GridFunction,
    params: AprioriParams,
    normalization: f64,
    data_norm: f64,
    solution: impl Fn(&SolveResult) -> Result<f64>,
) -> Result<AprioriReport> {
    let tg = TimeGrid::graded(params.horizon, params.steps, params.grading)?;
    let coarse = solution(&propagate_graded(model, u0, &tg)?)?;
    let fine = solution(&propagate_graded(model, u0, &tg.refined())?)?;
    let degenerate = data_norm == 0.0;
    let ratio = if degenerate { 0.0 } else { fine / (normalization * data_norm) };
    Ok(AprioriReport {
        horizon: params.horizon,
        ratio,
        solution_norm: fine,
        data_norm,
        refinement: (fine - coarse).abs(),
        degenerate,
        experimental: params.q < 1.0,
    })
}

/// `||u||_{L_q((0,T); H^{mu;gamma}_p)} / ((1 + T^2) ||u0||_{B^{s;gamma - 2/q}_{p,q}})`.
pub fn apriori_ratio(
    model: &AdditiveModel,
    u0: &GridFunction,
    params: AprioriParams,
    mu: &LevyMeasure,
    triple: &ScalingTriple,
    family: &LPFamily,
) -> Result<AprioriReport> {
    let bp = BesovParams { p: params.p, q: params.q, gamma: params.gamma - 2.0 / params.q };
    let data = besov_norm(u0, bp, triple, family)?.norm;
    let t = params.horizon;
    apriori_core(model, u0, params, 1.0 + t * t, data, |r| spacetime_norm(r, params.p, params.q, params.gamma, mu))
}

/// `||u||_{L_q((0,T); H^gamma_p)} / ((1 + T) ||u0||_{B^{gamma - alpha/q}_{p,q}})`
/// with classical norms; `dyadic` is a base-2 family.
pub fn corollary_ratio(
    model: &AdditiveModel,
    u0: &GridFunction,
    params: AprioriParams,
    alpha: f64,
    dyadic: &LPFamily,
) -> Result<AprioriReport> {
    let data = classical_besov_norm(u0, params.p, params.q, params.gamma - alpha / params.q, dyadic)?.norm;
    let t = params.horizon;
    apriori_core(model, u0, params, 1.0 + t, data, |r| classical_spacetime_norm(r, params.p, params.q, params.gamma))
}

#[cfg(test)]
mod tests;
