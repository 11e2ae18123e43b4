//! Monte-Carlo simulation of `Z_t` for cross-checking the spectral solver.
//!
//! Jumps with `|y| <= epsilon` are dropped; the remaining compound Poisson
//! part is drawn by thinning a homogeneous Poisson stream on each time
//! piece. The simulated law is exactly that of the model whose Levy measures
//! are truncated below `epsilon` (with the same compensator convention).
//!
//! Path `i` draws from its own ChaCha stream seeded by `(seed, i)`, and paths
//! are accumulated in fixed chunks merged in index order, so estimates do not
//! depend on how chunks are scheduled.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{cos, ln, sin, sqrt};
use crate::process::AdditiveModel;
use crate::levy::LevyMeasure;
use crate::{Error, Result};

/// Paths per accumulation chunk.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub epsilon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Majorizing jump intensity per time piece (pieces as in
    /// [`AdditiveModel::breakpoints`]); `None` uses the exact intensity.
    pub envelope: Option<Vec<f64>>,
}

impl SimConfig {
    pub fn new(epsilon: f64, n_paths: usize, seed: u64) -> Self {
        Self { epsilon, n_paths, seed, envelope: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("truncation radius {} must lie in (0, 1)", self.epsilon)));
        }
        if self.n_paths == 0 {
            return Err(Error::InvalidInput("n_paths must be positive".into()));
        }
        Ok(())
    }

    pub fn chunks(&self) -> usize {
        self.n_paths.div_ceil(CHUNK)
    }
}

/// Independent stream for path `path`.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

struct Piece {
    start: f64,
    end: f64,
    /// `c_k` on the piece, per jump component.
    weights: Vec<f64>,
    rate: f64,
    envelope: f64,
}

/// Precomputed sampler for `Z_t` of the epsilon-truncated model.
pub struct Sampler<'a> {
    model: &'a AdditiveModel,
    epsilon: f64,
    shift: Vec<f64>,
    pieces: Vec<Piece>,
    /// `mu_k(|y| > epsilon)`.
    masses: Vec<f64>,
}

impl<'a> Sampler<'a> {
    pub fn new(model: &'a AdditiveModel, t: f64, cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        if !model.is_piecewise_constant() {
            return Err(Error::InvalidInput("simulation needs piecewise-constant profiles".into()));
        }
        if !(t > 0.0) || t > model.horizon() * (1.0 + 1e-12) {
            return Err(Error::OutsideHorizon { t, horizon: model.horizon() });
        }
        let eps = cfg.epsilon;
        let jumps = model.jump_terms();
        let masses = jumps.iter().map(|(_, mu)| mu.tail_mass(eps)).collect::<Result<Vec<f64>>>()?;
        // deterministic part: int a - sum_k (int c_k) int_{eps<|y|<=1} y mu_k(dy)
        let mut shift = model.drift_integral(0.0, t);
        for (p, mu) in jumps {
            let c = p.integral(0.0, t);
            for (s, m) in shift.iter_mut().zip(mu.first_moment(eps, 1.0)) {
                *s -= c * m;
            }
        }
        let bps = model.breakpoints();
        let mut pieces = Vec::new();
        for (i, w) in bps.windows(2).enumerate() {
            if w[0] >= t {
                break;
            }
            let (start, end) = (w[0], w[1].min(t));
            let mid = 0.5 * (start + end);
            let weights: Vec<f64> = jumps.iter().map(|(p, _)| p.value(mid)).collect();
            let rate: f64 = weights.iter().zip(&masses).map(|(c, m)| c * m).sum();
            let envelope = match &cfg.envelope {
                Some(env) => *env.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!("envelope has {} entries, model has more pieces", env.len()))
                })?,
                None => rate,
            };
            if rate > envelope * (1.0 + 1e-12) {
                return Err(Error::EnvelopeFail { t: mid, rate, envelope });
            }
            pieces.push(Piece { start, end, weights, rate, envelope });
        }
        Ok(Self { model, epsilon: eps, shift, pieces, masses })
    }

    /// One draw of `Z_t`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        let mut z = self.shift.clone();
        let jumps = self.model.jump_terms();
        for piece in &self.pieces {
            if piece.envelope <= 0.0 {
                continue;
            }
            let mut s = piece.start;
            loop {
                let u: f64 = rng.random();
                s += -ln(1.0 - u) / piece.envelope;
                if s >= piece.end {
                    break;
                }
                if piece.rate < piece.envelope && rng.random::<f64>() * piece.envelope >= piece.rate {
                    continue;
                }
                let mut pick = rng.random::<f64>() * piece.rate;
                let mut k = jumps.len() - 1;
                for (i, (c, m)) in piece.weights.iter().zip(&self.masses).enumerate() {
                    let w = c * m;
                    if pick < w {
                        k = i;
                        break;
                    }
                    pick -= w;
                }
                let y = jumps[k].1.sample_jump(self.epsilon, rng)?;
                for (zi, yi) in z.iter_mut().zip(y) {
                    *zi += yi;
                }
            }
        }
        Ok(z)
    }
}

/// `Z_t` for a single path (convenience wrapper around [`Sampler`]).
pub fn sample_increment<R: Rng + ?Sized>(model: &AdditiveModel, t: f64, cfg: &SimConfig, rng: &mut R) -> Result<Vec<f64>> {
    Sampler::new(model, t, cfg)?.sample(rng)
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Welford {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Welford) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * (self.n as f64 * o.n as f64) / n as f64;
        self.n = n;
    }

    /// Sample standard deviation over `sqrt(n)`.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        sqrt(self.m2 / (self.n - 1) as f64) / sqrt(self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
}

impl From<Welford> for McEstimate {
    fn from(w: Welford) -> Self {
        Self { mean: w.mean, stderr: w.stderr() }
    }
}

/// Accumulates `f(Z)` components over the paths of chunk `chunk`.
pub fn run_chunk(
    sampler: &Sampler<'_>,
    cfg: &SimConfig,
    chunk: usize,
    outputs: usize,
    f: &(dyn Fn(&[f64], &mut [f64]) + Sync),
) -> Result<Vec<Welford>> {
    let start = chunk * CHUNK;
    let end = ((chunk + 1) * CHUNK).min(cfg.n_paths);
    let mut acc = vec![Welford::default(); outputs];
    let mut buf = vec![0.0; outputs];
    for path in start..end {
        let mut rng = path_rng(cfg.seed, path as u64);
        let z = sampler.sample(&mut rng)?;
        f(&z, &mut buf);
        for (a, v) in acc.iter_mut().zip(&buf) {
            a.push(*v);
        }
    }
    Ok(acc)
}

/// Merges per-chunk accumulators in chunk order.
pub fn merge_chunks(chunks: &[Vec<Welford>]) -> Vec<Welford> {
    let mut out = chunks.first().cloned().unwrap_or_default();
    for c in chunks.iter().skip(1) {
        for (a, b) in out.iter_mut().zip(c) {
            a.merge(b);
        }
    }
    out
}

/// Estimates of `E[u0(x + Z_t)]` at each probe `x` (sequential over chunks).
pub fn estimate_expectations(
    model: &AdditiveModel,
    u0: &(dyn Fn(&[f64]) -> f64 + Sync),
    xs: &[Vec<f64>],
    t: f64,
    cfg: &SimConfig,
) -> Result<Vec<McEstimate>> {
    let sampler = Sampler::new(model, t, cfg)?;
    let f = probe_fn(u0, xs);
    let chunks = (0..cfg.chunks())
        .map(|c| run_chunk(&sampler, cfg, c, xs.len(), &f))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge_chunks(&chunks).into_iter().map(McEstimate::from).collect())
}

/// `(z, out) -> out[i] = u0(xs[i] + z)`.
pub fn probe_fn<'a>(
    u0: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    xs: &'a [Vec<f64>],
) -> impl Fn(&[f64], &mut [f64]) + Sync + 'a {
    move |z: &[f64], out: &mut [f64]| {
        let mut p = [0.0; 2];
        for (o, x) in out.iter_mut().zip(xs) {
            for (k, (xi, zi)) in x.iter().zip(z).enumerate() {
                p[k] = xi + zi;
            }
            *o = u0(&p[..x.len()]);
        }
    }
}

pub fn estimate_expectation(
    model: &AdditiveModel,
    u0: &(dyn Fn(&[f64]) -> f64 + Sync),
    x: &[f64],
    t: f64,
    cfg: &SimConfig,
) -> Result<McEstimate> {
    Ok(estimate_expectations(model, u0, &[x.to_vec()], t, cfg)?[0])
}

/// Empirical `E[exp(i xi . Z_t)]` with the standard error of its modulus
/// estimate `max(stderr re, stderr im)`.
pub fn empirical_char_fn(model: &AdditiveModel, xis: &[Vec<f64>], t: f64, cfg: &SimConfig) -> Result<Vec<(Complex64, f64)>> {
    let sampler = Sampler::new(model, t, cfg)?;
    let f = |z: &[f64], out: &mut [f64]| {
        for (i, xi) in xis.iter().enumerate() {
            let ph: f64 = xi.iter().zip(z).map(|(a, b)| a * b).sum();
            out[2 * i] = cos(ph);
            out[2 * i + 1] = sin(ph);
        }
    };
    let chunks = (0..cfg.chunks())
        .map(|c| run_chunk(&sampler, cfg, c, 2 * xis.len(), &f))
        .collect::<Result<Vec<_>>>()?;
    let acc = merge_chunks(&chunks);
    Ok(acc
        .chunks(2)
        .map(|w| (Complex64::new(w[0].mean, w[1].mean), w[0].stderr().max(w[1].stderr())))
        .collect())
}

/// `sigma^2(eps) = int_0^t int_{|y| <= eps} |y|^2 Lambda_r(dy) dr`, the size
/// of the dropped small-jump part.
pub fn truncation_variance(model: &AdditiveModel, t: f64, eps: f64) -> Result<f64> {
    let mut s = 0.0;
    for (p, mu) in model.jump_terms() {
        s += p.integral(0.0, t) * mu.second_moment(eps)?;
    }
    Ok(s)
}

/// The model whose simulation [`Sampler`] performs exactly: every Levy
/// measure restricted to `|y| > eps`.
pub fn truncated_model(model: &AdditiveModel, eps: f64) -> Result<AdditiveModel> {
    let mut out = AdditiveModel::new(model.dim(), model.horizon())?;
    for (p, v) in model.drift_terms() {
        out = out.with_drift(p.clone(), v.clone())?;
    }
    for (p, mu) in model.jump_terms() {
        let cut: LevyMeasure = mu.truncate_below(eps)?;
        out = out.with_jumps(p.clone(), cut)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
