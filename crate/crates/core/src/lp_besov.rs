//! Littlewood-Paley windows, scaled Besov norms and Bessel-potential norms.
//!
//! The window `zeta(r)` lives on `[1/n, n]`: with `u = log_n r` and the bump
//! `h(u) = exp(-1/(1-u^2))`, `zeta(r) = h(u) / sum_k h(u - k)`. Its dilates
//! `zeta(n^{-j} r)` sum to one on `(0, inf)`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::grid::{Domain, GridFunction, SpectralGrid};
use crate::levy::LevyMeasure;
use crate::math::{exp, floor, ln, powf};
use crate::scaling::ScalingTriple;
use crate::{Error, Result};

/// Minimal number of grid frequencies inside the support of block 1.
pub const MIN_FIRST_ANNULUS: usize = 8;
/// Share of the total carried by the last block above which the norm is flagged.
pub const TRUNCATION_SHARE: f64 = 1e-8;

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        exp(-1.0 / (1.0 - u * u))
    }
}

/// `zeta(r)` for base `n`.
pub fn zeta_hat(n: f64, r: f64) -> f64 {
    if !(r > 0.0) {
        return 0.0;
    }
    let u = ln(r) / ln(n);
    let h = bump(u);
    if h == 0.0 {
        return 0.0;
    }
    // only the two integers within distance 1 of u contribute besides u itself
    let k = floor(u);
    let denom = bump(u - k) + bump(u - k - 1.0) + bump(u - k + 1.0);
    h / denom
}

/// `1 - sum_{j >= 1} zeta(n^{-j} r)`, the low-frequency window. On `(1, n)`
/// only `zeta(r)` and `zeta(r/n)` are active, so it equals `zeta(r)` there;
/// writing it that way keeps its support exactly `[0, n]`.
pub fn phi0_hat(n: f64, r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= n {
        0.0
    } else {
        zeta_hat(n, r)
    }
}

/// Windows realized on a grid.
#[derive(Debug, Clone)]
pub struct LPFamily {
    n: u64,
    grid: SpectralGrid,
    j_max: u32,
    /// `windows[j][idx]` for `j = 0..=j_max`.
    windows: Vec<Vec<f64>>,
    /// `1 - sum_j windows[j]`: frequencies beyond the last block.
    residual: Vec<f64>,
}

impl LPFamily {
    pub fn build(n: u64, grid: &SpectralGrid) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("Littlewood-Paley base {n} must be >= 2")));
        }
        let nf = n as f64;
        let norms = grid.frequency_norms();
        let in_first = norms.iter().filter(|&&r| r >= 1.0 && r <= nf * nf).count();
        if in_first < MIN_FIRST_ANNULUS {
            return Err(Error::GridTooCoarse {
                detail: format!(
                    "{in_first} grid frequencies in the first annulus [1, {}] (need {MIN_FIRST_ANNULUS})",
                    nf * nf
                ),
            });
        }
        let lg = floor(ln(grid.nyquist()) / ln(nf) + 1e-12);
        if lg < 2.0 {
            return Err(Error::GridTooCoarse { detail: format!("Nyquist {} leaves no full block", grid.nyquist()) });
        }
        let j_max = lg as u32 - 1;
        let mut windows = Vec::with_capacity(j_max as usize + 1);
        windows.push(norms.iter().map(|&r| phi0_hat(nf, r)).collect::<Vec<f64>>());
        for j in 1..=j_max {
            let scale = powf(nf, -(j as f64));
            windows.push(norms.iter().map(|&r| zeta_hat(nf, r * scale)).collect());
        }
        let residual = (0..norms.len()).map(|i| 1.0 - windows.iter().map(|w| w[i]).sum::<f64>()).collect();
        Ok(Self { n, grid: *grid, j_max, windows, residual })
    }

    pub fn base(&self) -> u64 {
        self.n
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn window(&self, j: u32) -> &[f64] {
        &self.windows[j as usize]
    }

    /// Window values above the last realized block.
    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    /// `zeta(r/n) + zeta(r) + zeta(n r)`, which equals 1 on `[1/n, n]`.
    pub fn tilde_window(&self, r: f64) -> f64 {
        let nf = self.n as f64;
        zeta_hat(nf, r / nf) + zeta_hat(nf, r) + zeta_hat(nf, r * nf)
    }

    /// `max |1 - sum_j zeta(n^{-j} |xi|)|` over grid frequencies with
    /// `1/n <= |xi| <= n^{j_max - 1}`, summing all `j` whose window can be nonzero.
    pub fn partition_deviation(&self) -> f64 {
        let nf = self.n as f64;
        let hi = powf(nf, self.j_max as f64 - 1.0);
        self.grid
            .frequency_norms()
            .into_iter()
            .filter(|&r| r >= 1.0 / nf && r <= hi)
            .map(|r| {
                let j0 = floor(ln(r) / ln(nf)) as i64;
                let s: f64 = (j0 - 1..=j0 + 1).map(|j| zeta_hat(nf, r * powf(nf, -(j as f64)))).sum();
                (1.0 - s).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `max |1 - phi0 - sum_{j=1}^{j_max} phi_j|` below the truncation shoulder.
    pub fn telescoping_deviation(&self) -> f64 {
        let hi = powf(self.n as f64, self.j_max as f64 - 1.0);
        self.grid
            .frequency_norms()
            .iter()
            .zip(&self.residual)
            .filter(|(&r, _)| r <= hi)
            .map(|(_, d)| d.abs())
            .fold(0.0, f64::max)
    }

    /// `||f * phi_j||_p` for `j = 0..=j_max`, plus the norm of the part above the last block.
    pub fn block_norms(&self, f: &GridFunction, p: f64) -> Result<(Vec<f64>, f64)> {
        if f.grid() != &self.grid {
            return Err(Error::InvalidInput("function and family live on different grids".into()));
        }
        let hat = f.in_domain(Domain::Frequency)?;
        let block = |w: &[f64]| -> Result<f64> {
            let vals: Vec<Complex64> = hat.values().iter().zip(w).map(|(v, x)| v * *x).collect();
            GridFunction::new(self.grid, Domain::Frequency, vals)?.from_frequency()?.lp_norm(p)
        };
        let norms = self.windows.iter().map(|w| block(w)).collect::<Result<Vec<f64>>>()?;
        let rest = block(&self.residual)?;
        Ok((norms, rest))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
}

impl BesovParams {
    fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || self.p.is_infinite() {
            return Err(Error::InvalidInput(format!("Besov p = {} must lie in [1, inf)", self.p)));
        }
        if !(self.q > 0.0) {
            return Err(Error::InvalidInput(format!("Besov q = {} must be positive", self.q)));
        }
        if !self.gamma.is_finite() {
            return Err(Error::InvalidInput("Besov order must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRow {
    pub j: u32,
    pub weight: f64,
    pub block_norm: f64,
    /// `(weight * block_norm)^q`, or `weight * block_norm` for `q = inf`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BesovReport {
    pub norm: f64,
    pub blocks: Vec<BlockRow>,
    /// `||f * phi_0||_p`.
    pub low: f64,
    /// `L_p` norm of the frequencies above block `j_max`.
    pub beyond: f64,
    pub truncation_warning: bool,
}

/// Besov norm with block weights `weight(j)` for `j >= 1`.
pub fn weighted_besov(
    f: &GridFunction,
    family: &LPFamily,
    p: f64,
    q: f64,
    weight: impl Fn(u32) -> f64,
) -> Result<BesovReport> {
    BesovParams { p, q, gamma: 0.0 }.validate()?;
    let (norms, beyond) = family.block_norms(f, p)?;
    let mut blocks = Vec::with_capacity(norms.len() - 1);
    for (j, &b) in norms.iter().enumerate().skip(1) {
        let w = weight(j as u32);
        let c = if q.is_infinite() { w * b } else { powf(w * b, q) };
        blocks.push(BlockRow { j: j as u32, weight: w, block_norm: b, contribution: c });
    }
    let high = if q.is_infinite() {
        blocks.iter().map(|b| b.contribution).fold(0.0, f64::max)
    } else {
        powf(blocks.iter().map(|b| b.contribution).sum::<f64>(), 1.0 / q)
    };
    let total: f64 = blocks.iter().map(|b| b.contribution).sum();
    let last = blocks.last().map(|b| b.contribution).unwrap_or(0.0);
    let lp = f.in_domain(Domain::Space)?.lp_norm(p)?;
    let truncation_warning = (total > 0.0 && last > TRUNCATION_SHARE * total) || beyond > TRUNCATION_SHARE * lp;
    Ok(BesovReport { norm: norms[0] + high, blocks, low: norms[0], beyond, truncation_warning })
}

/// `||f * phi_0||_p + (sum_j s(c_s^{-j})^{-gamma q / 2} ||f * phi_j||_p^q)^{1/q}`.
pub fn besov_norm(
    f: &GridFunction,
    params: BesovParams,
    triple: &ScalingTriple,
    family: &LPFamily,
) -> Result<BesovReport> {
    params.validate()?;
    if family.base() != triple.c_s {
        return Err(Error::InvalidInput(format!(
            "family base {} differs from c_s = {}",
            family.base(),
            triple.c_s
        )));
    }
    let g = params.gamma;
    weighted_besov(f, family, params.p, params.q, |j| powf(triple.block_scale(j), -0.5 * g))
}

/// Classical Besov norm of order `sigma`: block weights `n^{j sigma}`.
pub fn classical_besov_norm(f: &GridFunction, p: f64, q: f64, sigma: f64, family: &LPFamily) -> Result<BesovReport> {
    let n = family.base() as f64;
    weighted_besov(f, family, p, q, |j| powf(n, j as f64 * sigma))
}

fn multiplier_norm(f: &GridFunction, p: f64, m: Vec<Complex64>) -> Result<f64> {
    f.in_domain(Domain::Space)?.apply_multiplier(&m)?.lp_norm(p)
}

fn symmetrized_on_grid(grid: &SpectralGrid, mu: &LevyMeasure) -> Result<Vec<f64>> {
    if mu.dim() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: mu.dim() });
    }
    Ok(mu.symbols_at(&grid.frequency_points())?.into_iter().map(|z| z.re.min(0.0)).collect())
}

/// `||(1 - psi(D))^{gamma/2} f||_p` with `psi` the symmetrized symbol of `mu`.
pub fn bessel_norm(f: &GridFunction, p: f64, gamma: f64, mu: &LevyMeasure) -> Result<f64> {
    if gamma == 0.0 {
        return f.in_domain(Domain::Space)?.lp_norm(p);
    }
    let m = symmetrized_on_grid(f.grid(), mu)?
        .into_iter()
        .map(|s| Complex64::new(powf(1.0 - s, 0.5 * gamma), 0.0))
        .collect();
    multiplier_norm(f, p, m)
}

/// `||(-psi(D))^{gamma/2} f||_p`.
pub fn bessel_seminorm(f: &GridFunction, p: f64, gamma: f64, mu: &LevyMeasure) -> Result<f64> {
    if gamma == 0.0 {
        return f.in_domain(Domain::Space)?.lp_norm(p);
    }
    let m = symmetrized_on_grid(f.grid(), mu)?
        .into_iter()
        .map(|s| Complex64::new(powf(-s, 0.5 * gamma), 0.0))
        .collect();
    multiplier_norm(f, p, m)
}

/// `||(1 + |D|^2)^{gamma/2} f||_p`.
pub fn classical_bessel_norm(f: &GridFunction, p: f64, gamma: f64) -> Result<f64> {
    if gamma == 0.0 {
        return f.in_domain(Domain::Space)?.lp_norm(p);
    }
    let m = f
        .grid()
        .frequency_norms()
        .into_iter()
        .map(|r| Complex64::new(powf(1.0 + r * r, 0.5 * gamma), 0.0))
        .collect();
    multiplier_norm(f, p, m)
}
