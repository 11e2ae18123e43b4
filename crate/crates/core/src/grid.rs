//! Periodic spectral grids on the torus `[-L/2, L/2)^d`.
//!
//! Frequency coefficients are normalized as
//! `c_k = N^{-d} sum_n f(x_n) exp(-i xi_k . x_n)` with `xi_k = 2 pi k / L`, so
//! `exp(i xi_k . x)` maps to a unit coefficient at `k` and
//! `f(x) = sum_k c_k exp(i xi_k . x)`. On `R^d` this corresponds to
//! `F f(xi) ~ L^d c_k`.
//!
//! Coefficients are stored row-major in FFT order along each axis: storage
//! index `i` holds `k = i` for `i < N/2` and `k = i - N` otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math::{cos, powf, sin};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Space,
    Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl SpectralGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidInput(alloc::format!("grid dimension {dim} not supported (1 or 2)")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(alloc::format!("grid size {n} must be a power of two >= 2")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidInput(alloc::format!("torus length {length} must be positive")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        powf(self.spacing(), self.dim as f64)
    }

    pub fn volume(&self) -> f64 {
        powf(self.length, self.dim as f64)
    }

    /// `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.n as f64 / self.length
    }

    /// `2 pi / L`.
    pub fn frequency_step(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + self.spacing() * i as f64
    }

    /// Signed wavenumber index stored at position `i` along an axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Storage position of the signed wavenumber `k`.
    pub fn storage_index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else if k >= 0 {
            Some(k as usize)
        } else {
            Some((k + self.n as i64) as usize)
        }
    }

    pub fn frequency(&self, i: usize) -> f64 {
        self.frequency_step() * self.wavenumber(i) as f64
    }

    /// Per-axis storage positions of the flat index `idx`.
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    pub fn flat(&self, axes: &[usize]) -> usize {
        if self.dim == 1 {
            axes[0]
        } else {
            axes[0] * self.n + axes[1]
        }
    }

    /// All space points, stride `dim`.
    pub fn space_points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim);
        for idx in 0..self.len() {
            let a = self.axes(idx);
            for &i in a.iter().take(self.dim) {
                out.push(self.coordinate(i));
            }
        }
        out
    }

    /// All frequencies in storage order, stride `dim`.
    pub fn frequency_points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim);
        for idx in 0..self.len() {
            let a = self.axes(idx);
            for &i in a.iter().take(self.dim) {
                out.push(self.frequency(i));
            }
        }
        out
    }

    /// `|xi|` at every storage index.
    pub fn frequency_norms(&self) -> Vec<f64> {
        self.frequency_points().chunks(self.dim).map(crate::math::hypot).collect()
    }

    /// Frequencies with their Nyquist aliases: a storage index on the Nyquist
    /// line of an axis stands for both `+pi N/L` and `-pi N/L` there. Returns
    /// the points (stride `dim`) and, per storage index, the `(start, count)`
    /// of its alias group.
    pub fn alias_points(&self) -> (Vec<f64>, Vec<(usize, usize)>) {
        let half = self.n / 2;
        let nyq = self.nyquist();
        let mut pts = Vec::with_capacity(self.len() * self.dim + 4 * self.n);
        let mut groups = Vec::with_capacity(self.len());
        for idx in 0..self.len() {
            let a = self.axes(idx);
            let start = pts.len() / self.dim;
            let opts = |i: usize| -> ([f64; 2], usize) {
                if i == half {
                    ([-nyq, nyq], 2)
                } else {
                    ([self.frequency(i), 0.0], 1)
                }
            };
            let (x0, n0) = opts(a[0]);
            if self.dim == 1 {
                pts.extend_from_slice(&x0[..n0]);
                groups.push((start, n0));
            } else {
                let (x1, n1) = opts(a[1]);
                for u in &x0[..n0] {
                    for v in &x1[..n1] {
                        pts.push(*u);
                        pts.push(*v);
                    }
                }
                groups.push((start, n0 * n1));
            }
        }
        (pts, groups)
    }

    /// Averages values over each alias group from [`SpectralGrid::alias_points`].
    pub fn combine_aliases(values: &[Complex64], groups: &[(usize, usize)]) -> Vec<Complex64> {
        groups
            .iter()
            .map(|&(s, c)| values[s..s + c].iter().sum::<Complex64>() / c as f64)
            .collect()
    }

    /// Evaluates `m` at every grid frequency, averaging over Nyquist aliases
    /// so that multipliers with `m(-xi) = conj m(xi)` keep real data real.
    pub fn multiplier_values(&self, m: impl Fn(&[f64]) -> Complex64) -> Result<Vec<Complex64>> {
        let (pts, groups) = self.alias_points();
        let raw: Vec<Complex64> = pts.chunks(self.dim).map(m).collect();
        let vals = Self::combine_aliases(&raw, &groups);
        if let Some(index) = vals.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonfiniteMultiplier { index });
        }
        Ok(vals)
    }
}

/// Values on a [`SpectralGrid`] tagged with their domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: SpectralGrid,
    domain: Domain,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: SpectralGrid, domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        Ok(Self { grid, domain, values })
    }

    pub fn zeros(grid: SpectralGrid, domain: Domain) -> Self {
        Self { grid, domain, values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Samples a real function at the space points.
    pub fn from_real_fn(grid: SpectralGrid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = grid.space_points().chunks(grid.dim).map(|x| Complex64::new(f(x), 0.0)).collect();
        Self { grid, domain: Domain::Space, values }
    }

    pub fn from_fn(grid: SpectralGrid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = grid.space_points().chunks(grid.dim).map(f).collect();
        Self { grid, domain: Domain::Space, values }
    }

    /// `exp(i xi_k . x)` sampled in space, for signed wavenumbers `k`.
    pub fn single_mode(grid: SpectralGrid, k: &[i64]) -> Result<Self> {
        if k.len() != grid.dim {
            return Err(Error::DimensionMismatch { expected: grid.dim, found: k.len() });
        }
        let step = grid.frequency_step();
        Ok(Self::from_fn(grid, |x| {
            let ph: f64 = x.iter().zip(k).map(|(xi, ki)| step * *ki as f64 * xi).sum();
            Complex64::new(cos(ph), sin(ph))
        }))
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn expect(&self, domain: Domain) -> Result<()> {
        if self.domain != domain {
            return Err(Error::DomainTag { expected: domain, found: self.domain });
        }
        Ok(())
    }

    pub fn to_frequency(&self) -> Result<Self> {
        self.expect(Domain::Space)?;
        let mut v = self.values.clone();
        transform(&self.grid, &mut v, false);
        Ok(Self { grid: self.grid, domain: Domain::Frequency, values: v })
    }

    pub fn from_frequency(&self) -> Result<Self> {
        self.expect(Domain::Frequency)?;
        let mut v = self.values.clone();
        transform(&self.grid, &mut v, true);
        Ok(Self { grid: self.grid, domain: Domain::Space, values: v })
    }

    /// Same function in `domain`, transforming if needed.
    pub fn in_domain(&self, domain: Domain) -> Result<Self> {
        match (self.domain, domain) {
            (Domain::Space, Domain::Frequency) => self.to_frequency(),
            (Domain::Frequency, Domain::Space) => self.from_frequency(),
            _ => Ok(self.clone()),
        }
    }

    /// Pointwise multiplication by `m` in frequency. The result is in the same
    /// domain as the input.
    pub fn apply_multiplier(&self, m: &[Complex64]) -> Result<Self> {
        if m.len() != self.grid.len() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), found: m.len() });
        }
        if let Some(index) = m.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonfiniteMultiplier { index });
        }
        let mut f = self.in_domain(Domain::Frequency)?;
        for (v, w) in f.values.iter_mut().zip(m) {
            *v *= w;
        }
        f.in_domain(self.domain)
    }

    /// `(h^d sum |f|^p)^{1/p}`, or the maximum for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.expect(Domain::Space)?;
        if !(p >= 1.0) {
            return Err(Error::InvalidInput(alloc::format!("L_p exponent {p} must be >= 1")));
        }
        if p.is_infinite() {
            return Ok(self.values.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
        let s: f64 = if p == 2.0 {
            self.values.iter().map(|v| v.norm_sqr()).sum()
        } else if p == 1.0 {
            self.values.iter().map(|v| v.norm()).sum()
        } else {
            self.values.iter().map(|v| powf(v.norm(), p)).sum()
        };
        Ok(powf(s * self.grid.cell_volume(), 1.0 / p))
    }

    /// `(L^d sum |c_k|^2)^{1/2}`, equal to the `L_2` norm of the space values.
    pub fn l2_from_frequency(&self) -> Result<f64> {
        self.expect(Domain::Frequency)?;
        let s: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        Ok(libm::sqrt(s * self.grid.volume()))
    }

    /// `h^d sum f`, the Riemann sum of the space values.
    pub fn integral(&self) -> Result<Complex64> {
        self.expect(Domain::Space)?;
        Ok(self.values.iter().sum::<Complex64>() * self.grid.cell_volume())
    }

    /// Periodic convolution `int f(x - y) g(y) dy`; the result is in space.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("convolution of functions on different grids".into()));
        }
        let a = self.in_domain(Domain::Frequency)?;
        let b = other.in_domain(Domain::Frequency)?;
        let vol = self.grid.volume();
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x * y * vol).collect();
        Self { grid: self.grid, domain: Domain::Frequency, values }.from_frequency()
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { grid: self.grid, domain: self.domain, values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.domain != other.domain {
            return Err(Error::InvalidInput("subtraction of incompatible grid functions".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid, domain: self.domain, values })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }
}

fn transform(grid: &SpectralGrid, v: &mut [Complex64], inverse: bool) {
    let n = grid.n;
    let tw = twiddles(n, inverse);
    let sign = |i: usize| if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    if grid.dim == 1 {
        if inverse {
            for (i, x) in v.iter_mut().enumerate() {
                *x *= sign(i);
            }
        }
        fft(v, &tw);
        if !inverse {
            let inv = 1.0 / n as f64;
            for (i, x) in v.iter_mut().enumerate() {
                *x *= sign(i) * inv;
            }
        }
        return;
    }
    if inverse {
        for (idx, x) in v.iter_mut().enumerate() {
            *x *= sign(idx / n + idx % n);
        }
    }
    for row in v.chunks_mut(n) {
        fft(row, &tw);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for c in 0..n {
        for r in 0..n {
            col[r] = v[r * n + c];
        }
        fft(&mut col, &tw);
        for r in 0..n {
            v[r * n + c] = col[r];
        }
    }
    if !inverse {
        let inv = 1.0 / (n * n) as f64;
        for (idx, x) in v.iter_mut().enumerate() {
            *x *= sign(idx / n + idx % n) * inv;
        }
    }
}

fn twiddles(n: usize, inverse: bool) -> Vec<Complex64> {
    let s = if inverse { 1.0 } else { -1.0 };
    (0..n / 2)
        .map(|k| {
            let a = s * 2.0 * PI * k as f64 / n as f64;
            Complex64::new(cos(a), sin(a))
        })
        .collect()
}

/// Unnormalized iterative radix-2 transform, `sum_n x_n w^{kn}` with the
/// twiddle sign baked into `tw`.
fn fft(x: &mut [Complex64], tw: &[Complex64]) {
    let n = x.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            x.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = tw[k * step];
                let a = x[start + k];
                let b = x[start + k + len / 2] * w;
                x[start + k] = a + b;
                x[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::exp;
    use proptest::prelude::*;

    fn grid1() -> SpectralGrid {
        SpectralGrid::new(1, 64, 2.0 * PI).unwrap()
    }

    #[test]
    fn single_mode_is_unit_coefficient() {
        for dim in [1, 2] {
            let g = SpectralGrid::new(dim, 32, 7.0).unwrap();
            let k: Vec<i64> = if dim == 1 { vec![-5] } else { vec![3, -16] };
            let f = GridFunction::single_mode(g, &k).unwrap().to_frequency().unwrap();
            let idx: Vec<usize> = k.iter().map(|&x| g.storage_index(x).unwrap()).collect();
            let target = g.flat(&idx);
            for (i, v) in f.values().iter().enumerate() {
                let want = if i == target { 1.0 } else { 0.0 };
                assert!((v - Complex64::new(want, 0.0)).norm() < 1e-12, "dim {dim} index {i}: {v}");
            }
        }
    }

    #[test]
    fn domain_tags_are_enforced() {
        let f = GridFunction::zeros(grid1(), Domain::Frequency);
        assert!(matches!(f.to_frequency(), Err(Error::DomainTag { .. })));
        assert!(matches!(f.lp_norm(2.0), Err(Error::DomainTag { .. })));
    }

    #[test]
    fn lp_norm_examples() {
        let g = SpectralGrid::new(2, 16, 3.0).unwrap();
        let one = GridFunction::from_real_fn(g, |_| 1.0);
        for p in [1.0, 2.0, 3.5] {
            assert!((one.lp_norm(p).unwrap() - powf(9.0, 1.0 / p)).abs() < 1e-12);
        }
        let half = GridFunction::from_real_fn(g, |x| if x[0] < 0.0 { 1.0 } else { 0.0 });
        assert!((half.lp_norm(1.0).unwrap() - 4.5).abs() < 1e-12);
        // Gaussian e^{-|x|^2/2} in d=1: L2 norm pi^{1/4}
        let g1 = SpectralGrid::new(1, 256, 40.0).unwrap();
        let gauss = GridFunction::from_real_fn(g1, |x| exp(-0.5 * x[0] * x[0]));
        assert!((gauss.lp_norm(2.0).unwrap() - powf(PI, 0.25)).abs() < 1e-6);
    }

    #[test]
    fn multiplier_on_single_mode() {
        let g = grid1();
        let f = GridFunction::single_mode(g, &[3]).unwrap();
        let m = g.multiplier_values(|xi| Complex64::new(-libm::fabs(xi[0]), 0.0)).unwrap();
        let out = f.apply_multiplier(&m).unwrap();
        let want = f.scale(-3.0);
        assert!(out.sub(&want).unwrap().max_abs() < 1e-12);
        let bad = vec![Complex64::new(f64::NAN, 0.0); g.len()];
        assert!(matches!(f.apply_multiplier(&bad), Err(Error::NonfiniteMultiplier { index: 0 })));
    }

    #[test]
    fn nyquist_alias_average_keeps_real_data_real() {
        let g = SpectralGrid::new(1, 16, 5.0).unwrap();
        let f = GridFunction::from_real_fn(g, |x| if x[0].abs() < 0.3 { 1.0 } else { 0.0 });
        let m = g.multiplier_values(|xi| Complex64::new(0.0, 0.7 * xi[0]).exp()).unwrap();
        assert!(f.apply_multiplier(&m).unwrap().max_imag() < 1e-14);
    }

    fn arb_values(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(v in arb_values(256), two_d in any::<bool>()) {
            let g = if two_d { SpectralGrid::new(2, 16, 3.0).unwrap() } else { SpectralGrid::new(1, 256, 11.0).unwrap() };
            let f = GridFunction::new(g, Domain::Space, v.iter().map(|&(a, b)| Complex64::new(a, b)).collect()).unwrap();
            let hat = f.to_frequency().unwrap();
            let back = hat.from_frequency().unwrap();
            prop_assert!(back.sub(&f).unwrap().max_abs() < 1e-12);
            let l2 = f.lp_norm(2.0).unwrap();
            prop_assert!((hat.l2_from_frequency().unwrap() - l2).abs() <= 1e-10 * l2);
        }

        #[test]
        fn real_input_has_hermitian_coefficients(v in proptest::collection::vec(-1.0..1.0f64, 64)) {
            let g = SpectralGrid::new(1, 64, 4.0).unwrap();
            let f = GridFunction::new(g, Domain::Space, v.iter().map(|&a| Complex64::new(a, 0.0)).collect()).unwrap();
            let hat = f.to_frequency().unwrap();
            for i in 1..64 {
                let j = 64 - i;
                prop_assert!((hat.values()[i] - hat.values()[j].conj()).norm() < 1e-13);
            }
        }

        #[test]
        fn multipliers_compose(v in proptest::collection::vec(-1.0..1.0f64, 64), a in 0.0..2.0f64, b in -1.0..1.0f64) {
            let g = SpectralGrid::new(1, 64, 9.0).unwrap();
            let f = GridFunction::new(g, Domain::Space, v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap();
            let m1 = g.multiplier_values(|xi| Complex64::new(-a * xi[0].abs(), 0.0).exp()).unwrap();
            let m2 = g.multiplier_values(|xi| Complex64::new(1.0, b * xi[0])).unwrap();
            let two = f.apply_multiplier(&m1).unwrap().apply_multiplier(&m2).unwrap();
            let prod: Vec<Complex64> = m1.iter().zip(&m2).map(|(x, y)| x * y).collect();
            let one = f.apply_multiplier(&prod).unwrap();
            prop_assert!(two.sub(&one).unwrap().max_abs() < 1e-12);
        }

        #[test]
        fn lp_norm_homogeneous(v in proptest::collection::vec(-1.0..1.0f64, 32), c in -5.0..5.0f64, p in 1.0..6.0f64) {
            let g = SpectralGrid::new(1, 32, 2.0).unwrap();
            let f = GridFunction::new(g, Domain::Space, v.iter().map(|&x| Complex64::new(x, 0.0)).collect()).unwrap();
            let lhs = f.scale(c).lp_norm(p).unwrap();
            let rhs = c.abs() * f.lp_norm(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        }
    }
}
