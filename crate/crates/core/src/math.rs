//! Scalar special functions used by the symbol and propagator code.
//!
//! Thin wrappers over `libm` keep the call sites readable in a `no_std` crate.

use core::f64::consts::PI;

use num_complex::Complex64;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}
#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}
#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}
#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}
#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}
#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}
#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}
#[inline]
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}
#[inline]
pub fn bessel_j0(x: f64) -> f64 {
    libm::j0(x)
}
#[inline]
pub fn hypot(v: &[f64]) -> f64 {
    sqrt(v.iter().map(|x| x * x).sum())
}

/// `1 - cos(x)` without cancellation near zero.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        x2 * (0.5 - x2 / 24.0)
    } else {
        let h = sin(0.5 * x);
        2.0 * h * h
    }
}

/// `1 - J0(x)` without cancellation near zero.
#[inline]
pub fn one_minus_j0(x: f64) -> f64 {
    if x.abs() < 2.0 {
        // sum_{k>=1} (-1)^{k+1} (x^2/4)^k / (k!)^2
        let q = 0.25 * x * x;
        let mut term = q;
        let mut sum = q;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs() {
            k += 1.0;
            term *= -q / (k * k);
            sum += term;
        }
        sum
    } else {
        1.0 - bessel_j0(x)
    }
}

/// `e^z - 1` accurate for small `|z|`.
pub fn exp_m1(z: Complex64) -> Complex64 {
    let em1 = libm::expm1(z.re);
    let s = sin(0.5 * z.im);
    Complex64::new(em1 * cos(z.im) - 2.0 * s * s, (em1 + 1.0) * sin(z.im))
}

/// `(e^z - 1) / z` with the removable singularity at zero filled in.
pub fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-8 {
        Complex64::new(1.0, 0.0) + z * 0.5
    } else {
        exp_m1(z) / z
    }
}

/// `K(alpha) = int_0^inf (1 - cos u) u^{-1-alpha} du` for `alpha` in (0, 2).
pub fn stable_constant(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        return PI / 2.0;
    }
    // cos(pi alpha / 2) written as sin(pi (1 - alpha) / 2) to avoid cancellation at alpha ~ 1
    gamma(1.0 - alpha) * sin(0.5 * PI * (1.0 - alpha)) / alpha
}

/// `int_0^{2 pi} |cos theta|^alpha d theta`.
pub fn cos_power_integral(alpha: f64) -> f64 {
    2.0 * sqrt(PI) * gamma(0.5 * (alpha + 1.0)) / gamma(0.5 * alpha + 1.0)
}

const SERIES_LIMIT: f64 = 2.0;
const ASYMPTOTIC_START: f64 = 40.0;

/// `int_0^a (1 - cos u) u^{-1-alpha} du`.
pub fn stable_lower(alpha: f64, a: f64) -> f64 {
    if a <= 0.0 {
        0.0
    } else if a <= SERIES_LIMIT {
        lower_series(alpha, a)
    } else if a.is_infinite() {
        stable_constant(alpha)
    } else {
        stable_constant(alpha) - stable_upper(alpha, a)
    }
}

/// `int_a^inf (1 - cos u) u^{-1-alpha} du`.
pub fn stable_upper(alpha: f64, a: f64) -> f64 {
    if a.is_infinite() {
        0.0
    } else if a <= SERIES_LIMIT {
        stable_constant(alpha) - stable_lower(alpha, a)
    } else {
        powf(a, -alpha) / alpha - cosine_tail(1.0 + alpha, a)
    }
}

/// `int_lo^hi (1 - cos u) u^{-1-alpha} du` for `0 <= lo <= hi <= inf`.
pub fn stable_band(alpha: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    if lo > SERIES_LIMIT {
        stable_upper(alpha, lo) - stable_upper(alpha, hi)
    } else if hi.is_infinite() {
        stable_upper(alpha, lo)
    } else {
        stable_lower(alpha, hi) - stable_lower(alpha, lo)
    }
}

fn lower_series(alpha: f64, a: f64) -> f64 {
    // sum_{k>=1} (-1)^{k+1} a^{2k-alpha} / ((2k)! (2k - alpha))
    let a2 = a * a;
    let mut pow_fact = a2 / 2.0; // a^{2k} / (2k)!
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..40 {
        let kk = 2.0 * k as f64;
        let term = pow_fact / (kk - alpha);
        sum += sign * term;
        if term < 1e-18 * sum.abs() {
            break;
        }
        sign = -sign;
        pow_fact *= a2 / ((kk + 1.0) * (kk + 2.0));
    }
    sum * powf(a, -alpha)
}

/// `int_a^inf cos(u) u^{-beta} du` for `a > 0`, `beta > 1`.
pub fn cosine_tail(beta: f64, a: f64) -> f64 {
    if a >= ASYMPTOTIC_START {
        return oscillatory_asymptotic(beta, a).re;
    }
    let gl = crate::quad::GaussLegendre::new(16);
    let panels = libm::ceil(ASYMPTOTIC_START - a).max(1.0) as usize;
    let h = (ASYMPTOTIC_START - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        sum += gl.integrate(|u| cos(u) * powf(u, -beta), lo, lo + h);
    }
    sum + oscillatory_asymptotic(beta, ASYMPTOTIC_START).re
}

/// Asymptotic expansion of `int_a^inf e^{iu} u^{-beta} du` for large `a`.
fn oscillatory_asymptotic(beta: f64, a: f64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..60 {
        let next = term * Complex64::new(0.0, -(beta + k as f64) / a);
        if next.norm() >= term.norm() || next.norm() < 1e-18 {
            break;
        }
        term = next;
        sum += term;
    }
    Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, a) * powf(a, -beta) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{adaptive, Tolerance};

    fn brute_lower(alpha: f64, a: f64) -> f64 {
        // adaptive quadrature of the defining integral, panel by panel
        let tol = Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 4000 };
        let panels = libm::ceil(a / 0.5).max(1.0) as usize;
        let h = a / panels as f64;
        (0..panels)
            .map(|p| {
                let lo = h * p as f64;
                adaptive(|u| one_minus_cos(u) / (u * u) * powf(u, 1.0 - alpha), lo, lo + h, tol)
                    .unwrap()
                    .value
            })
            .sum()
    }

    #[test]
    fn stable_constant_at_one_is_half_pi() {
        assert!((stable_constant(1.0) - PI / 2.0).abs() < 1e-15);
        // continuity across alpha = 1
        assert!((stable_constant(1.0 + 1e-7) - PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn lower_matches_brute_force() {
        for &alpha in &[0.3, 0.8, 1.0, 1.5, 1.9] {
            for &a in &[0.1, 1.0, 2.0, 2.5, 7.0, 39.0, 41.0, 60.0] {
                let got = stable_lower(alpha, a);
                let want = brute_lower(alpha, a);
                assert!(
                    (got - want).abs() < 1e-10 * want.abs().max(1e-3),
                    "alpha={alpha} a={a}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn lower_tends_to_constant() {
        for &alpha in &[0.5, 1.0, 1.5] {
            let k = stable_constant(alpha);
            // the remaining tail is 1e6^{-alpha}/alpha up to O(1e6^{-1-alpha})
            let v = stable_lower(alpha, 1e6) + powf(1e6, -alpha) / alpha;
            assert!((v - k).abs() < 1e-8, "alpha={alpha}: {v} vs {k}");
            assert!((stable_band(alpha, 0.0, f64::INFINITY) - k).abs() < 1e-14);
        }
    }

    #[test]
    fn phi1_is_continuous_at_zero() {
        let small = phi1(Complex64::new(1e-6, 0.0));
        assert!((small.re - 1.0000005).abs() < 1e-12);
        let z = Complex64::new(-3.0, 0.5);
        assert!((phi1(z) - (z.exp() - 1.0) / z).norm() < 1e-15);
    }

    #[test]
    fn one_minus_j0_series_matches_direct() {
        for &x in &[0.5, 1.0, 1.999] {
            assert!((one_minus_j0(x) - (1.0 - bessel_j0(x))).abs() < 1e-15);
        }
        assert!((one_minus_j0(1e-4) - (2.5e-9 - 1.5625e-18)).abs() < 1e-24);
    }

    #[test]
    fn cos_power_integral_special_values() {
        // alpha = 2 gives pi, alpha = 0 gives 2 pi
        assert!((cos_power_integral(2.0) - PI).abs() < 1e-13);
        assert!((cos_power_integral(0.0) - 2.0 * PI).abs() < 1e-13);
    }
}
