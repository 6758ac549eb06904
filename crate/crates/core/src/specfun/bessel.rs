//! Bessel functions of the first kind (orders 0 and 1) and the exponentially
//! scaled modified Bessel function of order 0.

use std::f64::consts::PI;

use crate::error::{ensure_finite, FasError, Result};

/// Upper end of the ascending-series range for J0/J1.
const SERIES_LIMIT: f64 = 8.0;
/// Lower end of the Hankel asymptotic range for J0/J1.
const ASYMPTOTIC_LIMIT: f64 = 25.0;
/// Node count of the periodic trapezoid rule used between the two.
const TRAPEZOID_NODES: usize = 128;
/// Switch from the ascending series to the asymptotic form for e^-x I0(x).
const I0_ASYMPTOTIC_LIMIT: f64 = 30.0;

/// Zero-order Bessel function of the first kind.
pub fn bessel_j0(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(j0_unchecked(x))
}

/// First-order Bessel function of the first kind.
pub fn bessel_j1(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(j1_unchecked(x))
}

pub(crate) fn j0_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    if ax <= SERIES_LIMIT {
        j_series(0, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        j_trapezoid(0, ax)
    } else {
        j_hankel(0, ax)
    }
}

pub(crate) fn j1_unchecked(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= SERIES_LIMIT {
        j_series(1, ax)
    } else if ax < ASYMPTOTIC_LIMIT {
        j_trapezoid(1, ax)
    } else {
        j_hankel(1, ax)
    };
    if x < 0.0 {
        -v
    } else {
        v
    }
}

fn j_series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let (mut term, lead) = if order == 0 { (1.0, 1.0) } else { (1.0, 0.5 * x) };
    let mut sum = term;
    for k in 1..200u32 {
        term *= q / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    lead * sum
}

/// J_n(x) = (1/2pi) * integral over one period of cos(n*t - x*sin t).
/// The integrand is periodic and analytic, so the trapezoid rule converges
/// geometrically; the aliasing error is of order J_{128}(x).
fn j_trapezoid(order: u32, x: f64) -> f64 {
    let n = f64::from(order);
    let h = 2.0 * PI / TRAPEZOID_NODES as f64;
    let sum: f64 = (0..TRAPEZOID_NODES)
        .map(|j| {
            let t = h * j as f64;
            (n * t - x * t.sin()).cos()
        })
        .sum();
    sum / TRAPEZOID_NODES as f64
}

fn j_hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(order * order);
    let chi = x - (0.5 * f64::from(order) + 0.25) * PI;
    let (p, q) = hankel_pq(mu, x);
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Asymptotic P and Q series; truncated at the smallest term.
fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60u32 {
        let kf = f64::from(k);
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if a.abs() >= last || a.abs() < 1e-18 {
            break;
        }
        last = a.abs();
        // a_k carries (-1)^floor(k/2) in P (even k) and Q (odd k)
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
    }
    (p, q)
}

/// Exponentially scaled modified Bessel function e^{-x} I0(x) for x >= 0.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    if x < 0.0 {
        return Err(FasError::Domain(format!(
            "bessel_i0_scaled requires x >= 0, got {x}"
        )));
    }
    Ok(i0_scaled_unchecked(x))
}

pub(crate) fn i0_scaled_unchecked(x: f64) -> f64 {
    if x <= I0_ASYMPTOTIC_LIMIT {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200u32 {
            let kf = f64::from(k);
            term *= q / (kf * kf);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        sum * (-x).exp()
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..60u32 {
            let kf = f64::from(k);
            let next = term * (2.0 * kf - 1.0).powi(2) / (8.0 * kf * x);
            if next >= term || next < 1e-18 * sum {
                break;
            }
            term = next;
            sum += term;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Ratios I_k(z) / I_{k-1}(z) for k = 1..=kmax, by the backward continued
/// fraction r_k = 1 / (2k/z + r_{k+1}). Index 0 of the result holds r_1.
pub(crate) fn i_ratios(z: f64, kmax: usize) -> Vec<f64> {
    debug_assert!(z > 0.0);
    let start = kmax + 40 + (8.0 * z.sqrt()) as usize;
    let mut r = 0.0;
    let mut out = vec![0.0; kmax];
    for k in (1..=start).rev() {
        r = 1.0 / (2.0 * k as f64 / z + r);
        if k <= kmax {
            out[k - 1] = r;
        }
    }
    out
}
