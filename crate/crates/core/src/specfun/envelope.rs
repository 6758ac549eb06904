//! Envelope inverse of J0: the smallest `eps*` such that `|J0(eps)| <= target`
//! for every `eps >= eps*`.
//!
//! The local extrema of J0 sit at the zeros of J1, one between each pair of
//! consecutive J0 zeros, and their magnitudes decrease monotonically. The
//! search walks the extrema until the first one at or below `target`; the
//! last crossing of the level then lies on the falling arc between the
//! previous extremum and the J0 zero that follows it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::bessel::{j0_unchecked, j1_unchecked};
use crate::error::{FasError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeInverseSettings {
    /// Absolute tolerance on `eps*`.
    pub tolerance: f64,
    /// Number of J0 extrema the walk may visit before giving up.
    pub max_extrema: usize,
}

impl Default for EnvelopeInverseSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_extrema: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeInverseResult {
    pub epsilon_star: f64,
    /// True when an extremum at or below the target was located, so every
    /// later lobe is certified to stay under it.
    pub achieved: bool,
}

pub fn inv_besselj0_envelope(target: f64) -> Result<EnvelopeInverseResult> {
    inv_besselj0_envelope_with(target, &EnvelopeInverseSettings::default())
}

pub fn inv_besselj0_envelope_with(
    target: f64,
    settings: &EnvelopeInverseSettings,
) -> Result<EnvelopeInverseResult> {
    if !target.is_finite() || target <= 0.0 {
        return Err(FasError::Domain(format!(
            "envelope target must be positive, got {target}"
        )));
    }
    if target >= 1.0 {
        return Ok(EnvelopeInverseResult {
            epsilon_star: 0.0,
            achieved: true,
        });
    }

    // Extremum m = 0 is the global maximum J0(0) = 1.
    let mut prev_extremum = 0.0;
    for m in 1..=settings.max_extrema {
        let zero_before = j0_zero(m);
        let zero_after = j0_zero(m + 1);
        let extremum = bisect(j1_unchecked, zero_before, zero_after, settings.tolerance);
        if j0_unchecked(extremum).abs() <= target {
            // |J0| falls from > target at prev_extremum to 0 at zero_before.
            let level = |x: f64| j0_unchecked(x).abs() - target;
            let eps = bisect(level, prev_extremum, zero_before, settings.tolerance);
            return Ok(EnvelopeInverseResult {
                epsilon_star: eps,
                achieved: true,
            });
        }
        prev_extremum = extremum;
    }
    Err(FasError::Numerical(format!(
        "no J0 extremum below {target} within {} lobes",
        settings.max_extrema
    )))
}

/// The m-th positive zero of J0 (m >= 1), bracketed around McMahon's
/// estimate `(m - 1/4) pi`.
pub fn j0_zero(m: usize) -> f64 {
    let guess = (m as f64 - 0.25) * PI;
    bisect(j0_unchecked, guess - 0.3, guess + 0.3, 1e-15 * guess.max(1.0))
}

/// Bisection on a bracket with a sign change; returns the midpoint once the
/// bracket is narrower than `tol`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    debug_assert!(f_lo * f(hi) < 0.0, "bracket [{lo}, {hi}] has no sign change");
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zeros() {
        assert!((j0_zero(1) - 2.404_825_557_695_772_8).abs() < 1e-14);
        assert!((j0_zero(2) - 5.520_078_110_286_311).abs() < 1e-13);
        assert!((j0_zero(1000) - 3140.807_295_225_078).abs() < 1e-9);
    }

    #[test]
    fn unit_target_is_origin() {
        let r = inv_besselj0_envelope(1.0).unwrap();
        assert_eq!(r.epsilon_star, 0.0);
        assert!(r.achieved);
    }

    #[test]
    fn first_lobe_crossing() {
        // |J0| at the first J1 zero is 0.40276 < 0.403, so the answer lies on
        // the main lobe where J0(eps) = 0.403.
        let r = inv_besselj0_envelope(0.403).unwrap();
        assert!(r.epsilon_star > 1.0 && r.epsilon_star < 2.404_83);
        assert!((r.epsilon_star - 1.691_315_889_418_051_7).abs() < 1e-9);
    }

    #[test]
    fn second_lobe_crossing() {
        // |J0| at the second extremum (7.0156) is 0.300116, just above 0.3, so
        // the crossing sits on the falling arc after it, where J0 = +0.3.
        let r = inv_besselj0_envelope(0.3).unwrap();
        assert!((r.epsilon_star - 7.043_379_700_408_96).abs() < 1e-9);
    }

    #[test]
    fn rejects_non_positive_target() {
        assert!(inv_besselj0_envelope(0.0).is_err());
        assert!(inv_besselj0_envelope(-0.2).is_err());
    }

    #[test]
    fn walk_limit_is_reported() {
        let s = EnvelopeInverseSettings {
            tolerance: 1e-12,
            max_extrema: 3,
        };
        assert!(inv_besselj0_envelope_with(0.01, &s).is_err());
    }
}
