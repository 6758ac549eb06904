//! Special functions shared by the analytic, bound and design code.

mod bessel;
mod envelope;
mod marcum;

pub use bessel::{bessel_i0_scaled, bessel_j0, bessel_j1};
pub use envelope::{
    inv_besselj0_envelope, inv_besselj0_envelope_with, j0_zero, EnvelopeInverseResult,
    EnvelopeInverseSettings,
};
pub use marcum::{delta_q1, marcum_q1, MarcumArgs, MarcumPair, SERIES_Z_MAX};

pub(crate) use bessel::{i0_scaled_unchecked, j0_unchecked};
pub(crate) use marcum::marcum_pair;

use crate::error::{ensure_finite, Result};

/// Complementary standard normal cdf, `Q(x) = P[Z > x]`.
pub fn gaussian_q(x: f64) -> Result<f64> {
    ensure_finite("x", x)?;
    Ok(0.5 * libm::erfc(x / std::f64::consts::SQRT_2))
}
