//! Port geometry, correlation profiles and correlated Rayleigh channel draws.
//!
//! Every port is tied to port 1 through a single correlation coefficient:
//!
//! ```text
//! g_1 = x0 + j y0
//! g_k = (sqrt(1 - mu_k^2) x_k + mu_k x0) + j (sqrt(1 - mu_k^2) y_k + mu_k y0)
//! ```
//!
//! with all `x`, `y` independent `N(0, 1/2)`, so each `|g_k|` is Rayleigh with
//! unit mean square. Thresholds are expressed through the ratio
//! `snr_ratio = gamma_th / Gamma` and the channel power is normalised to one.

mod draw;
mod trace;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{FasError, Result};
use crate::specfun::j0_unchecked;

pub use draw::{draw_channels, ChannelDraw, ChannelSampler};
pub(crate) use draw::half_normal;
pub use trace::{
    envelope_trace, gain_trace, DopplerTraceConfig, EnvelopeTrace, GainTrace, SPEED_OF_LIGHT,
};

/// `10^(db/10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// The experiment's independent variables: port count, antenna length in
/// wavelengths, and the linear threshold-to-average SNR ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FasConfig {
    n_ports: usize,
    size_wavelengths: f64,
    snr_ratio: f64,
}

impl FasConfig {
    pub fn new(n_ports: usize, size_wavelengths: f64, snr_ratio: f64) -> Result<Self> {
        if n_ports < 1 {
            return Err(FasError::Config("n_ports must be at least 1".into()));
        }
        if !(size_wavelengths > 0.0 && size_wavelengths.is_finite()) {
            return Err(FasError::Config(format!(
                "size_wavelengths must be positive, got {size_wavelengths}"
            )));
        }
        if !(snr_ratio > 0.0 && snr_ratio.is_finite()) {
            return Err(FasError::Config(format!(
                "snr_ratio must be positive, got {snr_ratio}"
            )));
        }
        Ok(Self {
            n_ports,
            size_wavelengths,
            snr_ratio,
        })
    }

    /// Same as [`FasConfig::new`] with the SNR ratio given in dB.
    pub fn from_db(n_ports: usize, size_wavelengths: f64, snr_ratio_db: f64) -> Result<Self> {
        if !snr_ratio_db.is_finite() {
            return Err(FasError::Config(format!(
                "snr ratio in dB must be finite, got {snr_ratio_db}"
            )));
        }
        Self::new(n_ports, size_wavelengths, db_to_linear(snr_ratio_db))
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    pub fn size_wavelengths(&self) -> f64 {
        self.size_wavelengths
    }

    pub fn snr_ratio(&self) -> f64 {
        self.snr_ratio
    }

    pub fn with_n_ports(&self, n_ports: usize) -> Result<Self> {
        Self::new(n_ports, self.size_wavelengths, self.snr_ratio)
    }
}

/// Average received SNR, `Gamma = sigma^2 * Theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgSnr {
    pub theta: f64,
    pub sigma_sq: f64,
}

impl AvgSnr {
    pub fn new(theta: f64, sigma_sq: f64) -> Result<Self> {
        if !(theta > 0.0 && sigma_sq > 0.0 && theta.is_finite() && sigma_sq.is_finite()) {
            return Err(FasError::Config(format!(
                "theta and sigma_sq must be positive, got {theta} and {sigma_sq}"
            )));
        }
        Ok(Self { theta, sigma_sq })
    }

    pub fn gamma(&self) -> f64 {
        self.sigma_sq * self.theta
    }

    /// `gamma_th / Gamma` for a threshold SNR `gamma_th`.
    pub fn ratio_for_threshold(&self, gamma_th: f64) -> f64 {
        gamma_th / self.gamma()
    }
}

/// Evenly spaced port positions `d_k = (k-1)/(N-1) * W`, in wavelengths.
pub fn port_displacements(config: &FasConfig) -> Vec<f64> {
    let n = config.n_ports();
    if n == 1 {
        return vec![0.0];
    }
    let w = config.size_wavelengths();
    (0..n)
        .map(|k| {
            if k == n - 1 {
                w
            } else {
                k as f64 / (n - 1) as f64 * w
            }
        })
        .collect()
}

/// `mu_k = J0(2 pi d_k)` with `mu_1 = 0` by convention.
pub fn correlation_profile(config: &FasConfig) -> CorrelationProfile {
    let displacements = port_displacements(config);
    let mut mu: Vec<f64> = displacements
        .iter()
        .map(|d| j0_unchecked(2.0 * PI * d))
        .collect();
    mu[0] = 0.0;
    CorrelationProfile {
        mu,
        displacements: Some(displacements),
    }
}

/// Correlation of every port with port 1, and optionally the port positions
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationProfile {
    mu: Vec<f64>,
    displacements: Option<Vec<f64>>,
}

/// Largest gap between the model's port-to-port correlation `mu_k * mu_l`
/// and the spatial Jakes value `J0(2 pi |d_k - d_l|)` over ports `k, l >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDiscrepancy {
    pub max_abs: f64,
    /// One-based port indices where the maximum occurs.
    pub ports: (usize, usize),
    pub model: f64,
    pub spatial: f64,
}

impl CorrelationProfile {
    /// A user-supplied profile. `mu[0]` must be 0 and every `|mu_k| <= 1`.
    pub fn from_mu(mu: Vec<f64>) -> Result<Self> {
        validate_mu(&mu)?;
        Ok(Self {
            mu,
            displacements: None,
        })
    }

    /// User-supplied correlations with matching port positions.
    pub fn with_displacements(mu: Vec<f64>, displacements: Vec<f64>) -> Result<Self> {
        validate_mu(&mu)?;
        if displacements.len() != mu.len() {
            return Err(FasError::Config(format!(
                "{} displacements for {} ports",
                displacements.len(),
                mu.len()
            )));
        }
        if displacements[0] != 0.0 {
            return Err(FasError::Config("first displacement must be 0".into()));
        }
        if displacements.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(FasError::Config("displacements must be nondecreasing".into()));
        }
        Ok(Self {
            mu,
            displacements: Some(displacements),
        })
    }

    /// `N` ports, all with the same correlation `mu` to port 1.
    pub fn homogeneous(n_ports: usize, mu: f64) -> Result<Self> {
        if n_ports == 0 {
            return Err(FasError::Config("profile needs at least one port".into()));
        }
        let mut v = vec![mu; n_ports];
        v[0] = 0.0;
        Self::from_mu(v)
    }

    /// `N` mutually independent ports.
    pub fn independent(n_ports: usize) -> Result<Self> {
        Self::homogeneous(n_ports, 0.0)
    }

    pub fn n_ports(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn displacements(&self) -> Option<&[f64]> {
        self.displacements.as_deref()
    }

    /// The first `n` ports.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_ports() {
            return Err(FasError::Config(format!(
                "prefix length {n} outside 1..={}",
                self.n_ports()
            )));
        }
        Ok(Self {
            mu: self.mu[..n].to_vec(),
            displacements: self.displacements.as_ref().map(|d| d[..n].to_vec()),
        })
    }

    /// This profile with one more port of correlation `mu` appended.
    pub fn with_port(&self, mu: f64) -> Result<Self> {
        let mut v = self.mu.clone();
        v.push(mu);
        Self::from_mu(v)
    }

    pub fn correlation_discrepancy(&self) -> Option<CorrelationDiscrepancy> {
        let d = self.displacements.as_ref()?;
        let mut worst: Option<CorrelationDiscrepancy> = None;
        for k in 1..self.mu.len() {
            for l in (k + 1)..self.mu.len() {
                let model = self.mu[k] * self.mu[l];
                let spatial = j0_unchecked(2.0 * PI * (d[l] - d[k]));
                let gap = (model - spatial).abs();
                if worst.map_or(true, |w| gap > w.max_abs) {
                    worst = Some(CorrelationDiscrepancy {
                        max_abs: gap,
                        ports: (k + 1, l + 1),
                        model,
                        spatial,
                    });
                }
            }
        }
        worst
    }
}

fn validate_mu(mu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(FasError::Config("profile needs at least one port".into()));
    }
    if mu[0] != 0.0 {
        return Err(FasError::Config(format!(
            "mu[1] must be 0 by convention, got {}",
            mu[0]
        )));
    }
    if let Some((k, m)) = mu
        .iter()
        .enumerate()
        .find(|(_, m)| !(m.abs() <= 1.0))
    {
        return Err(FasError::Domain(format!(
            "port {} has |mu| = {} > 1",
            k + 1,
            m.abs()
        )));
    }
    Ok(())
}
