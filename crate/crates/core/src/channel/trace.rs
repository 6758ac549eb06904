//! Time-varying port envelopes for a moving receiver.
//!
//! Each in-phase and quadrature process is a sum of sinusoids whose Doppler
//! shifts `f_m cos(alpha_m)` sample the isotropic ring of arrival angles, so
//! its autocorrelation approaches `J0(2 pi f_m tau) / 2`. The spatial mixing
//! of the channel model is then applied sample by sample.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{correlation_profile, linear_to_db, FasConfig};
use crate::error::{FasError, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerTraceConfig {
    pub speed_mps: f64,
    pub carrier_hz: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
    pub n_scatterers: usize,
    /// Branches of the independent-antenna MRC envelope reported alongside.
    pub mrc_branches: usize,
}

impl Default for DopplerTraceConfig {
    /// 30 km/h at 5 GHz, one second at 10 kHz.
    fn default() -> Self {
        Self {
            speed_mps: 30.0 / 3.6,
            carrier_hz: 5e9,
            duration_s: 1.0,
            sample_rate_hz: 1e4,
            n_scatterers: 64,
            mrc_branches: 2,
        }
    }
}

impl DopplerTraceConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }

    /// Maximum Doppler shift `f_m = v / lambda`.
    pub fn max_doppler_hz(&self) -> f64 {
        self.speed_mps / self.wavelength_m()
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round().max(1.0) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(FasError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("carrier_hz", self.carrier_hz)?;
        positive("duration_s", self.duration_s)?;
        positive("sample_rate_hz", self.sample_rate_hz)?;
        if !(self.speed_mps >= 0.0 && self.speed_mps.is_finite()) {
            return Err(FasError::Config(format!(
                "speed_mps must be nonnegative, got {}",
                self.speed_mps
            )));
        }
        if self.n_scatterers < 8 {
            return Err(FasError::Config(format!(
                "need at least 8 scatterers, got {}",
                self.n_scatterers
            )));
        }
        if self.mrc_branches < 1 {
            return Err(FasError::Config("mrc_branches must be at least 1".into()));
        }
        let fm = self.max_doppler_hz();
        if self.sample_rate_hz <= 2.0 * fm {
            return Err(FasError::Config(format!(
                "sample rate {} Hz violates Nyquist for a {fm:.3} Hz Doppler spread",
                self.sample_rate_hz
            )));
        }
        Ok(())
    }
}

/// Complex gains per sample: `ports[i][k]` is port `k` at sample `i`, and
/// `mrc[i][l]` is MRC branch `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTrace {
    pub t_s: Vec<f64>,
    pub ports: Vec<Vec<Complex64>>,
    pub mrc: Vec<Vec<Complex64>>,
}

/// Envelopes in dB (`20 log10 |g|`, unit mean-square channel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeTrace {
    /// Distance travelled in wavelengths, `v t / lambda`.
    pub t_norm: Vec<f64>,
    /// `port_db[i][k]`, sample-major.
    pub port_db: Vec<Vec<f64>>,
    pub fas_db: Vec<f64>,
    pub mrc_db: Vec<f64>,
}

impl EnvelopeTrace {
    pub fn n_samples(&self) -> usize {
        self.t_norm.len()
    }

    pub fn n_ports(&self) -> usize {
        self.port_db.first().map_or(0, Vec::len)
    }

    /// Max minus min port envelope at each sample.
    pub fn spread_db(&self) -> Vec<f64> {
        self.port_db
            .iter()
            .map(|row| {
                let (lo, hi) = row
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .collect()
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t_norm".to_string()];
        h.extend((1..=self.n_ports()).map(|k| format!("port_{k}_db")));
        h.push("fas_db".into());
        h.push("mrc_db".into());
        h
    }

    /// Rows in header order.
    pub fn rows(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.n_samples()).map(move |i| {
            let mut r = Vec::with_capacity(self.n_ports() + 3);
            r.push(self.t_norm[i]);
            r.extend_from_slice(&self.port_db[i]);
            r.push(self.fas_db[i]);
            r.push(self.mrc_db[i]);
            r
        })
    }
}

/// One sum-of-sinusoids Gaussian process with variance 1/2.
struct SosProcess {
    omega: Vec<f64>,
    phase: Vec<f64>,
}

impl SosProcess {
    fn draw<R: Rng + ?Sized>(fm: f64, m: usize, rng: &mut R) -> Self {
        let theta = rng.gen::<f64>() * 2.0 * PI;
        let omega = (0..m)
            .map(|i| {
                let alpha = (2.0 * PI * i as f64 + theta) / m as f64;
                2.0 * PI * fm * alpha.cos()
            })
            .collect();
        let phase = (0..m).map(|_| rng.gen::<f64>() * 2.0 * PI).collect();
        Self { omega, phase }
    }

    fn sample(&self, t: &[f64]) -> Vec<f64> {
        let scale = (self.omega.len() as f64).recip().sqrt();
        t.iter()
            .map(|&t| {
                let s: f64 = self
                    .omega
                    .iter()
                    .zip(&self.phase)
                    .map(|(w, p)| (w * t + p).cos())
                    .sum();
                s * scale
            })
            .collect()
    }
}

/// Complex port and MRC-branch gains over time. Processes are drawn in the
/// order `x0, y0, x_2, y_2, ..., ` then the MRC branches.
pub fn gain_trace<R: Rng + ?Sized>(
    config: &FasConfig,
    doppler: &DopplerTraceConfig,
    rng: &mut R,
) -> Result<GainTrace> {
    doppler.validate()?;
    let profile = correlation_profile(config);
    let n = profile.n_ports();
    let fm = doppler.max_doppler_hz();
    let m = doppler.n_scatterers;
    let n_proc = 2 * n + 2 * doppler.mrc_branches;
    let procs: Vec<SosProcess> = (0..n_proc).map(|_| SosProcess::draw(fm, m, rng)).collect();

    let t_s: Vec<f64> = (0..doppler.n_samples())
        .map(|i| i as f64 / doppler.sample_rate_hz)
        .collect();
    let values: Vec<Vec<f64>> = procs.par_iter().map(|p| p.sample(&t_s)).collect();

    let mu = profile.mu();
    let ports = (0..t_s.len())
        .map(|i| {
            let common = Complex64::new(values[0][i], values[1][i]);
            let mut row = Vec::with_capacity(n);
            row.push(common);
            for k in 1..n {
                let own = Complex64::new(values[2 * k][i], values[2 * k + 1][i]);
                let s = (1.0 - mu[k] * mu[k]).max(0.0).sqrt();
                row.push(own * s + common * mu[k]);
            }
            row
        })
        .collect();
    let base = 2 * n;
    let mrc = (0..t_s.len())
        .map(|i| {
            (0..doppler.mrc_branches)
                .map(|l| Complex64::new(values[base + 2 * l][i], values[base + 2 * l + 1][i]))
                .collect()
        })
        .collect();
    Ok(GainTrace { t_s, ports, mrc })
}

/// Port envelopes, their maximum (the FAS output) and the MRC envelope
/// `sqrt(sum |h_l|^2)`, all in dB.
pub fn envelope_trace<R: Rng + ?Sized>(
    config: &FasConfig,
    doppler: &DopplerTraceConfig,
    rng: &mut R,
) -> Result<EnvelopeTrace> {
    let g = gain_trace(config, doppler, rng)?;
    let lambda = doppler.wavelength_m();
    let t_norm = g.t_s.iter().map(|t| doppler.speed_mps * t / lambda).collect();
    let port_db: Vec<Vec<f64>> = g
        .ports
        .iter()
        .map(|row| row.iter().map(|z| linear_to_db(z.norm_sqr())).collect())
        .collect();
    let fas_db = port_db
        .iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let mrc_db = g
        .mrc
        .iter()
        .map(|row| linear_to_db(row.iter().map(|z| z.norm_sqr()).sum()))
        .collect();
    Ok(EnvelopeTrace {
        t_norm,
        port_db,
        fas_db,
        mrc_db,
    })
}
