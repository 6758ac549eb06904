use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::CorrelationProfile;
use crate::error::{FasError, Result};

/// One realisation of the port gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelDraw {
    pub gains: Vec<Complex64>,
    /// The shared component `x0 + j y0`, which equals `gains[0]`.
    pub common_part: Complex64,
}

impl ChannelDraw {
    /// `max_k |g_k|^2`.
    pub fn max_power(&self) -> f64 {
        self.gains.iter().map(|g| g.norm_sqr()).fold(0.0, f64::max)
    }
}

/// Draw every port gain of `profile`. Normals are consumed in the order
/// `x0, y0, x_2, y_2, ...`.
pub fn draw_channels<R: Rng + ?Sized>(profile: &CorrelationProfile, rng: &mut R) -> Result<ChannelDraw> {
    let sampler = ChannelSampler::new(profile)?;
    let mut gains = Vec::with_capacity(profile.n_ports());
    let common = Complex64::new(half_normal(rng), half_normal(rng));
    gains.push(common);
    for &(mu, s) in &sampler.coeffs {
        let own = Complex64::new(half_normal(rng), half_normal(rng));
        gains.push(own * s + common * mu);
    }
    Ok(ChannelDraw {
        gains,
        common_part: common,
    })
}

/// Precomputed mixing coefficients for repeated draws from one profile.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    /// `(mu_k, sqrt(1 - mu_k^2))` for ports 2..=N.
    coeffs: Vec<(f64, f64)>,
}

impl ChannelSampler {
    pub fn new(profile: &CorrelationProfile) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(profile.n_ports().saturating_sub(1));
        for (k, &mu) in profile.mu().iter().enumerate().skip(1) {
            if !(mu.abs() <= 1.0) {
                return Err(FasError::Domain(format!("port {} has |mu| = {} > 1", k + 1, mu.abs())));
            }
            coeffs.push((mu, (1.0 - mu * mu).max(0.0).sqrt()));
        }
        Ok(Self { coeffs })
    }

    pub fn n_ports(&self) -> usize {
        self.coeffs.len() + 1
    }

    /// True if every port power stays below `threshold`. Stops drawing at the
    /// first port that clears it, so the number of normals consumed varies.
    pub fn all_below<R: Rng + ?Sized>(&self, threshold: f64, rng: &mut R) -> bool {
        let x0 = half_normal(rng);
        let y0 = half_normal(rng);
        if x0 * x0 + y0 * y0 >= threshold {
            return false;
        }
        for &(mu, s) in &self.coeffs {
            let re = s * half_normal(rng) + mu * x0;
            let im = s * half_normal(rng) + mu * y0;
            if re * re + im * im >= threshold {
                return false;
            }
        }
        true
    }
}

/// A draw from `N(0, 1/2)`.
pub(crate) fn half_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    z * FRAC_1_SQRT_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn second_moments_match_model() {
        let p = CorrelationProfile::from_mu(vec![0.0, 0.8, -0.5, 1.0]).unwrap();
        let mut rng = stream(11, 0);
        let n = 200_000;
        let mut pow = [0.0; 4];
        let mut cross = [0.0; 4];
        for _ in 0..n {
            let d = draw_channels(&p, &mut rng).unwrap();
            assert_eq!(d.gains[0], d.common_part);
            for k in 0..4 {
                pow[k] += d.gains[k].norm_sqr();
                cross[k] += d.gains[k].re * d.gains[0].re;
            }
        }
        for k in 0..4 {
            assert!((pow[k] / n as f64 - 1.0).abs() < 0.015, "E|g_{k}|^2");
            // E[Re g_k Re g_1] = mu_k / 2
            let mu = if k == 0 { 1.0 } else { p.mu()[k] };
            let want = 0.5 * mu;
            assert!((cross[k] / n as f64 - want).abs() < 0.01, "cross {k}");
        }
    }

    #[test]
    fn fully_correlated_port_copies_port_one() {
        let p = CorrelationProfile::from_mu(vec![0.0, 1.0]).unwrap();
        let d = draw_channels(&p, &mut stream(1, 0)).unwrap();
        assert_eq!(d.gains[0], d.gains[1]);
    }

    #[test]
    fn early_exit_matches_full_draw_frequency() {
        let p = CorrelationProfile::from_mu(vec![0.0, 0.6, 0.3]).unwrap();
        let s = ChannelSampler::new(&p).unwrap();
        let n = 100_000;
        let (mut a, mut b) = (0, 0);
        let (mut r1, mut r2) = (stream(3, 0), stream(3, 1));
        for _ in 0..n {
            a += s.all_below(0.5, &mut r1) as usize;
            b += (draw_channels(&p, &mut r2).unwrap().max_power() < 0.5) as usize;
        }
        let diff = (a as f64 - b as f64) / n as f64;
        assert!(diff.abs() < 0.01, "{a} vs {b}");
    }
}
