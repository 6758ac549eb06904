//! Joint envelope distributions and outage probabilities.
//!
//! Given `g_1`, every other port is Rician with line-of-sight amplitude
//! `|mu_k| |g_1|` and diffuse power `1 - mu_k^2`, so the ports are
//! conditionally independent. Outage integrals therefore reduce to one
//! dimension, over `t = |g_1|^2`.

use serde::{Deserialize, Serialize};

use crate::channel::{correlation_profile, CorrelationProfile, FasConfig};
use crate::error::{ensure_finite, FasError, Result};
use crate::quad::{integrate, QuadratureSettings};
use crate::specfun::{delta_q1, i0_scaled_unchecked, marcum_pair};

/// Ports with `|mu| > 1 - DEGENERATE_MU_GAP` are treated as exact copies of
/// port 1 and contribute nothing to outage.
pub const DEGENERATE_MU_GAP: f64 = 1e-9;

pub fn is_degenerate(mu: f64) -> bool {
    mu.abs() > 1.0 - DEGENERATE_MU_GAP
}

/// One configuration's outage figures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageReport {
    pub exact: f64,
    /// May be negative; the closed form is not a probability for large `N`.
    pub approx: f64,
    pub upper_bound: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_half_width_95: Option<f64>,
}

impl OutageReport {
    /// Exact and approximate values only.
    pub fn analytic(config: &FasConfig, q: &QuadratureSettings) -> Result<Self> {
        Ok(Self {
            exact: outage_exact(config, q)?,
            approx: outage_approx(config)?,
            upper_bound: None,
            mc_estimate: None,
            mc_half_width_95: None,
        })
    }

    /// Approximation below zero, outside the regime where it means anything.
    pub fn approx_out_of_regime(&self) -> bool {
        self.approx < 0.0
    }
}

fn check_r(profile: &CorrelationProfile, r: &[f64]) -> Result<()> {
    if r.len() != profile.n_ports() {
        return Err(FasError::Domain(format!(
            "{} radii for {} ports",
            r.len(),
            profile.n_ports()
        )));
    }
    for &v in r {
        ensure_finite("r", v)?;
        if v < 0.0 {
            return Err(FasError::Domain(format!("radius {v} is negative")));
        }
    }
    for (k, &mu) in profile.mu().iter().enumerate().skip(1) {
        if mu.abs() >= 1.0 {
            return Err(FasError::SingularProfile { port: k + 1, mu });
        }
    }
    Ok(())
}

/// Joint density of `|g_1|, ..., |g_N|` at `r`.
pub fn joint_pdf(profile: &CorrelationProfile, r: &[f64]) -> Result<f64> {
    check_r(profile, r)?;
    let r1 = r[0];
    let mut log_p = (2.0 * r1).ln() - r1 * r1;
    for (&mu, &rk) in profile.mu().iter().zip(r).skip(1) {
        let s = 1.0 - mu * mu;
        let z = 2.0 * mu.abs() * r1 * rk / s;
        log_p += (2.0 * rk / s).ln() - (rk * rk + mu * mu * r1 * r1) / s + z
            + i0_scaled_unchecked(z).ln();
    }
    Ok(log_p.exp())
}

/// `P[|g_k| <= r_k for all k]`.
pub fn joint_cdf(profile: &CorrelationProfile, r: &[f64], q: &QuadratureSettings) -> Result<f64> {
    check_r(profile, r)?;
    let ports = PortTerms::new(&profile.mu()[1..], &r[1..]);
    let v = integrate(|t| (-t).exp() * ports.product(t), 0.0, r[0] * r[0], q)?;
    Ok(v.value.clamp(0.0, 1.0))
}

/// Per-port `(a_k, b_k)` so that port `k` stays below its radius given
/// `|g_1|^2 = t` with probability `1 - Q1(a_k sqrt(t), b_k)`.
struct PortTerms {
    ab: Vec<(f64, f64)>,
}

impl PortTerms {
    fn new(mu: &[f64], r: &[f64]) -> Self {
        let ab = mu
            .iter()
            .zip(r)
            .map(|(&m, &rk)| {
                let s = 1.0 - m * m;
                ((2.0 * m * m / s).sqrt(), (2.0 * rk * rk / s).sqrt())
            })
            .collect();
        Self { ab }
    }

    fn product(&self, t: f64) -> f64 {
        let st = t.max(0.0).sqrt();
        let mut p = 1.0;
        for &(a, b) in &self.ab {
            p *= marcum_pair(a * st, b).p;
            if p == 0.0 {
                break;
            }
        }
        p
    }
}

fn check_ratio(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(FasError::Domain(format!("snr ratio must be positive, got {x}")));
    }
    Ok(())
}

fn live_ports(profile: &CorrelationProfile) -> Vec<f64> {
    profile.mu()[1..]
        .iter()
        .copied()
        .filter(|&m| !is_degenerate(m))
        .collect()
}

pub fn outage_exact(config: &FasConfig, q: &QuadratureSettings) -> Result<f64> {
    outage_exact_profile(&correlation_profile(config), config.snr_ratio(), q)
}

/// Outage probability of selection over all ports of `profile` at linear
/// threshold ratio `x`.
pub fn outage_exact_profile(
    profile: &CorrelationProfile,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    check_ratio(x)?;
    let mu = live_ports(profile);
    let single = -(-x).exp_m1();
    if mu.iter().all(|&m| m == 0.0) {
        return Ok(single.powi(mu.len() as i32 + 1));
    }
    let ports = PortTerms::new(&mu, &vec![x.sqrt(); mu.len()]);
    let v = integrate(|t| (-t).exp() * ports.product(t), 0.0, x, q)?;
    Ok(v.value.clamp(0.0, 1.0))
}

/// Two-port outage in closed form.
pub fn outage_n2_closed_form(mu2: f64, snr_ratio: f64) -> Result<f64> {
    check_ratio(snr_ratio)?;
    if !(mu2.abs() < 1.0) {
        return Err(FasError::Domain(format!("|mu2| must be below 1, got {mu2}")));
    }
    Ok(-(-snr_ratio).exp_m1() - approx_port_gain(mu2, snr_ratio)?)
}

/// The outage reduction a single port with correlation `mu` earns in the
/// closed-form approximation, `e^{-x} dQ1(alpha, beta)`.
pub fn approx_port_gain(mu: f64, x: f64) -> Result<f64> {
    check_ratio(x)?;
    if is_degenerate(mu) {
        return Ok(0.0);
    }
    let s = 1.0 - mu * mu;
    let alpha = (2.0 * x / s).sqrt();
    let beta = (2.0 * mu * mu * x / s).sqrt();
    Ok((-x).exp() * delta_q1(alpha, beta)?)
}

pub fn outage_approx(config: &FasConfig) -> Result<f64> {
    outage_approx_profile(&correlation_profile(config), config.snr_ratio())
}

/// Single-port outage minus the sum of per-port gains. Not clamped.
pub fn outage_approx_profile(profile: &CorrelationProfile, x: f64) -> Result<f64> {
    check_ratio(x)?;
    let mut p = -(-x).exp_m1();
    for &mu in &profile.mu()[1..] {
        p -= approx_port_gain(mu, x)?;
    }
    Ok(p)
}

pub fn outage_port_reduction(config: &FasConfig, q: &QuadratureSettings) -> Result<f64> {
    outage_port_reduction_profile(&correlation_profile(config), config.snr_ratio(), q)
}

/// Outage reduction from adding the last port of `profile` to the others.
pub fn outage_port_reduction_profile(
    profile: &CorrelationProfile,
    x: f64,
    q: &QuadratureSettings,
) -> Result<f64> {
    check_ratio(x)?;
    let n = profile.n_ports();
    if n < 2 {
        return Err(FasError::Domain("port reduction needs at least 2 ports".into()));
    }
    let mu_n = profile.mu()[n - 1];
    if is_degenerate(mu_n) {
        return Ok(0.0);
    }
    let others = live_ports(&profile.prefix(n - 1)?);
    let rest = PortTerms::new(&others, &vec![x.sqrt(); others.len()]);
    let last = PortTerms::new(&[mu_n], &[x.sqrt()]);
    let (a, b) = last.ab[0];
    let v = integrate(
        |t| (-t).exp() * marcum_pair(a * t.max(0.0).sqrt(), b).q * rest.product(t),
        0.0,
        x,
        q,
    )?;
    Ok(v.value.max(0.0))
}

/// Outage of `L`-branch maximal-ratio combining over i.i.d. Rayleigh
/// branches, `P[Gamma(L, 1) < x]`.
pub fn outage_mrc(branches: usize, snr_ratio: f64) -> Result<f64> {
    check_ratio(snr_ratio)?;
    if branches < 1 {
        return Err(FasError::Domain("MRC needs at least one branch".into()));
    }
    let x = snr_ratio;
    let l = branches as f64;
    // Largest Poisson term we need, in log space so huge x or L don't overflow.
    let log_term = |k: f64| k * x.ln() - x - libm::lgamma(k + 1.0);
    if x < l {
        // Tail sum_{k >= L}; ratios x/(k+1) < 1 so it converges quickly.
        let mut term = log_term(l).exp();
        let mut sum = 0.0;
        let mut k = l;
        while term > sum * 1e-17 {
            sum += term;
            k += 1.0;
            term *= x / k;
            if term == 0.0 {
                break;
            }
        }
        Ok(sum.min(1.0))
    } else {
        // Head sum_{k < L}, walking down from k = L - 1.
        let mut term = log_term(l - 1.0).exp();
        let mut sum = 0.0;
        let mut k = l - 1.0;
        loop {
            sum += term;
            if k == 0.0 || term < sum * 1e-17 {
                break;
            }
            term *= k / x;
            k -= 1.0;
        }
        Ok((1.0 - sum).max(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSettings {
        QuadratureSettings::tight()
    }

    fn cfg(n: usize, w: f64, x: f64) -> FasConfig {
        FasConfig::new(n, w, x).unwrap()
    }

    #[test]
    fn pdf_simple_cases() {
        let e = (-1f64).exp();
        let p1 = CorrelationProfile::independent(1).unwrap();
        assert!((joint_pdf(&p1, &[1.0]).unwrap() - 2.0 * e).abs() < 1e-15);
        let p2 = CorrelationProfile::independent(2).unwrap();
        assert!((joint_pdf(&p2, &[1.0, 1.0]).unwrap() - 4.0 * e * e).abs() < 1e-15);
        assert_eq!(joint_pdf(&p2, &[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn pdf_two_port_reference() {
        let p = CorrelationProfile::from_mu(vec![0.0, 0.5]).unwrap();
        let v = joint_pdf(&p, &[0.8, 1.2]).unwrap();
        assert!((v - 0.464_774_304_255_273_77).abs() < 1e-12, "{v}");
    }

    #[test]
    fn pdf_rejects_bad_input() {
        let p = CorrelationProfile::from_mu(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            joint_pdf(&p, &[1.0, 1.0]),
            Err(FasError::SingularProfile { port: 2, .. })
        ));
        let p = CorrelationProfile::independent(2).unwrap();
        assert!(joint_pdf(&p, &[1.0]).is_err());
        assert!(joint_pdf(&p, &[1.0, -0.1]).is_err());
    }

    #[test]
    fn cdf_total_mass_and_independence() {
        let p = CorrelationProfile::from_mu(vec![0.0, 0.7]).unwrap();
        assert!((joint_cdf(&p, &[40.0, 40.0], &q()).unwrap() - 1.0).abs() < 1e-9);
        let p3 = CorrelationProfile::independent(3).unwrap();
        let want = (1.0 - (-1f64).exp()).powi(3);
        assert!((joint_cdf(&p3, &[1.0, 1.0, 1.0], &q()).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn cdf_two_port_reference() {
        // High-precision quadrature of the two-port cdf at (1.0, 1.3, 0.6).
        let p = CorrelationProfile::from_mu(vec![0.0, 0.6]).unwrap();
        let v = joint_cdf(&p, &[1.0, 1.3], &q()).unwrap();
        assert!((v - 0.557_803_775_522_315_42).abs() < 1e-8, "{v}");
    }

    #[test]
    fn exact_outage_reference_values() {
        let cases = [
            (3, 0.5, 1.0, 0.281_657_287_875_824_54),
            (2, 0.5, 1.0, 0.412_396_394_546_611_64),
            (5, 1.0, 0.1, 1.191_494_649_606_273e-5),
            (4, 0.2, 2.0, 0.708_144_610_973_549_5),
        ];
        for (n, w, x, want) in cases {
            let v = outage_exact(&cfg(n, w, x), &q()).unwrap();
            assert!(((v - want) / want).abs() < 1e-9, "N={n} W={w} x={x}: {v} vs {want}");
        }
        let p = CorrelationProfile::from_mu(vec![0.0, 0.9]).unwrap();
        let v = outage_exact_profile(&p, 1.0, &q()).unwrap();
        assert!((v - 0.539_749_686_456_582_6).abs() < 1e-10);
    }

    #[test]
    fn exact_outage_limits() {
        let x = 0.7;
        let single = 1.0 - (-x as f64).exp();
        let v = outage_exact(&cfg(1, 1.0, x), &q()).unwrap();
        assert!((v - single).abs() < 1e-15);
        let p = CorrelationProfile::independent(6).unwrap();
        let v = outage_exact_profile(&p, x, &q()).unwrap();
        assert!((v - single.powi(6)).abs() < 1e-15);
        assert!(outage_exact(&cfg(7, 0.2, 1.0), &q()).unwrap() < 0.264);
    }

    #[test]
    fn degenerate_port_changes_nothing() {
        let base = correlation_profile(&cfg(4, 0.6, 1.0));
        let a = outage_exact_profile(&base, 1.0, &q()).unwrap();
        let b = outage_exact_profile(&base.with_port(1.0 - 1e-12).unwrap(), 1.0, &q()).unwrap();
        assert!((a - b).abs() < 1e-6);
        let c = outage_exact_profile(&base.with_port(-1.0).unwrap(), 1.0, &q()).unwrap();
        assert!((a - c).abs() < 1e-6);
    }

    #[test]
    fn n2_closed_form_agrees_with_quadrature() {
        for (mu, x) in [(0.9, 1.0), (0.3, 0.05), (-0.6, 3.0), (0.99, 10.0), (0.0, 2.0)] {
            let p = CorrelationProfile::from_mu(vec![0.0, mu]).unwrap();
            let a = outage_exact_profile(&p, x, &q()).unwrap();
            let b = outage_n2_closed_form(mu, x).unwrap();
            assert!((a - b).abs() < 1e-8, "mu={mu} x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn n2_closed_form_limits() {
        let x: f64 = 1.3;
        let single = 1.0 - (-x).exp();
        assert!((outage_n2_closed_form(0.0, x).unwrap() - single * single).abs() < 1e-14);
        assert!((outage_n2_closed_form(1.0 - 1e-10, x).unwrap() - single).abs() < 1e-4);
        let v = outage_n2_closed_form(0.5, 1.0).unwrap();
        let s1 = 1.0 - (-1f64).exp();
        assert!(v > s1 * s1 && v < s1);
        assert!(outage_n2_closed_form(1.0, 1.0).is_err());
    }

    #[test]
    fn approx_reduces_to_closed_form() {
        let x = 0.8;
        assert!((outage_approx(&cfg(1, 1.0, x)).unwrap() - (1.0 - (-x as f64).exp())).abs() < 1e-15);
        let c = cfg(2, 0.3, x);
        let mu2 = correlation_profile(&c).mu()[1];
        let a = outage_approx(&c).unwrap();
        assert!((a - outage_n2_closed_form(mu2, x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn approx_is_tight_for_strong_correlation() {
        let c = cfg(10, 0.05, 10.0);
        let e = outage_exact(&c, &q()).unwrap();
        let a = outage_approx(&c).unwrap();
        assert!(((a - e) / e).abs() < 0.1, "{a} vs {e}");
    }

    #[test]
    fn approx_goes_negative_for_many_ports() {
        assert!(outage_approx(&cfg(100, 5.0, 1.0)).unwrap() < 0.0);
    }

    #[test]
    fn port_reduction_telescopes() {
        for (n, w, x) in [(3, 0.5, 1.0), (6, 1.0, 0.3), (2, 0.1, 2.0)] {
            let c = cfg(n, w, x);
            let full = correlation_profile(&c);
            let d = outage_port_reduction(&c, &q()).unwrap();
            let pn = outage_exact_profile(&full, x, &q()).unwrap();
            let pm = outage_exact_profile(&full.prefix(n - 1).unwrap(), x, &q()).unwrap();
            assert!(d > 0.0);
            assert!((pn + d - pm).abs() < 1e-8, "N={n}: {pn} + {d} vs {pm}");
        }
        let p = CorrelationProfile::from_mu(vec![0.0, 0.4, 1.0]).unwrap();
        assert_eq!(outage_port_reduction_profile(&p, 1.0, &q()).unwrap(), 0.0);
        assert!(outage_port_reduction(&cfg(1, 1.0, 1.0), &q()).is_err());
    }

    #[test]
    fn mrc_levels() {
        let e = (-1f64).exp();
        assert!((outage_mrc(1, 1.0).unwrap() - (1.0 - e)).abs() < 1e-15);
        assert!((outage_mrc(2, 1.0).unwrap() - (1.0 - 2.0 * e)).abs() < 1e-15);
        // 1 - e^{-1} (1 + 1 + 1/2 + ... + 1/7!)
        let v = outage_mrc(8, 1.0).unwrap();
        assert!((v - 1.024_919_667_464_169_5e-5).abs() < 1e-18, "{v}");
        assert!((outage_mrc(3, 5.0).unwrap() - (1.0 - (-5f64).exp() * 18.5)).abs() < 1e-14);
        assert!(outage_mrc(0, 1.0).is_err());
        assert!(outage_mrc(2, 0.0).is_err());
    }

    #[test]
    fn mrc_large_arguments() {
        assert_eq!(outage_mrc(4, 2000.0).unwrap(), 1.0);
        assert!(outage_mrc(500, 1.0).unwrap() < 1e-300);
        let v = outage_mrc(200, 200.0).unwrap();
        assert!(v > 0.45 && v < 0.52);
    }

    #[test]
    fn mrc_diversity_slope() {
        for l in 1..=3 {
            let a = outage_mrc(l, 1e-3).unwrap();
            let b = outage_mrc(l, 1e-4).unwrap();
            let slope = (a / b).log10();
            assert!((slope - l as f64).abs() < 0.01, "L={l}: {slope}");
        }
    }
}
