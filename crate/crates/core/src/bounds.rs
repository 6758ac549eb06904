//! Closed-form upper bound on selection outage.
//!
//! Each extra port multiplies the single-port outage by a factor below one,
//! `1 - (rho / sqrt|mu|) exp(-kappa x / (1 - mu^2))`. When `rho / sqrt|mu|`
//! would reach 1 (weakly correlated or independent ports) the factor falls
//! back to `1 - rho exp(-kappa x / (1 - mu^2))`, which is still a valid bound.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::is_degenerate;
use crate::channel::{correlation_profile, CorrelationProfile, FasConfig};
use crate::error::{FasError, Result};

pub const DEFAULT_KAPPA: f64 = 2.0;

/// Upper end of the interval searched by [`optimal_kappa`].
pub const KAPPA_SEARCH_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    kappa: f64,
    rho: f64,
}

impl BoundConstants {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 1.0 && kappa.is_finite()) {
            return Err(FasError::Domain(format!("kappa must exceed 1, got {kappa}")));
        }
        let k1 = kappa - 1.0;
        let c = PI * k1 + 2.0;
        let rho = (1.0 / c).exp() / (2.0 * kappa) * (k1 * c / PI).sqrt();
        if !(rho > 0.0 && rho < 0.5) {
            return Err(FasError::Constants(format!(
                "rho = {rho} outside (0, 0.5) for kappa = {kappa}"
            )));
        }
        Ok(Self { kappa, rho })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self::new(DEFAULT_KAPPA).expect("default kappa is valid")
    }
}

pub fn bound_constants(kappa: f64) -> Result<BoundConstants> {
    BoundConstants::new(kappa)
}

/// True when the fallback form of the factor is used for this `mu`.
pub fn uses_fallback(mu: f64, constants: &BoundConstants) -> bool {
    mu == 0.0 || constants.rho / mu.abs().sqrt() >= 1.0
}

/// The multiplicative outage reduction one port contributes to the bound.
pub fn per_port_bound_factor(mu: f64, snr_ratio: f64, constants: &BoundConstants) -> Result<f64> {
    if !(snr_ratio > 0.0 && snr_ratio.is_finite()) {
        return Err(FasError::Domain(format!("snr ratio must be positive, got {snr_ratio}")));
    }
    if !(mu.abs() < 1.0) {
        return Err(FasError::Domain(format!("|mu| must be below 1, got {mu}")));
    }
    let decay = (-constants.kappa * snr_ratio / (1.0 - mu * mu)).exp();
    let gain = if uses_fallback(mu, constants) {
        constants.rho
    } else {
        constants.rho / mu.abs().sqrt()
    };
    Ok(1.0 - gain * decay)
}

pub fn outage_upper_bound(config: &FasConfig, constants: &BoundConstants) -> Result<f64> {
    outage_upper_bound_profile(&correlation_profile(config), config.snr_ratio(), constants)
}

/// Bound for an arbitrary profile. Degenerate ports contribute a factor of 1.
pub fn outage_upper_bound_profile(
    profile: &CorrelationProfile,
    x: f64,
    constants: &BoundConstants,
) -> Result<f64> {
    let mut p = -(-x).exp_m1();
    for &mu in &profile.mu()[1..] {
        if is_degenerate(mu) {
            continue;
        }
        p *= per_port_bound_factor(mu, x, constants)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaOptimum {
    pub constants: BoundConstants,
    pub bound: f64,
}

/// Golden-section search for the kappa in (1, 10] that minimises the bound.
/// Every kappa gives a valid bound, so a local minimum is still a bound.
pub fn optimal_kappa(profile: &CorrelationProfile, x: f64, tol: f64) -> Result<KappaOptimum> {
    let eval = |k: f64| -> Result<f64> {
        outage_upper_bound_profile(profile, x, &BoundConstants::new(k)?)
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1.0 + 1e-6, KAPPA_SEARCH_MAX);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > tol.max(1e-12) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
        }
    }
    // The interval end is closed at 10, so compare against it too.
    let mid = 0.5 * (a + b);
    let mut best = (mid, eval(mid)?);
    let edge = eval(KAPPA_SEARCH_MAX)?;
    if edge < best.1 {
        best = (KAPPA_SEARCH_MAX, edge);
    }
    Ok(KappaOptimum {
        constants: BoundConstants::new(best.0)?,
        bound: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_values() {
        assert!((bound_constants(2.0).unwrap().rho() - 0.388_490_875_439_517_5).abs() < 1e-15);
        assert!((bound_constants(1.5).unwrap().rho() - 0.332_502_822_801_075).abs() < 1e-15);
        assert!((bound_constants(3.0).unwrap().rho() - 0.431_835_512_350_411_6).abs() < 1e-15);
        assert!(bound_constants(1.0 + 1e-10).unwrap().rho() < 1e-4);
        assert!(bound_constants(1e4).unwrap().rho() < 0.5);
        assert!(matches!(bound_constants(1.0), Err(FasError::Domain(_))));
        assert!(bound_constants(0.5).is_err());
    }

    #[test]
    fn factor_reference_values() {
        let c2 = BoundConstants::default();
        let v = per_port_bound_factor(0.9, 1.0, &c2).unwrap();
        assert!((v - 0.999_989_016_551_802_95).abs() < 1e-15);
        // rho / sqrt(0.1) > 1, so the fallback applies.
        assert!(uses_fallback(0.1, &c2));
        let v = per_port_bound_factor(0.1, 1.0, &c2).unwrap();
        assert!((v - 0.948_474_972_387_169_3).abs() < 1e-15);
        let c15 = bound_constants(1.5).unwrap();
        let v = per_port_bound_factor(-0.5, 0.3, &c15).unwrap();
        assert!((v - 0.741_932_303_518_387_2).abs() < 1e-15);
        assert!(uses_fallback(0.0, &c2));
    }

    #[test]
    fn factor_limits_and_range() {
        let c = BoundConstants::default();
        assert!((per_port_bound_factor(1.0 - 1e-9, 1.0, &c).unwrap() - 1.0).abs() < 1e-15);
        assert!((per_port_bound_factor(0.5, 200.0, &c).unwrap() - 1.0).abs() < 1e-15);
        for k in [1.01, 2.0, 7.0] {
            let c = bound_constants(k).unwrap();
            for mu in [-0.99, -0.3, 0.0, 1e-6, 0.15, 0.4, 0.9] {
                for x in [1e-6, 0.01, 1.0, 10.0] {
                    let f = per_port_bound_factor(mu, x, &c).unwrap();
                    assert!(f > 0.0 && f <= 1.0, "k={k} mu={mu} x={x}: {f}");
                }
            }
        }
        assert!(per_port_bound_factor(1.0, 1.0, &c).is_err());
    }

    #[test]
    fn bound_reference_values() {
        let c2 = BoundConstants::default();
        let cases = [
            (10, 1.0, 1.0, &c2, 0.322_341_559_446_263_46),
            (50, 5.0, 1.0, &c2, 0.016_841_286_276_169_415),
        ];
        for (n, w, x, c, want) in cases {
            let v = outage_upper_bound(&FasConfig::new(n, w, x).unwrap(), c).unwrap();
            assert!(((v - want) / want).abs() < 1e-10, "N={n}: {v}");
        }
        let c3 = bound_constants(3.0).unwrap();
        let v = outage_upper_bound(&FasConfig::new(5, 0.5, 0.1).unwrap(), &c3).unwrap();
        assert!(((v - 0.013_671_076_601_277_915) / v).abs() < 1e-10);
        let v = outage_upper_bound(&FasConfig::new(1, 0.5, 0.7).unwrap(), &c2).unwrap();
        assert_eq!(v, -(-0.7f64).exp_m1());
    }

    #[test]
    fn bound_decreases_as_ports_are_appended() {
        let c = BoundConstants::default();
        let full = correlation_profile(&FasConfig::new(100, 5.0, 1.0).unwrap());
        let mut prev = f64::INFINITY;
        for n in 10..=100 {
            let v = outage_upper_bound_profile(&full.prefix(n).unwrap(), 1.0, &c).unwrap();
            assert!(v < prev, "N={n}");
            prev = v;
        }
    }

    #[test]
    fn regridded_bound_trends_down() {
        // Re-spacing the ports for each N moves some |mu| across rho^2, where
        // the factor switches form, so single steps can go up. The trend holds.
        let c = BoundConstants::default();
        let at = |n| outage_upper_bound(&FasConfig::new(n, 5.0, 1.0).unwrap(), &c).unwrap();
        let rises = (10..100).filter(|&n| at(n + 1) >= at(n)).count();
        assert!(rises > 0);
        for n in (10..=90).step_by(10) {
            assert!(at(n + 10) < at(n), "N={n}");
        }
    }

    #[test]
    fn bound_vanishes_geometrically() {
        let c = BoundConstants::default();
        let mut p = CorrelationProfile::homogeneous(2, 0.7).unwrap();
        let b0 = outage_upper_bound_profile(&p, 1.0, &c).unwrap();
        for _ in 0..200 {
            p = p.with_port(0.7).unwrap();
        }
        let b1 = outage_upper_bound_profile(&p, 1.0, &c).unwrap();
        let f = per_port_bound_factor(0.7, 1.0, &c).unwrap();
        assert!(((b1 / b0) / f.powi(200) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn optimal_kappa_beats_default() {
        let p = correlation_profile(&FasConfig::new(20, 2.0, 1.0).unwrap());
        let opt = optimal_kappa(&p, 1.0, 1e-8).unwrap();
        let def = outage_upper_bound_profile(&p, 1.0, &BoundConstants::default()).unwrap();
        assert!(opt.bound <= def);
        assert!(opt.constants.kappa() > 1.0 && opt.constants.kappa() <= KAPPA_SEARCH_MAX);
        for k in [1.2, 1.5, 3.0, 6.0, 10.0] {
            let v = outage_upper_bound_profile(&p, 1.0, &bound_constants(k).unwrap()).unwrap();
            assert!(opt.bound <= v + 1e-12, "kappa {k}");
        }
    }
}
