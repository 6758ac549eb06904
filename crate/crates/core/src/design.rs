//! Design rules derived from the upper bound: how many ports, how much
//! correlation and how much space a fluid antenna needs before its outage
//! bound drops below that of `L`-branch MRC.
//!
//! Every rule compares a product of per-port factors against
//! `p_MRC / (1 - e^{-x})`, the share of single-port outage MRC leaves.
//! Infeasibility is an ordinary answer carrying the guard that failed.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{is_degenerate, outage_mrc};
use crate::bounds::{bound_constants, per_port_bound_factor, BoundConstants};
use crate::channel::{correlation_profile, CorrelationProfile, FasConfig};
use crate::error::{FasError, Result};
use crate::specfun::inv_besselj0_envelope;

pub const DEFAULT_N_MAX: usize = 100_000;

/// Scanning N for a fixed size rebuilds the whole profile at every step, so
/// that search stops earlier than the others.
pub const SIZE_SCAN_N_MAX: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignQuery {
    pub mrc_branches: usize,
    pub snr_ratio: f64,
    pub constants: BoundConstants,
    pub size_wavelengths: Option<f64>,
    pub n_ports: Option<usize>,
    pub n_max: usize,
}

impl DesignQuery {
    pub fn new(mrc_branches: usize, snr_ratio: f64, constants: BoundConstants) -> Result<Self> {
        if mrc_branches < 1 {
            return Err(FasError::Config("mrc_branches must be at least 1".into()));
        }
        if !(snr_ratio > 0.0 && snr_ratio.is_finite()) {
            return Err(FasError::Config(format!(
                "snr ratio must be positive, got {snr_ratio}"
            )));
        }
        Ok(Self {
            mrc_branches,
            snr_ratio,
            constants,
            size_wavelengths: None,
            n_ports: None,
            n_max: DEFAULT_N_MAX,
        })
    }

    pub fn with_n_ports(mut self, n: usize) -> Self {
        self.n_ports = Some(n);
        self
    }

    pub fn with_size(mut self, w: f64) -> Self {
        self.size_wavelengths = Some(w);
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    /// `p_MRC(L, x) / (1 - e^{-x})`, the product the port factors must beat.
    pub fn target_ratio(&self) -> Result<f64> {
        let single = -(-self.snr_ratio).exp_m1();
        Ok(outage_mrc(self.mrc_branches, self.snr_ratio)? / single)
    }

    fn need_n(&self, min: usize) -> Result<usize> {
        match self.n_ports {
            Some(n) if n >= min => Ok(n),
            Some(n) => Err(FasError::Domain(format!("need at least {min} ports, got {n}"))),
            None => Err(FasError::Config("query has no n_ports".into())),
        }
    }
}

/// Why a design rule has no answer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "guard", rename_all = "snake_case")]
pub enum Guard {
    /// The logarithm's argument is at most 1.
    LogNonPositive { argument: f64 },
    /// Negative radicand under the square root.
    ComplexMu { radicand: f64 },
    /// `mu*` is zero, or so small that the envelope search gives up before
    /// `|J0|` stays below it.
    MuTooSmall { mu_star: f64 },
    /// A per-port factor left (0, 1).
    FactorOutOfRange { factor: f64 },
    NotReached { n_max: usize },
    ProfileExhausted { ports: usize },
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Guard::LogNonPositive { argument } => write!(
                f,
                "result of ln(.) becomes negative (argument {argument:.6} <= 1)"
            ),
            Guard::ComplexMu { radicand } => {
                write!(f, "complex mu* (radicand {radicand:.6} < 0)")
            }
            Guard::MuTooSmall { mu_star } => {
                write!(f, "mu* = {mu_star:e} is too small for a finite size")
            }
            Guard::FactorOutOfRange { factor } => {
                write!(f, "per-port factor {factor} outside (0, 1)")
            }
            Guard::NotReached { n_max } => write!(f, "not satisfied for any N <= {n_max}"),
            Guard::ProfileExhausted { ports } => {
                write!(f, "profile exhausted after {ports} ports")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignAnswer<T> {
    pub value: Option<T>,
    pub feasible: bool,
    pub guard: Option<Guard>,
}

impl<T> DesignAnswer<T> {
    fn ok(value: T) -> Self {
        Self {
            value: Some(value),
            feasible: true,
            guard: None,
        }
    }

    fn infeasible(guard: Guard) -> Self {
        Self {
            value: None,
            feasible: false,
            guard: Some(guard),
        }
    }

    pub fn guard_report(&self) -> Option<String> {
        self.guard.map(|g| g.to_string())
    }
}

fn factor_or_one(mu: f64, x: f64, c: &BoundConstants) -> Result<f64> {
    if is_degenerate(mu) {
        Ok(1.0)
    } else {
        per_port_bound_factor(mu, x, c)
    }
}

/// Smallest prefix of `profile` whose factor product drops below the target.
pub fn min_ports_general(
    profile: &CorrelationProfile,
    query: &DesignQuery,
) -> Result<DesignAnswer<usize>> {
    let target = query.target_ratio()?;
    let mut product = 1.0;
    for (k, &mu) in profile.mu().iter().enumerate().skip(1) {
        let n = k + 1;
        if n > query.n_max {
            return Ok(DesignAnswer::infeasible(Guard::NotReached { n_max: query.n_max }));
        }
        product *= factor_or_one(mu, query.snr_ratio, &query.constants)?;
        if product < target {
            return Ok(DesignAnswer::ok(n));
        }
    }
    Ok(DesignAnswer::infeasible(Guard::ProfileExhausted {
        ports: profile.n_ports(),
    }))
}

/// Smallest N whose evenly spaced profile over `query.size_wavelengths`
/// meets the target. The profile changes with N, so each N is checked afresh.
pub fn min_ports_for_size(query: &DesignQuery) -> Result<DesignAnswer<usize>> {
    let w = query
        .size_wavelengths
        .ok_or_else(|| FasError::Config("query has no size_wavelengths".into()))?;
    let target = query.target_ratio()?;
    let cap = query.n_max.min(SIZE_SCAN_N_MAX);
    for n in 2..=cap {
        let profile = correlation_profile(&FasConfig::new(n, w, query.snr_ratio)?);
        let mut product = 1.0;
        for &mu in &profile.mu()[1..] {
            product *= factor_or_one(mu, query.snr_ratio, &query.constants)?;
        }
        if product < target {
            return Ok(DesignAnswer::ok(n));
        }
    }
    Ok(DesignAnswer::infeasible(Guard::NotReached { n_max: cap }))
}

/// Smallest N with `factor(mu)^(N-1) < target` for a homogeneous profile.
pub fn min_ports_homogeneous(mu: f64, query: &DesignQuery) -> Result<DesignAnswer<usize>> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(FasError::Domain(format!("mu must lie in (0, 1), got {mu}")));
    }
    let target = query.target_ratio()?;
    let f = per_port_bound_factor(mu, query.snr_ratio, &query.constants)?;
    if !(f > 0.0 && f < 1.0) {
        return Ok(DesignAnswer::infeasible(Guard::FactorOutOfRange { factor: f }));
    }
    let bound = target.ln() / f.ln() + 1.0;
    if !(bound < query.n_max as f64) {
        return Ok(DesignAnswer::infeasible(Guard::NotReached { n_max: query.n_max }));
    }
    // Strict inequality N > bound, then settle rounding against the product.
    let mut n = (bound.floor() as usize + 1).max(1);
    let meets = |n: usize| f.powi((n - 1) as i32) < target;
    while n > 1 && meets(n - 1) {
        n -= 1;
    }
    while !meets(n) {
        n += 1;
    }
    if n > query.n_max {
        return Ok(DesignAnswer::infeasible(Guard::NotReached { n_max: query.n_max }));
    }
    Ok(DesignAnswer::ok(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuSize {
    pub mu_star: f64,
    /// Spacing in wavelengths beyond which `|J0(2 pi d)| <= mu_star`.
    pub d_star: f64,
}

/// `mu*` with `1 - rho e^{-kappa x/(1 - mu*^2)} = target^(1/(N-1))`, and the
/// spacing `d*` that keeps every port beyond it at or below `mu*`.
pub fn required_mu_and_size(query: &DesignQuery) -> Result<DesignAnswer<MuSize>> {
    let n = query.need_n(2)?;
    mu_size_for(n, query)
}

fn mu_size_for(n: usize, query: &DesignQuery) -> Result<DesignAnswer<MuSize>> {
    let target = query.target_ratio()?;
    let c = &query.constants;
    // 1 - target^(1/(N-1)), kept accurate for large N.
    let gap = -(target.ln() / (n - 1) as f64).exp_m1();
    if gap <= 0.0 {
        // Target already met with no help from correlation.
        return Ok(DesignAnswer::ok(MuSize {
            mu_star: 1.0,
            d_star: 0.0,
        }));
    }
    let argument = c.rho() / gap;
    if !(argument > 1.0) {
        return Ok(DesignAnswer::infeasible(Guard::LogNonPositive { argument }));
    }
    let radicand = 1.0 - c.kappa() * query.snr_ratio / argument.ln();
    if radicand < 0.0 {
        return Ok(DesignAnswer::infeasible(Guard::ComplexMu { radicand }));
    }
    let mu_star = radicand.sqrt();
    let eps = match inv_besselj0_envelope(mu_star) {
        Ok(e) => e,
        Err(FasError::Domain(_) | FasError::Numerical(_)) => {
            return Ok(DesignAnswer::infeasible(Guard::MuTooSmall { mu_star }))
        }
        Err(e) => return Err(e),
    };
    Ok(DesignAnswer::ok(MuSize {
        mu_star,
        d_star: eps.epsilon_star / (2.0 * PI),
    }))
}

/// Minimum size in wavelengths for N ports. The worst case puts half the
/// ports (rounded down) at correlation `mu*`.
pub fn min_size(query: &DesignQuery) -> Result<DesignAnswer<f64>> {
    let n = query.need_n(4)?;
    let a = mu_size_for(n / 2, query)?;
    Ok(DesignAnswer {
        value: a.value.map(|v| v.d_star),
        feasible: a.feasible,
        guard: a.guard,
    })
}

/// `min_size` for each N in `ns`.
pub fn size_frontier(query: &DesignQuery, ns: &[usize]) -> Result<Vec<(usize, DesignAnswer<f64>)>> {
    ns.iter()
        .map(|&n| Ok((n, min_size(&query.with_n_ports(n))?)))
        .collect()
}

/// Smallest N >= 4 for which `min_size` is feasible. Feasibility only
/// improves with N, so this bisects.
pub fn smallest_feasible_n(query: &DesignQuery) -> Result<Option<usize>> {
    let feasible = |n: usize| -> Result<bool> { Ok(min_size(&query.with_n_ports(n))?.feasible) };
    let (mut lo, mut hi) = (4, query.n_max.max(4));
    if !feasible(hi)? {
        return Ok(None);
    }
    if feasible(lo)? {
        return Ok(Some(lo));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Smallest N whose `min_size` is at most `w`.
pub fn smallest_n_for_size(query: &DesignQuery, w: f64) -> Result<Option<usize>> {
    let start = match smallest_feasible_n(query)? {
        Some(n) => n,
        None => return Ok(None),
    };
    for n in start..=query.n_max {
        if let Some(v) = min_size(&query.with_n_ports(n))?.value {
            if v <= w {
                return Ok(Some(n));
            }
        }
    }
    Ok(None)
}

/// Product of factors for `n` ports all at correlation `mu`, times the
/// single-port outage: the bound's value for that worst-case profile.
pub fn homogeneous_bound(n: usize, mu: f64, x: f64, c: &BoundConstants) -> Result<f64> {
    let f = factor_or_one(mu, x, c)?;
    Ok(-(-x).exp_m1() * f.powi(n as i32 - 1))
}

/// One row of the kappa sweep against a published design anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaSweepRow {
    pub kappa: f64,
    pub mrc_branches: usize,
    /// Smallest N with a feasible size.
    pub critical_n: Option<usize>,
    /// Size at `critical_n`.
    pub critical_w: Option<f64>,
    /// Smallest N whose size fits in one wavelength.
    pub n_at_one_wavelength: Option<usize>,
}

/// Evaluate the design rules at each kappa. Nothing here is asserted; the
/// rows are for comparing against reference curves.
pub fn kappa_sweep(
    kappas: &[f64],
    branches: &[usize],
    snr_ratio: f64,
    n_max: usize,
) -> Result<Vec<KappaSweepRow>> {
    let mut rows = Vec::new();
    for &kappa in kappas {
        let c = bound_constants(kappa)?;
        for &l in branches {
            let q = DesignQuery::new(l, snr_ratio, c)?.with_n_max(n_max);
            let critical_n = smallest_feasible_n(&q)?;
            let critical_w = match critical_n {
                Some(n) => min_size(&q.with_n_ports(n))?.value,
                None => None,
            };
            rows.push(KappaSweepRow {
                kappa,
                mrc_branches: l,
                critical_n,
                critical_w,
                n_at_one_wavelength: smallest_n_for_size(&q, 1.0)?,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn query(l: usize) -> DesignQuery {
        DesignQuery::new(l, 1.0, BoundConstants::default()).unwrap()
    }

    #[test]
    fn target_ratio_for_two_branches() {
        let e = (-1f64).exp();
        let want = (1.0 - 2.0 * e) / (1.0 - e);
        assert!((query(2).target_ratio().unwrap() - want).abs() < 1e-15);
        assert_eq!(query(1).target_ratio().unwrap(), 1.0);
    }

    #[test]
    fn homogeneous_matches_brute_force() {
        let a = min_ports_homogeneous(0.5, &query(2)).unwrap();
        assert_eq!(a.value, Some(24));
        let f = per_port_bound_factor(0.5, 1.0, &BoundConstants::default()).unwrap();
        let t = query(2).target_ratio().unwrap();
        assert!(f.powi(23) < t && f.powi(22) >= t);
    }

    #[test]
    fn homogeneous_small_mu_uses_fallback() {
        let a = min_ports_homogeneous(1e-6, &query(2)).unwrap();
        assert!(a.feasible);
        assert!(min_ports_homogeneous(0.0, &query(2)).is_err());
        assert!(min_ports_homogeneous(1.0, &query(2)).is_err());
    }

    #[test]
    fn homogeneous_reports_cap() {
        let a = min_ports_homogeneous(0.5, &query(6).with_n_max(50)).unwrap();
        assert!(!a.feasible);
        assert!(matches!(a.guard, Some(Guard::NotReached { n_max: 50 })));
        assert!(a.guard_report().unwrap().contains("50"));
    }

    #[test]
    fn general_agrees_with_homogeneous() {
        for mu in [0.2, 0.5, 0.8] {
            let p = CorrelationProfile::homogeneous(5000, mu).unwrap();
            let g = min_ports_general(&p, &query(2)).unwrap();
            let h = min_ports_homogeneous(mu, &query(2)).unwrap();
            assert_eq!(g.value, h.value, "mu={mu}");
        }
    }

    #[test]
    fn general_single_branch_needs_one_port() {
        let p = CorrelationProfile::homogeneous(3, 0.4).unwrap();
        assert_eq!(min_ports_general(&p, &query(1)).unwrap().value, Some(2));
    }

    #[test]
    fn general_on_physical_profile() {
        let p = correlation_profile(&FasConfig::new(400, 5.0, 1.0).unwrap());
        let a = min_ports_general(&p, &query(2)).unwrap();
        let n = a.value.unwrap();
        let bound = crate::bounds::outage_upper_bound_profile(
            &p.prefix(n).unwrap(),
            1.0,
            &BoundConstants::default(),
        )
        .unwrap();
        assert!(bound < outage_mrc(2, 1.0).unwrap());
        let short = p.prefix(3).unwrap();
        assert!(matches!(
            min_ports_general(&short, &query(2)).unwrap().guard,
            Some(Guard::ProfileExhausted { ports: 3 })
        ));
    }

    #[test]
    fn size_scan_finds_smallest_n() {
        let q = query(2).with_size(5.0);
        let n = min_ports_for_size(&q).unwrap().value.unwrap();
        let c = BoundConstants::default();
        let ub = |n| {
            crate::bounds::outage_upper_bound(&FasConfig::new(n, 5.0, 1.0).unwrap(), &c).unwrap()
        };
        let level = outage_mrc(2, 1.0).unwrap();
        assert!(ub(n) < level);
        assert!((2..n).all(|m| ub(m) >= level));
    }

    #[test]
    fn required_mu_reference() {
        let a = required_mu_and_size(&query(2).with_n_ports(200)).unwrap();
        let v = a.value.unwrap();
        assert!((v.mu_star - 0.744_473_392_697_892_2).abs() < 1e-12);
        assert!((v.d_star - 0.166_526_220_125_950_57).abs() < 1e-10);
    }

    #[test]
    fn required_mu_solves_fallback_form() {
        // The closed form inverts 1 - rho e^{-kappa x/(1-mu^2)}; the bound's
        // own factor at mu* has the extra 1/sqrt(mu*) and is smaller.
        let c = BoundConstants::default();
        let q = query(2).with_n_ports(200);
        let mu = required_mu_and_size(&q).unwrap().value.unwrap().mu_star;
        let plain = 1.0 - c.rho() * (-c.kappa() / (1.0 - mu * mu)).exp();
        let t = q.target_ratio().unwrap();
        assert!((plain.powi(199) - t).abs() < 1e-9);
        let ub = homogeneous_bound(200, mu, 1.0, &c).unwrap();
        assert!(ub <= outage_mrc(2, 1.0).unwrap() + 1e-9);
    }

    #[test]
    fn mu_star_grows_toward_one() {
        // The approach is only logarithmic in N.
        let mut prev = 0.0;
        for n in [100, 1_000, 10_000, 100_000, 10_000_000] {
            let mu = required_mu_and_size(&query(2).with_n_ports(n)).unwrap().value.unwrap().mu_star;
            assert!(mu > prev && mu < 1.0, "N={n}");
            prev = mu;
        }
        assert!(prev > 0.93);
        let one = required_mu_and_size(&query(1).with_n_ports(10)).unwrap().value.unwrap();
        assert_eq!((one.mu_star, one.d_star), (1.0, 0.0));
    }

    #[test]
    fn small_n_hits_named_guards() {
        let q = query(2);
        let a = required_mu_and_size(&q.with_n_ports(2)).unwrap();
        assert!(matches!(a.guard, Some(Guard::LogNonPositive { .. })));
        assert!(a.guard_report().unwrap().contains("ln"));
        let a = required_mu_and_size(&q.with_n_ports(10)).unwrap();
        assert!(matches!(a.guard, Some(Guard::ComplexMu { .. })));
        assert!(a.value.is_none());
        assert!(required_mu_and_size(&q.with_n_ports(1)).is_err());
        assert!(Guard::MuTooSmall { mu_star: 0.0 }.to_string().contains("too small"));
        assert!(required_mu_and_size(&q).is_err());
    }

    #[test]
    fn min_size_uses_half_the_ports() {
        let q = query(2);
        for n in [80, 81, 150] {
            let w = min_size(&q.with_n_ports(n)).unwrap().value.unwrap();
            let d = required_mu_and_size(&q.with_n_ports(n / 2)).unwrap().value.unwrap();
            assert_eq!(w, d.d_star);
        }
        assert!(min_size(&q.with_n_ports(3)).is_err());
    }

    #[test]
    fn min_size_is_nonincreasing() {
        let q = query(2);
        let ns: Vec<usize> = (4..400).collect();
        let rows = size_frontier(&q, &ns).unwrap();
        let mut prev = f64::INFINITY;
        let mut seen = false;
        for (n, a) in rows {
            if let Some(w) = a.value {
                assert!(w <= prev, "N={n}");
                prev = w;
                seen = true;
            } else {
                assert!(!seen, "N={n} infeasible after a feasible N");
            }
        }
        assert!(seen);
    }

    #[test]
    fn smallest_feasible_matches_scan() {
        let q = query(2).with_n_max(2000);
        let n = smallest_feasible_n(&q).unwrap().unwrap();
        assert!(min_size(&q.with_n_ports(n)).unwrap().feasible);
        assert!(!min_size(&q.with_n_ports(n - 1)).unwrap().feasible);
    }

    #[test]
    fn kappa_sweep_rows() {
        let rows = kappa_sweep(&[1.5, 2.0], &[2, 3], 1.0, 5000).unwrap();
        assert_eq!(rows.len(), 4);
        for r in rows {
            if let (Some(n), Some(w)) = (r.critical_n, r.critical_w) {
                assert!(n >= 4 && w > 0.0);
            }
        }
    }
}
