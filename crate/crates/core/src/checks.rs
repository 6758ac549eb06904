//! Seeded property checks shared by `fas validate` and the acceptance tests.
//!
//! Each check returns a [`CheckOutcome`] rather than panicking so a report
//! can list every failure at once. Nothing here reads the clock, so a check
//! run twice with the same inputs serializes to the same bytes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{outage_exact, outage_exact_profile, outage_n2_closed_form};
use crate::bounds::{bound_constants, outage_upper_bound};
use crate::channel::{CorrelationProfile, FasConfig};
use crate::error::Result;
use crate::analytic::outage_mrc;
use crate::mc::{mc_joint_density_check, mc_outage_fas, mc_outage_mrc, HistogramGrid, McSettings};
use crate::quad::{integrate, QuadratureSettings};
use crate::rng::stream;
use crate::specfun::{marcum_pair, marcum_q1, MarcumArgs};

/// Tolerance the closed-form cross-checks are held to.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Quadrature tolerances looser than these cannot certify the 1e-8 checks.
pub const MAX_ABS_TOL: f64 = 1e-9;
pub const MAX_REL_TOL: f64 = 1e-8;

/// Fraction of grid points that must sit within 3 standard errors.
pub const MC_AGREEMENT_SHARE: f64 = 0.95;
pub const MC_Z_LIMIT: f64 = 3.0;

/// Streams for sampling check inputs, clear of MC workers and traces.
const CHECK_STREAM_BASE: u64 = 1 << 40;

pub const BOUND_CHECK_KAPPAS: [f64; 3] = [1.5, 2.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub violations: usize,
    /// The extreme value of the checked quantity (an error, a ratio or a z-score).
    pub worst: f64,
    pub limit: f64,
}

impl CheckOutcome {
    fn new(name: &str, samples: usize, violations: usize, worst: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: violations == 0,
            samples,
            violations,
            worst,
            limit,
        }
    }
}

/// Configuration grid for the MC and bound-ordering checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_ports: Vec<usize>,
    pub size_wavelengths: Vec<f64>,
    pub snr_db: Vec<f64>,
}

impl Grid {
    /// 6 x 5 x 3 = 90 configurations.
    pub fn full() -> Self {
        Self {
            n_ports: vec![1, 2, 3, 5, 10, 20],
            size_wavelengths: vec![0.2, 0.5, 1.0, 2.0, 5.0],
            snr_db: vec![-10.0, 0.0, 10.0],
        }
    }

    pub fn quick() -> Self {
        Self {
            n_ports: vec![1, 3, 10],
            size_wavelengths: vec![0.5, 2.0],
            snr_db: vec![0.0],
        }
    }

    pub fn configs(&self) -> Result<Vec<FasConfig>> {
        let mut out = Vec::new();
        for &n in &self.n_ports {
            for &w in &self.size_wavelengths {
                for &s in &self.snr_db {
                    out.push(FasConfig::from_db(n, w, s)?);
                }
            }
        }
        Ok(out)
    }
}

fn q1(a: f64, b: f64) -> Result<f64> {
    Ok(marcum_q1(MarcumArgs::new(a, b)?))
}

/// Quadrature settings loose enough to hide a 1e-8 discrepancy fail here.
pub fn quadrature_settings_check(q: &QuadratureSettings) -> CheckOutcome {
    let bad = usize::from(q.validate().is_err())
        + usize::from(!(q.abs_tol <= MAX_ABS_TOL))
        + usize::from(!(q.rel_tol <= MAX_REL_TOL));
    CheckOutcome::new("quadrature_settings", 2, bad, q.abs_tol.max(q.rel_tol), MAX_ABS_TOL)
}

/// `Q1(a, 0) = 1` and `Q1(0, b) = e^{-b^2/2}`.
pub fn marcum_boundaries() -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut n = 0;
    for i in 0..=100 {
        let v = i as f64 * 0.3;
        for err in [(q1(v, 0.0)? - 1.0).abs(), (q1(0.0, v)? - (-v * v / 2.0).exp()).abs()] {
            worst = worst.max(err);
            bad += usize::from(err > 1e-12);
            n += 1;
        }
    }
    Ok(CheckOutcome::new("marcum_boundaries", n, bad, worst, 1e-12))
}

/// Nonincreasing in `b`, nondecreasing in `a`, on a 50 x 50 grid of [0, 10]^2.
pub fn marcum_monotonicity() -> Result<CheckOutcome> {
    const SLACK: f64 = 1e-15;
    let pts: Vec<f64> = (0..50).map(|i| i as f64 * 10.0 / 49.0).collect();
    let mut grid = vec![vec![0.0; 50]; 50];
    for (i, &a) in pts.iter().enumerate() {
        for (j, &b) in pts.iter().enumerate() {
            grid[i][j] = q1(a, b)?;
        }
    }
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut n = 0;
    for i in 0..50 {
        for j in 0..49 {
            // Step in b, then step in a.
            for rise in [grid[i][j + 1] - grid[i][j], grid[j][i] - grid[j + 1][i]] {
                worst = worst.max(rise);
                bad += usize::from(rise > SLACK);
                n += 1;
            }
        }
    }
    Ok(CheckOutcome::new("marcum_monotonicity", n, bad, worst, SLACK))
}

const DIAGONAL_LADDER: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

fn diagonal_deviation() -> Result<Vec<f64>> {
    DIAGONAL_LADDER
        .iter()
        .map(|&a| Ok((q1(a, a)? - 0.5).abs()))
        .collect()
}

/// `|Q1(a, a) - 1/2|` shrinks along 1, 2, 4, 8, 16 and is below `limit` at 16.
/// The deviation is `e^{-a^2} I0(a^2) / 2`, which is 0.012473 at 16.
pub fn marcum_diagonal_limit(limit: f64) -> Result<CheckOutcome> {
    let dev = diagonal_deviation()?;
    let mut bad = dev.windows(2).filter(|w| !(w[1] < w[0])).count();
    bad += usize::from(!(dev[4] < limit));
    Ok(CheckOutcome::new("marcum_diagonal_limit", dev.len(), bad, dev[4], limit))
}

/// `|Q1(a, a) - 1/2|` shrinks along the ladder and follows its large-`a`
/// law `1 / (2 a sqrt(2 pi))` to 0.1% at 16. `worst` is the relative gap.
pub fn marcum_diagonal_decay() -> Result<CheckOutcome> {
    const TOL: f64 = 1e-3;
    let dev = diagonal_deviation()?;
    let mut bad = dev.windows(2).filter(|w| !(w[1] < w[0])).count();
    let a = DIAGONAL_LADDER[4];
    let law = 1.0 / (2.0 * a * (2.0 * std::f64::consts::PI).sqrt());
    let rel = (dev[4] / law - 1.0).abs();
    bad += usize::from(!(rel < TOL));
    Ok(CheckOutcome::new("marcum_diagonal_decay", dev.len(), bad, rel, TOL))
}

/// `Q1(alpha, beta) < (1/sqrt(1 + 2 alpha beta)) beta/(beta - alpha)` for
/// `0 <= alpha < beta <= 20`. `worst` is the largest ratio of Q1 to the bound.
pub fn marcum_upper_bound(samples: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = stream(seed, CHECK_STREAM_BASE + 4);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for i in 0..samples {
        let beta: f64 = if i % 10 == 0 { 20.0 } else { rng.gen_range(1e-3..20.0) };
        let alpha = if i % 7 == 0 { 0.0 } else { beta * rng.gen::<f64>() };
        if !(alpha < beta) {
            continue;
        }
        let bound = beta / (beta - alpha) / (1.0 + 2.0 * alpha * beta).sqrt();
        let ratio = q1(alpha, beta)? / bound;
        worst = worst.max(ratio);
        bad += usize::from(!(ratio < 1.0));
    }
    Ok(CheckOutcome::new("marcum_upper_bound", samples, bad, worst, 1.0))
}

/// `Q1(alpha, beta) >= rho sqrt(beta/alpha) e^{-kappa (beta - alpha)^2 / 2}`
/// for `beta` in [10, 20]. Half the draws take `alpha` uniform on (0, beta),
/// half log-uniform down to `1e-8 beta`. `worst` is the smallest ratio of Q1
/// to the bound.
pub fn marcum_lower_bound(samples_per_kappa: usize, seed: u64) -> Result<CheckOutcome> {
    let mut rng = stream(seed, CHECK_STREAM_BASE + 6);
    let mut worst = f64::INFINITY;
    let mut bad = 0;
    let mut n = 0;
    for &kappa in &BOUND_CHECK_KAPPAS {
        let c = bound_constants(kappa)?;
        for i in 0..samples_per_kappa {
            let beta: f64 = rng.gen_range(10.0..20.0);
            let u: f64 = if i % 2 == 0 {
                rng.gen_range(f64::EPSILON..1.0)
            } else {
                10f64.powf(rng.gen_range(-8.0..0.0))
            };
            let alpha = beta * u;
            let d = beta - alpha;
            let bound = c.rho() * (beta / alpha).sqrt() * (-kappa * d * d / 2.0).exp();
            let ratio = q1(alpha, beta)? / bound;
            worst = worst.min(ratio);
            bad += usize::from(!(ratio >= 1.0));
            n += 1;
        }
    }
    Ok(CheckOutcome::new("marcum_lower_bound", n, bad, worst, 1.0))
}

/// Quadrature of `int_0^c e^{-t} Q1(a sqrt t, b) dt` against its closed form
/// for `(a, b, c)` drawn from [0.1, 3]^3.
pub fn integral_identity(triples: usize, seed: u64, q: &QuadratureSettings) -> Result<CheckOutcome> {
    let mut rng = stream(seed, CHECK_STREAM_BASE + 3);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..triples {
        let a: f64 = rng.gen_range(0.1..3.0);
        let b: f64 = rng.gen_range(0.1..3.0);
        let c: f64 = rng.gen_range(0.1..3.0);
        let lhs = integrate(
            |t| (-t).exp() * marcum_pair(a * t.sqrt(), b).q,
            0.0,
            c,
            q,
        )?
        .value;
        let s = a * a + 2.0;
        let rhs = (-b * b / s).exp() * q1((c * s).sqrt(), a * b / s.sqrt())?
            - (-c).exp() * q1(a * c.sqrt(), b)?;
        let err = (lhs - rhs).abs();
        worst = worst.max(err);
        bad += usize::from(!(err <= CROSS_CHECK_TOL));
    }
    Ok(CheckOutcome::new("integral_identity", triples, bad, worst, CROSS_CHECK_TOL))
}

/// Two-port quadrature against the closed form, `mu2` in (-0.99, 0.99) and
/// `x` log-uniform on [0.01, 10].
pub fn two_port_closed_form(draws: usize, seed: u64, q: &QuadratureSettings) -> Result<CheckOutcome> {
    let mut rng = stream(seed, CHECK_STREAM_BASE + 2);
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for _ in 0..draws {
        let mu = rng.gen_range(-0.99..0.99);
        let x = 10f64.powf(rng.gen_range(-2.0..1.0));
        let p = CorrelationProfile::from_mu(vec![0.0, mu])?;
        let err = (outage_exact_profile(&p, x, q)? - outage_n2_closed_form(mu, x)?).abs();
        worst = worst.max(err);
        bad += usize::from(!(err <= CROSS_CHECK_TOL));
    }
    Ok(CheckOutcome::new("two_port_closed_form", draws, bad, worst, CROSS_CHECK_TOL))
}

/// Independent ports give `(1 - e^{-x})^N`. The profile is built with a tiny
/// nonzero mu so the quadrature path runs instead of the shortcut.
pub fn independent_ports(q: &QuadratureSettings) -> Result<CheckOutcome> {
    const TOL: f64 = 1e-9;
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut n_cases = 0;
    for n in [1usize, 2, 3, 5, 10, 20] {
        for x in [0.1, 1.0, 10.0] {
            let want = (-(-x as f64).exp_m1()).powi(n as i32);
            let exact = outage_exact_profile(&CorrelationProfile::independent(n)?, x, q)?;
            let mut mu = vec![1e-12; n];
            mu[0] = 0.0;
            let near = outage_exact_profile(&CorrelationProfile::from_mu(mu)?, x, q)?;
            for v in [exact, near] {
                let err = (v - want).abs();
                worst = worst.max(err);
                bad += usize::from(!(err <= TOL));
                n_cases += 1;
            }
        }
    }
    Ok(CheckOutcome::new("independent_ports", n_cases, bad, worst, TOL))
}

/// Appending a port with `mu = 1 - 1e-12` barely moves outage.
pub fn near_copy_port(q: &QuadratureSettings) -> Result<CheckOutcome> {
    const TOL: f64 = 1e-6;
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut n_cases = 0;
    for (n, w) in [(2, 0.5), (5, 1.0), (10, 2.0), (20, 5.0)] {
        for x in [0.1, 1.0, 10.0] {
            let base = crate::channel::correlation_profile(&FasConfig::new(n, w, x)?);
            let more = base.with_port(1.0 - 1e-12)?;
            let err = (outage_exact_profile(&base, x, q)? - outage_exact_profile(&more, x, q)?).abs();
            worst = worst.max(err);
            bad += usize::from(!(err < TOL));
            n_cases += 1;
        }
    }
    Ok(CheckOutcome::new("near_copy_port", n_cases, bad, worst, TOL))
}

/// Upper bound at or above exact outage on `grid`, for each kappa.
/// `worst` is the largest `exact - bound`.
pub fn bound_ordering(grid: &Grid, kappas: &[f64], q: &QuadratureSettings) -> Result<CheckOutcome> {
    const SLACK: f64 = 1e-12;
    let configs = grid.configs()?;
    let exact: Vec<f64> = configs
        .par_iter()
        .map(|c| outage_exact(c, q))
        .collect::<Result<_>>()?;
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    for &k in kappas {
        let c = bound_constants(k)?;
        for (cfg, &e) in configs.iter().zip(&exact) {
            let gap = e - outage_upper_bound(cfg, &c)?;
            worst = worst.max(gap);
            bad += usize::from(gap > SLACK);
        }
    }
    Ok(CheckOutcome::new("bound_ordering", configs.len() * kappas.len(), bad, worst, SLACK))
}

/// One grid point of the MC comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McPoint {
    pub n_ports: usize,
    pub size_wavelengths: f64,
    pub snr_ratio: f64,
    pub exact: f64,
    pub p_hat: f64,
    pub z: f64,
}

/// Exact outage against seeded MC on every grid point. Grid point `i` uses
/// seed `seed + i`. Passes when at least 95% of points sit within 3
/// standard errors; `violations` counts the points outside.
pub fn mc_agreement(
    grid: &Grid,
    settings: &McSettings,
    q: &QuadratureSettings,
) -> Result<(CheckOutcome, Vec<McPoint>)> {
    let configs = grid.configs()?;
    let mut points = Vec::with_capacity(configs.len());
    for (i, cfg) in configs.iter().enumerate() {
        let s = McSettings {
            seed: settings.seed.wrapping_add(i as u64),
            ..*settings
        };
        let exact = outage_exact(cfg, q)?;
        let est = mc_outage_fas(cfg, &s)?;
        points.push(McPoint {
            n_ports: cfg.n_ports(),
            size_wavelengths: cfg.size_wavelengths(),
            snr_ratio: cfg.snr_ratio(),
            exact,
            p_hat: est.p_hat,
            z: est.z_score(exact),
        });
    }
    let outside = points.iter().filter(|p| !(p.z <= MC_Z_LIMIT)).count();
    let worst = points.iter().map(|p| p.z).fold(0.0, f64::max);
    let share_inside = 1.0 - outside as f64 / points.len() as f64;
    let mut out = CheckOutcome::new("mc_agreement", points.len(), outside, worst, MC_Z_LIMIT);
    out.passed = share_inside >= MC_AGREEMENT_SHARE;
    Ok((out, points))
}

/// MRC outage against seeded MC for a few branch counts and thresholds.
pub fn mrc_agreement(settings: &McSettings) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    let mut n = 0;
    for l in [1usize, 2, 4] {
        for x in [0.3, 1.0, 3.0] {
            let s = McSettings {
                seed: settings.seed.wrapping_add(1000 + n as u64),
                ..*settings
            };
            let z = mc_outage_mrc(l, x, &s)?.z_score(outage_mrc(l, x)?);
            worst = worst.max(z);
            bad += usize::from(!(z <= 4.0));
            n += 1;
        }
    }
    Ok(CheckOutcome::new("mrc_agreement", n, bad, worst, 4.0))
}

/// Chi-square test of two-port envelope draws against the joint density,
/// at `mu` in {0.3, 0.8}. `worst` is the largest statistic over its critical value.
pub fn joint_density(settings: &McSettings) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    let mut bad = 0;
    for (i, mu) in [0.3, 0.8].into_iter().enumerate() {
        let s = McSettings {
            seed: settings.seed.wrapping_add(2000 + i as u64),
            ..*settings
        };
        let p = CorrelationProfile::from_mu(vec![0.0, mu])?;
        let d = mc_joint_density_check(&p, &s, &HistogramGrid::default())?;
        worst = worst.max(d.statistic / d.critical_value);
        bad += usize::from(!d.passes());
    }
    Ok(CheckOutcome::new("joint_density", 2, bad, worst, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marcum_properties_hold() {
        for c in [
            marcum_boundaries().unwrap(),
            marcum_monotonicity().unwrap(),
            marcum_diagonal_decay().unwrap(),
            marcum_upper_bound(2000, 1).unwrap(),
            marcum_lower_bound(500, 1).unwrap(),
        ] {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn closed_forms_hold() {
        let q = QuadratureSettings::default();
        for c in [
            integral_identity(50, 7, &q).unwrap(),
            two_port_closed_form(100, 7, &q).unwrap(),
            independent_ports(&q).unwrap(),
            near_copy_port(&q).unwrap(),
        ] {
            assert!(c.passed, "{c:?}");
        }
    }

    #[test]
    fn diagonal_stays_above_one_percent_at_16() {
        let c = marcum_diagonal_limit(0.01).unwrap();
        assert!(!c.passed);
        assert!((c.worst - 0.012_473_047_068_985_3).abs() < 1e-12);
    }

    #[test]
    fn loose_quadrature_is_flagged() {
        assert!(quadrature_settings_check(&QuadratureSettings::default()).passed);
        let loose = QuadratureSettings {
            abs_tol: 10.0,
            ..Default::default()
        };
        assert!(!quadrature_settings_check(&loose).passed);
    }

    #[test]
    fn quick_grid_ordering() {
        let c = bound_ordering(&Grid::quick(), &BOUND_CHECK_KAPPAS, &QuadratureSettings::default()).unwrap();
        assert!(c.passed, "{c:?}");
    }
}
