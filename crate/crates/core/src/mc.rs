//! Seeded Monte-Carlo estimates of selection and MRC outage.
//!
//! Trials are split as evenly as possible over `workers` logical workers;
//! worker `w` draws from stream `w` of the seed. Results depend only on
//! `(seed, trials, workers)`, never on the size of the thread pool.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::analytic::joint_pdf;
use crate::channel::{correlation_profile, ChannelSampler, CorrelationProfile, FasConfig};
use crate::error::{FasError, Result};
use crate::quad::{integrate, QuadratureSettings};
use crate::rng::{stream, FasRng};

pub const MIN_TRIALS: u64 = 1_000;

/// Below this analytic outage the trial count is scaled up.
pub const RARE_EVENT_LEVEL: f64 = 1e-4;
pub const RARE_EVENT_TARGET_FAILURES: f64 = 100.0;
pub const RARE_EVENT_MAX_TRIALS: u64 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McSettings {
    pub fn new(trials: u64, seed: u64, workers: usize) -> Result<Self> {
        let s = Self {
            trials,
            seed,
            workers,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(FasError::Config(format!(
                "need at least {MIN_TRIALS} trials, got {}",
                self.trials
            )));
        }
        if self.workers < 1 {
            return Err(FasError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_trials(self, trials: u64) -> Self {
        Self { trials, ..self }
    }

    fn share(&self, worker: usize) -> u64 {
        let w = self.workers as u64;
        self.trials / w + u64::from((worker as u64) < self.trials % w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub half_width_95: f64,
    pub trials: u64,
    pub failures: u64,
}

impl McEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let p = failures as f64 / trials as f64;
        Self {
            p_hat: p,
            half_width_95: 1.96 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            failures,
        }
    }

    /// Standard error of the estimate if the true probability were `p`.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Distance to `p` in standard errors computed at `p`. Zero when both
    /// are 0 or 1 exactly.
    pub fn z_score(&self, p: f64) -> f64 {
        let se = self.standard_error_at(p);
        let d = self.p_hat - p;
        if se == 0.0 {
            if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            d.abs() / se
        }
    }

    pub fn interval_contains(&self, p: f64) -> bool {
        (self.p_hat - p).abs() <= self.half_width_95
    }
}

fn count_parallel<F>(settings: &McSettings, trial: F) -> Result<McEstimate>
where
    F: Fn(&mut FasRng) -> bool + Sync,
{
    settings.validate()?;
    let failures: u64 = (0..settings.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream(settings.seed, w as u64);
            (0..settings.share(w)).filter(|_| trial(&mut rng)).count() as u64
        })
        .sum();
    Ok(McEstimate::from_counts(failures, settings.trials))
}

pub fn mc_outage_fas(config: &FasConfig, settings: &McSettings) -> Result<McEstimate> {
    mc_outage_fas_profile(&correlation_profile(config), config.snr_ratio(), settings)
}

/// Fraction of draws where every port power is below `x`.
pub fn mc_outage_fas_profile(
    profile: &CorrelationProfile,
    x: f64,
    settings: &McSettings,
) -> Result<McEstimate> {
    check_ratio(x)?;
    let sampler = ChannelSampler::new(profile)?;
    count_parallel(settings, |rng| sampler.all_below(x, rng))
}

/// Fraction of draws where `sum |h_l|^2 < x` over `branches` i.i.d. unit
/// Rayleigh branches.
pub fn mc_outage_mrc(branches: usize, snr_ratio: f64, settings: &McSettings) -> Result<McEstimate> {
    check_ratio(snr_ratio)?;
    if branches < 1 {
        return Err(FasError::Domain("MRC needs at least one branch".into()));
    }
    count_parallel(settings, |rng| {
        let mut sum = 0.0;
        for _ in 0..branches {
            let a = crate::channel::half_normal(rng);
            let b = crate::channel::half_normal(rng);
            sum += a * a + b * b;
            if sum >= snr_ratio {
                return false;
            }
        }
        true
    })
}

fn check_ratio(x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(FasError::Domain(format!("snr ratio must be positive, got {x}")));
    }
    Ok(())
}

/// What the rare-event policy decided for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "plan", rename_all = "snake_case")]
pub enum McPlan {
    Run { trials: u64 },
    /// Enough trials for 100 failures would exceed the cap.
    Skipped { needed: u64 },
}

/// Scale `base_trials` so an outage near `p_analytic` yields about 100
/// failures, or skip if that needs more than the cap.
pub fn plan_trials(p_analytic: f64, base_trials: u64) -> McPlan {
    if !(p_analytic < RARE_EVENT_LEVEL) {
        return McPlan::Run {
            trials: base_trials,
        };
    }
    let needed = if p_analytic > 0.0 {
        (RARE_EVENT_TARGET_FAILURES / p_analytic).ceil()
    } else {
        f64::INFINITY
    };
    if needed > RARE_EVENT_MAX_TRIALS as f64 {
        McPlan::Skipped {
            needed: if needed.is_finite() { needed as u64 } else { u64::MAX },
        }
    } else {
        McPlan::Run {
            trials: base_trials.max(needed as u64),
        }
    }
}

/// Square grid on `[0, r_max]^2` for the two-port envelope histogram.
/// Draws outside the grid fall into one extra cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramGrid {
    pub r_max: f64,
    pub bins: usize,
}

impl Default for HistogramGrid {
    fn default() -> Self {
        Self {
            r_max: 2.5,
            bins: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    /// 99th percentile of chi-square at `degrees_of_freedom`.
    pub critical_value: f64,
    /// Cells merged because their expected count was below 5.
    pub pooled_cells: usize,
}

impl DensityCheck {
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_value
    }
}

/// Chi-square test of two-port envelope draws against the model density.
pub fn mc_joint_density_check(
    profile: &CorrelationProfile,
    settings: &McSettings,
    grid: &HistogramGrid,
) -> Result<DensityCheck> {
    mc_joint_density_check_against(profile, profile, settings, grid)
}

/// Draw from `sample` and test against the density of `model`. Using
/// different profiles gives a negative control.
pub fn mc_joint_density_check_against(
    sample: &CorrelationProfile,
    model: &CorrelationProfile,
    settings: &McSettings,
    grid: &HistogramGrid,
) -> Result<DensityCheck> {
    settings.validate()?;
    if sample.n_ports() != 2 || model.n_ports() != 2 {
        return Err(FasError::Domain("density check needs two-port profiles".into()));
    }
    if !(grid.r_max > 0.0 && grid.r_max.is_finite()) || grid.bins < 1 {
        return Err(FasError::Config(format!("bad histogram grid {grid:?}")));
    }
    let (b, r_max) = (grid.bins, grid.r_max);
    let cells = b * b + 1;

    let mu = sample.mu()[1];
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let observed: Vec<u64> = (0..settings.workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = stream(settings.seed, w as u64);
            let mut counts = vec![0u64; cells];
            for _ in 0..settings.share(w) {
                let (r1, r2) = two_port_draw(mu, s, &mut rng);
                counts[cell_index(r1, r2, r_max, b)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; cells],
            |mut a, c| {
                a.iter_mut().zip(c).for_each(|(x, y)| *x += y);
                a
            },
        );

    let probs = cell_probabilities(model, grid)?;
    let n = settings.trials as f64;
    let mut kept: Vec<(f64, f64)> = Vec::with_capacity(cells);
    let (mut pool_o, mut pool_e, mut pooled) = (0.0, 0.0, 0usize);
    for (o, p) in observed.iter().zip(&probs) {
        let e = p * n;
        if e < 5.0 {
            pool_o += *o as f64;
            pool_e += e;
            pooled += 1;
        } else {
            kept.push((*o as f64, e));
        }
    }
    if pooled > 0 {
        if pool_e >= 5.0 || kept.is_empty() {
            kept.push((pool_o, pool_e));
        } else {
            // Still too small on its own; fold into the smallest kept cell.
            let i = (0..kept.len())
                .min_by(|&i, &j| kept[i].1.total_cmp(&kept[j].1))
                .expect("nonempty");
            kept[i].0 += pool_o;
            kept[i].1 += pool_e;
        }
    }
    if kept.len() < 2 {
        return Err(FasError::Config("histogram has fewer than two usable cells".into()));
    }
    let statistic = kept.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = kept.len() - 1;
    let critical_value = ChiSquared::new(dof as f64)
        .map_err(|e| FasError::Numerical(e.to_string()))?
        .inverse_cdf(0.99);
    Ok(DensityCheck {
        statistic,
        degrees_of_freedom: dof,
        critical_value,
        pooled_cells: pooled,
    })
}

fn two_port_draw<R: Rng + ?Sized>(mu: f64, s: f64, rng: &mut R) -> (f64, f64) {
    use crate::channel::half_normal;
    let (x0, y0) = (half_normal(rng), half_normal(rng));
    let (x1, y1) = (half_normal(rng), half_normal(rng));
    let re = s * x1 + mu * x0;
    let im = s * y1 + mu * y0;
    (x0.hypot(y0), re.hypot(im))
}

fn cell_index(r1: f64, r2: f64, r_max: f64, bins: usize) -> usize {
    if r1 >= r_max || r2 >= r_max {
        return bins * bins;
    }
    let h = r_max / bins as f64;
    let i = ((r1 / h) as usize).min(bins - 1);
    let j = ((r2 / h) as usize).min(bins - 1);
    i * bins + j
}

/// Model probability of each grid cell by nested quadrature of the joint
/// density; the last entry is everything outside the grid.
pub fn cell_probabilities(model: &CorrelationProfile, grid: &HistogramGrid) -> Result<Vec<f64>> {
    let (b, r_max) = (grid.bins, grid.r_max);
    let h = r_max / b as f64;
    let q = QuadratureSettings::new(1e-13, 1e-10, 2000)?;
    let mut probs = Vec::with_capacity(b * b + 1);
    for i in 0..b {
        for j in 0..b {
            let (a1, b1) = (i as f64 * h, (i + 1) as f64 * h);
            let (a2, b2) = (j as f64 * h, (j + 1) as f64 * h);
            let mut err = None;
            let outer = integrate(
                |r1| {
                    let inner = integrate(
                        |r2| joint_pdf(model, &[r1, r2]).unwrap_or(f64::NAN),
                        a2,
                        b2,
                        &q,
                    );
                    match inner {
                        Ok(v) => v.value,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                },
                a1,
                b1,
                &q,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            probs.push(outer.value.max(0.0));
        }
    }
    let inside: f64 = probs.iter().sum();
    probs.push((1.0 - inside).max(0.0));
    Ok(probs)
}
