use std::io::Write;

use clap::Args;
use rayon::prelude::*;

use super::output::{fmt_f64, fmt_opt, CsvOut};
use super::sweep::SweepPoint;
use super::{CliError, Common, SweepArgs, EXIT_OK};
use crate::analytic::{outage_approx_profile, outage_exact_profile, outage_mrc};
use crate::bounds::{optimal_kappa, outage_upper_bound_profile, BoundConstants, DEFAULT_KAPPA};
use crate::mc::{mc_outage_fas_profile, plan_trials, McPlan, McSettings};
use crate::quad::QuadratureSettings;

#[derive(Debug, Args)]
pub(crate) struct CurveArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    pub(crate) common: Common,
    /// Bound parameter, must exceed 1.
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// MC trials per point. Omit to skip simulation.
    #[arg(long)]
    trials: Option<u64>,
    /// Force every port to mu = 0.
    #[arg(long)]
    independent: bool,
}

#[derive(Debug, Args)]
pub(crate) struct CompareArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    #[command(flatten)]
    pub(crate) common: Common,
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// MRC branch counts for the reference columns.
    #[arg(long, value_delimiter = ',', default_value = "2,5,8")]
    mrc_l: Vec<usize>,
    /// Also report the bound at the kappa that minimises it.
    #[arg(long)]
    optimal_kappa: bool,
    #[arg(long)]
    independent: bool,
}

struct Analytic {
    exact: f64,
    approx: f64,
    bound: f64,
}

fn analytic_rows(
    points: &[SweepPoint],
    independent: bool,
    c: &BoundConstants,
) -> Result<Vec<Analytic>, CliError> {
    let q = QuadratureSettings::default();
    let rows: crate::Result<Vec<Analytic>> = points
        .par_iter()
        .map(|p| {
            let profile = p.profile(independent)?;
            let x = p.config.snr_ratio();
            Ok(Analytic {
                exact: outage_exact_profile(&profile, x, &q)?,
                approx: outage_approx_profile(&profile, x)?,
                bound: outage_upper_bound_profile(&profile, x, c)?,
            })
        })
        .collect();
    Ok(rows?)
}

fn provenance(sweep: &SweepArgs, common: &Common, kappa: f64, independent: bool) -> Vec<(&'static str, String)> {
    vec![
        (
            "config",
            format!(
                "n_ports={} size_wl={} snr_db={} kappa={} independent={}",
                sweep.n_ports, sweep.size_wl, sweep.snr_db, kappa, independent
            ),
        ),
        ("seed", format!("{} workers={}", common.seed, common.workers)),
    ]
}

pub(crate) fn outage_curve(args: &CurveArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = args.sweep.spec()?;
    let points = spec.points()?;
    let c = BoundConstants::new(args.kappa)?;
    if let Some(t) = args.trials {
        McSettings::new(t, args.common.seed, args.common.workers)?;
    }
    let rows = analytic_rows(&points, args.independent, &c)?;

    let mut prov = provenance(&args.sweep, &args.common, args.kappa, args.independent);
    prov.push((
        "trials",
        args.trials.map_or("none".into(), |t| format!("{t} (point i uses seed + i)")),
    ));
    let header: Vec<String> = [
        spec.variable.column(),
        "exact",
        "approx",
        "upper_bound",
        "mc",
        "mc_half_width_95",
        "mc_trials",
        "mc_note",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let mut csv = CsvOut::new(out, "outage-curve", &prov, &header)?;
    for (i, (p, r)) in points.iter().zip(&rows).enumerate() {
        let (mut mc, mut hw, mut n, mut note) = (None, None, String::new(), String::new());
        if let Some(base) = args.trials {
            match plan_trials(r.exact, base) {
                McPlan::Run { trials } => {
                    let s = McSettings::new(trials, args.common.seed.wrapping_add(i as u64), args.common.workers)?;
                    let est = mc_outage_fas_profile(&p.profile(args.independent)?, p.config.snr_ratio(), &s)?;
                    mc = Some(est.p_hat);
                    hw = Some(est.half_width_95);
                    n = trials.to_string();
                    if trials > base {
                        note = "rare_event_scaled".into();
                    }
                }
                McPlan::Skipped { needed } => note = format!("rare_event_skipped needed={needed}"),
            }
        }
        csv.row(&[
            p.label(spec.variable),
            fmt_f64(r.exact),
            fmt_f64(r.approx),
            fmt_f64(r.bound),
            fmt_opt(mc),
            fmt_opt(hw),
            n,
            note,
        ])?;
    }
    csv.finish()?;
    Ok(EXIT_OK)
}

pub(crate) fn bounds_compare(args: &CompareArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = args.sweep.spec()?;
    let points = spec.points()?;
    let c = BoundConstants::new(args.kappa)?;
    if args.mrc_l.is_empty() || args.mrc_l.contains(&0) {
        return Err(CliError::Usage("--mrc-l needs branch counts of at least 1".into()));
    }
    let rows = analytic_rows(&points, args.independent, &c)?;

    let mut header: Vec<String> = [
        spec.variable.column(),
        "exact",
        "approx",
        "approx_out_of_regime",
        "upper_bound",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    if args.optimal_kappa {
        header.push("kappa_opt".into());
        header.push("upper_bound_opt".into());
    }
    header.extend(args.mrc_l.iter().map(|l| format!("mrc_L{l}")));

    let mut prov = provenance(&args.sweep, &args.common, args.kappa, args.independent);
    prov.push(("approx_out_of_regime", "1 where the approximation is negative".into()));
    let mut csv = CsvOut::new(out, "bounds-compare", &prov, &header)?;
    for (p, r) in points.iter().zip(&rows) {
        let x = p.config.snr_ratio();
        let mut f = vec![
            p.label(spec.variable),
            fmt_f64(r.exact),
            fmt_f64(r.approx),
            u8::from(r.approx < 0.0).to_string(),
            fmt_f64(r.bound),
        ];
        if args.optimal_kappa {
            let opt = optimal_kappa(&p.profile(args.independent)?, x, 1e-8)?;
            f.push(fmt_f64(opt.constants.kappa()));
            f.push(fmt_f64(opt.bound));
        }
        for &l in &args.mrc_l {
            f.push(fmt_f64(outage_mrc(l, x)?));
        }
        csv.row(&f)?;
    }
    csv.finish()?;
    Ok(EXIT_OK)
}
