use std::io::Write;

use clap::Args;
use serde::Serialize;

use super::output::{fmt_f64, write_json, CsvOut, Document, VERSION};
use super::sweep::parse_ports;
use super::{CliError, Common, EXIT_OK};
use crate::bounds::{BoundConstants, DEFAULT_KAPPA};
use crate::channel::db_to_linear;
use crate::design::{
    kappa_sweep, min_ports_for_size, min_size, required_mu_and_size, smallest_feasible_n,
    smallest_n_for_size, DesignAnswer, DesignQuery, KappaSweepRow, MuSize, DEFAULT_N_MAX,
};

#[derive(Debug, Args)]
pub(crate) struct DesignArgs {
    #[command(flatten)]
    pub(crate) common: Common,
    /// MRC branch counts to beat.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    mrc_l: Vec<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Bound parameter, must exceed 1.
    #[arg(long, default_value_t = DEFAULT_KAPPA)]
    kappa: f64,
    /// Ask for the minimum size of an N-port FAS.
    #[arg(long, group = "query")]
    n_ports: Option<usize>,
    /// Ask for the minimum port count at this size.
    #[arg(long, group = "query")]
    size_wl: Option<f64>,
    /// Emit the (N, W_min) frontier as CSV.
    #[arg(long, group = "query")]
    sweep_n: Option<String>,
    /// Evaluate the design rules at these kappas (comma list).
    #[arg(long, group = "query", value_delimiter = ',')]
    kappa_sweep: Option<Vec<f64>>,
    /// Largest N any search may reach.
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,
}

#[derive(Serialize)]
struct Config {
    mrc_branches: Vec<usize>,
    snr_db: f64,
    snr_ratio: f64,
    kappa: f64,
    rho: f64,
    n_ports: Option<usize>,
    size_wavelengths: Option<f64>,
    n_max: usize,
    seed: u64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum Answer {
    Size {
        mrc_branches: usize,
        n_ports: usize,
        min_size: DesignAnswer<f64>,
        /// `mu*` and `d*` for `n_ports / 2` ports.
        mu_and_spacing: DesignAnswer<MuSize>,
        smallest_feasible_n: Option<usize>,
    },
    Ports {
        mrc_branches: usize,
        size_wavelengths: f64,
        min_ports: DesignAnswer<usize>,
        min_ports_size_rule: Option<usize>,
    },
}

#[derive(Serialize)]
struct GuardNote {
    mrc_branches: usize,
    query: &'static str,
    report: String,
}

pub(crate) fn design(args: &DesignArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let c = BoundConstants::new(args.kappa)?;
    if args.mrc_l.is_empty() || args.mrc_l.contains(&0) {
        return Err(CliError::Usage("--mrc-l needs branch counts of at least 1".into()));
    }
    if !args.snr_db.is_finite() {
        return Err(CliError::Usage("--snr-db must be finite".into()));
    }
    if args.n_max < 4 {
        return Err(CliError::Usage("--n-max must be at least 4".into()));
    }
    let x = db_to_linear(args.snr_db);
    let queries: Vec<DesignQuery> = args
        .mrc_l
        .iter()
        .map(|&l| Ok(DesignQuery::new(l, x, c)?.with_n_max(args.n_max)))
        .collect::<crate::Result<_>>()?;
    let config = Config {
        mrc_branches: args.mrc_l.clone(),
        snr_db: args.snr_db,
        snr_ratio: x,
        kappa: c.kappa(),
        rho: c.rho(),
        n_ports: args.n_ports,
        size_wavelengths: args.size_wl,
        n_max: args.n_max,
        seed: args.common.seed,
    };

    if let Some(text) = &args.sweep_n {
        return frontier(&queries, text, &config, out);
    }
    if let Some(kappas) = &args.kappa_sweep {
        let rows: Vec<KappaSweepRow> = kappa_sweep(kappas, &args.mrc_l, x, args.n_max)?;
        let doc = Document {
            config,
            results: rows,
            guards: Vec::<GuardNote>::new(),
            version: VERSION,
        };
        write_json(out, &doc)?;
        return Ok(EXIT_OK);
    }

    let mut results = Vec::new();
    let mut guards = Vec::new();
    for q in &queries {
        let l = q.mrc_branches;
        if let Some(n) = args.n_ports {
            let q = q.with_n_ports(n);
            let size = min_size(&q)?;
            // min_size puts half the ports at mu*, so report mu* for that count.
            let mu = required_mu_and_size(&q.with_n_ports(n / 2))?;
            for (name, report) in [("min_size", size.guard_report()), ("mu_and_spacing", mu.guard_report())] {
                if let Some(report) = report {
                    guards.push(GuardNote { mrc_branches: l, query: name, report });
                }
            }
            results.push(Answer::Size {
                mrc_branches: l,
                n_ports: n,
                min_size: size,
                mu_and_spacing: mu,
                smallest_feasible_n: smallest_feasible_n(&q)?,
            });
        } else if let Some(w) = args.size_wl {
            let q = q.with_size(w);
            let ports = min_ports_for_size(&q)?;
            if let Some(report) = ports.guard_report() {
                guards.push(GuardNote { mrc_branches: l, query: "min_ports", report });
            }
            results.push(Answer::Ports {
                mrc_branches: l,
                size_wavelengths: w,
                min_ports: ports,
                min_ports_size_rule: smallest_n_for_size(&q, w)?,
            });
        } else {
            return Err(CliError::Usage(
                "give one of --n-ports, --size-wl, --sweep-n, --kappa-sweep".into(),
            ));
        }
    }
    let doc = Document {
        config,
        results,
        guards,
        version: VERSION,
    };
    write_json(out, &doc)?;
    Ok(EXIT_OK)
}

fn frontier(
    queries: &[DesignQuery],
    text: &str,
    config: &Config,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let ns: Vec<usize> = parse_ports(text)?.into_iter().map(|v| v as usize).collect();
    if ns.iter().any(|&n| n < 4) {
        return Err(CliError::Usage("--sweep-n values must be at least 4".into()));
    }
    let header: Vec<String> = ["mrc_l", "n_ports", "w_min", "mu_star", "feasible", "guard"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let prov = [(
        "config",
        format!(
            "snr_db={} kappa={} rho={} seed={}",
            config.snr_db, config.kappa, config.rho, config.seed
        ),
    )];
    let mut csv = CsvOut::new(out, "design --sweep-n", &prov, &header)?;
    for q in queries {
        for &n in &ns {
            let q = q.with_n_ports(n);
            let size = min_size(&q)?;
            let mu = required_mu_and_size(&q.with_n_ports(n / 2))?;
            csv.row(&[
                q.mrc_branches.to_string(),
                n.to_string(),
                size.value.map(fmt_f64).unwrap_or_default(),
                mu.value.map(|m| fmt_f64(m.mu_star)).unwrap_or_default(),
                size.feasible.to_string(),
                size.guard_report().unwrap_or_default(),
            ])?;
        }
    }
    csv.finish()?;
    Ok(EXIT_OK)
}
