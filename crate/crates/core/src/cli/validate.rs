use std::io::Write;

use clap::{Args, ValueEnum};
use serde::Serialize;

use super::output::{write_json, Document, VERSION};
use super::{CliError, Common, EXIT_FAILED, EXIT_OK};
use crate::checks::{self, CheckOutcome, Grid, McPoint, BOUND_CHECK_KAPPAS};
use crate::mc::McSettings;
use crate::quad::QuadratureSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub(crate) enum GridPreset {
    /// N in {1,2,3,5,10,20}, W in {0.2,0.5,1,2,5}, x in {-10,0,10} dB.
    Full,
    /// Three port counts, two sizes, 0 dB.
    Quick,
}

#[derive(Debug, Args)]
pub(crate) struct ValidateArgs {
    #[command(flatten)]
    pub(crate) common: Common,
    #[arg(long, value_enum, default_value_t = GridPreset::Full)]
    grid: GridPreset,
    /// MC trials per grid point.
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    /// Absolute quadrature tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Serialize)]
struct Config {
    grid: GridPreset,
    grid_values: Grid,
    trials: u64,
    seed: u64,
    workers: usize,
    quadrature: QuadratureSettings,
}

#[derive(Serialize)]
struct Results {
    passed: bool,
    failed: Vec<String>,
    checks: Vec<CheckOutcome>,
    mc_points: Vec<McPoint>,
}

pub(crate) fn validate(args: &ValidateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let d = QuadratureSettings::default();
    let q = QuadratureSettings {
        abs_tol: args.abs_tol.unwrap_or(d.abs_tol),
        rel_tol: args.rel_tol.unwrap_or(d.rel_tol),
        ..d
    };
    q.validate()?;
    let settings = McSettings::new(args.trials, args.common.seed, args.common.workers)?;
    let grid = match args.grid {
        GridPreset::Full => Grid::full(),
        GridPreset::Quick => Grid::quick(),
    };
    let seed = args.common.seed;

    let (mc, mc_points) = checks::mc_agreement(&grid, &settings, &q)?;
    let list = vec![
        checks::quadrature_settings_check(&q),
        checks::marcum_boundaries()?,
        checks::marcum_monotonicity()?,
        checks::marcum_diagonal_decay()?,
        checks::marcum_upper_bound(20_000, seed)?,
        checks::marcum_lower_bound(2_000, seed)?,
        checks::integral_identity(50, seed, &q)?,
        checks::two_port_closed_form(100, seed, &q)?,
        checks::independent_ports(&q)?,
        checks::near_copy_port(&q)?,
        checks::bound_ordering(&grid, &BOUND_CHECK_KAPPAS, &q)?,
        mc,
        checks::mrc_agreement(&settings)?,
        checks::joint_density(&settings)?,
    ];
    let failed: Vec<String> = list.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
    let passed = failed.is_empty();
    let doc = Document {
        config: Config {
            grid: args.grid,
            grid_values: grid,
            trials: args.trials,
            seed,
            workers: args.common.workers,
            quadrature: q,
        },
        results: Results {
            passed,
            failed,
            checks: list,
            mc_points,
        },
        guards: Vec::<String>::new(),
        version: VERSION,
    };
    write_json(out, &doc)?;
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}
