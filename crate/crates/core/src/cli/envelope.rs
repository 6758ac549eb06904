use std::io::Write;

use clap::Args;

use super::output::{fmt_f64, CsvOut};
use super::{CliError, Common, EXIT_OK};
use crate::channel::{envelope_trace, DopplerTraceConfig, FasConfig};
use crate::rng::{stream, TRACE_STREAM_BASE};

/// Defaults describe 100 ports over two wavelengths at 5 GHz and 30 km/h.
#[derive(Debug, Args)]
pub(crate) struct EnvelopeArgs {
    #[command(flatten)]
    pub(crate) common: Common,
    #[arg(long, default_value_t = 100)]
    n_ports: usize,
    #[arg(long, default_value_t = 2.0)]
    size_wl: f64,
    #[arg(long, default_value_t = 30.0)]
    speed_kmh: f64,
    #[arg(long, default_value_t = 5.0)]
    carrier_ghz: f64,
    /// Seconds.
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Samples per second.
    #[arg(long, default_value_t = 1e4)]
    sample_rate: f64,
    /// Sinusoids per Gaussian process.
    #[arg(long, default_value_t = 64)]
    scatterers: usize,
    /// Branches of the MRC reference envelope.
    #[arg(long, default_value_t = 2)]
    mrc_l: usize,
}

/// Share of samples whose port spread is at least 30 dB.
pub(crate) const SPREAD_DB: f64 = 30.0;

pub(crate) fn envelope(args: &EnvelopeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let doppler = DopplerTraceConfig {
        speed_mps: args.speed_kmh / 3.6,
        carrier_hz: args.carrier_ghz * 1e9,
        duration_s: args.duration,
        sample_rate_hz: args.sample_rate,
        n_scatterers: args.scatterers,
        mrc_branches: args.mrc_l,
    };
    doppler.validate()?;
    if args.mrc_l < 1 {
        return Err(CliError::Usage("--mrc-l must be at least 1".into()));
    }
    // The threshold ratio plays no part in a trace.
    let config = FasConfig::new(args.n_ports, args.size_wl, 1.0)?;
    let mut rng = stream(args.common.seed, TRACE_STREAM_BASE);
    let trace = envelope_trace(&config, &doppler, &mut rng)?;

    let spread = trace.spread_db();
    let wide = spread.iter().filter(|&&s| s >= SPREAD_DB).count() as f64 / spread.len() as f64;
    let prov = [
        (
            "config",
            format!(
                "n_ports={} size_wl={} speed_kmh={} carrier_ghz={} duration_s={} sample_rate_hz={} scatterers={} mrc_l={}",
                args.n_ports, args.size_wl, args.speed_kmh, args.carrier_ghz, args.duration,
                args.sample_rate, args.scatterers, args.mrc_l
            ),
        ),
        ("seed", args.common.seed.to_string()),
        ("max_doppler_hz", fmt_f64(doppler.max_doppler_hz())),
        ("share_spread_ge_30db", fmt_f64(wide)),
    ];
    let mut csv = CsvOut::new(out, "envelope", &prov, &trace.header())?;
    for row in trace.rows() {
        let f: Vec<String> = row.into_iter().map(fmt_f64).collect();
        csv.row(&f)?;
    }
    csv.finish()?;
    Ok(EXIT_OK)
}
