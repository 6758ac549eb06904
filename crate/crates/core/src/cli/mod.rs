//! The `fas` command line: sweeps and traces as CSV, single answers and
//! validation reports as JSON.
//!
//! Exit status is 0 on success (an infeasible design is a success), 1 when
//! validation fails or a computation breaks, 2 on bad usage.

mod curve;
mod design;
mod envelope;
mod output;
mod sweep;
mod validate;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::FasError;

pub use output::{fmt_f64, VERSION};
pub use sweep::{parse_values, SweepSpec, SweepVar};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failed(String),
}

impl From<FasError> for CliError {
    fn from(e: FasError) -> Self {
        match e {
            FasError::Domain(_) | FasError::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Failed(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "fas", version, about = "Fluid antenna outage analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact, approximate, bounded and simulated outage along a sweep (CSV).
    OutageCurve(curve::CurveArgs),
    /// Outage next to its bound and MRC reference levels along a sweep (CSV).
    BoundsCompare(curve::CompareArgs),
    /// Required ports, correlation and size to beat L-branch MRC (JSON, or CSV with --sweep-n).
    Design(design::DesignArgs),
    /// Time-varying port envelopes under Doppler (CSV).
    Envelope(envelope::EnvelopeArgs),
    /// Run the invariant suite and report pass/fail per check (JSON).
    Validate(validate::ValidateArgs),
}

/// Flags every command takes.
#[derive(Debug, Clone, Args)]
pub(crate) struct Common {
    /// RNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Logical MC workers. Results depend on this, not on the thread count.
    #[arg(long, default_value_t = 8)]
    workers: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fixed config fields and the sweep flags shared by the curve commands.
#[derive(Debug, Clone, Args)]
pub(crate) struct SweepArgs {
    #[arg(long, default_value_t = 10)]
    n_ports: usize,
    #[arg(long, default_value_t = 0.5)]
    size_wl: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_db: f64,
    /// Sweep port count: start:stop:step or a comma list.
    #[arg(long, group = "sweep")]
    sweep_n: Option<String>,
    /// Sweep size in wavelengths.
    #[arg(long, group = "sweep")]
    sweep_w: Option<String>,
    /// Sweep the threshold ratio in dB.
    #[arg(long, group = "sweep", allow_hyphen_values = true)]
    sweep_snr_db: Option<String>,
}

impl SweepArgs {
    fn spec(&self) -> Result<SweepSpec, CliError> {
        let (variable, values) = match (&self.sweep_n, &self.sweep_w, &self.sweep_snr_db) {
            (Some(s), None, None) => (SweepVar::NPorts, sweep::parse_ports(s)?),
            (None, Some(s), None) => (SweepVar::SizeWavelengths, parse_values(s)?),
            (None, None, Some(s)) => (SweepVar::SnrRatioDb, parse_values(s)?),
            _ => {
                return Err(CliError::Usage(
                    "give exactly one of --sweep-n, --sweep-w, --sweep-snr-db".into(),
                ))
            }
        };
        Ok(SweepSpec {
            variable,
            values,
            n_ports: self.n_ports,
            size_wavelengths: self.size_wl,
            snr_db: self.snr_db,
        })
    }
}

/// Parse `args` (program name first), run, and return the exit status.
/// Output goes to `stdout` unless `--out` is given.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Failed(m)) => {
            let _ = writeln!(stderr, "failed: {m}");
            EXIT_FAILED
        }
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let common = match &cli.command {
        Command::OutageCurve(a) => &a.common,
        Command::BoundsCompare(a) => &a.common,
        Command::Design(a) => &a.common,
        Command::Envelope(a) => &a.common,
        Command::Validate(a) => &a.common,
    };
    if common.workers < 1 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut file;
    let out: &mut dyn Write = match &common.out {
        Some(path) => {
            let f = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            file = BufWriter::new(f);
            &mut file
        }
        None => stdout,
    };
    let code = match &cli.command {
        Command::OutageCurve(a) => curve::outage_curve(a, out)?,
        Command::BoundsCompare(a) => curve::bounds_compare(a, out)?,
        Command::Design(a) => design::design(a, out)?,
        Command::Envelope(a) => envelope::envelope(a, out)?,
        Command::Validate(a) => validate::validate(a, out)?,
    };
    out.flush()?;
    Ok(code)
}
