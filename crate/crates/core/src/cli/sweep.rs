use serde::Serialize;

use super::CliError;
use crate::channel::{correlation_profile, CorrelationProfile, FasConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVar {
    NPorts,
    SizeWavelengths,
    SnrRatioDb,
}

impl SweepVar {
    /// Column name in CSV output.
    pub fn column(self) -> &'static str {
        match self {
            SweepVar::NPorts => "n_ports",
            SweepVar::SizeWavelengths => "size_wl",
            SweepVar::SnrRatioDb => "snr_db",
        }
    }
}

/// One swept variable; the other config fields stay at `n_ports`,
/// `size_wavelengths` and `snr_db`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub values: Vec<f64>,
    pub n_ports: usize,
    pub size_wavelengths: f64,
    pub snr_db: f64,
}

/// One point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub config: FasConfig,
}

impl SweepPoint {
    /// The swept value as printed: integers for port counts.
    pub fn label(&self, var: SweepVar) -> String {
        match var {
            SweepVar::NPorts => self.config.n_ports().to_string(),
            _ => super::output::fmt_f64(self.value),
        }
    }

    pub fn profile(&self, independent: bool) -> crate::Result<CorrelationProfile> {
        if independent {
            CorrelationProfile::independent(self.config.n_ports())
        } else {
            Ok(correlation_profile(&self.config))
        }
    }
}

impl SweepSpec {
    pub fn points(&self) -> Result<Vec<SweepPoint>, CliError> {
        if self.values.is_empty() {
            return Err(CliError::Usage("sweep has no values".into()));
        }
        self.values
            .iter()
            .map(|&v| {
                let (mut n, mut w, mut db) = (self.n_ports, self.size_wavelengths, self.snr_db);
                match self.variable {
                    SweepVar::NPorts => n = v as usize,
                    SweepVar::SizeWavelengths => w = v,
                    SweepVar::SnrRatioDb => db = v,
                }
                let config = FasConfig::from_db(n, w, db)
                    .map_err(|e| CliError::Usage(format!("{} = {v}: {e}", self.variable.column())))?;
                Ok(SweepPoint { value: v, config })
            })
            .collect()
    }
}

/// `a:b:s` (inclusive of `b` up to rounding) or a comma list.
pub fn parse_values(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: &str| CliError::Usage(format!("bad sweep '{text}': {m}"));
    let num = |s: &str| -> Result<f64, CliError> {
        let v: f64 = s.trim().parse().map_err(|_| bad(&format!("'{s}' is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("values must be finite"))
        }
    };
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (a, b, s) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(s > 0.0) {
            return Err(bad("step must be positive"));
        }
        if b < a {
            Vec::new()
        } else {
            let steps = ((b - a) / s + 1e-9).floor() as usize;
            (0..=steps).map(|i| a + i as f64 * s).collect()
        }
    } else {
        text.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(bad("no values"));
    }
    Ok(values)
}

/// As [`parse_values`], for port counts.
pub fn parse_ports(text: &str) -> Result<Vec<f64>, CliError> {
    let v = parse_values(text)?;
    if v.iter().any(|&n| !(n >= 1.0 && n.fract() == 0.0)) {
        return Err(CliError::Usage(format!("port counts in '{text}' must be positive integers")));
    }
    Ok(v)
}
