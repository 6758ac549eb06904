use std::io::Write;

use serde::Serialize;

use super::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// CSV with `#` provenance lines above the header.
pub struct CsvOut<'a> {
    inner: csv::Writer<&'a mut dyn Write>,
}

impl<'a> CsvOut<'a> {
    pub fn new(
        out: &'a mut dyn Write,
        command: &str,
        provenance: &[(&str, String)],
        header: &[String],
    ) -> Result<Self, CliError> {
        writeln!(out, "# fas {VERSION} {command}")?;
        for (k, v) in provenance {
            writeln!(out, "# {k}: {v}")?;
        }
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(header).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.inner.write_record(fields).map_err(csv_err)
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Failed(format!("csv: {e}"))
}

/// The single JSON object a command prints.
#[derive(Serialize)]
pub struct Document<C: Serialize, R: Serialize, G: Serialize> {
    pub config: C,
    pub results: R,
    pub guards: G,
    pub version: &'static str,
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, doc: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, doc)
        .map_err(|e| CliError::Failed(format!("json: {e}")))?;
    writeln!(out)?;
    Ok(())
}
