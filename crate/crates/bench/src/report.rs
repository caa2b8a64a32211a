use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::{BenchError, BenchReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!(
                "unknown report format `{other}` (expected csv or json)"
            )),
        }
    }
}

/// CSV: a header row then one row per sample, sorted by (variant, n).
/// JSON: the whole report, samples as an array of objects with the same
/// fields.
pub fn emit_report(
    report: &BenchReport,
    format: ReportFormat,
    out: &Path,
) -> Result<(), BenchError> {
    let io_err = |e: &dyn std::fmt::Display| BenchError::Io {
        path: out.to_path_buf(),
        message: e.to_string(),
    };
    let mut samples = report.samples.clone();
    samples.sort_by_key(|s| (s.variant, s.n));
    let file = File::create(out).map_err(|e| io_err(&e))?;
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for s in &samples {
                w.serialize(s).map_err(|e| io_err(&e))?;
            }
            w.flush().map_err(|e| io_err(&e))?;
        }
        ReportFormat::Json => {
            let sorted = BenchReport {
                samples,
                ..report.clone()
            };
            let mut w = std::io::BufWriter::new(file);
            serde_json::to_writer_pretty(&mut w, &sorted).map_err(|e| io_err(&e))?;
            w.write_all(b"\n").map_err(|e| io_err(&e))?;
            w.flush().map_err(|e| io_err(&e))?;
        }
    }
    Ok(())
}
