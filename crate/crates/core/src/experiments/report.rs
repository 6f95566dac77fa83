use serde::Serialize;
use serde_json::Value;
use std::fs;
use std::path::Path;

use super::{ConvergenceRecord, InvariantResult};
use crate::error::Result;

/// The JSON summary written next to every CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: String,
    pub config: Value,
    pub results: Vec<Value>,
    pub invariant_failures: Vec<InvariantResult>,
    pub versions: Versions,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub crate_name: &'static str,
    pub crate_version: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            crate_name: env!("CARGO_PKG_NAME"),
            crate_version: env!("CARGO_PKG_VERSION"),
        }
    }
}

impl Summary {
    pub fn new(command: &str, config: impl Serialize) -> Result<Self> {
        Ok(Self {
            command: command.into(),
            config: serde_json::to_value(config)?,
            results: vec![],
            invariant_failures: vec![],
            versions: Versions::default(),
        })
    }

    pub fn push(&mut self, result: impl Serialize) -> Result<()> {
        self.results.push(serde_json::to_value(result)?);
        Ok(())
    }
}

/// Floats as `{:.16e}` (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and `rows` with `\n` line endings.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// N, value, predicted, error, error_estimate.
pub fn write_csv(path: &Path, rec: &ConvergenceRecord) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..rec.len())
        .map(|k| {
            vec![
                rec.n_values[k].to_string(),
                fmt_f64(rec.values[k]),
                fmt_f64(rec.predicted),
                fmt_f64(rec.errors[k]),
                fmt_f64(rec.error_estimates[k]),
            ]
        })
        .collect();
    write_table(path, &["N", "value", "predicted", "error", "error_estimate"], &rows)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(summary)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::StudyKind;
    use crate::quantize::Method;
    use num_complex::Complex64;

    #[test]
    fn csv_shape() {
        let dir = tempfile::tempdir().unwrap();
        let rec = ConvergenceRecord {
            study: StudyKind::Diagonal,
            label: "t".into(),
            energy: -0.5,
            n_values: vec![8, 16],
            measured: vec![Complex64::new(0.5, 0.0); 2],
            values: vec![0.5, 0.25],
            predicted: 0.2,
            errors: vec![0.3, 0.05],
            error_estimates: vec![1e-9, 1e-9],
            methods: vec![Method::Multiplier; 2],
            wall_time_s: vec![0.0; 2],
            rate: None,
            ratios: vec![],
            superpolynomial: None,
        };
        let p = dir.path().join("sub/out.csv");
        write_csv(&p, &rec).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "N,value,predicted,error,error_estimate");
        assert_eq!(lines[1].split(',').next(), Some("8"));
        assert_eq!(lines[1].split(',').nth(1), Some("5.0000000000000000e-1"));
    }
}
