//! On-disk formats: plain-text matrices and versioned calibration JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::estimators::SpectralCalibration;
use crate::matrix::Matrix;

use super::CliError;

/// Asymmetry above this is reported before symmetrizing.
const ASYMMETRY_WARN: f64 = 1e-8;

pub const CALIBRATION_FORMAT_VERSION: u32 = 1;

/// Parses `p` on the first line followed by `p` rows of `p` numbers.
/// Returns the symmetric part `(M + M′)/2`.
pub fn parse_matrix(text: &str) -> Result<Matrix, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| CliError::usage("matrix file is empty"))?;
    let p: usize = header
        .parse()
        .map_err(|_| CliError::usage(format!("first line must be the dimension, got {header:?}")))?;
    if p == 0 {
        return Err(CliError::usage("matrix dimension must be positive"));
    }
    let mut rows = Vec::with_capacity(p);
    for (i, line) in lines.by_ref().take(p).enumerate() {
        let row = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::usage(format!("row {}: bad entry {t:?}", i + 1)))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if row.len() != p {
            return Err(CliError::usage(format!(
                "row {} has {} entries, expected {p}",
                i + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.len() != p {
        return Err(CliError::usage(format!("expected {p} rows, found {}", rows.len())));
    }
    if lines.next().is_some() {
        return Err(CliError::usage(format!("trailing data after {p} rows")));
    }
    let mut m = Matrix::from_rows(&rows).map_err(|e| CliError::usage(e.to_string()))?;
    let asym = m.asymmetry();
    if asym > ASYMMETRY_WARN {
        log::warn!("input asymmetry {asym:.3e}; using the symmetric part");
    }
    m.symmetrize();
    Ok(m)
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut out = format!("{}\n", m.dim());
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CalibrationFile {
    format_version: u32,
    tool_version: String,
    #[serde(flatten)]
    calibration: SpectralCalibration,
}

pub fn calibration_to_json(cal: &SpectralCalibration) -> String {
    let file = CalibrationFile {
        format_version: CALIBRATION_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        calibration: cal.clone(),
    };
    serde_json::to_string_pretty(&file).expect("calibration serializes") + "\n"
}

pub fn read_calibration(path: &Path) -> Result<SpectralCalibration, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let file: CalibrationFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: malformed calibration: {e}", path.display())))?;
    if file.format_version != CALIBRATION_FORMAT_VERSION {
        return Err(CliError::usage(format!(
            "{}: calibration format {} is not supported (expected {CALIBRATION_FORMAT_VERSION})",
            path.display(),
            file.format_version
        )));
    }
    let cal = file.calibration;
    let p = cal.p;
    let lengths = [
        cal.mean_eigs.len(),
        cal.mean_log_eigs.len(),
        cal.se_eigs.len(),
        cal.se_log_eigs.len(),
    ];
    if lengths.iter().any(|&l| l != p) {
        return Err(CliError::usage(format!(
            "{}: calibration vectors must have length p = {p}",
            path.display()
        )));
    }
    Ok(cal)
}
