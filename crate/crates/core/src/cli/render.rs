//! Text, CSV and JSON renderings. Everything here is a pure function of its
//! input, so identical runs produce identical bytes.

use serde::Serialize;

use crate::eigen_stats::{DetProductReport, SpectralReport};
use crate::risk::{Check, CheckStatus, RiskReport};

use super::commands::Decomposition;
use super::OutputFormat;

/// Column order of `risk-table --format csv`.
pub const CSV_HEADER: &str =
    "estimator,loss,coordinates,analytic,formula,mc_mean,mc_se,replicates,seed,stream_id,flagged";

/// Placeholder for an absent analytic value.
const ABSENT: &str = "—";

pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

pub fn risk_rows(rows: &[RiskReport], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json(rows),
        OutputFormat::Csv => {
            let mut out = format!("{CSV_HEADER}\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{:.10},{:.10},{},{},{},{}\n",
                    r.estimator,
                    r.loss,
                    r.coordinates,
                    r.analytic.map_or(ABSENT.to_string(), |a| format!("{a:.10}")),
                    r.formula.as_deref().unwrap_or(ABSENT),
                    r.mc_mean,
                    r.mc_se,
                    r.replicates,
                    r.seed,
                    r.stream_id,
                    r.flagged,
                ));
            }
            out
        }
        OutputFormat::Table => {
            let mut out = format!(
                "{:<18} {:<9} {:<8} {:>10} {:>10} {:>9} {:>9}  {}\n",
                "estimator", "loss", "coords", "analytic", "mc_mean", "mc_se", "reps", "flag"
            );
            for r in rows {
                out.push_str(&format!(
                    "{:<18} {:<9} {:<8} {:>10} {:>10.6} {:>9.6} {:>9}  {}\n",
                    r.estimator.name(),
                    r.loss.name(),
                    r.coordinates.name(),
                    r.analytic.map_or(ABSENT.to_string(), |a| format!("{a:.6}")),
                    r.mc_mean,
                    r.mc_se,
                    r.replicates,
                    if r.flagged { "FLAGGED" } else { "" },
                ));
            }
            out
        }
    }
}

fn status(s: CheckStatus) -> &'static str {
    match s {
        CheckStatus::Pass => "PASS",
        CheckStatus::Fail => "FAIL",
        CheckStatus::Inconclusive => "INCONCLUSIVE",
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn checks(checks: &[Check], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json(checks),
        OutputFormat::Csv => {
            let mut out = String::from("check,status,detail\n");
            for c in checks {
                out.push_str(&format!("{},{},{}\n", c.name, status(c.status), csv_field(&c.detail)));
            }
            out
        }
        OutputFormat::Table => checks
            .iter()
            .map(|c| format!("{:<12} {:<44} {}\n", status(c.status), c.name, c.detail))
            .collect(),
    }
}

fn join(xs: &[f64], sep: &str) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

pub fn decomposition(d: &Decomposition, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => json(d),
        OutputFormat::Csv => {
            let mut out = String::from("quantity,index,values\n");
            for (i, row) in d.cholesky.iter().enumerate() {
                out.push_str(&format!("cholesky,{i},{}\n", join(row, " ")));
            }
            out.push_str(&format!("pivots,,{}\n", join(&d.pivots, " ")));
            out.push_str(&format!("eigenvalues,,{}\n", join(&d.eigenvalues, " ")));
            out
        }
        OutputFormat::Table => {
            let mut out = String::from("cholesky factor:\n");
            for row in &d.cholesky {
                out.push_str(&join(row, " "));
                out.push('\n');
            }
            out.push_str(&format!("iwasawa pivots: {}\n", join(&d.pivots, " ")));
            out.push_str(&format!("eigenvalues: {}\n", join(&d.eigenvalues, " ")));
            out
        }
    }
}

pub fn spectra(r: &SpectralReport, det: &DetProductReport, format: OutputFormat) -> String {
    let fmt_ref = |x: Option<f64>| x.map_or(ABSENT.to_string(), |v| format!("{v:.6}"));
    let lines = [
        ("mean log(l/n)", r.mean_log, Some(r.mean_log_reference)),
        ("log(max l/n)", r.log_max, Some(r.log_max_reference)),
        ("log(min l/n)", r.log_min, r.log_min_reference),
        ("det product", det.product, Some(1.0)),
    ];
    match format {
        OutputFormat::Json => json(&serde_json::json!({ "spectra": r, "det_product": det })),
        OutputFormat::Csv => {
            let mut out = String::from("statistic,mc_mean,mc_se,reference\n");
            for (name, s, reference) in lines {
                out.push_str(&format!("{name},{:.10},{:.10},{}\n", s.mean, s.se, fmt_ref(reference)));
            }
            out.push_str(&format!("mean log(l/n) exact,{:.10},,\n", r.mean_log_exact));
            out
        }
        OutputFormat::Table => {
            let mut out = format!(
                "p = {}, n = {}, y = {:.4}, replicates = {}\n{:<20} {:>10} {:>10} {:>10}\n",
                r.p, r.n, r.y, r.replicates, "statistic", "mc_mean", "mc_se", "reference"
            );
            for (name, s, reference) in lines {
                out.push_str(&format!(
                    "{name:<20} {:>10.6} {:>10.6} {:>10}\n",
                    s.mean,
                    s.se,
                    fmt_ref(reference)
                ));
            }
            out.push_str(&format!("{:<20} {:>10.6}\n", "exact mean log(l/n)", r.mean_log_exact));
            for w in &r.warnings {
                out.push_str(&format!("warning: {w}\n"));
            }
            out
        }
    }
}
