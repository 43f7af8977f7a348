//! Sweep report serialization.
//!
//! Column order is fixed: `method,k,distribution,n,seed,mse,angle_degrees,levels`.
//! Floats are written in scientific notation with 17 significant digits so
//! they parse back to the same `f64`. An absent angle is an empty CSV field
//! or JSON `null`; CSV levels are joined with `;`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{SweepReport, SweepRow};
use crate::error::Result;

pub const CSV_HEADER: &str = "method,k,distribution,n,seed,mse,angle_degrees,levels";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv_row(row: &SweepRow, out: &mut String) {
    let levels = row.levels.iter().map(|v| float(*v)).collect::<Vec<_>>().join(";");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        row.method,
        row.k,
        csv_field(&row.distribution),
        row.n,
        row.seed,
        float(row.mse),
        row.angle_degrees.map(float).unwrap_or_default(),
        levels
    );
}

pub fn report_to_csv(report: &SweepReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        csv_row(row, &mut out);
    }
    out
}

fn json_string(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

pub fn report_to_json(report: &SweepReport) -> String {
    let mut out = String::from("[");
    for (i, row) in report.rows.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let levels = row.levels.iter().map(|v| float(*v)).collect::<Vec<_>>().join(",");
        let _ = write!(
            out,
            "\n  {{\"method\":{},\"k\":{},\"distribution\":{},\"n\":{},\"seed\":{},\"mse\":{},\"angle_degrees\":{},\"levels\":[{}]}}",
            json_string(row.method.as_str()),
            row.k,
            json_string(&row.distribution),
            row.n,
            row.seed,
            float(row.mse),
            row.angle_degrees.map(float).unwrap_or_else(|| "null".into()),
            levels
        );
    }
    if !report.rows.is_empty() {
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

pub fn emit_report(report: &SweepReport, path: &Path, format: ReportFormat) -> Result<()> {
    let text = match format {
        ReportFormat::Json => report_to_json(report),
        ReportFormat::Csv => report_to_csv(report),
    };
    fs::write(path, text)?;
    Ok(())
}
