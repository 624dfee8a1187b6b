//! Report files: JSON with a single timestamp field in the header, and CSV
//! tables (one row per report, per trace point, or per summary row).

use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{read_to_string, write, CliError, Result};
use crate::suite::{ReportRecord, SuiteResult, SummaryRow};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub generator: String,
    /// Seconds since the Unix epoch; the only field that differs between two
    /// identical runs.
    pub generated_at: u64,
}

impl Header {
    pub fn now() -> Self {
        Self {
            generator: concat!("rearr ", env!("CARGO_PKG_VERSION")).into(),
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub header: Header,
    #[serde(default)]
    pub reports: Vec<ReportRecord>,
    pub summary: Vec<SummaryRow>,
}

impl ReportFile {
    pub fn new(result: SuiteResult) -> Self {
        Self {
            header: Header::now(),
            reports: result.reports,
            summary: result.summary,
        }
    }

    pub fn result(&self) -> SuiteResult {
        SuiteResult {
            reports: self.reports.clone(),
            summary: self.summary.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(CliError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum View {
    /// Every report; JSON keeps traces when present.
    Full,
    /// One row per (inequality, p) with the best constant.
    Summary,
    /// One CSV row per trace point; same as `Full` for JSON.
    Detail,
}

impl FromStr for View {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(View::Full),
            "summary" => Ok(View::Summary),
            "detail" => Ok(View::Detail),
            other => Err(CliError::Config(format!("unknown view {other:?}"))),
        }
    }
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    header: &'a Header,
    summary: &'a [SummaryRow],
}

#[derive(Serialize)]
struct ReportRow<'a> {
    function_id: &'a str,
    inequality_id: &'a str,
    p: f64,
    status: &'a str,
    worst_ratio: f64,
    worst_location: f64,
    constant_used: f64,
    pass: bool,
    tolerance: f64,
    gradient_mode: &'a str,
    flags: String,
    reason: &'a str,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    function_id: &'a str,
    inequality_id: &'a str,
    p: f64,
    t: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct SummaryCsvRow<'a> {
    inequality_id: &'a str,
    p: f64,
    checked: usize,
    passed: usize,
    failed: usize,
    errors: usize,
    best_constant: f64,
    reference_constant: Option<f64>,
}

fn status_str(r: &ReportRecord) -> String {
    serde_json::to_value(r.status)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

fn csv_bytes<T: Serialize>(
    rows: impl Iterator<Item = T>,
) -> std::result::Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// `lhs/rhs` with `0/0 = 0`.
fn trace_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs <= 0.0 {
        0.0
    } else if rhs <= 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

/// Renders a report file. Deterministic apart from `header.generated_at`,
/// which CSV output omits entirely.
pub fn render(
    file: &ReportFile,
    format: Format,
    view: View,
) -> std::result::Result<Vec<u8>, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    match (format, view) {
        (Format::Json, View::Full | View::Detail) => {
            serde_json::to_vec_pretty(file).map_err(|e| err(&e))
        }
        (Format::Json, View::Summary) => serde_json::to_vec_pretty(&SummaryJson {
            header: &file.header,
            summary: &file.summary,
        })
        .map_err(|e| err(&e)),
        (Format::Csv, View::Full) => {
            let statuses: Vec<String> = file.reports.iter().map(status_str).collect();
            csv_bytes(file.reports.iter().zip(&statuses).map(|(r, s)| ReportRow {
                function_id: &r.function_id,
                inequality_id: &r.inequality_id,
                p: r.p.0,
                status: s,
                worst_ratio: r.worst_ratio.0,
                worst_location: r.worst_location.0,
                constant_used: r.constant_used.0,
                pass: r.pass,
                tolerance: r.tolerance.0,
                gradient_mode: &r.gradient_mode,
                flags: r.flags.join(";"),
                reason: r.reason.as_deref().unwrap_or(""),
            }))
            .map_err(|e| err(&e))
        }
        (Format::Csv, View::Detail) => csv_bytes(file.reports.iter().flat_map(|r| {
            r.trace.iter().map(move |tp| TraceRow {
                function_id: &r.function_id,
                inequality_id: &r.inequality_id,
                p: r.p.0,
                t: tp.t.0,
                lhs: tp.lhs.0,
                rhs: tp.rhs.0,
                ratio: trace_ratio(tp.lhs.0, tp.rhs.0),
            })
        }))
        .map_err(|e| err(&e)),
        (Format::Csv, View::Summary) => csv_bytes(file.summary.iter().map(|s| SummaryCsvRow {
            inequality_id: &s.inequality_id,
            p: s.p.0,
            checked: s.checked,
            passed: s.passed,
            failed: s.failed,
            errors: s.errors,
            best_constant: s.best_constant.0,
            reference_constant: s.reference_constant.map(|c| c.0),
        }))
        .map_err(|e| err(&e)),
    }
}

pub fn emit_report(file: &ReportFile, format: Format, view: View, path: &Path) -> Result<()> {
    let bytes = render(file, format, view).map_err(|e| CliError::parse(path, e))?;
    write(path, bytes)
}

/// Reads a JSON report written by [`emit_report`] in the full view.
pub fn parse_report(path: &Path) -> Result<ReportFile> {
    serde_json::from_str(&read_to_string(path)?).map_err(|e| CliError::parse(path, e))
}

/// File names used by the suite inside its output directory.
pub const REPORT_JSON: &str = "report.json";
pub const SUMMARY_JSON: &str = "summary.json";
pub const REPORT_CSV: &str = "report.csv";
pub const TRACE_CSV: &str = "trace.csv";

/// Writes the standard set of suite outputs.
pub fn write_suite_outputs(dir: &Path, file: &ReportFile) -> Result<()> {
    emit_report(file, Format::Json, View::Full, &dir.join(REPORT_JSON))?;
    emit_report(file, Format::Json, View::Summary, &dir.join(SUMMARY_JSON))?;
    emit_report(file, Format::Csv, View::Full, &dir.join(REPORT_CSV))?;
    if file.reports.iter().any(|r| !r.trace.is_empty()) {
        emit_report(file, Format::Csv, View::Detail, &dir.join(TRACE_CSV))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::Real;
    use crate::suite::{Status, TraceRecord};
    use std::collections::BTreeMap;

    fn record(id: &str, traces: usize) -> ReportRecord {
        ReportRecord {
            function_id: id.into(),
            inequality_id: "s_phi_p".into(),
            status: Status::Pass,
            reason: None,
            p: Real(1.0),
            params: BTreeMap::from([("support".to_string(), Real(f64::INFINITY))]),
            constant_used: Real(1.0),
            worst_ratio: Real(0.5),
            worst_location: Real(0.25),
            pass: true,
            tolerance: Real(0.05),
            constant_mode: "paper_constant".into(),
            gradient_mode: "metric_max".into(),
            grid: None,
            seed: Some(3),
            flags: vec!["classical".into()],
            trace: (0..traces)
                .map(|i| TraceRecord {
                    t: Real(i as f64 + 1.0),
                    lhs: Real(0.0),
                    rhs: Real(1.0),
                })
                .collect(),
        }
    }

    fn file() -> ReportFile {
        let reports = vec![record("a", 3), record("b", 5)];
        let summary = vec![SummaryRow {
            inequality_id: "s_phi_p".into(),
            p: Real(1.0),
            checked: 2,
            passed: 2,
            failed: 0,
            errors: 0,
            best_constant: Real(0.5),
            reference_constant: Some(Real(1.0)),
        }];
        ReportFile::new(SuiteResult { reports, summary })
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = file();
        let path = dir.path().join("r.json");
        emit_report(&f, Format::Json, View::Full, &path).unwrap();
        assert_eq!(parse_report(&path).unwrap(), f);
    }

    #[test]
    fn csv_detail_counts_trace_points() {
        let bytes = render(&file(), Format::Csv, View::Detail).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 + 5);
        assert!(text.starts_with("function_id,inequality_id,p,t,lhs,rhs,ratio"));
    }

    #[test]
    fn summary_json_has_one_object_per_row() {
        let v: serde_json::Value =
            serde_json::from_slice(&render(&file(), Format::Json, View::Summary).unwrap()).unwrap();
        assert_eq!(v["summary"].as_array().unwrap().len(), 1);
        assert_eq!(v["summary"][0]["best_constant"], 0.5);
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        std::fs::write(&blocker, "x").unwrap();
        let err =
            emit_report(&file(), Format::Json, View::Full, &blocker.join("r.json")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
