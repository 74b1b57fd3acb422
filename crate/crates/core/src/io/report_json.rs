//! Validation-report document: a stable-order JSON tree with explicit unit
//! suffixes, a tool stamp, and the caller's full effective configuration.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{CiMethod, Ecdf, Interval, Moments};
use crate::validation::{
    CullenFreyPoint, PercentileRow, ReportMetadata, SourceSummary, ValidationReport, Verdict,
};

/// Tool stamp embedded in every JSON document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

/// Fixed two-decimal rendering of an interval, the form used in the
/// percentile table: `[18.93, 18.97]`.
pub fn format_interval_ms(lower: f64, upper: f64) -> String {
    format!("[{lower:.2}, {upper:.2}]")
}

/// Interval as serialized: full-precision bounds plus the fixed two-decimal
/// display string derived from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalJson {
    pub lower_ms: f64,
    pub upper_ms: f64,
    pub confidence: f64,
    pub method: CiMethod,
    pub display: String,
}

impl From<&Interval> for IntervalJson {
    fn from(interval: &Interval) -> Self {
        IntervalJson {
            lower_ms: interval.lower,
            upper_ms: interval.upper,
            confidence: interval.confidence,
            method: interval.method,
            display: format_interval_ms(interval.lower, interval.upper),
        }
    }
}

impl From<&IntervalJson> for Interval {
    fn from(json: &IntervalJson) -> Self {
        Interval {
            lower: json.lower_ms,
            upper: json.upper_ms,
            confidence: json.confidence,
            method: json.method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentsJson {
    pub mean_ms: f64,
    pub median_ms: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n: usize,
}

impl From<&Moments> for MomentsJson {
    fn from(moments: &Moments) -> Self {
        MomentsJson {
            mean_ms: moments.mean,
            median_ms: moments.median,
            skewness: moments.skewness,
            kurtosis: moments.kurtosis,
            n: moments.n,
        }
    }
}

impl From<&MomentsJson> for Moments {
    fn from(json: &MomentsJson) -> Self {
        Moments {
            mean: json.mean_ms,
            median: json.median_ms,
            skewness: json.skewness,
            kurtosis: json.kurtosis,
            n: json.n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct EcdfJson {
    x_ms: Vec<f64>,
    p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct SourceJson {
    source: String,
    runs: usize,
    pooled_n: usize,
    moments: MomentsJson,
    ecdf: EcdfJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct RowJson {
    percentile: f64,
    measured: IntervalJson,
    simulated: IntervalJson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ReportJson {
    measured: SourceJson,
    simulated: SourceJson,
    percentile_table: Vec<RowJson>,
    mean_difference_ms: IntervalJson,
    ks_distance: f64,
    cullen_frey: Vec<CullenFreyPoint>,
    verdict: Verdict,
    metadata: ReportMetadata,
}

/// Top-level document written by the validate command.
#[derive(Serialize, Deserialize)]
struct ReportDocument {
    tool: ToolInfo,
    config: serde_json::Value,
    report: ReportJson,
}

fn source_to_json(summary: &SourceSummary) -> SourceJson {
    SourceJson {
        source: summary.source.clone(),
        runs: summary.runs,
        pooled_n: summary.pooled_n,
        moments: (&summary.moments).into(),
        ecdf: EcdfJson {
            x_ms: summary.ecdf.xs().to_vec(),
            p: summary.ecdf.ps().to_vec(),
        },
    }
}

fn source_from_json(json: SourceJson) -> Result<SourceSummary> {
    Ok(SourceSummary {
        source: json.source,
        runs: json.runs,
        pooled_n: json.pooled_n,
        moments: (&json.moments).into(),
        ecdf: Ecdf::from_parts(json.ecdf.x_ms, json.ecdf.p)?,
    })
}

/// Renders the document as pretty-printed JSON with stable field order and a
/// trailing newline. `config_echo` is the caller's effective configuration.
pub fn report_to_json(report: &ValidationReport, config_echo: &serde_json::Value) -> String {
    let document = ReportDocument {
        tool: ToolInfo::current(),
        config: config_echo.clone(),
        report: ReportJson {
            measured: source_to_json(&report.measured),
            simulated: source_to_json(&report.simulated),
            percentile_table: report
                .percentile_table
                .iter()
                .map(|row| RowJson {
                    percentile: row.percentile,
                    measured: (&row.measured).into(),
                    simulated: (&row.simulated).into(),
                })
                .collect(),
            mean_difference_ms: (&report.mean_difference).into(),
            ks_distance: report.ks_distance,
            cullen_frey: report.cullen_frey.clone(),
            verdict: report.verdict,
            metadata: report.metadata,
        },
    };
    let mut text = serde_json::to_string_pretty(&document).expect("report serializes");
    text.push('\n');
    text
}

pub fn write_report(
    report: &ValidationReport,
    config_echo: &serde_json::Value,
    path: &Path,
) -> Result<()> {
    fs::write(path, report_to_json(report, config_echo))?;
    Ok(())
}

/// Reads a report document back into the tool stamp, the configuration echo,
/// and the validation report itself.
pub fn read_report(path: &Path) -> Result<(ToolInfo, serde_json::Value, ValidationReport)> {
    let text = fs::read_to_string(path)?;
    let document: ReportDocument = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })?;
    let report = ValidationReport {
        measured: source_from_json(document.report.measured)?,
        simulated: source_from_json(document.report.simulated)?,
        percentile_table: document
            .report
            .percentile_table
            .iter()
            .map(|row| PercentileRow {
                percentile: row.percentile,
                measured: (&row.measured).into(),
                simulated: (&row.simulated).into(),
            })
            .collect(),
        mean_difference: (&document.report.mean_difference_ms).into(),
        ks_distance: document.report.ks_distance,
        cullen_frey: document.report.cullen_frey,
        verdict: document.report.verdict,
        metadata: document.report.metadata,
    };
    Ok((document.tool, document.config, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Sample;
    use crate::validation::{compare, CompareConfig};
    use tempfile::tempdir;

    fn small_report() -> ValidationReport {
        let measured = vec![
            Sample::new(vec![10.0, 12.0, 13.0, 15.0, 30.0]).unwrap(),
            Sample::new(vec![11.0, 12.5, 14.0, 16.0, 28.0]).unwrap(),
        ];
        let simulated = vec![
            Sample::new(vec![9.5, 12.2, 13.1, 15.4, 29.0]).unwrap(),
            Sample::new(vec![10.8, 12.4, 14.2, 16.1, 27.5]).unwrap(),
        ];
        compare(&measured, &simulated, &CompareConfig::default()).unwrap()
    }

    #[test]
    fn document_round_trips_losslessly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("report.json");
        let report = small_report();
        let echo = serde_json::json!({"confidence": 0.95, "out": "report.json"});
        write_report(&report, &echo, &path).unwrap();

        let (tool, config, parsed) = read_report(&path).unwrap();
        assert_eq!(tool, ToolInfo::current());
        assert_eq!(config, echo);
        assert_eq!(parsed, report);

        // writing what was read reproduces the file byte for byte
        let rewritten = dir.path().join("again.json");
        write_report(&parsed, &config, &rewritten).unwrap();
        assert_eq!(
            fs::read(&path).unwrap(),
            fs::read(&rewritten).unwrap()
        );
    }

    #[test]
    fn interval_display_uses_two_decimals() {
        assert_eq!(format_interval_ms(69.14, 79.7), "[69.14, 79.70]");
        assert_eq!(format_interval_ms(3.86, 3.91), "[3.86, 3.91]");
        assert_eq!(format_interval_ms(18.93, 18.97), "[18.93, 18.97]");
    }

    #[test]
    fn verdict_serializes_as_kebab_case() {
        let report = small_report();
        let text = report_to_json(&report, &serde_json::Value::Null);
        assert!(text.contains("\"shape-valid\""));
        assert!(text.contains("\"lower_ms\""));
        assert!(text.contains("\"mean_difference_ms\""));
    }
}
