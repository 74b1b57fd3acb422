//! Plot-ready data emission: ECDF step points per source and the
//! skewness-squared versus kurtosis points, as plain CSV for external tools.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::validation::ValidationReport;

/// Writes `ecdf_<source>.csv` (`x_ms,p` step points) for each source and
/// `cullen_frey.csv` (`source,skewness_squared,kurtosis`). Returns the paths
/// written. Values are rendered with the shortest exact float form, so the
/// files mirror the report's numbers bit for bit.
pub fn emit_plot_data(report: &ValidationReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for summary in [&report.measured, &report.simulated] {
        let path = dir.join(format!("ecdf_{}.csv", summary.source));
        let mut out = String::from("x_ms,p\n");
        for (x, p) in summary.ecdf.points() {
            writeln!(out, "{x},{p}").expect("write to string");
        }
        fs::write(&path, out)?;
        written.push(path);
    }
    let path = dir.join("cullen_frey.csv");
    let mut out = String::from("source,skewness_squared,kurtosis\n");
    for point in &report.cullen_frey {
        writeln!(out, "{},{},{}", point.source, point.skewness_squared, point.kurtosis)
            .expect("write to string");
    }
    fs::write(&path, out)?;
    written.push(path);
    Ok(written)
}
