//! Simulation results: one response record per row, in arrival order.
//!
//! The companion run manifest carries the trace assignment log and replica
//! counters; this file holds only the per-request records.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sim::{ResponseRecord, SimulationResult};
use crate::time::SimTime;

pub const RESULTS_HEADER: &str =
    "request_id,arrival_us,start_us,duration_us,status_code,replica_id,cold_start";

/// Writes a run's records. Refuses an empty record set: an empty results
/// file would be indistinguishable from a failed run.
pub fn write_results(result: &SimulationResult, path: &Path) -> Result<()> {
    write_records(&result.records, path)
}

/// Writes bare records; `write_results` is the usual entry point. Output is
/// byte-stable for identical records.
pub fn write_records(records: &[ResponseRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Input("refusing to write empty results".into()));
    }
    let mut out = String::with_capacity(records.len() * 48 + 80);
    out.push_str(RESULTS_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.request_id,
            r.arrival.as_micros(),
            r.start.as_micros(),
            r.duration_us,
            r.status_code,
            r.replica_id,
            r.cold_start
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads records back, enforcing the header, field count and types, at least
/// one record, and non-decreasing arrival times.
pub fn read_results(path: &Path) -> Result<Vec<ResponseRecord>> {
    let text = fs::read_to_string(path)?;
    let fail = |line: usize, message: String| Error::Format {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == RESULTS_HEADER => {}
        Some(header) => {
            return Err(fail(
                1,
                format!("expected header {RESULTS_HEADER:?}, got {header:?}"),
            ))
        }
        None => return Err(fail(1, "empty file".into())),
    }
    let mut records: Vec<ResponseRecord> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(fail(
                line_no,
                format!("expected 7 fields, got {}", fields.len()),
            ));
        }
        let uint = |text: &str, what: &str| -> Result<u64> {
            text.parse()
                .map_err(|_| fail(line_no, format!("bad {what} {text:?}")))
        };
        let record = ResponseRecord {
            request_id: uint(fields[0], "request id")?,
            arrival: SimTime::from_micros(uint(fields[1], "arrival")?),
            start: SimTime::from_micros(uint(fields[2], "start")?),
            duration_us: uint(fields[3], "duration")?,
            status_code: uint(fields[4], "status code")? as u16,
            replica_id: uint(fields[5], "replica id")?,
            cold_start: match fields[6] {
                "true" => true,
                "false" => false,
                other => return Err(fail(line_no, format!("bad cold_start flag {other:?}"))),
            },
        };
        if let Some(previous) = records.last() {
            if record.arrival < previous.arrival {
                return Err(fail(line_no, "arrival times must be non-decreasing".into()));
            }
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(fail(2, "no records".into()));
    }
    Ok(records)
}
