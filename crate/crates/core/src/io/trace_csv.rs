//! Trace files: `duration_ms,status_code` rows, one measured invocation per
//! row, with the cold-start entry first.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::trace::{TraceEntry, TraceFile};

pub const TRACE_HEADER: &str = "duration_ms,status_code";

/// Reads a trace file. Durations are decimal milliseconds with at most three
/// fractional digits, which convert to microseconds exactly; status codes
/// must lie in [100, 599]; at least two rows are required. The trace id is
/// the file's name.
pub fn read_trace_csv(path: &Path) -> Result<TraceFile> {
    let text = fs::read_to_string(path)?;
    let fail = |line: usize, message: String| Error::Format {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == TRACE_HEADER => {}
        Some(header) => {
            return Err(fail(
                1,
                format!("expected header {TRACE_HEADER:?}, got {header:?}"),
            ))
        }
        None => return Err(fail(1, "empty file".into())),
    }
    let mut entries = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let (duration, status) = line
            .split_once(',')
            .ok_or_else(|| fail(line_no, format!("expected two comma-separated fields, got {line:?}")))?;
        entries.push(TraceEntry {
            duration_us: parse_duration_ms(duration).map_err(|m| fail(line_no, m))?,
            status_code: parse_status(status).map_err(|m| fail(line_no, m))?,
        });
    }
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    TraceFile::new(name, entries)
}

/// Writes a trace in canonical form: header, one row per entry, durations in
/// the shortest exact decimal-millisecond rendering, LF line endings.
pub fn write_trace_csv(trace: &TraceFile, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(trace.entries().len() * 12 + 24);
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for entry in trace.entries() {
        out.push_str(&format_duration_ms(entry.duration_us));
        out.push(',');
        out.push_str(&entry.status_code.to_string());
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Canonical decimal-millisecond rendering of a microsecond count:
/// fractional digits only when needed, trailing zeros trimmed.
pub fn format_duration_ms(duration_us: u64) -> String {
    let ms = duration_us / 1000;
    let frac = duration_us % 1000;
    if frac == 0 {
        ms.to_string()
    } else {
        let digits = format!("{frac:03}");
        format!("{ms}.{}", digits.trim_end_matches('0'))
    }
}

/// Parses decimal milliseconds with at most three fractional digits into an
/// exact microsecond count. Rejects zero, signs, and malformed text.
fn parse_duration_ms(text: &str) -> std::result::Result<u64, String> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("bad duration {text:?}"));
    }
    if text.contains('.')
        && (frac_part.is_empty()
            || frac_part.len() > 3
            || !frac_part.bytes().all(|b| b.is_ascii_digit()))
    {
        return Err(format!(
            "bad duration {text:?}, want at most 3 fractional digits"
        ));
    }
    let ms: u64 = int_part
        .parse()
        .map_err(|_| format!("duration {text:?} out of range"))?;
    let frac_us: u64 = if frac_part.is_empty() {
        0
    } else {
        format!("{frac_part:0<3}").parse().unwrap()
    };
    let us = ms
        .checked_mul(1000)
        .and_then(|v| v.checked_add(frac_us))
        .ok_or_else(|| format!("duration {text:?} out of range"))?;
    if us == 0 {
        return Err(format!("duration must be positive, got {text:?}"));
    }
    Ok(us)
}

fn parse_status(text: &str) -> std::result::Result<u16, String> {
    let code: u16 = text
        .parse()
        .map_err(|_| format!("bad status code {text:?}"))?;
    if !(100..=599).contains(&code) {
        return Err(format!("status code {code} outside [100, 599]"));
    }
    Ok(code)
}
