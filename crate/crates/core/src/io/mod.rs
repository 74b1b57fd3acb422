//! Bit-exact file formats: trace CSV, results CSV, report JSON, and
//! plot-ready data emission.
//!
//! Every writer emits UTF-8 with LF line endings, `.` decimal separators,
//! stable field order, and a trailing newline, independent of platform
//! locale, so identical inputs always produce identical bytes.

pub mod plot_data;
pub mod report_json;
pub mod results_csv;
pub mod trace_csv;
