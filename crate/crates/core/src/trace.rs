//! Measured invocation traces and the per-replica replay cursor.

use std::sync::Arc;

use crate::error::{Error, Result};

/// One measured invocation: service duration and HTTP-style status code.
/// Position 0 of a trace file is by convention the cold-start entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub duration_us: u64,
    pub status_code: u16,
}

/// An ordered measured trace. `id` is the file name the trace was loaded
/// from (or a synthetic label) and doubles as its identity in the
/// least-recently-used reuse bookkeeping.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceFile {
    id: String,
    entries: Vec<TraceEntry>,
}

impl TraceFile {
    /// Validates at least two entries (the cursor reset rule needs a landing
    /// position after the cold-start entry), strictly positive durations,
    /// and status codes in [100, 599].
    pub fn new(id: impl Into<String>, entries: Vec<TraceEntry>) -> Result<Self> {
        let id = id.into();
        if entries.len() < 2 {
            return Err(Error::Input(format!(
                "trace {id:?} has {} entries, need at least 2",
                entries.len()
            )));
        }
        for (i, entry) in entries.iter().enumerate() {
            if entry.duration_us == 0 {
                return Err(Error::Input(format!(
                    "trace {id:?} entry {i}: duration must be positive"
                )));
            }
            if !(100..=599).contains(&entry.status_code) {
                return Err(Error::Input(format!(
                    "trace {id:?} entry {i}: status code {} outside [100, 599]",
                    entry.status_code
                )));
            }
        }
        Ok(TraceFile { id, entries })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn entries(&self) -> &[TraceEntry] {
        &self.entries
    }
}

/// Replay cursor over a shared trace file. Cursors are per replica and never
/// shared: a new replica on a reused file starts with its own cold read.
#[derive(Clone, Debug)]
pub struct ReplicaTrace {
    file: Arc<TraceFile>,
    cursor: usize,
}

impl ReplicaTrace {
    pub fn new(file: Arc<TraceFile>) -> Self {
        ReplicaTrace { file, cursor: 0 }
    }

    pub fn file(&self) -> &Arc<TraceFile> {
        &self.file
    }

    /// Entries consumed so far; zero means the cold-start entry is next.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Returns the entry under the cursor and advances it. When the cursor
    /// has run off the end it first resets to position 1, skipping the
    /// cold-start entry, so the warm entries repeat indefinitely.
    pub fn next_entry(&mut self) -> TraceEntry {
        if self.cursor == self.file.entries().len() {
            self.cursor = 1;
        }
        let entry = self.file.entries()[self.cursor];
        self.cursor += 1;
        entry
    }
}
