//! Deterministic discrete-event simulator of a FaaS platform whose replicas
//! replay measured (duration, status-code) traces, together with the
//! statistics toolkit used to validate simulated runs against measured ones.
//!
//! The crate splits into the engine (`sim`, `trace`, `time`), workload and
//! fixture generation (`workload`), the statistical kernel (`stats`), the
//! measured-versus-simulated comparator (`validation`), and bit-exact file
//! formats (`io`).

pub mod error;
pub mod io;
pub mod sim;
pub mod stats;
pub mod time;
pub mod trace;
pub mod validation;
pub mod workload;

pub use error::{Error, Result};
