//! Arrival-schedule generation (the workload generator) and synthetic trace
//! fixtures for desk-scale experiments.
//!
//! All randomness flows through ChaCha8 keyed by the caller's 64-bit seed,
//! so schedules and fixtures are identical across platforms and runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::SimTime;
use crate::trace::{TraceEntry, TraceFile};

/// Arrival-model selection as it appears in configuration: a registered
/// process name plus the mean inter-arrival time for the open-loop kinds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalModel {
    pub kind: String,
    pub lambda_ms: Option<f64>,
}

impl ArrivalModel {
    /// Resolves the configured process from the registry.
    pub fn process(&self) -> Result<Box<dyn ArrivalProcess>> {
        arrival_process_by_name(&self.kind, self.lambda_ms)
    }
}

/// When requests reach the load balancer: precomputed open-loop arrival
/// times, or the closed-loop marker under which each arrival fires at the
/// previous request's completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArrivalSchedule {
    Open(Vec<SimTime>),
    ClosedLoop,
}

/// A workload-generation strategy. Implementations are registered in
/// `arrival_process_by_name` and selected by name from the command line.
pub trait ArrivalProcess {
    fn name(&self) -> &'static str;
    fn schedule(&self, n_requests: usize, seed: u64) -> Result<ArrivalSchedule>;
}

/// Registered process names, in documentation order.
pub const ARRIVAL_MODEL_NAMES: [&str; 3] = ["poisson", "exponential", "closed-loop"];

/// Looks up an arrival process by registered name. The open-loop processes
/// require `lambda_ms`; the closed-loop process rejects it.
pub fn arrival_process_by_name(
    name: &str,
    lambda_ms: Option<f64>,
) -> Result<Box<dyn ArrivalProcess>> {
    match name {
        "poisson" => Ok(Box::new(PoissonArrivals {
            lambda_ms: require_lambda(name, lambda_ms)?,
        })),
        "exponential" => Ok(Box::new(ExponentialArrivals {
            mean_ms: require_lambda(name, lambda_ms)?,
        })),
        "closed-loop" => {
            if lambda_ms.is_some() {
                return Err(Error::Parameter(
                    "closed-loop arrivals take no lambda".into(),
                ));
            }
            Ok(Box::new(ClosedLoopArrivals))
        }
        other => Err(Error::Parameter(format!(
            "unknown arrival model {other:?}, expected one of {ARRIVAL_MODEL_NAMES:?}"
        ))),
    }
}

fn require_lambda(name: &str, lambda_ms: Option<f64>) -> Result<f64> {
    match lambda_ms {
        Some(l) if l.is_finite() && l > 0.0 => Ok(l),
        Some(l) => Err(Error::Parameter(format!(
            "{name} arrivals need lambda > 0, got {l}"
        ))),
        None => Err(Error::Parameter(format!("{name} arrivals need a lambda"))),
    }
}

/// Open-loop arrivals with Poisson-distributed whole-millisecond gaps, the
/// literal reading of a Poisson inter-arrival law.
pub struct PoissonArrivals {
    pub lambda_ms: f64,
}

/// Open-loop arrivals with exponentially distributed gaps at microsecond
/// resolution, the continuous-time reading of a Poisson arrival process.
pub struct ExponentialArrivals {
    pub mean_ms: f64,
}

/// Closed-loop arrivals: the next request is issued when the previous one
/// completes, so the schedule is resolved inside the engine.
pub struct ClosedLoopArrivals;

impl ArrivalProcess for PoissonArrivals {
    fn name(&self) -> &'static str {
        "poisson"
    }

    fn schedule(&self, n_requests: usize, seed: u64) -> Result<ArrivalSchedule> {
        poisson_interarrivals(self.lambda_ms, n_requests, seed)
    }
}

impl ArrivalProcess for ExponentialArrivals {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn schedule(&self, n_requests: usize, seed: u64) -> Result<ArrivalSchedule> {
        exponential_interarrivals(self.mean_ms, n_requests, seed)
    }
}

impl ArrivalProcess for ClosedLoopArrivals {
    fn name(&self) -> &'static str {
        "closed-loop"
    }

    fn schedule(&self, n_requests: usize, _seed: u64) -> Result<ArrivalSchedule> {
        if n_requests == 0 {
            return Err(Error::Parameter("need at least one request".into()));
        }
        Ok(ArrivalSchedule::ClosedLoop)
    }
}

/// Open-loop schedule whose gaps are i.i.d. Poisson(lambda_ms) draws read as
/// whole milliseconds. The first arrival is at time zero.
pub fn poisson_interarrivals(lambda_ms: f64, n_requests: usize, seed: u64) -> Result<ArrivalSchedule> {
    check_open_loop(lambda_ms, n_requests)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(n_requests);
    let mut now = SimTime::ZERO;
    times.push(now);
    for _ in 1..n_requests {
        now = now + poisson_sample(lambda_ms, &mut rng) * 1000;
        times.push(now);
    }
    Ok(ArrivalSchedule::Open(times))
}

/// Open-loop schedule with exponential gaps of the given mean, quantized to
/// whole microseconds. The first arrival is at time zero.
pub fn exponential_interarrivals(
    mean_ms: f64,
    n_requests: usize,
    seed: u64,
) -> Result<ArrivalSchedule> {
    check_open_loop(mean_ms, n_requests)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut times = Vec::with_capacity(n_requests);
    let mut now = SimTime::ZERO;
    times.push(now);
    for _ in 1..n_requests {
        let u: f64 = rng.gen();
        let gap_ms = -mean_ms * (1.0 - u).ln();
        now = now + (gap_ms * 1000.0).round() as u64;
        times.push(now);
    }
    Ok(ArrivalSchedule::Open(times))
}

fn check_open_loop(mean_ms: f64, n_requests: usize) -> Result<()> {
    if !(mean_ms.is_finite() && mean_ms > 0.0) {
        return Err(Error::Parameter(format!(
            "mean inter-arrival time must be positive, got {mean_ms}"
        )));
    }
    if n_requests == 0 {
        return Err(Error::Parameter("need at least one request".into()));
    }
    Ok(())
}

/// Draws Poisson(lambda) by inverting the CDF: walk k upward, accumulating
/// probability mass until it passes a uniform draw. Numerically stable for
/// lambda up to a few hundred; here lambda is tens of milliseconds. The
/// iteration cap only guards against float-tail underflow.
fn poisson_sample(lambda: f64, rng: &mut ChaCha8Rng) -> u64 {
    let u: f64 = rng.gen();
    let cap = (lambda + 10.0 * lambda.sqrt() + 100.0) as u64;
    let mut k = 0u64;
    let mut mass = (-lambda).exp();
    let mut cdf = mass;
    while u >= cdf && k < cap {
        k += 1;
        mass *= lambda / k as f64;
        cdf += mass;
    }
    k
}

/// Synthetic trace fixture: a cold-start entry followed by warm entries
/// drawn from a log-normal distribution. `warm_dispersion` is the log-space
/// standard deviation; the log-space mean is chosen so the distribution's
/// mean equals `warm_mean_ms`. Durations are quantized to whole microseconds
/// (at least one); every status code is 200.
pub fn synth_trace(
    n_entries: usize,
    cold_duration_ms: f64,
    warm_mean_ms: f64,
    warm_dispersion: f64,
    seed: u64,
) -> Result<TraceFile> {
    if n_entries < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 entries, got {n_entries}"
        )));
    }
    if !(cold_duration_ms.is_finite() && cold_duration_ms > 0.0) {
        return Err(Error::Parameter(format!(
            "cold duration must be positive, got {cold_duration_ms}"
        )));
    }
    if !(warm_mean_ms.is_finite() && warm_mean_ms > 0.0) {
        return Err(Error::Parameter(format!(
            "warm mean must be positive, got {warm_mean_ms}"
        )));
    }
    if !(warm_dispersion.is_finite() && warm_dispersion >= 0.0) {
        return Err(Error::Parameter(format!(
            "dispersion must be non-negative, got {warm_dispersion}"
        )));
    }
    let mu = warm_mean_ms.ln() - warm_dispersion * warm_dispersion / 2.0;
    let warm = LogNormal::new(mu, warm_dispersion)
        .map_err(|e| Error::Parameter(format!("log-normal parameters: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(n_entries);
    entries.push(TraceEntry {
        duration_us: ms_to_us(cold_duration_ms),
        status_code: 200,
    });
    for _ in 1..n_entries {
        entries.push(TraceEntry {
            duration_us: ms_to_us(warm.sample(&mut rng)),
            status_code: 200,
        });
    }
    TraceFile::new(format!("synth-{seed}"), entries)
}

fn ms_to_us(ms: f64) -> u64 {
    (((ms * 1000.0).round()) as u64).max(1)
}
