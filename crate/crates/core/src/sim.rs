//! Discrete-event engine: a load balancer over a replica pool with idle
//! expiry, trace-replay execution, and on-demand replica creation.

use std::collections::HashSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::time::SimTime;
use crate::trace::{ReplicaTrace, TraceFile};
use crate::workload::{ArrivalModel, ArrivalSchedule};

/// Default idle timeout: five minutes.
pub const DEFAULT_IDLE_TIMEOUT_US: u64 = 300_000_000;

/// Default fraction of leading records that downstream statistics discard.
pub const DEFAULT_WARMUP_FRACTION: f64 = 0.05;

/// Replica lifecycle. Terminated is absorbing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReplicaState {
    Busy,
    Available,
    Terminated,
}

/// One function replica: a serial executor replaying its assigned trace.
#[derive(Clone, Debug)]
pub struct Replica {
    pub id: u64,
    pub trace: ReplicaTrace,
    pub state: ReplicaState,
    /// When the replica last became available; meaningful while available.
    pub available_since: SimTime,
    pub created_at: SimTime,
    /// Completion time of the in-flight request; meaningful while busy.
    pub busy_until: SimTime,
}

/// One generated request.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: u64,
    pub arrival: SimTime,
}

/// Outcome of one simulated invocation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResponseRecord {
    pub request_id: u64,
    pub arrival: SimTime,
    pub start: SimTime,
    pub duration_us: u64,
    pub status_code: u16,
    pub replica_id: u64,
    pub cold_start: bool,
}

impl ResponseRecord {
    pub fn completion(&self) -> SimTime {
        self.start + self.duration_us
    }
}

/// Inputs for one simulation run.
#[derive(Clone, Debug)]
pub struct SimulationConfig {
    /// Trace corpus in configuration order; order drives trace acquisition.
    pub trace_files: Vec<Arc<TraceFile>>,
    pub n_requests: usize,
    pub arrival: ArrivalModel,
    /// Idle time at which an available replica is reaped (inclusive).
    pub idle_timeout_us: u64,
    pub seed: u64,
    /// Echoed into run outputs so downstream trimming is reproducible.
    pub warmup_fraction: f64,
}

impl SimulationConfig {
    pub fn new(
        trace_files: Vec<Arc<TraceFile>>,
        n_requests: usize,
        arrival: ArrivalModel,
        seed: u64,
    ) -> Self {
        SimulationConfig {
            trace_files,
            n_requests,
            arrival,
            idle_timeout_us: DEFAULT_IDLE_TIMEOUT_US,
            seed,
            warmup_fraction: DEFAULT_WARMUP_FRACTION,
        }
    }
}

/// Everything one run produces. Records are in arrival order.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationResult {
    pub records: Vec<ResponseRecord>,
    pub replicas_created: u64,
    pub cold_start_count: u64,
    /// (replica id, trace file id) in creation order; the usage history that
    /// drives least-recently-used trace reuse.
    pub trace_assignment_log: Vec<(u64, String)>,
}

/// Runs the event loop over a request schedule.
///
/// Arrivals are processed in timestamp order, ids breaking ties. At each
/// arrival the engine first applies completions due at or before that time,
/// then reaps replicas idle for at least the timeout, then dispatches: the
/// most recently available replica serves the request, and a new replica is
/// created when none is available. Requests never queue, so start always
/// equals arrival. The result is a pure function of (config, schedule).
pub fn run_simulation(
    config: &SimulationConfig,
    schedule: &ArrivalSchedule,
) -> Result<SimulationResult> {
    if config.trace_files.is_empty() {
        return Err(Error::Config("no trace files".into()));
    }
    let mut seen = HashSet::new();
    for file in &config.trace_files {
        if !seen.insert(file.id()) {
            return Err(Error::Config(format!("duplicate trace file id {:?}", file.id())));
        }
    }
    if config.n_requests == 0 {
        return Err(Error::Config("need at least one request".into()));
    }
    if config.idle_timeout_us == 0 {
        return Err(Error::Config("idle timeout must be positive".into()));
    }
    let open_times = match schedule {
        ArrivalSchedule::Open(times) => {
            if times.len() != config.n_requests {
                return Err(Error::Input(format!(
                    "schedule has {} arrivals, config asks for {}",
                    times.len(),
                    config.n_requests
                )));
            }
            if times.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::Input("arrival times must be non-decreasing".into()));
            }
            Some(times.as_slice())
        }
        ArrivalSchedule::ClosedLoop => None,
    };

    let mut replicas: Vec<Replica> = Vec::new();
    let mut records: Vec<ResponseRecord> = Vec::with_capacity(config.n_requests);
    let mut assignment_log: Vec<(u64, String)> = Vec::new();
    let mut next_closed_arrival = SimTime::ZERO;

    for i in 0..config.n_requests {
        let request = Request {
            id: (i + 1) as u64,
            arrival: match open_times {
                Some(times) => times[i],
                None => next_closed_arrival,
            },
        };
        let now = request.arrival;
        complete_finished(&mut replicas, now);
        expire_idle_replicas(&mut replicas, now, config.idle_timeout_us);
        let replica_id = match select_available_replica(&replicas, now, config.idle_timeout_us) {
            Some(id) => id,
            None => create_replica(&mut replicas, &config.trace_files, &mut assignment_log, now),
        };
        let replica = &mut replicas[(replica_id - 1) as usize];
        let cold_start = replica.trace.cursor() == 0;
        let entry = replica.trace.next_entry();
        replica.state = ReplicaState::Busy;
        replica.busy_until = now + entry.duration_us;
        records.push(ResponseRecord {
            request_id: request.id,
            arrival: now,
            start: now,
            duration_us: entry.duration_us,
            status_code: entry.status_code,
            replica_id,
            cold_start,
        });
        next_closed_arrival = replica.busy_until;
    }

    // every creation consumes the cold-start entry exactly once
    let replicas_created = replicas.len() as u64;
    Ok(SimulationResult {
        records,
        replicas_created,
        cold_start_count: replicas_created,
        trace_assignment_log: assignment_log,
    })
}

/// Load-balancer policy: among available replicas that have not reached the
/// idle timeout, pick the one that most recently became available; ties go
/// to the lowest id. None when no replica qualifies.
pub fn select_available_replica(
    replicas: &[Replica],
    now: SimTime,
    idle_timeout_us: u64,
) -> Option<u64> {
    let mut best: Option<&Replica> = None;
    for replica in replicas {
        if replica.state != ReplicaState::Available
            || now.since(replica.available_since) >= idle_timeout_us
        {
            continue;
        }
        match best {
            Some(b) if replica.available_since <= b.available_since => {}
            _ => best = Some(replica),
        }
    }
    best.map(|r| r.id)
}

/// Picks the trace file for a new replica and records the assignment: the
/// first never-assigned file in configuration order, or failing that the
/// file whose latest assignment is oldest. Returns the file's index.
pub fn acquire_trace(
    trace_files: &[Arc<TraceFile>],
    assignment_log: &mut Vec<(u64, String)>,
    replica_id: u64,
) -> usize {
    let never_assigned = trace_files
        .iter()
        .position(|f| !assignment_log.iter().any(|(_, id)| id == f.id()));
    let chosen = never_assigned.unwrap_or_else(|| {
        let last_use = |file_id: &str| {
            assignment_log
                .iter()
                .rposition(|(_, id)| id == file_id)
                .expect("every file has been assigned")
        };
        (0..trace_files.len())
            .min_by_key(|&i| last_use(trace_files[i].id()))
            .expect("at least one trace file")
    });
    assignment_log.push((replica_id, trace_files[chosen].id().to_string()));
    chosen
}

/// Terminates every available replica that has been idle for at least the
/// timeout (inclusive boundary) and returns their ids. Runs before dispatch
/// at each arrival; busy replicas are never touched.
pub fn expire_idle_replicas(
    replicas: &mut [Replica],
    now: SimTime,
    idle_timeout_us: u64,
) -> Vec<u64> {
    let mut terminated = Vec::new();
    for replica in replicas.iter_mut() {
        if replica.state == ReplicaState::Available
            && now.since(replica.available_since) >= idle_timeout_us
        {
            replica.state = ReplicaState::Terminated;
            terminated.push(replica.id);
        }
    }
    terminated
}

/// Busy replicas whose request finishes by `now` become available at their
/// completion instant, so a replica freed exactly at an arrival can serve it.
fn complete_finished(replicas: &mut [Replica], now: SimTime) {
    for replica in replicas.iter_mut() {
        if replica.state == ReplicaState::Busy && replica.busy_until <= now {
            replica.state = ReplicaState::Available;
            replica.available_since = replica.busy_until;
        }
    }
}

fn create_replica(
    replicas: &mut Vec<Replica>,
    trace_files: &[Arc<TraceFile>],
    assignment_log: &mut Vec<(u64, String)>,
    now: SimTime,
) -> u64 {
    let id = (replicas.len() + 1) as u64;
    let file_index = acquire_trace(trace_files, assignment_log, id);
    replicas.push(Replica {
        id,
        trace: ReplicaTrace::new(Arc::clone(&trace_files[file_index])),
        state: ReplicaState::Busy, // dispatched immediately by the caller
        available_since: now,
        created_at: now,
        busy_until: now,
    });
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceEntry;

    fn entry(duration_us: u64) -> TraceEntry {
        TraceEntry {
            duration_us,
            status_code: 200,
        }
    }

    fn file(id: &str, durations_ms: &[u64]) -> Arc<TraceFile> {
        let entries = durations_ms.iter().map(|&ms| entry(ms * 1000)).collect();
        Arc::new(TraceFile::new(id, entries).unwrap())
    }

    fn config(traces: Vec<Arc<TraceFile>>, n_requests: usize) -> SimulationConfig {
        SimulationConfig::new(
            traces,
            n_requests,
            ArrivalModel {
                kind: "closed-loop".into(),
                lambda_ms: None,
            },
            0,
        )
    }

    fn open(times_ms: &[u64]) -> ArrivalSchedule {
        ArrivalSchedule::Open(times_ms.iter().map(|&ms| SimTime::from_millis(ms)).collect())
    }

    fn available(id: u64, since_ms: u64) -> Replica {
        Replica {
            id,
            trace: ReplicaTrace::new(file(&format!("r{id}"), &[100, 10])),
            state: ReplicaState::Available,
            available_since: SimTime::from_millis(since_ms),
            created_at: SimTime::ZERO,
            busy_until: SimTime::from_millis(since_ms),
        }
    }

    #[test]
    fn three_request_scenario_reuses_lru_file() {
        let traces = vec![file("A", &[100, 10, 10]), file("B", &[120, 12])];
        let result = run_simulation(&config(traces, 3), &open(&[0, 5, 50])).unwrap();

        assert_eq!(result.replicas_created, 3);
        assert_eq!(result.cold_start_count, 3);
        assert_eq!(
            result.trace_assignment_log,
            vec![
                (1, "A".to_string()),
                (2, "B".to_string()),
                (3, "A".to_string())
            ]
        );
        let durations: Vec<u64> = result.records.iter().map(|r| r.duration_us).collect();
        assert_eq!(durations, vec![100_000, 120_000, 100_000]);
        assert!(result.records.iter().all(|r| r.cold_start));
        assert!(result.records.iter().all(|r| r.start == r.arrival));
        let replica_ids: Vec<u64> = result.records.iter().map(|r| r.replica_id).collect();
        assert_eq!(replica_ids, vec![1, 2, 3]);
    }

    #[test]
    fn late_arrival_reuses_the_warm_replica() {
        let traces = vec![file("A", &[100, 10, 10]), file("B", &[120, 12])];
        let result = run_simulation(&config(traces, 2), &open(&[0, 200])).unwrap();

        assert_eq!(result.replicas_created, 1);
        assert_eq!(result.records[1].duration_us, 10_000);
        assert!(!result.records[1].cold_start);
        assert_eq!(result.records[1].replica_id, 1);
    }

    #[test]
    fn single_request_replays_the_cold_entry() {
        let traces = vec![file("A", &[100, 10])];
        let result = run_simulation(&config(traces, 1), &open(&[0])).unwrap();
        assert_eq!(result.records.len(), 1);
        let record = result.records[0];
        assert_eq!(record.duration_us, 100_000);
        assert!(record.cold_start);
        assert_eq!(result.replicas_created, 1);
    }

    #[test]
    fn closed_loop_replays_entries_in_order() {
        let traces = vec![file("A", &[100, 10, 20, 30])];
        let result =
            run_simulation(&config(traces.clone(), 3), &ArrivalSchedule::ClosedLoop).unwrap();
        let durations: Vec<u64> = result.records.iter().map(|r| r.duration_us).collect();
        assert_eq!(durations, vec![100_000, 10_000, 20_000]);
        assert_eq!(result.replicas_created, 1);
        // each arrival fires at the previous completion
        assert_eq!(result.records[1].arrival, SimTime::from_millis(100));
        assert_eq!(result.records[2].arrival, SimTime::from_millis(110));
    }

    #[test]
    fn selection_prefers_most_recently_available() {
        let replicas = vec![available(1, 100), available(2, 125)];
        assert_eq!(
            select_available_replica(&replicas, SimTime::from_millis(200), u64::MAX),
            Some(2)
        );
    }

    #[test]
    fn selection_breaks_ties_by_lowest_id_and_skips_expired() {
        let tied = vec![available(1, 100), available(2, 100)];
        assert_eq!(
            select_available_replica(&tied, SimTime::from_millis(200), u64::MAX),
            Some(1)
        );

        let single = vec![available(7, 100)];
        assert_eq!(
            select_available_replica(&single, SimTime::from_millis(200), u64::MAX),
            Some(7)
        );
        // reached the inclusive timeout boundary: not eligible
        assert_eq!(
            select_available_replica(&single, SimTime::from_millis(200), 100_000),
            None
        );
        assert_eq!(select_available_replica(&[], SimTime::ZERO, u64::MAX), None);
    }

    #[test]
    fn acquire_trace_prefers_unassigned_then_lru() {
        let traces = vec![file("A", &[100, 10]), file("B", &[120, 12])];

        let mut log = Vec::new();
        assert_eq!(acquire_trace(&traces, &mut log, 1), 0);
        assert_eq!(log, vec![(1, "A".to_string())]);

        assert_eq!(acquire_trace(&traces, &mut log, 2), 1);
        // both assigned; A's assignment is older
        assert_eq!(acquire_trace(&traces, &mut log, 3), 0);
        assert_eq!(log.last().unwrap(), &(3, "A".to_string()));

        let only = vec![file("A", &[100, 10])];
        let mut log = vec![(1, "A".to_string())];
        assert_eq!(acquire_trace(&only, &mut log, 2), 0);
    }

    #[test]
    fn expiry_is_inclusive_and_skips_busy_replicas() {
        let five_minutes = DEFAULT_IDLE_TIMEOUT_US;
        let mut replicas = vec![available(1, 100)];
        // 100ms + 5min exactly: inclusive boundary terminates
        let boundary = SimTime::from_millis(100) + five_minutes;
        assert_eq!(expire_idle_replicas(&mut replicas, boundary, five_minutes), vec![1]);
        assert_eq!(replicas[0].state, ReplicaState::Terminated);

        let mut replicas = vec![available(1, 100)];
        assert!(expire_idle_replicas(&mut replicas, SimTime::from_millis(100), five_minutes)
            .is_empty());

        let mut busy = vec![available(1, 100)];
        busy[0].state = ReplicaState::Busy;
        assert!(expire_idle_replicas(&mut busy, boundary, five_minutes).is_empty());
        assert_eq!(busy[0].state, ReplicaState::Busy);
    }

    #[test]
    fn arrival_at_the_timeout_boundary_gets_a_new_replica() {
        let traces = vec![file("A", &[100, 10, 10])];
        let mut cfg = config(traces, 2);
        cfg.idle_timeout_us = 50_000;

        // first request completes at 100ms; boundary arrival at 150ms
        let boundary = run_simulation(&cfg, &open(&[0, 150])).unwrap();
        assert_eq!(boundary.replicas_created, 2);
        assert!(boundary.records[1].cold_start);

        // one microsecond earlier the old replica is still warm
        let just_inside = ArrivalSchedule::Open(vec![
            SimTime::ZERO,
            SimTime::from_micros(149_999),
        ]);
        let reused = run_simulation(&cfg, &just_inside).unwrap();
        assert_eq!(reused.replicas_created, 1);
        assert!(!reused.records[1].cold_start);
        assert_eq!(reused.records[1].duration_us, 10_000);
    }

    #[test]
    fn completion_at_arrival_time_frees_the_replica_first() {
        let traces = vec![file("A", &[100, 10, 10])];
        let result = run_simulation(&config(traces, 2), &open(&[0, 100])).unwrap();
        assert_eq!(result.replicas_created, 1);
        assert!(!result.records[1].cold_start);
    }

    #[test]
    fn simultaneous_arrivals_each_get_a_replica() {
        let traces = vec![file("A", &[100, 10]), file("B", &[120, 12])];
        let result = run_simulation(&config(traces, 3), &open(&[0, 0, 0])).unwrap();
        assert_eq!(result.replicas_created, 3);
        assert_eq!(
            result.trace_assignment_log,
            vec![
                (1, "A".to_string()),
                (2, "B".to_string()),
                (3, "A".to_string())
            ]
        );
    }

    #[test]
    fn rejects_bad_configs_and_schedules() {
        let traces = vec![file("A", &[100, 10])];
        assert!(matches!(
            run_simulation(&config(vec![], 1), &open(&[0])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_simulation(&config(traces.clone(), 0), &ArrivalSchedule::ClosedLoop),
            Err(Error::Config(_))
        ));
        let mut zero_timeout = config(traces.clone(), 1);
        zero_timeout.idle_timeout_us = 0;
        assert!(matches!(
            run_simulation(&zero_timeout, &open(&[0])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_simulation(&config(traces.clone(), 2), &open(&[5, 0])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            run_simulation(&config(traces.clone(), 3), &open(&[0, 5])),
            Err(Error::Input(_))
        ));
        let duplicate = vec![file("A", &[100, 10]), file("A", &[120, 12])];
        assert!(matches!(
            run_simulation(&config(duplicate, 1), &open(&[0])),
            Err(Error::Config(_))
        ));
    }
}
