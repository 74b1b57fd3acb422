//! End-to-end determinism: identical inputs reproduce identical outputs,
//! down to the bytes of the results file.

use std::fs;
use std::sync::Arc;

use faas_dessim::io::results_csv::write_results;
use faas_dessim::sim::{run_simulation, SimulationConfig};
use faas_dessim::time::SimTime;
use faas_dessim::trace::{TraceEntry, TraceFile};
use faas_dessim::workload::{ArrivalModel, ArrivalSchedule};

fn corpus() -> Vec<Arc<TraceFile>> {
    let durations: [&[u64]; 3] = [
        &[40_000, 19_000, 21_000, 18_500],
        &[35_000, 22_000, 17_000],
        &[50_000, 20_000, 19_250, 20_750, 18_000],
    ];
    durations
        .iter()
        .enumerate()
        .map(|(i, durs)| {
            let entries = durs
                .iter()
                .map(|&duration_us| TraceEntry {
                    duration_us,
                    status_code: 200,
                })
                .collect();
            Arc::new(TraceFile::new(format!("trace-{i}"), entries).unwrap())
        })
        .collect()
}

fn poisson_config(seed: u64) -> SimulationConfig {
    let mut config = SimulationConfig::new(
        corpus(),
        500,
        ArrivalModel {
            kind: "poisson".into(),
            lambda_ms: Some(12.0),
        },
        seed,
    );
    config.idle_timeout_us = 120_000;
    config
}

#[test]
fn identical_inputs_reproduce_identical_result_files() {
    let config = poisson_config(42);
    let schedule = config
        .arrival
        .process()
        .unwrap()
        .schedule(config.n_requests, config.seed)
        .unwrap();

    let first = run_simulation(&config, &schedule).unwrap();
    let second = run_simulation(&config, &schedule).unwrap();
    assert_eq!(first, second);

    let dir = tempfile::tempdir().unwrap();
    let path_a = dir.path().join("a.csv");
    let path_b = dir.path().join("b.csv");
    write_results(&first, &path_a).unwrap();
    write_results(&second, &path_b).unwrap();
    assert_eq!(fs::read(&path_a).unwrap(), fs::read(&path_b).unwrap());
}

#[test]
fn schedule_generation_is_a_pure_function_of_the_seed() {
    let model = ArrivalModel {
        kind: "poisson".into(),
        lambda_ms: Some(5.0),
    };
    let process = model.process().unwrap();
    let a = process.schedule(200, 7).unwrap();
    let b = process.schedule(200, 7).unwrap();
    let c = process.schedule(200, 8).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn closed_loop_replays_the_trace_in_order_on_one_replica() {
    let entries = [50_000u64, 10_000, 20_000, 30_000]
        .iter()
        .map(|&duration_us| TraceEntry {
            duration_us,
            status_code: 200,
        })
        .collect();
    let file = Arc::new(TraceFile::new("loop", entries).unwrap());
    let config = SimulationConfig::new(
        vec![file],
        8,
        ArrivalModel {
            kind: "closed-loop".into(),
            lambda_ms: None,
        },
        0,
    );
    let result = run_simulation(&config, &ArrivalSchedule::ClosedLoop).unwrap();

    assert_eq!(result.replicas_created, 1);
    assert_eq!(result.cold_start_count, 1);

    // Cold entry once, then warm entries cycling.
    let durations: Vec<u64> = result.records.iter().map(|r| r.duration_us).collect();
    assert_eq!(
        durations,
        vec![50_000, 10_000, 20_000, 30_000, 10_000, 20_000, 30_000, 10_000]
    );

    // Each arrival is the previous completion; nothing ever waits.
    assert_eq!(result.records[0].arrival, SimTime::ZERO);
    for pair in result.records.windows(2) {
        assert_eq!(pair[1].arrival, pair[0].completion());
        assert_eq!(pair[1].start, pair[1].arrival);
    }
}
