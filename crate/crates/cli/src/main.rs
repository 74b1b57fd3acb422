//! Command-line front end: generate trace fixtures, replay them through the
//! simulated platform, summarize results, and compare distributions.
//!
//! Every command writes its artifacts with the full effective configuration
//! embedded, so a written file identifies exactly how it was produced. With
//! fixed seeds the whole pipeline is byte-for-byte reproducible.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use faas_dessim::io::plot_data::emit_plot_data;
use faas_dessim::io::report_json::{write_report, IntervalJson, MomentsJson, ToolInfo};
use faas_dessim::io::results_csv::{read_results, write_results, RESULTS_HEADER};
use faas_dessim::io::trace_csv::{read_trace_csv, write_trace_csv, TRACE_HEADER};
use faas_dessim::sim::{run_simulation, ResponseRecord, SimulationConfig, SimulationResult};
use faas_dessim::stats::{self, Sample};
use faas_dessim::trace::TraceFile;
use faas_dessim::validation::{compare, CompareConfig, ShapeTolerances, ValidationReport};
use faas_dessim::workload::{synth_trace, ArrivalModel};

const ENV_SEED: &str = "FAAS_DESSIM_SEED";

#[derive(Parser)]
#[command(
    name = "faas-dessim",
    version,
    about = "Deterministic trace-replay simulator for FaaS platforms"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace corpus through the simulated platform.
    Simulate(SimulateArgs),
    /// Summarize results files: moments and percentile confidence intervals.
    Stats(StatsArgs),
    /// Compare measured and simulated response-time distributions.
    Validate(ValidateArgs),
    /// Generate a synthetic trace corpus.
    GenTraces(GenTracesArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Directory of trace CSV files, one replica trace per file.
    #[arg(long, value_name = "DIR")]
    traces: PathBuf,

    /// Number of requests to generate.
    #[arg(long, value_name = "N")]
    requests: usize,

    /// Arrival model: poisson, exponential, or closed-loop.
    #[arg(long, value_name = "MODEL")]
    arrival: String,

    /// Mean interarrival time in milliseconds.
    #[arg(long, value_name = "MS", conflicts_with = "lambda_from_traces")]
    lambda_ms: Option<f64>,

    /// Use the warm mean of the input traces as the interarrival mean.
    #[arg(long)]
    lambda_from_traces: bool,

    /// Idle time in milliseconds after which a replica is terminated.
    #[arg(long, value_name = "MS", default_value_t = 300_000)]
    idle_timeout_ms: u64,

    /// Warmup fraction echoed into the manifest for downstream trimming.
    #[arg(long, value_name = "FRAC", default_value_t = 0.05)]
    warmup_frac: f64,

    /// Base RNG seed; falls back to FAAS_DESSIM_SEED, then 0.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Results path; run i is written to <stem>_run<i>.csv beside it.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Number of runs; run i uses seed + i - 1.
    #[arg(long, value_name = "K", default_value_t = 1)]
    runs: u64,
}

#[derive(Args)]
struct StatsArgs {
    /// Results CSV files, one per run.
    #[arg(long = "in", value_name = "FILE", num_args = 1.., required = true)]
    inputs: Vec<PathBuf>,

    /// Fraction of each run's first records to drop before summarizing.
    #[arg(long, value_name = "FRAC", default_value_t = 0.05)]
    warmup_frac: f64,

    /// Summary JSON path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    /// Measured-side runs: trace CSVs or results CSVs.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    measured: Vec<PathBuf>,

    /// Simulated-side runs: trace CSVs or results CSVs.
    #[arg(long, value_name = "FILE", num_args = 1.., required = true)]
    simulated: Vec<PathBuf>,

    /// Confidence level for every interval in the report.
    #[arg(long, value_name = "LEVEL", default_value_t = 0.95)]
    confidence: f64,

    /// Largest absolute skewness difference that still passes.
    #[arg(long, value_name = "TOL", default_value_t = 0.5)]
    skew_tol: f64,

    /// Largest relative kurtosis difference that still passes.
    #[arg(long, value_name = "TOL", default_value_t = 0.25)]
    kurt_rel_tol: f64,

    /// Fraction of each run's first records to drop before comparing.
    #[arg(long, value_name = "FRAC", default_value_t = 0.05)]
    warmup_frac: f64,

    /// Report JSON path.
    #[arg(long, value_name = "PATH")]
    out: PathBuf,

    /// Directory for ECDF and distribution-shape plot CSVs.
    #[arg(long, value_name = "DIR")]
    plot_data: Option<PathBuf>,

    /// Percentiles to report in addition to 50/95/99/99.9.
    #[arg(long, value_name = "P", num_args = 1..)]
    extra_percentiles: Vec<f64>,
}

#[derive(Args)]
struct GenTracesArgs {
    /// Number of trace files to generate.
    #[arg(long, value_name = "N", default_value_t = 32)]
    count: usize,

    /// Entries per file, including the leading cold-start entry.
    #[arg(long, value_name = "N", default_value_t = 5000)]
    entries: usize,

    /// Cold-start duration in milliseconds.
    #[arg(long, value_name = "MS")]
    cold_ms: f64,

    /// Mean warm duration in milliseconds.
    #[arg(long, value_name = "MS")]
    warm_mean_ms: f64,

    /// Log-space standard deviation of warm durations.
    #[arg(long, value_name = "SIGMA")]
    dispersion: f64,

    /// Base RNG seed; falls back to FAAS_DESSIM_SEED, then 0.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => match err.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{err}");
                std::process::exit(0);
            }
            _ => {
                let line = err
                    .to_string()
                    .lines()
                    .next()
                    .unwrap_or("error: invalid arguments")
                    .to_string();
                eprintln!("{line}");
                std::process::exit(2);
            }
        },
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Validate(args) => cmd_validate(args),
        Command::GenTraces(args) => cmd_gen_traces(args),
    }
}

// ---------------------------------------------------------------- simulate

#[derive(Serialize)]
struct SimulateManifest {
    tool: ToolInfo,
    command: &'static str,
    config: SimulateEcho,
    runs: Vec<RunSummary>,
}

#[derive(Serialize)]
struct SimulateEcho {
    traces: String,
    requests: usize,
    arrival: ArrivalEcho,
    idle_timeout_ms: u64,
    warmup_frac: f64,
    seed: u64,
    runs: u64,
    out: String,
}

#[derive(Serialize)]
struct ArrivalEcho {
    kind: String,
    lambda_ms: Option<f64>,
    lambda_from_traces: bool,
}

#[derive(Serialize)]
struct RunSummary {
    run: u64,
    seed: u64,
    file: String,
    requests: usize,
    replicas_created: u64,
    cold_start_count: u64,
    trace_assignment_log: Vec<(u64, String)>,
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    if args.runs == 0 {
        bail!("--runs must be at least 1");
    }
    let traces = load_traces_dir(&args.traces)?;
    let lambda_ms = if args.lambda_from_traces {
        Some(warm_mean_ms_of(&traces))
    } else {
        args.lambda_ms
    };
    let arrival = ArrivalModel {
        kind: args.arrival.clone(),
        lambda_ms,
    };
    // Rejects unknown models and bad lambda combinations before any work.
    let process = arrival.process()?;

    let mut run_summaries = Vec::new();
    for run in 1..=args.runs {
        let run_seed = seed + (run - 1);
        let mut config = SimulationConfig::new(
            traces.clone(),
            args.requests,
            arrival.clone(),
            run_seed,
        );
        config.idle_timeout_us = args
            .idle_timeout_ms
            .checked_mul(1000)
            .ok_or_else(|| anyhow!("--idle-timeout-ms too large"))?;
        config.warmup_fraction = args.warmup_frac;

        let schedule = process.schedule(args.requests, run_seed)?;
        let result = run_simulation(&config, &schedule)?;
        let path = run_path(&args.out, run);
        write_results(&result, &path)
            .with_context(|| format!("writing {}", path.display()))?;
        println!(
            "run {run}: {} requests, {} replicas, {} cold starts -> {}",
            result.records.len(),
            result.replicas_created,
            result.cold_start_count,
            path.display()
        );
        run_summaries.push(run_summary(run, run_seed, &path, &result));
    }

    let manifest = SimulateManifest {
        tool: ToolInfo::current(),
        command: "simulate",
        config: SimulateEcho {
            traces: path_text(&args.traces),
            requests: args.requests,
            arrival: ArrivalEcho {
                kind: arrival.kind,
                lambda_ms: arrival.lambda_ms,
                lambda_from_traces: args.lambda_from_traces,
            },
            idle_timeout_ms: args.idle_timeout_ms,
            warmup_frac: args.warmup_frac,
            seed,
            runs: args.runs,
            out: path_text(&args.out),
        },
        runs: run_summaries,
    };
    let manifest_path = manifest_path(&args.out);
    write_json(&manifest, &manifest_path)?;
    println!("manifest -> {}", manifest_path.display());
    Ok(())
}

fn run_summary(run: u64, seed: u64, path: &Path, result: &SimulationResult) -> RunSummary {
    RunSummary {
        run,
        seed,
        file: path_text(path),
        requests: result.records.len(),
        replicas_created: result.replicas_created,
        cold_start_count: result.cold_start_count,
        trace_assignment_log: result.trace_assignment_log.clone(),
    }
}

/// Loads every `*.csv` in the directory, sorted by file name so the corpus
/// order is independent of directory-listing order.
fn load_traces_dir(dir: &Path) -> Result<Vec<std::sync::Arc<TraceFile>>> {
    let listing = fs::read_dir(dir)
        .with_context(|| format!("reading traces directory {}", dir.display()))?;
    let mut paths: Vec<PathBuf> = listing
        .collect::<std::io::Result<Vec<_>>>()
        .with_context(|| format!("reading traces directory {}", dir.display()))?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "csv"))
        .collect();
    paths.sort_by_key(|path| path.file_name().map(|name| name.to_os_string()));
    if paths.is_empty() {
        bail!("no .csv trace files in {}", dir.display());
    }
    paths
        .iter()
        .map(|path| {
            read_trace_csv(path)
                .map(std::sync::Arc::new)
                .map_err(anyhow::Error::from)
        })
        .collect()
}

/// Mean warm duration of the corpus in milliseconds: every entry after each
/// file's cold-start entry, pooled.
fn warm_mean_ms_of(traces: &[std::sync::Arc<TraceFile>]) -> f64 {
    let mut sum_us: u128 = 0;
    let mut count: u128 = 0;
    for file in traces {
        for entry in &file.entries()[1..] {
            sum_us += u128::from(entry.duration_us);
            count += 1;
        }
    }
    // Every trace file has at least one warm entry.
    sum_us as f64 / count as f64 / 1000.0
}

/// `out/results.csv` -> `out/results_run3.csv`.
fn run_path(out: &Path, run: u64) -> PathBuf {
    sibling(out, &format!("_run{run}"), None)
}

/// `out/results.csv` -> `out/results_manifest.json`.
fn manifest_path(out: &Path) -> PathBuf {
    sibling(out, "_manifest", Some("json"))
}

fn sibling(out: &Path, suffix: &str, extension: Option<&str>) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|stem| stem.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let ext = extension
        .map(str::to_string)
        .or_else(|| {
            out.extension()
                .map(|ext| ext.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "csv".to_string());
    out.with_file_name(format!("{stem}{suffix}.{ext}"))
}

// ------------------------------------------------------------------- stats

#[derive(Serialize)]
struct StatsDoc {
    tool: ToolInfo,
    command: &'static str,
    config: StatsEcho,
    summary: StatsSummary,
}

#[derive(Serialize)]
struct StatsEcho {
    r#in: Vec<String>,
    warmup_frac: f64,
    confidence: f64,
    out: String,
}

#[derive(Serialize)]
struct StatsSummary {
    runs: Vec<RunCounts>,
    pooled: MomentsJson,
    mean_ms: IntervalJson,
    percentiles: Vec<PercentileSummary>,
}

#[derive(Serialize)]
struct RunCounts {
    file: String,
    n_total: usize,
    n_used: usize,
}

#[derive(Serialize)]
struct PercentileSummary {
    percentile: f64,
    interval: IntervalJson,
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let confidence = faas_dessim::validation::DEFAULT_CONFIDENCE;
    let mut samples = Vec::new();
    let mut counts = Vec::new();
    for path in &args.inputs {
        let records = read_results(path)?;
        let used = stats::trim_warmup(&records, args.warmup_frac)?;
        counts.push(RunCounts {
            file: path_text(path),
            n_total: records.len(),
            n_used: used.len(),
        });
        samples.push(Sample::new(durations_ms(used))?);
    }

    let pooled = Sample::new(
        samples
            .iter()
            .flat_map(|sample| sample.values().iter().copied())
            .collect(),
    )?;
    let moments = stats::moments(&pooled)?;
    let mean = stats::mean_ci(&samples, confidence)?;
    let mut percentiles = Vec::new();
    for &p in &faas_dessim::validation::REPORT_PERCENTILES {
        percentiles.push(PercentileSummary {
            percentile: p,
            interval: (&stats::percentile_ci(&samples, p, confidence)?).into(),
        });
    }

    let doc = StatsDoc {
        tool: ToolInfo::current(),
        command: "stats",
        config: StatsEcho {
            r#in: args.inputs.iter().map(|p| path_text(p)).collect(),
            warmup_frac: args.warmup_frac,
            confidence,
            out: path_text(&args.out),
        },
        summary: StatsSummary {
            runs: counts,
            pooled: (&moments).into(),
            mean_ms: (&mean).into(),
            percentiles,
        },
    };
    write_json(&doc, &args.out)?;

    println!(
        "{} runs, {} records used, mean {:.3} ms",
        samples.len(),
        pooled.len(),
        moments.mean
    );
    for row in &doc.summary.percentiles {
        println!("p{} {}", row.percentile, row.interval.display);
    }
    println!("summary -> {}", args.out.display());
    Ok(())
}

// ---------------------------------------------------------------- validate

fn cmd_validate(args: ValidateArgs) -> Result<()> {
    let measured = load_side(&args.measured, args.warmup_frac)?;
    let simulated = load_side(&args.simulated, args.warmup_frac)?;
    let config = CompareConfig {
        confidence: args.confidence,
        tolerances: ShapeTolerances {
            skew_tol: args.skew_tol,
            kurt_rel_tol: args.kurt_rel_tol,
        },
        warmup_fraction: args.warmup_frac,
        extra_percentiles: args.extra_percentiles.clone(),
    };
    let report = compare(&measured, &simulated, &config)?;

    let echo = serde_json::json!({
        "measured": args.measured.iter().map(|p| path_text(p)).collect::<Vec<_>>(),
        "simulated": args.simulated.iter().map(|p| path_text(p)).collect::<Vec<_>>(),
        "confidence": args.confidence,
        "skew_tol": args.skew_tol,
        "kurt_rel_tol": args.kurt_rel_tol,
        "warmup_frac": args.warmup_frac,
        "extra_percentiles": args.extra_percentiles,
        "out": path_text(&args.out),
        "plot_data": args.plot_data.as_deref().map(path_text),
    });
    write_report(&report, &echo, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    print_report(&report);
    println!("report -> {}", args.out.display());

    if let Some(dir) = &args.plot_data {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating plot-data directory {}", dir.display()))?;
        for path in emit_plot_data(&report, dir)? {
            println!("plot data -> {}", path.display());
        }
    }
    Ok(())
}

/// Reads one side of a comparison. Each file is sniffed by header: a trace
/// CSV contributes its durations in file order, a results CSV the durations
/// of its records in arrival order. Warmup is trimmed per file.
fn load_side(paths: &[PathBuf], warmup_frac: f64) -> Result<Vec<Sample>> {
    paths
        .iter()
        .map(|path| {
            let values = read_run_durations_ms(path)?;
            let used = stats::trim_warmup(&values, warmup_frac)?;
            Ok(Sample::new(used.to_vec())?)
        })
        .collect()
}

fn read_run_durations_ms(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().unwrap_or("");
    if header == TRACE_HEADER {
        let trace = read_trace_csv(path)?;
        Ok(trace
            .entries()
            .iter()
            .map(|entry| entry.duration_us as f64 / 1000.0)
            .collect())
    } else if header == RESULTS_HEADER {
        Ok(durations_ms(&read_results(path)?))
    } else {
        bail!(
            "{}: unrecognized header {header:?}; expected a trace or results CSV",
            path.display()
        );
    }
}

fn print_report(report: &ValidationReport) {
    println!("percentile  measured            simulated");
    for row in &report.percentile_table {
        println!(
            "p{:<10} {:<19} {}",
            row.percentile,
            interval_text(row.measured.lower, row.measured.upper),
            interval_text(row.simulated.lower, row.simulated.upper),
        );
    }
    println!(
        "mean difference {} ms",
        interval_text(report.mean_difference.lower, report.mean_difference.upper)
    );
    println!("ks distance {:.4}", report.ks_distance);
    println!(
        "verdict: {}",
        match report.verdict.verdict {
            faas_dessim::validation::VerdictKind::ShapeValid => "shape-valid",
            faas_dessim::validation::VerdictKind::ShapeDivergent => "shape-divergent",
        }
    );
}

fn interval_text(lower: f64, upper: f64) -> String {
    faas_dessim::io::report_json::format_interval_ms(lower, upper)
}

// -------------------------------------------------------------- gen-traces

#[derive(Serialize)]
struct GenTracesManifest {
    tool: ToolInfo,
    command: &'static str,
    config: GenTracesEcho,
    files: Vec<String>,
}

#[derive(Serialize)]
struct GenTracesEcho {
    count: usize,
    entries: usize,
    cold_ms: f64,
    warm_mean_ms: f64,
    dispersion: f64,
    seed: u64,
    out: String,
}

fn cmd_gen_traces(args: GenTracesArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;

    let width = std::cmp::max(3, (args.count - 1).to_string().len());
    let mut files = Vec::new();
    for i in 0..args.count {
        let trace = synth_trace(
            args.entries,
            args.cold_ms,
            args.warm_mean_ms,
            args.dispersion,
            seed + i as u64,
        )?;
        let name = format!("trace_{i:0width$}.csv");
        let path = args.out.join(&name);
        write_trace_csv(&trace, &path)
            .with_context(|| format!("writing {}", path.display()))?;
        files.push(name);
    }

    let manifest = GenTracesManifest {
        tool: ToolInfo::current(),
        command: "gen-traces",
        config: GenTracesEcho {
            count: args.count,
            entries: args.entries,
            cold_ms: args.cold_ms,
            warm_mean_ms: args.warm_mean_ms,
            dispersion: args.dispersion,
            seed,
            out: path_text(&args.out),
        },
        files,
    };
    write_json(&manifest, &args.out.join("manifest.json"))?;
    println!(
        "wrote {} trace files x {} entries -> {}",
        args.count,
        args.entries,
        args.out.display()
    );
    Ok(())
}

// ----------------------------------------------------------------- helpers

/// Seed precedence: explicit flag, then FAAS_DESSIM_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env::var(ENV_SEED) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| anyhow!("invalid {ENV_SEED} value {text:?}")),
        Err(env::VarError::NotPresent) => Ok(0),
        Err(err) => Err(anyhow!("reading {ENV_SEED}: {err}")),
    }
}

fn durations_ms(records: &[ResponseRecord]) -> Vec<f64> {
    records
        .iter()
        .map(|record| record.duration_us as f64 / 1000.0)
        .collect()
}

/// Paths are echoed exactly as typed so outputs do not depend on where the
/// tool was invoked from.
fn path_text(path: &Path) -> String {
    path.display().to_string()
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("document serializes");
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
