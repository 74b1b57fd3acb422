//! Predictive-validation comparator: per-source shape statistics, the
//! percentile interval table, a mean-difference interval, the two-sample
//! Kolmogorov-Smirnov distance, and the shape-validity verdict.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    self, bootstrap_seed, mean_of, percentile_sorted, sample_variance, CiMethod, Ecdf, Interval,
    Moments, Sample, BOOTSTRAP_RESAMPLES,
};

/// Fixed percentile rows of the comparison table.
pub const REPORT_PERCENTILES: [f64; 4] = [50.0, 95.0, 99.0, 99.9];

pub const DEFAULT_SKEW_TOL: f64 = 0.5;
pub const DEFAULT_KURT_REL_TOL: f64 = 0.25;
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Verdict thresholds: absolute skewness difference, and kurtosis difference
/// relative to the measured side's kurtosis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeTolerances {
    pub skew_tol: f64,
    pub kurt_rel_tol: f64,
}

impl Default for ShapeTolerances {
    fn default() -> Self {
        ShapeTolerances {
            skew_tol: DEFAULT_SKEW_TOL,
            kurt_rel_tol: DEFAULT_KURT_REL_TOL,
        }
    }
}

/// Outcome of the shape comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    ShapeValid,
    ShapeDivergent,
}

/// Shape verdict together with the individual checks behind it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    pub skewness_within_tol: bool,
    pub kurtosis_within_tol: bool,
    pub skewness_diff: f64,
    pub kurtosis_rel_diff: f64,
    pub tolerances: ShapeTolerances,
}

/// Compares distribution shape through moments: valid iff the absolute
/// skewness difference is within `skew_tol` and the kurtosis difference,
/// taken relative to the measured kurtosis, is within `kurt_rel_tol`.
pub fn shape_verdict(measured: &Moments, simulated: &Moments, tolerances: ShapeTolerances) -> Verdict {
    let skewness_diff = (measured.skewness - simulated.skewness).abs();
    let kurtosis_rel_diff = (measured.kurtosis - simulated.kurtosis).abs() / measured.kurtosis;
    let skewness_within_tol = skewness_diff <= tolerances.skew_tol;
    let kurtosis_within_tol = kurtosis_rel_diff <= tolerances.kurt_rel_tol;
    Verdict {
        verdict: if skewness_within_tol && kurtosis_within_tol {
            VerdictKind::ShapeValid
        } else {
            VerdictKind::ShapeDivergent
        },
        skewness_within_tol,
        kurtosis_within_tol,
        skewness_diff,
        kurtosis_rel_diff,
        tolerances,
    }
}

/// Two-sample Kolmogorov-Smirnov distance: the supremum over the observed
/// values of the absolute ECDF difference.
pub fn ks_distance(a: &Ecdf, b: &Ecdf) -> f64 {
    let mut sup = 0.0f64;
    for &x in a.xs().iter().chain(b.xs().iter()) {
        sup = sup.max((a.eval(x) - b.eval(x)).abs());
    }
    sup
}

/// Pooled per-source summary carried in the report.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSummary {
    pub source: String,
    pub runs: usize,
    pub pooled_n: usize,
    pub moments: Moments,
    pub ecdf: Ecdf,
}

/// One row of the percentile table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercentileRow {
    pub percentile: f64,
    pub measured: Interval,
    pub simulated: Interval,
}

/// One point of the skewness-squared versus kurtosis plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CullenFreyPoint {
    pub source: String,
    pub skewness_squared: f64,
    pub kurtosis: f64,
}

/// Comparison settings echoed into the report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub warmup_fraction: f64,
    pub confidence: f64,
    pub measured_runs: usize,
    pub simulated_runs: usize,
}

/// Full comparison of a measured against a simulated run set.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub measured: SourceSummary,
    pub simulated: SourceSummary,
    pub percentile_table: Vec<PercentileRow>,
    /// Interval on (measured mean - simulated mean), in milliseconds.
    pub mean_difference: Interval,
    pub ks_distance: f64,
    pub cullen_frey: Vec<CullenFreyPoint>,
    pub verdict: Verdict,
    pub metadata: ReportMetadata,
}

/// Settings for `compare`. `warmup_fraction` is an echo of the trimming
/// already applied upstream; `extra_percentiles` appends rows after the
/// four fixed ones.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub confidence: f64,
    pub tolerances: ShapeTolerances,
    pub warmup_fraction: f64,
    pub extra_percentiles: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            confidence: DEFAULT_CONFIDENCE,
            tolerances: ShapeTolerances::default(),
            warmup_fraction: crate::sim::DEFAULT_WARMUP_FRACTION,
            extra_percentiles: Vec::new(),
        }
    }
}

/// Builds the full validation report for two run sets whose warmup has
/// already been trimmed. Per-source moments and ECDFs are computed on the
/// pooled values; percentile intervals come from `stats::percentile_ci`.
pub fn compare(
    measured_runs: &[Sample],
    simulated_runs: &[Sample],
    config: &CompareConfig,
) -> Result<ValidationReport> {
    if measured_runs.is_empty() {
        return Err(Error::Input("measured side has no runs".into()));
    }
    if simulated_runs.is_empty() {
        return Err(Error::Input("simulated side has no runs".into()));
    }
    let measured_pool = pool(measured_runs);
    let simulated_pool = pool(simulated_runs);
    let measured_moments = stats::moments(&measured_pool)?;
    let simulated_moments = stats::moments(&simulated_pool)?;

    let mut percentile_table = Vec::new();
    for &p in REPORT_PERCENTILES.iter().chain(config.extra_percentiles.iter()) {
        percentile_table.push(PercentileRow {
            percentile: p,
            measured: stats::percentile_ci(measured_runs, p, config.confidence)?,
            simulated: stats::percentile_ci(simulated_runs, p, config.confidence)?,
        });
    }

    let mean_difference =
        mean_difference_interval(measured_runs, simulated_runs, config.confidence)?;
    let measured_ecdf = stats::ecdf(&measured_pool);
    let simulated_ecdf = stats::ecdf(&simulated_pool);
    let distance = ks_distance(&measured_ecdf, &simulated_ecdf);
    let verdict = shape_verdict(&measured_moments, &simulated_moments, config.tolerances);

    Ok(ValidationReport {
        cullen_frey: vec![
            cullen_frey_point("measured", &measured_moments),
            cullen_frey_point("simulated", &simulated_moments),
        ],
        measured: SourceSummary {
            source: "measured".into(),
            runs: measured_runs.len(),
            pooled_n: measured_pool.len(),
            moments: measured_moments,
            ecdf: measured_ecdf,
        },
        simulated: SourceSummary {
            source: "simulated".into(),
            runs: simulated_runs.len(),
            pooled_n: simulated_pool.len(),
            moments: simulated_moments,
            ecdf: simulated_ecdf,
        },
        percentile_table,
        mean_difference,
        ks_distance: distance,
        verdict,
        metadata: ReportMetadata {
            warmup_fraction: config.warmup_fraction,
            confidence: config.confidence,
            measured_runs: measured_runs.len(),
            simulated_runs: simulated_runs.len(),
        },
    })
}

fn cullen_frey_point(source: &str, moments: &Moments) -> CullenFreyPoint {
    CullenFreyPoint {
        source: source.into(),
        skewness_squared: moments.skewness * moments.skewness,
        kurtosis: moments.kurtosis,
    }
}

fn pool(runs: &[Sample]) -> Sample {
    let values: Vec<f64> = runs.iter().flat_map(|r| r.values().iter().copied()).collect();
    Sample::new(values).expect("runs are non-empty by construction")
}

/// Seed tag for the mean-difference bootstrap; shared by both sides so that
/// swapping sides reuses each side's resampling stream.
const DIFF_SEED_TAG: f64 = -2.0;

/// Interval on the difference of means, measured minus simulated. With at
/// least two runs per side this is Welch's t interval over per-run means;
/// when either side has a single run, both sides fall back to a paired,
/// seeded percentile bootstrap over their pooled values.
fn mean_difference_interval(
    measured: &[Sample],
    simulated: &[Sample],
    confidence: f64,
) -> Result<Interval> {
    stats::check_confidence(confidence)?;
    if measured.len() < 2 || simulated.len() < 2 {
        return Ok(bootstrap_difference(measured, simulated, confidence));
    }
    let m_means: Vec<f64> = measured.iter().map(|r| mean_of(r.values())).collect();
    let s_means: Vec<f64> = simulated.iter().map(|r| mean_of(r.values())).collect();
    let diff = mean_of(&m_means) - mean_of(&s_means);
    let k_m = m_means.len() as f64;
    let k_s = s_means.len() as f64;
    let a = sample_variance(&m_means, mean_of(&m_means)) / k_m;
    let b = sample_variance(&s_means, mean_of(&s_means)) / k_s;
    let se = (a + b).sqrt();
    if se == 0.0 {
        return Ok(Interval {
            lower: diff,
            upper: diff,
            confidence,
            method: CiMethod::AcrossRunsT,
        });
    }
    // Welch-Satterthwaite degrees of freedom
    let df = (a + b) * (a + b) / (a * a / (k_m - 1.0) + b * b / (k_s - 1.0));
    let t = stats::student_t_quantile(df, 0.5 + confidence / 2.0);
    Ok(Interval {
        lower: diff - t * se,
        upper: diff + t * se,
        confidence,
        method: CiMethod::AcrossRunsT,
    })
}

fn bootstrap_difference(measured: &[Sample], simulated: &[Sample], confidence: f64) -> Interval {
    let m_values: Vec<f64> = measured.iter().flat_map(|r| r.values().to_vec()).collect();
    let s_values: Vec<f64> = simulated.iter().flat_map(|r| r.values().to_vec()).collect();
    let mut m_rng = ChaCha8Rng::seed_from_u64(bootstrap_seed(&m_values, DIFF_SEED_TAG));
    let mut s_rng = ChaCha8Rng::seed_from_u64(bootstrap_seed(&s_values, DIFF_SEED_TAG));
    let mut diffs = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let m_mean = resampled_mean(&m_values, &mut m_rng);
        let s_mean = resampled_mean(&s_values, &mut s_rng);
        diffs.push(m_mean - s_mean);
    }
    diffs.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    Interval {
        lower: percentile_sorted(&diffs, 100.0 * (alpha / 2.0)),
        upper: percentile_sorted(&diffs, 100.0 * (1.0 - alpha / 2.0)),
        confidence,
        method: CiMethod::BootstrapPercentile,
    }
}

fn resampled_mean(values: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for _ in 0..n {
        sum += values[rng.gen_range(0..n)];
    }
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(values: &[f64]) -> Sample {
        Sample::new(values.to_vec()).unwrap()
    }

    fn moments_of(values: &[f64]) -> Moments {
        stats::moments(&sample(values)).unwrap()
    }

    #[test]
    fn ks_matches_hand_values() {
        let a = stats::ecdf(&sample(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(ks_distance(&a, &a), 0.0);

        let b = stats::ecdf(&sample(&[1.0, 2.0, 3.0, 10.0]));
        assert_eq!(ks_distance(&a, &b), 0.25);
        assert_eq!(ks_distance(&b, &a), 0.25);

        let low = stats::ecdf(&sample(&[1.0, 2.0]));
        let high = stats::ecdf(&sample(&[3.0, 4.0]));
        assert_eq!(ks_distance(&low, &high), 1.0);
    }

    #[test]
    fn verdict_thresholds_behave_as_documented() {
        let base = moments_of(&[1.0, 2.0, 2.0, 3.0, 7.0]);
        let equal = shape_verdict(&base, &base, ShapeTolerances::default());
        assert_eq!(equal.verdict, VerdictKind::ShapeValid);
        assert_eq!(equal.skewness_diff, 0.0);

        let mut near = base;
        near.skewness += 0.4;
        near.kurtosis *= 1.1;
        let verdict = shape_verdict(&base, &near, ShapeTolerances::default());
        assert_eq!(verdict.verdict, VerdictKind::ShapeValid);
        assert!(verdict.skewness_within_tol && verdict.kurtosis_within_tol);

        let mut far = base;
        far.skewness += 2.0;
        let verdict = shape_verdict(&base, &far, ShapeTolerances::default());
        assert_eq!(verdict.verdict, VerdictKind::ShapeDivergent);
        assert!(!verdict.skewness_within_tol);
    }

    #[test]
    fn self_comparison_is_shape_valid_with_zero_distance() {
        let runs = vec![
            sample(&[10.0, 12.0, 13.0, 15.0, 30.0]),
            sample(&[11.0, 12.5, 14.0, 16.0, 28.0]),
        ];
        let report = compare(&runs, &runs, &CompareConfig::default()).unwrap();
        assert_eq!(report.verdict.verdict, VerdictKind::ShapeValid);
        assert_eq!(report.ks_distance, 0.0);
        assert_eq!(report.verdict.skewness_diff, 0.0);
        assert_eq!(report.verdict.kurtosis_rel_diff, 0.0);
        // the mean difference is exactly zero-centered on self-comparison
        assert_eq!(report.mean_difference.lower, -report.mean_difference.upper);
        assert_eq!(report.percentile_table.len(), 4);
        let rows: Vec<f64> = report.percentile_table.iter().map(|r| r.percentile).collect();
        assert_eq!(rows, REPORT_PERCENTILES);
        assert_eq!(report.metadata.measured_runs, 2);
        assert_eq!(report.cullen_frey.len(), 2);
    }

    #[test]
    fn compare_rejects_empty_sides() {
        let runs = vec![sample(&[1.0, 2.0, 3.0])];
        assert!(matches!(
            compare(&[], &runs, &CompareConfig::default()),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            compare(&runs, &[], &CompareConfig::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn extra_percentile_rows_append_after_the_fixed_four() {
        let runs = vec![
            sample(&[10.0, 12.0, 13.0, 15.0, 30.0]),
            sample(&[11.0, 12.5, 14.0, 16.0, 28.0]),
        ];
        let config = CompareConfig {
            extra_percentiles: vec![75.0],
            ..CompareConfig::default()
        };
        let report = compare(&runs, &runs, &config).unwrap();
        let rows: Vec<f64> = report.percentile_table.iter().map(|r| r.percentile).collect();
        assert_eq!(rows, vec![50.0, 95.0, 99.0, 99.9, 75.0]);
    }

    #[test]
    fn swapping_sides_negates_the_mean_difference_exactly() {
        let measured = vec![
            sample(&[20.0, 22.0, 25.0, 30.0]),
            sample(&[21.0, 23.0, 24.0, 29.0]),
            sample(&[19.0, 22.5, 26.0, 31.0]),
        ];
        let simulated = vec![
            sample(&[16.0, 18.0, 21.0, 26.0]),
            sample(&[17.0, 19.0, 20.0, 25.0]),
        ];
        let config = CompareConfig::default();
        let forward = compare(&measured, &simulated, &config).unwrap();
        let reverse = compare(&simulated, &measured, &config).unwrap();

        assert_eq!(forward.mean_difference.lower, -reverse.mean_difference.upper);
        assert_eq!(forward.mean_difference.upper, -reverse.mean_difference.lower);
        assert_eq!(forward.ks_distance, reverse.ks_distance);
        for (f, r) in forward
            .percentile_table
            .iter()
            .zip(reverse.percentile_table.iter())
        {
            assert_eq!(f.measured, r.simulated);
            assert_eq!(f.simulated, r.measured);
        }
    }

    #[test]
    fn single_run_sides_use_the_bootstrap_difference() {
        let measured = vec![sample(&[20.0, 22.0, 25.0, 30.0, 21.0, 23.0])];
        let simulated = vec![sample(&[16.0, 18.0, 21.0, 26.0, 17.0, 19.0])];
        let config = CompareConfig::default();
        let forward = compare(&measured, &simulated, &config).unwrap();
        assert_eq!(forward.mean_difference.method, CiMethod::BootstrapPercentile);
        assert!(forward.mean_difference.lower <= forward.mean_difference.upper);

        let reverse = compare(&simulated, &measured, &config).unwrap();
        assert!((forward.mean_difference.lower + reverse.mean_difference.upper).abs() < 1e-9);
        assert!((forward.mean_difference.upper + reverse.mean_difference.lower).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn loosening_tolerances_never_flips_valid_to_divergent(
            skew_a in -2.0f64..2.0,
            skew_b in -2.0f64..2.0,
            kurt_a in 1.0f64..9.0,
            kurt_b in 1.0f64..9.0,
            skew_tol in 0.01f64..3.0,
            kurt_tol in 0.01f64..2.0,
            loosen in 1.0f64..4.0,
        ) {
            let a = Moments { mean: 1.0, median: 1.0, skewness: skew_a, kurtosis: kurt_a, n: 10 };
            let b = Moments { mean: 1.0, median: 1.0, skewness: skew_b, kurtosis: kurt_b, n: 10 };
            let tight = shape_verdict(&a, &b, ShapeTolerances { skew_tol, kurt_rel_tol: kurt_tol });
            let loose = shape_verdict(&a, &b, ShapeTolerances {
                skew_tol: skew_tol * loosen,
                kurt_rel_tol: kurt_tol * loosen,
            });
            if tight.verdict == VerdictKind::ShapeValid {
                prop_assert_eq!(loose.verdict, VerdictKind::ShapeValid);
            }
        }

        #[test]
        fn ks_is_symmetric_and_bounded(
            a in proptest::collection::vec(0.1f64..50.0, 1..40),
            b in proptest::collection::vec(0.1f64..50.0, 1..40),
        ) {
            let ea = stats::ecdf(&Sample::new(a).unwrap());
            let eb = stats::ecdf(&Sample::new(b).unwrap());
            let d_ab = ks_distance(&ea, &eb);
            let d_ba = ks_distance(&eb, &ea);
            prop_assert_eq!(d_ab, d_ba);
            prop_assert!((0.0..=1.0).contains(&d_ab));
        }
    }
}
