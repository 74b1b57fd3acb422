//! Statistical kernel for response-time analysis: warmup trimming, empirical
//! CDFs, interpolated quantiles, shape moments, and confidence intervals.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Resamples drawn by the single-run bootstrap fallback.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Response-time sample in milliseconds: non-empty, finite, strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Input("empty sample".into()));
        }
        if let Some(v) = values.iter().copied().find(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Input(format!(
                "sample values must be positive and finite, got {v}"
            )));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Drops the first ceil(fraction * N) records, keeping arrival order.
///
/// The drop count snaps to the nearest integer when fraction * N is within
/// 1e-9 of it, so a 0.05 fraction of 5000 trims exactly 250 instead of
/// tripping over float representation error. For fraction < 1 the last
/// record is always kept.
pub fn trim_warmup<T>(records: &[T], fraction: f64) -> Result<&[T]> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Parameter(format!(
            "warmup fraction must be in [0, 1), got {fraction}"
        )));
    }
    let n = records.len();
    let raw = fraction * n as f64;
    let drop = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    } as usize;
    Ok(&records[drop.min(n.saturating_sub(1))..])
}

/// Empirical distribution function with the right-continuous convention
/// F(x) = (#values <= x) / n.
#[derive(Clone, Debug, PartialEq)]
pub struct Ecdf {
    xs: Vec<f64>,
    ps: Vec<f64>,
}

/// Builds the ECDF of a sample. Steps sit at the sorted unique values; the
/// cumulative probabilities are strictly increasing and end at exactly 1.
pub fn ecdf(sample: &Sample) -> Ecdf {
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut xs = Vec::new();
    let mut ps = Vec::new();
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        let mut j = i + 1;
        while j < n && sorted[j] == x {
            j += 1;
        }
        xs.push(x);
        ps.push(j as f64 / n as f64);
        i = j;
    }
    Ecdf { xs, ps }
}

impl Ecdf {
    /// Rebuilds an ECDF from stored step points, revalidating its invariants.
    pub fn from_parts(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ps.len() {
            return Err(Error::Input("ECDF needs matching non-empty x and p".into()));
        }
        let ascending_x = xs.windows(2).all(|w| w[0] < w[1]);
        let ascending_p = ps.windows(2).all(|w| w[0] < w[1]);
        if !ascending_x || !ascending_p || *ps.last().unwrap() != 1.0 || ps[0] <= 0.0 {
            return Err(Error::Input(
                "ECDF steps must strictly increase and end at probability 1".into(),
            ));
        }
        Ok(Ecdf { xs, ps })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.xs.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.ps[idx - 1]
        }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ps.iter().copied())
    }
}

/// Linear-interpolation quantile: with the sample sorted ascending and
/// h = (n - 1) * p / 100, returns
/// x[floor(h)] + (h - floor(h)) * (x[floor(h) + 1] - x[floor(h)]).
///
/// This is the interpolation scheme most statistics environments call
/// quantile type 7.
pub fn percentile(sample: &Sample, p: f64) -> Result<f64> {
    check_percentile(p)?;
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&sorted, p))
}

fn check_percentile(p: f64) -> Result<()> {
    if !(0.0..=100.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "percentile must be in [0, 100], got {p}"
        )));
    }
    Ok(())
}

pub(crate) fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let frac = h - h.floor();
    if frac == 0.0 || lo + 1 == n {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Shape summary of a sample. Skewness g1 = m3 / m2^1.5 and kurtosis
/// b2 = m4 / m2^2 use population (biased) central moments, the convention
/// in which a normal distribution has kurtosis 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub median: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n: usize,
}

pub fn moments(sample: &Sample) -> Result<Moments> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::Input(format!(
            "moments need at least 2 values, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = sample.values().iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in sample.values() {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return Err(Error::DegenerateSample(
            "zero variance, skewness and kurtosis are undefined".into(),
        ));
    }
    Ok(Moments {
        mean,
        median: percentile(sample, 50.0)?,
        skewness: m3 / m2.powf(1.5),
        kurtosis: m4 / (m2 * m2),
        n,
    })
}

/// How a confidence interval was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    /// Student-t interval over a per-run statistic.
    AcrossRunsT,
    /// Seeded percentile bootstrap over a single run.
    BootstrapPercentile,
}

/// Confidence interval in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
    pub method: CiMethod,
}

/// Confidence interval for the p-th percentile.
///
/// With two or more runs the percentile is computed per run and a Student-t
/// interval is taken across runs, so the interval is symmetric about the
/// mean of the per-run percentiles. With exactly one run it falls back to a
/// percentile bootstrap whose generator is seeded from the sample contents,
/// making equal inputs give equal intervals; the method field records which
/// construction produced the interval.
pub fn percentile_ci(runs: &[Sample], p: f64, confidence: f64) -> Result<Interval> {
    check_percentile(p)?;
    check_confidence(confidence)?;
    match runs {
        [] => Err(Error::Input("no runs given".into())),
        [run] => Ok(bootstrap_ci(run, confidence, p, |sorted| {
            percentile_sorted(sorted, p)
        })),
        _ => {
            let per_run: Vec<f64> = runs
                .iter()
                .map(|r| percentile(r, p))
                .collect::<Result<_>>()?;
            Ok(t_interval(&per_run, confidence))
        }
    }
}

/// Confidence interval for the mean, with the same across-run / bootstrap
/// split as `percentile_ci`.
pub fn mean_ci(runs: &[Sample], confidence: f64) -> Result<Interval> {
    check_confidence(confidence)?;
    match runs {
        [] => Err(Error::Input("no runs given".into())),
        [run] => Ok(bootstrap_ci(run, confidence, MEAN_SEED_TAG, mean_of)),
        _ => {
            let per_run: Vec<f64> = runs.iter().map(|r| mean_of(r.values())).collect();
            Ok(t_interval(&per_run, confidence))
        }
    }
}

pub(crate) fn check_confidence(confidence: f64) -> Result<()> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::Parameter(format!(
            "confidence must be in (0, 1), got {confidence}"
        )));
    }
    Ok(())
}

pub(crate) fn mean_of(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n - 1 denominator.
pub(crate) fn sample_variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

fn t_interval(per_run: &[f64], confidence: f64) -> Interval {
    let k = per_run.len() as f64;
    let mean = mean_of(per_run);
    let se = (sample_variance(per_run, mean) / k).sqrt();
    if se == 0.0 {
        return Interval {
            lower: mean,
            upper: mean,
            confidence,
            method: CiMethod::AcrossRunsT,
        };
    }
    let t = student_t_quantile(k - 1.0, 0.5 + confidence / 2.0);
    Interval {
        lower: mean - t * se,
        upper: mean + t * se,
        confidence,
        method: CiMethod::AcrossRunsT,
    }
}

/// Upper-tail Student-t quantile, found by bisecting the distribution's CDF
/// down to machine precision. Bisection on the CDF keeps the result as
/// accurate as the CDF itself rather than relying on a separate inverse.
pub(crate) fn student_t_quantile(df: f64, prob: f64) -> f64 {
    debug_assert!(df >= 1.0 && (0.5..1.0).contains(&prob));
    let dist = StudentsT::new(0.0, 1.0, df).expect("valid t parameters");
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while dist.cdf(hi) < prob {
        hi *= 2.0;
    }
    loop {
        let mid = (lo + hi) / 2.0;
        if mid <= lo || mid >= hi {
            return mid;
        }
        if dist.cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Seed tag separating the mean bootstrap stream from percentile streams,
/// which mix in their p value from [0, 100].
const MEAN_SEED_TAG: f64 = -1.0;

fn bootstrap_ci(run: &Sample, confidence: f64, seed_tag: f64, stat: impl Fn(&[f64]) -> f64) -> Interval {
    let values = run.values();
    let n = values.len();
    let mut rng = ChaCha8Rng::seed_from_u64(bootstrap_seed(values, seed_tag));
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0f64; n];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in resample.iter_mut() {
            *slot = values[rng.gen_range(0..n)];
        }
        resample.sort_by(f64::total_cmp);
        stats.push(stat(&resample));
    }
    stats.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    Interval {
        lower: percentile_sorted(&stats, 100.0 * (alpha / 2.0)),
        upper: percentile_sorted(&stats, 100.0 * (1.0 - alpha / 2.0)),
        confidence,
        method: CiMethod::BootstrapPercentile,
    }
}

/// FNV-1a over the sample bits and a tag, so every bootstrap stream is a
/// pure function of its inputs and results stay reproducible.
pub(crate) fn bootstrap_seed(values: &[f64], tag: f64) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut mix = |bits: u64| {
        for byte in bits.to_le_bytes() {
            hash = (hash ^ byte as u64).wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for &v in values {
        mix(v.to_bits());
    }
    mix(tag.to_bits());
    hash
}
