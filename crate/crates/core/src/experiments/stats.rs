//! Summary statistics used by the aggregation step.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

/// Percentile `p ∈ [0, 100]` of already sorted data, linearly interpolated
/// between closest ranks (rank `p/100·(len-1)`).
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn median(values: &[f64]) -> f64 {
    percentile_sorted(&sorted(values), 50.0)
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population standard deviation (divides by `len`).
pub fn std_dev(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / values.len() as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub best: f64,
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let s = sorted(values);
    Some(Summary {
        median: percentile_sorted(&s, 50.0),
        q1: percentile_sorted(&s, 25.0),
        q3: percentile_sorted(&s, 75.0),
        best: s[0],
        mean: mean(&s),
        std: std_dev(&s),
        count: s.len(),
    })
}

/// Bootstrap estimate for `median(a) - median(b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapCi {
    /// Difference of the sample medians.
    pub diff: f64,
    pub lo: f64,
    pub hi: f64,
    /// `(hi - lo) / 2`.
    pub half_width: f64,
}

/// Percentile bootstrap of the median difference at the given confidence level.
///
/// With `paired = true` the same resampled indices are used for both samples,
/// which requires equal lengths; this suits runs that share instances.
pub fn bootstrap_median_diff(
    a: &[f64],
    b: &[f64],
    paired: bool,
    resamples: usize,
    confidence: f64,
    seed: u64,
) -> Result<BootstrapCi> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("bootstrap needs nonempty samples".into()));
    }
    if paired && a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    if resamples == 0 || !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "bad bootstrap settings: {resamples} resamples at confidence {confidence}"
        )));
    }
    let mut r = rng::from_seed(seed);
    let mut diffs = Vec::with_capacity(resamples);
    let mut ra = vec![0.0; a.len()];
    let mut rb = vec![0.0; b.len()];
    for _ in 0..resamples {
        if paired {
            for k in 0..a.len() {
                let i = r.gen_range(0..a.len());
                ra[k] = a[i];
                rb[k] = b[i];
            }
        } else {
            ra.iter_mut().for_each(|x| *x = a[r.gen_range(0..a.len())]);
            rb.iter_mut().for_each(|x| *x = b[r.gen_range(0..b.len())]);
        }
        diffs.push(median(&ra) - median(&rb));
    }
    diffs.sort_by(f64::total_cmp);
    let tail = (1.0 - confidence) / 2.0 * 100.0;
    let lo = percentile_sorted(&diffs, tail);
    let hi = percentile_sorted(&diffs, 100.0 - tail);
    Ok(BootstrapCi { diff: median(a) - median(b), lo, hi, half_width: (hi - lo) / 2.0 })
}
