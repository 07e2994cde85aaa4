//! Paired inference: t-test, Wilcoxon signed-rank, and Pearson correlation.

use crate::stats::special::{normal_cdf, student_t_quantile, student_t_sf};
use crate::stats::{SampleVector, StatsError};
use thiserror::Error;

/// Two-sided p-values are floored at the smallest positive double instead of
/// reporting an exact zero.
const MIN_P: f64 = 5e-324;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("samples differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("sample variance is zero for `{which}`")]
    ZeroVariance { which: &'static str },
    #[error("all paired differences are zero")]
    AllZeroDifferences,
    #[error("confidence level must be in (0, 1), got {0}")]
    InvalidCiLevel(f64),
    #[error("exact mode supports at most {cap} differences, got {got}")]
    ExactModeTooLarge { cap: usize, got: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Result of a paired t-test on elementwise differences `a - b`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedTestResult {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t_statistic: f64,
    pub df: usize,
    pub p_two_sided: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
}

impl PairedTestResult {
    /// Build the test result from summary moments of the differences.
    ///
    /// This is the same computation [`paired_t_test`] performs after it has
    /// reduced the raw differences; exposing it lets published summary values
    /// be re-checked without the raw data.
    pub fn from_moments(
        n: usize,
        mean_diff: f64,
        sd_diff: f64,
        ci_level: f64,
    ) -> Result<Self, InferenceError> {
        if n < 2 {
            return Err(InferenceError::TooFewObservations { needed: 2, got: n });
        }
        if sd_diff.is_nan() || sd_diff <= 0.0 {
            return Err(InferenceError::ZeroVariance {
                which: "differences",
            });
        }
        if ci_level.is_nan() || ci_level <= 0.0 || ci_level >= 1.0 {
            return Err(InferenceError::InvalidCiLevel(ci_level));
        }
        let df = n - 1;
        let std_err = sd_diff / (n as f64).sqrt();
        let t_statistic = mean_diff / std_err;
        let p_two_sided =
            (2.0 * student_t_sf(t_statistic.abs(), df as u32)?).clamp(MIN_P, 1.0);
        let t_crit = student_t_quantile(0.5 * (1.0 + ci_level), df as u32)?;
        let half_width = t_crit * std_err;
        Ok(Self {
            n,
            mean_diff,
            sd_diff,
            t_statistic,
            df,
            p_two_sided,
            ci_low: mean_diff - half_width,
            ci_high: mean_diff + half_width,
            ci_level,
        })
    }
}

/// Two-sided paired t-test on `a - b` with a confidence interval for the
/// mean difference.
pub fn paired_t_test(
    a: &SampleVector,
    b: &SampleVector,
    ci_level: f64,
) -> Result<PairedTestResult, InferenceError> {
    let diffs = paired_differences(a, b)?;
    let n = diffs.len();
    if n < 2 {
        return Err(InferenceError::TooFewObservations { needed: 2, got: n });
    }
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let ss: f64 = diffs.iter().map(|d| (d - mean) * (d - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    PairedTestResult::from_moments(n, mean, sd, ci_level)
}

/// Result of a Wilcoxon signed-rank test.
#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// Number of nonzero differences actually ranked.
    pub n_effective: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub z_statistic: f64,
    pub p_two_sided: f64,
}

/// Wilcoxon signed-rank test on paired samples, normal approximation.
///
/// Zero differences are discarded; tied absolute differences share their
/// average rank and the usual tie correction shrinks the variance. The z
/// statistic is `(min(W+, W-) - mu)/sigma` with no continuity correction,
/// and the two-sided p-value is `2 Phi(z)`.
pub fn wilcoxon_signed_rank(
    a: &SampleVector,
    b: &SampleVector,
) -> Result<WilcoxonResult, InferenceError> {
    let diffs: Vec<f64> = paired_differences(a, b)?
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(InferenceError::AllZeroDifferences);
    }
    let n = diffs.len();
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());

    let mut w_plus = 0.0;
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            w_plus += r;
        }
    }
    let total = n as f64 * (n as f64 + 1.0) / 2.0;
    let w_minus = total - w_plus;

    let mu = n as f64 * (n as f64 + 1.0) / 4.0;
    let mut variance = n as f64 * (n as f64 + 1.0) * (2.0 * n as f64 + 1.0) / 24.0;
    variance -= tie_correction(&ranks) / 48.0;

    let z_statistic = (w_plus.min(w_minus) - mu) / variance.sqrt();
    let p_two_sided = (2.0 * normal_cdf(z_statistic)).clamp(MIN_P, 1.0);
    Ok(WilcoxonResult {
        n_effective: n,
        w_plus,
        w_minus,
        z_statistic,
        p_two_sided,
    })
}

/// Cap on the exact-enumeration Wilcoxon mode (2^n sign assignments).
pub const WILCOXON_EXACT_CAP: usize = 12;

/// Exact two-sided Wilcoxon p-value by enumerating all sign assignments.
///
/// Testing oracle for small samples; `p = 2 min(P(W+ <= w), P(W+ >= w))`
/// capped at 1. Limited to [`WILCOXON_EXACT_CAP`] nonzero differences.
pub fn wilcoxon_exact_p(a: &SampleVector, b: &SampleVector) -> Result<f64, InferenceError> {
    let diffs: Vec<f64> = paired_differences(a, b)?
        .into_iter()
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Err(InferenceError::AllZeroDifferences);
    }
    let n = diffs.len();
    if n > WILCOXON_EXACT_CAP {
        return Err(InferenceError::ExactModeTooLarge {
            cap: WILCOXON_EXACT_CAP,
            got: n,
        });
    }
    let ranks = average_ranks(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let observed: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();

    let mut at_or_below = 0u64;
    let mut at_or_above = 0u64;
    let total_assignments = 1u64 << n;
    for mask in 0..total_assignments {
        let mut w = 0.0;
        for (bit, r) in ranks.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                w += r;
            }
        }
        // Tolerance dodges rank-sum rounding when ties make ranks fractional.
        if w <= observed + 1e-9 {
            at_or_below += 1;
        }
        if w >= observed - 1e-9 {
            at_or_above += 1;
        }
    }
    let p_lo = at_or_below as f64 / total_assignments as f64;
    let p_hi = at_or_above as f64 / total_assignments as f64;
    Ok((2.0 * p_lo.min(p_hi)).min(1.0))
}

/// Result of a Pearson product-moment correlation test.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub n: usize,
    pub r: f64,
    pub t_statistic: f64,
    pub df: usize,
    pub p_two_sided: f64,
    /// Set when |r| = 1, where the t statistic degenerates.
    pub degenerate: bool,
}

/// Pearson correlation with a two-sided p-value from the t transform
/// `t = r sqrt(n-2) / sqrt(1 - r^2)`.
pub fn pearson_correlation(
    x: &SampleVector,
    y: &SampleVector,
) -> Result<CorrelationResult, InferenceError> {
    if x.len() != y.len() {
        return Err(InferenceError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(InferenceError::TooFewObservations { needed: 3, got: n });
    }
    let mean_x = x.values().iter().sum::<f64>() / n as f64;
    let mean_y = y.values().iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&xv, &yv) in x.values().iter().zip(y.values()) {
        let dx = xv - mean_x;
        let dy = yv - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(InferenceError::ZeroVariance { which: "x" });
    }
    if syy == 0.0 {
        return Err(InferenceError::ZeroVariance { which: "y" });
    }
    // Single-sqrt form: exact linear relations with nice sums come out as
    // r = 1.0 on the nose instead of 1 - epsilon.
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = n - 2;
    if r.abs() == 1.0 {
        return Ok(CorrelationResult {
            n,
            r,
            t_statistic: f64::INFINITY.copysign(r),
            df,
            p_two_sided: 0.0,
            degenerate: true,
        });
    }
    let t_statistic = r * (df as f64).sqrt() / (1.0 - r * r).sqrt();
    let p_two_sided = (2.0 * student_t_sf(t_statistic.abs(), df as u32)?).clamp(MIN_P, 1.0);
    Ok(CorrelationResult {
        n,
        r,
        t_statistic,
        df,
        p_two_sided,
        degenerate: false,
    })
}

fn paired_differences(a: &SampleVector, b: &SampleVector) -> Result<Vec<f64>, InferenceError> {
    if a.len() != b.len() {
        return Err(InferenceError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| x - y)
        .collect())
}

/// Ranks of `values` (1-based), averaging over ties.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).expect("finite values"));

    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Ranks start..end (1-based) share their average.
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Sum of `t^3 - t` over tie groups, expressed through the shared ranks.
fn tie_correction(ranks: &[f64]) -> f64 {
    let mut sorted = ranks.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ranks"));
    let mut correction = 0.0;
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end] == sorted[start] {
            end += 1;
        }
        let t = (end - start) as f64;
        correction += t * t * t - t;
        start = end;
    }
    correction
}
