//! Descriptive statistics and the special functions behind the p-values.

pub mod special;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("sample is empty")]
    EmptySample,
    #[error("sample value at index {index} is not finite ({value})")]
    NonFiniteSample { index: usize, value: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("iteration failed to converge (cap {0})")]
    NonConvergence(usize),
}

/// A non-empty vector of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    values: Vec<f64>,
}

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self, StatsError> {
        if values.is_empty() {
            return Err(StatsError::EmptySample);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(StatsError::NonFiniteSample { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Five-number style summary: mean, sample standard deviation (n-1
/// denominator, `None` for singletons), min, median, max.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveSummary {
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Summarize a sample.
///
/// Values are sorted internally before summation, so the result is identical
/// for any permutation of the input (bit-exact, not just approximately).
pub fn describe(sample: &SampleVector) -> DescriptiveSummary {
    let mut sorted = sample.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));

    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = if n >= 2 {
        let ss: f64 = sorted.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some((ss / (n - 1) as f64).sqrt())
    } else {
        None
    };
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    DescriptiveSummary {
        n,
        mean,
        sd,
        min: sorted[0],
        median,
        max: sorted[n - 1],
    }
}
