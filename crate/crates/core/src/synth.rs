//! Deterministic synthetic dataset generation.
//!
//! Draws per-model truncated-normal samples around published model-level
//! means, then recenters each field by iterated mean-shift-and-clamp so the
//! sample means land on the targets at desk scale. Everything is driven by a
//! SplitMix64 stream, so a spec plus seed pins the output bytes exactly.

use crate::dataset::{DatasetFile, DatasetError};
use crate::scoring::Observation;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("spec has no model profiles")]
    NoProfiles,
    #[error("scenarios_per_model must be >= 1")]
    NoScenarios,
    #[error("profile `{model}`: {problem}")]
    InvalidProfile { model: String, problem: String },
    #[error("sampling bounds invalid: low {low} must be < high {high}")]
    InvalidBounds { low: f64, high: f64 },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// SplitMix64 generator (Vigna). Tiny state, full 64-bit period, and easily
/// reproduced bit-for-bit in any language.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        const DEN: f64 = (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 / DEN
    }
}

/// One Gaussian draw via Box-Muller (cosine branch only, two uniforms per
/// draw, so the stream layout stays trivial to reason about).
fn standard_normal(rng: &mut SplitMix64) -> f64 {
    let u1 = 1.0 - rng.next_f64(); // (0, 1]
    let u2 = rng.next_f64();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Truncated-normal draw by rejection, capped at 1000 attempts after which
/// the (clamped) mean is returned. `sd == 0` short-circuits to the clamped
/// mean without consuming randomness.
pub fn sample_truncated_normal(
    rng: &mut SplitMix64,
    mean: f64,
    sd: f64,
    low: f64,
    high: f64,
) -> Result<f64, SynthError> {
    if low.is_nan() || high.is_nan() || low >= high {
        return Err(SynthError::InvalidBounds { low, high });
    }
    if sd == 0.0 {
        return Ok(mean.clamp(low, high));
    }
    for _ in 0..1000 {
        let draw = mean + sd * standard_normal(rng);
        if (low..=high).contains(&draw) {
            return Ok(draw);
        }
    }
    Ok(mean.clamp(low, high))
}

/// Target moments for one synthetic model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelProfile {
    pub model_id: String,
    pub mean_utility: f64,
    pub mean_entropy: f64,
    pub mean_integration: f64,
    pub mean_reflective: f64,
    pub sd_utility: f64,
    pub sd_entropy: f64,
    pub sd_integration: f64,
    pub sd_reflective: f64,
}

impl ModelProfile {
    fn validate(&self) -> Result<(), SynthError> {
        let invalid = |problem: String| SynthError::InvalidProfile {
            model: self.model_id.clone(),
            problem,
        };
        if self.model_id.is_empty() {
            return Err(invalid("model id is empty".into()));
        }
        for (name, mean) in [
            ("utility", self.mean_utility),
            ("entropy", self.mean_entropy),
            ("integration", self.mean_integration),
            ("reflective", self.mean_reflective),
        ] {
            if !(0.0..=1.0).contains(&mean) || !mean.is_finite() {
                return Err(invalid(format!("mean {name} = {mean} outside [0, 1]")));
            }
        }
        for (name, sd) in [
            ("utility", self.sd_utility),
            ("entropy", self.sd_entropy),
            ("integration", self.sd_integration),
            ("reflective", self.sd_reflective),
        ] {
            if !sd.is_finite() || sd < 0.0 {
                return Err(invalid(format!("sd {name} = {sd} is negative")));
            }
        }
        Ok(())
    }
}

/// Full generation request: profiles, scenario count, seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub profiles: Vec<ModelProfile>,
    pub scenarios_per_model: usize,
    pub seed: u64,
}

/// Entropy draws keep a small strictly-positive floor so every synthetic
/// observation produces a strictly positive gain under nonzero damping.
const ENTROPY_FLOOR: f64 = 0.001;

/// Seed of the built-in calibrated preset.
pub const PAPER_PRESET_SEED: u64 = 42;

impl SyntheticSpec {
    /// Built-in preset calibrated to the published model-level means, with
    /// per-model dispersion at half the published pooled standard deviations.
    pub fn paper_preset(seed: u64) -> Self {
        let profile = |model_id: &str, u: f64, s: f64, i: f64, c: f64| ModelProfile {
            model_id: model_id.to_string(),
            mean_utility: u,
            mean_entropy: s,
            mean_integration: i,
            mean_reflective: c,
            sd_utility: 0.0090,
            sd_entropy: 0.0257,
            sd_integration: 0.0310,
            sd_reflective: 0.03165,
        };
        Self {
            profiles: vec![
                profile("DeepSeek-V3", 0.9695, 0.0517, 0.8594, 0.9530),
                profile("GPT-4o", 0.9845, 0.0440, 0.9597, 0.9482),
                profile("Gemini-1.5", 0.9545, 0.1480, 0.8981, 0.7990),
                profile("Grok-3", 0.9895, 0.0120, 0.7968, 0.9069),
            ],
            scenarios_per_model: 20,
            seed,
        }
    }

    /// Generic preset with `models` synthetic profiles spread over a range of
    /// utility/entropy levels.
    pub fn generic(models: usize, scenarios_per_model: usize, seed: u64) -> Self {
        let profiles = (0..models)
            .map(|k| {
                let t = (k + 1) as f64 / (models + 1) as f64;
                ModelProfile {
                    model_id: format!("model-{:02}", k + 1),
                    mean_utility: 0.90 + 0.08 * t,
                    mean_entropy: 0.02 + 0.12 * (1.0 - t),
                    mean_integration: 0.80 + 0.10 * t,
                    mean_reflective: 0.85 + 0.05 * (1.0 - t),
                    sd_utility: 0.0090,
                    sd_entropy: 0.0257,
                    sd_integration: 0.0310,
                    sd_reflective: 0.03165,
                }
            })
            .collect();
        Self {
            profiles,
            scenarios_per_model,
            seed,
        }
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.profiles.is_empty() {
            return Err(SynthError::NoProfiles);
        }
        if self.scenarios_per_model == 0 {
            return Err(SynthError::NoScenarios);
        }
        for profile in &self.profiles {
            profile.validate()?;
        }
        Ok(())
    }
}

/// Shift all values by (target - mean), clamp back into bounds, repeat until
/// the sample mean sits on the target. Converges as long as the target is
/// reachable inside [low, high].
fn recenter(values: &mut [f64], target: f64, low: f64, high: f64) {
    for _ in 0..64 {
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let shift = target - mean;
        if shift.abs() < 1e-12 {
            break;
        }
        for v in values.iter_mut() {
            *v = (*v + shift).clamp(low, high);
        }
    }
}

/// Generate the full observation table for a spec. Deterministic: identical
/// specs yield identical datasets, byte for byte once serialized.
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<DatasetFile, SynthError> {
    spec.validate()?;
    let mut rng = SplitMix64::new(spec.seed);
    let n = spec.scenarios_per_model;
    let width = n.to_string().len().max(2);

    let mut observations = Vec::with_capacity(spec.profiles.len() * n);
    for profile in &spec.profiles {
        let fields = [
            (profile.mean_utility, profile.sd_utility, 0.0),
            (profile.mean_entropy, profile.sd_entropy, ENTROPY_FLOOR),
            (profile.mean_integration, profile.sd_integration, 0.0),
            (profile.mean_reflective, profile.sd_reflective, 0.0),
        ];
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(4);
        for &(mean, sd, low) in &fields {
            let low = low.min(mean); // keep degenerate means reachable
            let mut column = Vec::with_capacity(n);
            for _ in 0..n {
                column.push(sample_truncated_normal(&mut rng, mean, sd, low, 1.0)?);
            }
            recenter(&mut column, mean, low, 1.0);
            columns.push(column);
        }
        #[allow(clippy::needless_range_loop)]
        for scenario in 0..n {
            observations.push(Observation {
                model_id: profile.model_id.clone(),
                scenario_id: format!("s{:0width$}", scenario + 1, width = width),
                utility: columns[0][scenario],
                entropy: columns[1][scenario],
                integration: columns[2][scenario],
                reflective: columns[3][scenario],
            });
        }
    }
    Ok(DatasetFile::from_observations(observations)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::{score_dataset, CoefficientSet};

    // Independent reference implementation used only by tests.
    fn splitmix64_reference(state: &mut u64) -> u64 {
        *state = state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    #[test]
    fn splitmix_matches_published_reference() {
        // First output for seed 0, as published with the algorithm.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220A8397B1DCDAF);

        let mut state = 12345u64;
        let mut rng = SplitMix64::new(12345);
        for _ in 0..100 {
            assert_eq!(rng.next_u64(), splitmix64_reference(&mut state));
        }
    }

    #[test]
    fn splitmix_streams_are_seed_determined() {
        let a: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..10).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SplitMix64::new(7);
            (0..10).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        let c = SplitMix64::new(1).next_u64();
        let d = SplitMix64::new(2).next_u64();
        assert_ne!(c, d);
    }

    #[test]
    fn next_f64_is_unit_interval() {
        let mut rng = SplitMix64::new(99);
        for _ in 0..10_000 {
            let v = rng.next_f64();
            assert!((0.0..1.0).contains(&v));
        }
    }

    #[test]
    fn truncated_normal_degenerate_and_clamped() {
        let mut rng = SplitMix64::new(1);
        assert_eq!(sample_truncated_normal(&mut rng, 0.5, 0.0, 0.0, 1.0).unwrap(), 0.5);
        // Mean far outside the bounds: rejection exhausts and clamps.
        let v = sample_truncated_normal(&mut rng, 1.5, 0.01, 0.0, 1.0).unwrap();
        assert_eq!(v, 1.0);
        assert!(sample_truncated_normal(&mut rng, 0.5, 0.1, 1.0, 0.0).is_err());
    }

    #[test]
    fn truncated_normal_mean_is_close() {
        let mut rng = SplitMix64::new(2024);
        let n = 10_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_truncated_normal(&mut rng, 0.9, 0.05, 0.0, 1.0).unwrap();
        }
        let mean = sum / n as f64;
        // Truncation at 1.0 biases slightly low; 0.01 absorbs it.
        assert!((mean - 0.9).abs() < 0.01, "mean = {mean}");
    }

    #[test]
    fn paper_preset_shape_and_calibration() {
        let spec = SyntheticSpec::paper_preset(PAPER_PRESET_SEED);
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.observations.len(), 80);

        for profile in &spec.profiles {
            let rows: Vec<_> = ds
                .observations
                .iter()
                .filter(|o| o.model_id == profile.model_id)
                .collect();
            assert_eq!(rows.len(), 20);
            let mean = |f: fn(&Observation) -> f64| {
                rows.iter().map(|o| f(o)).sum::<f64>() / rows.len() as f64
            };
            assert!((mean(|o| o.utility) - profile.mean_utility).abs() < 0.01);
            assert!((mean(|o| o.entropy) - profile.mean_entropy).abs() < 0.01);
            assert!((mean(|o| o.integration) - profile.mean_integration).abs() < 0.01);
            assert!((mean(|o| o.reflective) - profile.mean_reflective).abs() < 0.01);
        }
        for obs in &ds.observations {
            for v in [obs.utility, obs.entropy, obs.integration, obs.reflective] {
                assert!((0.0..=1.0).contains(&v));
            }
            assert!(obs.entropy > 0.0);
        }
    }

    #[test]
    fn paper_preset_scores_reproduce_headline_numbers() {
        let ds = generate_dataset(&SyntheticSpec::paper_preset(PAPER_PRESET_SEED)).unwrap();
        let records = score_dataset(&ds.observations, &CoefficientSet::default()).unwrap();
        assert!(records.iter().all(|r| r.gain > 0.0));
        let mean_gain = records.iter().map(|r| r.gain).sum::<f64>() / records.len() as f64;
        assert!((mean_gain - 0.0299).abs() < 0.01, "mean gain = {mean_gain}");

        // Ordering of mean generalized score across models.
        let mean_estar = |model: &str| {
            let rows: Vec<_> = records
                .iter()
                .filter(|r| r.observation.model_id == model)
                .collect();
            rows.iter().map(|r| r.generalized).sum::<f64>() / rows.len() as f64
        };
        let grok = mean_estar("Grok-3");
        let gpt = mean_estar("GPT-4o");
        let deepseek = mean_estar("DeepSeek-V3");
        let gemini = mean_estar("Gemini-1.5");
        assert!(grok > gpt && gpt > deepseek && deepseek > gemini);
    }

    #[test]
    fn degenerate_spec_yields_exact_profile_row() {
        let spec = SyntheticSpec {
            profiles: vec![ModelProfile {
                model_id: "solo".into(),
                mean_utility: 0.9,
                mean_entropy: 0.1,
                mean_integration: 0.8,
                mean_reflective: 0.7,
                sd_utility: 0.0,
                sd_entropy: 0.0,
                sd_integration: 0.0,
                sd_reflective: 0.0,
            }],
            scenarios_per_model: 1,
            seed: 5,
        };
        let ds = generate_dataset(&spec).unwrap();
        assert_eq!(ds.observations.len(), 1);
        let o = &ds.observations[0];
        assert_eq!((o.utility, o.entropy, o.integration, o.reflective), (0.9, 0.1, 0.8, 0.7));
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = SyntheticSpec::paper_preset(7);
        let a = generate_dataset(&spec).unwrap().to_csv_string();
        let b = generate_dataset(&spec).unwrap().to_csv_string();
        assert_eq!(a, b);
        let c = generate_dataset(&SyntheticSpec::paper_preset(8)).unwrap().to_csv_string();
        assert_ne!(a, c);
    }

    #[test]
    fn generic_spec_counts() {
        let ds = generate_dataset(&SyntheticSpec::generic(2, 3, 1)).unwrap();
        assert_eq!(ds.observations.len(), 6);
        let models: std::collections::BTreeSet<_> =
            ds.observations.iter().map(|o| o.model_id.clone()).collect();
        assert_eq!(models.len(), 2);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = SyntheticSpec::generic(1, 1, 0);
        spec.profiles.clear();
        assert!(matches!(generate_dataset(&spec), Err(SynthError::NoProfiles)));

        let mut spec = SyntheticSpec::generic(1, 1, 0);
        spec.scenarios_per_model = 0;
        assert!(matches!(generate_dataset(&spec), Err(SynthError::NoScenarios)));

        let mut spec = SyntheticSpec::generic(1, 1, 0);
        spec.profiles[0].mean_utility = 1.5;
        assert!(matches!(generate_dataset(&spec), Err(SynthError::InvalidProfile { .. })));
    }
}
