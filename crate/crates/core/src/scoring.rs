//! Per-observation stability scoring.
//!
//! Each benchmark record carries four bounded signals: task utility, scenario
//! entropy, and two internal-structure proxies (integration and reflective
//! capacity). The reduced score is the linear tradeoff `alpha*U - beta*S`.
//! The generalized score damps entropy through an internal barrier:
//! `B = gamma*I + lambda*C`, `D = 1 + B`, `E* = U - S/D`. The gain `E* - E`
//! measures how much the damping formulation recovers over the linear one.

use thiserror::Error;

/// Default tolerance when clamping slightly out-of-bound inputs.
pub const DEFAULT_BOUND_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("missing field `{field}`")]
    MissingField { field: &'static str },
    #[error("field `{field}` is not finite ({value})")]
    NonFinite { field: &'static str, value: f64 },
    #[error("field `{field}` = {value} is outside [0, 1] beyond tolerance {tolerance}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        tolerance: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoreError {
    #[error("coefficient `{name}` must be finite and non-negative, got {value}")]
    InvalidCoefficient { name: &'static str, value: f64 },
    #[error("barrier term must be non-negative, got {0}")]
    NegativeBarrier(f64),
    #[error("damping denominator must be >= 1, got {0}")]
    DenominatorBelowOne(f64),
    #[error("dataset contains no observations")]
    EmptyDataset,
    #[error("duplicate (model, scenario) key: ({model}, {scenario})")]
    DuplicateKey { model: String, scenario: String },
}

/// One validated model-scenario benchmark record.
///
/// All four numeric fields are finite and lie in `[0, 1]`; construct through
/// [`validate_observation`] or [`Observation::new`] to uphold that.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub model_id: String,
    pub scenario_id: String,
    /// Normalized beneficial task performance.
    pub utility: f64,
    /// Normalized external uncertainty / disorder.
    pub entropy: f64,
    /// Internal integration proxy (output coherence).
    pub integration: f64,
    /// Aligned reflective capacity proxy (corrective behavior).
    pub reflective: f64,
}

impl Observation {
    /// Validate and construct with the default bound tolerance.
    pub fn new(
        model_id: impl Into<String>,
        scenario_id: impl Into<String>,
        utility: f64,
        entropy: f64,
        integration: f64,
        reflective: f64,
    ) -> Result<Self, ValidationError> {
        validate_observation(
            &RawObservation {
                model_id: model_id.into(),
                scenario_id: scenario_id.into(),
                utility: Some(utility),
                entropy: Some(entropy),
                integration: Some(integration),
                reflective: Some(reflective),
            },
            DEFAULT_BOUND_TOLERANCE,
        )
    }

    /// Sort key used for canonical dataset ordering.
    pub fn key(&self) -> (&str, &str) {
        (&self.model_id, &self.scenario_id)
    }
}

/// An unvalidated record as it comes out of a parser. `None` marks a field
/// that was absent from the source row.
#[derive(Debug, Clone, Default)]
pub struct RawObservation {
    pub model_id: String,
    pub scenario_id: String,
    pub utility: Option<f64>,
    pub entropy: Option<f64>,
    pub integration: Option<f64>,
    pub reflective: Option<f64>,
}

/// Check the four numeric fields of a raw record against `[0, 1]`.
///
/// Values beyond a bound by at most `tolerance` are clamped onto the bound;
/// anything further out is rejected. NaN and infinities are always rejected.
pub fn validate_observation(
    raw: &RawObservation,
    tolerance: f64,
) -> Result<Observation, ValidationError> {
    let check = |field: &'static str, value: Option<f64>| -> Result<f64, ValidationError> {
        let v = value.ok_or(ValidationError::MissingField { field })?;
        if !v.is_finite() {
            return Err(ValidationError::NonFinite { field, value: v });
        }
        if v < -tolerance || v > 1.0 + tolerance {
            return Err(ValidationError::OutOfRange {
                field,
                value: v,
                tolerance,
            });
        }
        Ok(v.clamp(0.0, 1.0))
    };
    Ok(Observation {
        model_id: raw.model_id.clone(),
        scenario_id: raw.scenario_id.clone(),
        utility: check("utility", raw.utility)?,
        entropy: check("entropy", raw.entropy)?,
        integration: check("integration", raw.integration)?,
        reflective: check("reflective", raw.reflective)?,
    })
}

/// Weights for the reduced score (`alpha`, `beta`) and the barrier term
/// (`gamma`, `lambda`). All must be finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl Default for CoefficientSet {
    /// The benchmark protocol setting: unit utility/entropy weights and
    /// equal half-weights on the two structural proxies.
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.5,
            lambda: 0.5,
        }
    }
}

impl CoefficientSet {
    pub fn new(alpha: f64, beta: f64, gamma: f64, lambda: f64) -> Result<Self, ScoreError> {
        for (name, value) in [
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
            ("lambda", lambda),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(ScoreError::InvalidCoefficient { name, value });
            }
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            lambda,
        })
    }
}

/// Derived scores for one observation under a coefficient setting.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub observation: Observation,
    /// Internal barrier `gamma*I + lambda*C`.
    pub barrier: f64,
    /// Damping denominator `1 + barrier`.
    pub denominator: f64,
    /// Reduced (linear) score `alpha*U - beta*S`.
    pub reduced: f64,
    /// Generalized (entropy-damped) score `U - S/D`.
    pub generalized: f64,
    /// Stability gain `generalized - reduced`.
    pub gain: f64,
}

/// Barrier term `gamma*integration + lambda*reflective`.
pub fn barrier_term(coeffs: &CoefficientSet, integration: f64, reflective: f64) -> f64 {
    coeffs.gamma * integration + coeffs.lambda * reflective
}

/// Damping denominator `1 + barrier`. Rejects negative (or NaN) barriers.
pub fn damping_denominator(barrier: f64) -> Result<f64, ScoreError> {
    if barrier.is_nan() || barrier < 0.0 {
        return Err(ScoreError::NegativeBarrier(barrier));
    }
    Ok(1.0 + barrier)
}

/// Reduced linear score `alpha*utility - beta*entropy`.
pub fn reduced_score(coeffs: &CoefficientSet, utility: f64, entropy: f64) -> f64 {
    coeffs.alpha * utility - coeffs.beta * entropy
}

/// Generalized score `utility - entropy/denominator`.
pub fn generalized_score(utility: f64, entropy: f64, denominator: f64) -> Result<f64, ScoreError> {
    if denominator.is_nan() || denominator < 1.0 {
        return Err(ScoreError::DenominatorBelowOne(denominator));
    }
    Ok(utility - entropy / denominator)
}

/// Score a single validated observation.
pub fn score_observation(obs: &Observation, coeffs: &CoefficientSet) -> ScoreRecord {
    let barrier = barrier_term(coeffs, obs.integration, obs.reflective);
    let denominator = 1.0 + barrier;
    let reduced = reduced_score(coeffs, obs.utility, obs.entropy);
    let generalized = obs.utility - obs.entropy / denominator;
    ScoreRecord {
        observation: obs.clone(),
        barrier,
        denominator,
        reduced,
        generalized,
        gain: generalized - reduced,
    }
}

/// Score a dataset, returning records in canonical order (model id, then
/// scenario id). The output is independent of the input ordering.
pub fn score_dataset(
    observations: &[Observation],
    coeffs: &CoefficientSet,
) -> Result<Vec<ScoreRecord>, ScoreError> {
    if observations.is_empty() {
        return Err(ScoreError::EmptyDataset);
    }
    let mut sorted: Vec<&Observation> = observations.iter().collect();
    sorted.sort_by(|a, b| a.key().cmp(&b.key()));
    for pair in sorted.windows(2) {
        if pair[0].key() == pair[1].key() {
            return Err(ScoreError::DuplicateKey {
                model: pair[0].model_id.clone(),
                scenario: pair[0].scenario_id.clone(),
            });
        }
    }
    Ok(sorted
        .into_iter()
        .map(|obs| score_observation(obs, coeffs))
        .collect())
}
