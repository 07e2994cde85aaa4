//! Coefficient sensitivity sweep over the damping weights.
//!
//! Every (gamma, lambda) pair rescores the whole dataset and summarizes the
//! gain distribution plus the model ordering by mean generalized score, so
//! conclusions can be checked for robustness to the coefficient choice.

use crate::scoring::{score_dataset, CoefficientSet, Observation, ScoreError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SensitivityError {
    #[error("grid levels must be non-empty")]
    EmptyLevels,
    #[error("level {0} must be finite and non-negative")]
    InvalidLevel(f64),
    #[error("ranking stability requires at least two models")]
    SingleModel,
    #[error(transparent)]
    Score(#[from] ScoreError),
}

/// Summary of one (gamma, lambda) cell of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCell {
    pub gamma: f64,
    pub lambda: f64,
    pub mean_gain: f64,
    pub min_gain: f64,
    pub mean_generalized: f64,
    /// Fraction of observations with strictly positive gain.
    pub proportion_positive: f64,
    /// Model ids ordered by mean generalized score, descending; ties broken
    /// lexicographically.
    pub model_ranking: Vec<String>,
}

/// Full sweep result: `cells` is row-major over ascending `grid_values`
/// (gamma outer, lambda inner).
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityGrid {
    pub grid_values: Vec<f64>,
    pub cells: Vec<SensitivityCell>,
}

impl SensitivityGrid {
    pub fn cell(&self, gamma_idx: usize, lambda_idx: usize) -> &SensitivityCell {
        &self.cells[gamma_idx * self.grid_values.len() + lambda_idx]
    }
}

/// Rescore the dataset under one coefficient setting and aggregate.
pub fn evaluate_cell(
    observations: &[Observation],
    gamma: f64,
    lambda: f64,
    alpha: f64,
    beta: f64,
) -> Result<SensitivityCell, SensitivityError> {
    let coeffs = CoefficientSet::new(alpha, beta, gamma, lambda)?;
    let records = score_dataset(observations, &coeffs)?;

    let n = records.len() as f64;
    let mean_gain = records.iter().map(|r| r.gain).sum::<f64>() / n;
    let min_gain = records.iter().map(|r| r.gain).fold(f64::INFINITY, f64::min);
    let mean_generalized = records.iter().map(|r| r.generalized).sum::<f64>() / n;
    let positive = records.iter().filter(|r| r.gain > 0.0).count();

    // Records are in canonical order, so per-model running sums are stable.
    let mut by_model: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for r in &records {
        let entry = by_model.entry(&r.observation.model_id).or_insert((0.0, 0));
        entry.0 += r.generalized;
        entry.1 += 1;
    }
    let mut ranking: Vec<(String, f64)> = by_model
        .into_iter()
        .map(|(model, (sum, count))| (model.to_string(), sum / count as f64))
        .collect();
    ranking.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .expect("finite means")
            .then_with(|| a.0.cmp(&b.0))
    });

    Ok(SensitivityCell {
        gamma,
        lambda,
        mean_gain,
        min_gain,
        mean_generalized,
        proportion_positive: positive as f64 / n,
        model_ranking: ranking.into_iter().map(|(m, _)| m).collect(),
    })
}

/// Evaluate every (gamma, lambda) pair over `levels`, row-major ascending.
pub fn evaluate_grid(
    observations: &[Observation],
    levels: &[f64],
    alpha: f64,
    beta: f64,
) -> Result<SensitivityGrid, SensitivityError> {
    if levels.is_empty() {
        return Err(SensitivityError::EmptyLevels);
    }
    for &level in levels {
        if !level.is_finite() || level < 0.0 {
            return Err(SensitivityError::InvalidLevel(level));
        }
    }
    let mut grid_values = levels.to_vec();
    grid_values.sort_by(|a, b| a.partial_cmp(b).expect("finite levels"));
    grid_values.dedup();

    let mut cells = Vec::with_capacity(grid_values.len() * grid_values.len());
    for &gamma in &grid_values {
        for &lambda in &grid_values {
            cells.push(evaluate_cell(observations, gamma, lambda, alpha, beta)?);
        }
    }
    Ok(SensitivityGrid { grid_values, cells })
}

/// Which sweep axis a monotonicity violation runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    Lambda,
}

/// A pair of adjacent cells where mean gain decreased.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub axis: SweepAxis,
    pub fixed_level: f64,
    pub from_level: f64,
    pub to_level: f64,
    pub from_gain: f64,
    pub to_gain: f64,
}

/// Check that mean gain is nondecreasing along both grid axes.
pub fn check_monotonicity(grid: &SensitivityGrid) -> Vec<MonotonicityViolation> {
    let k = grid.grid_values.len();
    let mut violations = Vec::new();
    for i in 0..k {
        for j in 0..k.saturating_sub(1) {
            // Lambda ascending, gamma fixed.
            let a = grid.cell(i, j);
            let b = grid.cell(i, j + 1);
            if b.mean_gain < a.mean_gain {
                violations.push(MonotonicityViolation {
                    axis: SweepAxis::Lambda,
                    fixed_level: grid.grid_values[i],
                    from_level: grid.grid_values[j],
                    to_level: grid.grid_values[j + 1],
                    from_gain: a.mean_gain,
                    to_gain: b.mean_gain,
                });
            }
            // Gamma ascending, lambda fixed.
            let a = grid.cell(j, i);
            let b = grid.cell(j + 1, i);
            if b.mean_gain < a.mean_gain {
                violations.push(MonotonicityViolation {
                    axis: SweepAxis::Gamma,
                    fixed_level: grid.grid_values[i],
                    from_level: grid.grid_values[j],
                    to_level: grid.grid_values[j + 1],
                    from_gain: a.mean_gain,
                    to_gain: b.mean_gain,
                });
            }
        }
    }
    violations
}

/// Cells grouped by the model ranking they produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingStability {
    /// Ranking -> (gamma, lambda) cells that produced it, in grid order.
    pub groups: BTreeMap<Vec<String>, Vec<(f64, f64)>>,
    /// True when a single ranking covers every cell.
    pub stable: bool,
}

/// Group grid cells by model ranking and report whether it is unique.
pub fn ranking_stability(grid: &SensitivityGrid) -> Result<RankingStability, SensitivityError> {
    if grid.cells.iter().any(|c| c.model_ranking.len() < 2) {
        return Err(SensitivityError::SingleModel);
    }
    let mut groups: BTreeMap<Vec<String>, Vec<(f64, f64)>> = BTreeMap::new();
    for cell in &grid.cells {
        groups
            .entry(cell.model_ranking.clone())
            .or_default()
            .push((cell.gamma, cell.lambda));
    }
    let stable = groups.len() == 1;
    Ok(RankingStability { groups, stable })
}
