//! Entropy-damped stability scoring for model benchmark records.
//!
//! A benchmark observation pairs a model with a stress scenario and carries
//! four bounded signals: task utility, scenario entropy, and two internal
//! structure proxies. This crate scores those observations under a linear
//! baseline and an entropy-damped generalization, runs the accompanying
//! statistical analysis (descriptives, paired tests, correlations, and a
//! coefficient sensitivity sweep), renders the result tables and figures,
//! and can synthesize calibrated datasets for end-to-end reproduction.
//!
//! Determinism is a design requirement throughout: scoring is pure, dataset
//! order is canonicalized, emission is byte-stable, and all randomness is
//! confined to the seeded synthetic generator.

pub mod dataset;
pub mod inference;
pub mod report;
pub mod scoring;
pub mod sensitivity;
pub mod stats;
pub mod synth;

pub use dataset::{parse_dataset, DatasetError, DatasetFile, SourceFormat};
pub use inference::{
    paired_t_test, pearson_correlation, wilcoxon_exact_p, wilcoxon_signed_rank,
    CorrelationResult, InferenceError, PairedTestResult, WilcoxonResult,
};
pub use report::{
    aggregate_by_model, render_tables, run_analysis, Analysis, AnalysisConfig, ModelAggregate,
    ReportBundle, ReportError,
};
pub use scoring::{
    score_dataset, score_observation, validate_observation, CoefficientSet, Observation,
    RawObservation, ScoreError, ScoreRecord, ValidationError,
};
pub use sensitivity::{
    check_monotonicity, evaluate_cell, evaluate_grid, ranking_stability, SensitivityCell,
    SensitivityError, SensitivityGrid,
};
pub use stats::{describe, DescriptiveSummary, SampleVector, StatsError};
pub use synth::{generate_dataset, ModelProfile, SplitMix64, SyntheticSpec, SynthError};
