//! Command-line pipeline: score observation tables, run the full analysis
//! report, or synthesize calibrated datasets.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 input validation failure,
//! 3 numerical non-convergence. Every run writes a `run_manifest.json`
//! echoing the configuration and the input digest so a run can be repeated
//! exactly.

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use stabscore::report::{render_scored, render_tables, run_analysis, AnalysisConfig};
use stabscore::{
    generate_dataset, parse_dataset, score_dataset, CoefficientSet, DatasetError, ReportError,
    ScoreError, SensitivityError, SourceFormat, StatsError, SyntheticSpec,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "stabscore",
    version,
    about = "Entropy-damped stability scoring and analysis for benchmark records"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score each observation and write the table with derived columns.
    Score(ScoreArgs),
    /// Run the complete analysis and write all tables and figures.
    Report(ReportArgs),
    /// Generate a synthetic observation table.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Csv,
    Json,
}

impl From<InputFormat> for SourceFormat {
    fn from(f: InputFormat) -> Self {
        match f {
            InputFormat::Csv => SourceFormat::Csv,
            InputFormat::Json => SourceFormat::Json,
        }
    }
}

#[derive(Parser)]
struct CoefficientArgs {
    /// Utility weight of the reduced score.
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Entropy weight of the reduced score.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Integration weight of the barrier term.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Reflective-capacity weight of the barrier term.
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
}

#[derive(Parser)]
struct ScoreArgs {
    /// Observation table to score.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    coeffs: CoefficientArgs,
    /// Input format.
    #[arg(long, value_enum, default_value_t = InputFormat::Csv)]
    format: InputFormat,
}

#[derive(Parser)]
struct ReportArgs {
    /// Observation table to analyze.
    #[arg(long)]
    input: PathBuf,
    /// Output directory for the report bundle.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    coeffs: CoefficientArgs,
    /// Sensitivity grid levels for both damping coefficients.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
    levels: Vec<f64>,
    /// Confidence level of the paired-test interval.
    #[arg(long, default_value_t = 0.95)]
    ci: f64,
    /// Input format.
    #[arg(long, value_enum, default_value_t = InputFormat::Csv)]
    format: InputFormat,
}

#[derive(Parser)]
struct SynthArgs {
    /// Output dataset file.
    #[arg(long)]
    out: PathBuf,
    /// Built-in calibrated preset ("paper" is the only one).
    #[arg(long)]
    preset: Option<String>,
    /// Number of generic model profiles (ignored with --preset).
    #[arg(long, default_value_t = 4)]
    models: usize,
    /// Scenarios per model (ignored with --preset).
    #[arg(long, default_value_t = 20)]
    scenarios: usize,
    /// PRNG seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug)]
enum CliError {
    Io(String),
    Validation(String),
    NonConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Validation(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Validation(m) | CliError::NonConvergence(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ScoreError> for CliError {
    fn from(e: ScoreError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<StatsError> for CliError {
    fn from(e: StatsError) -> Self {
        match e {
            StatsError::NonConvergence(_) => CliError::NonConvergence(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Score(err) => err.into(),
            ReportError::Sensitivity(SensitivityError::Score(err)) => err.into(),
            ReportError::Sensitivity(other) => CliError::Validation(other.to_string()),
        }
    }
}

impl From<stabscore::SynthError> for CliError {
    fn from(e: stabscore::SynthError) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// Configuration echo written next to every command's output.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_digest: Option<String>,
    output: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    models: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenarios: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_digest: Option<String>,
}

impl RunManifest {
    fn empty(command: &'static str, output: String) -> Self {
        Self {
            command,
            input: None,
            input_digest: None,
            output,
            alpha: None,
            beta: None,
            gamma: None,
            lambda: None,
            levels: None,
            ci_level: None,
            format: None,
            preset: None,
            models: None,
            scenarios: None,
            seed: None,
            output_digest: None,
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> String {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &byte in bytes {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("fnv1a64:{hash:016x}")
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(dir.join("run_manifest.json"), json + "\n")?;
    Ok(())
}

fn coefficient_set(args: &CoefficientArgs) -> Result<CoefficientSet, CliError> {
    Ok(CoefficientSet::new(args.alpha, args.beta, args.gamma, args.lambda)?)
}

fn cmd_score(args: &ScoreArgs) -> Result<(), CliError> {
    let text = read_input(&args.input)?;
    let coeffs = coefficient_set(&args.coeffs)?;
    let dataset = parse_dataset(&text, args.format.into())?;
    let records = score_dataset(&dataset.observations, &coeffs)?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("scored.csv"), render_scored(&records))?;

    let mut manifest = RunManifest::empty("score", args.out.display().to_string());
    manifest.input = Some(args.input.display().to_string());
    manifest.input_digest = Some(fnv1a64(text.as_bytes()));
    manifest.alpha = Some(args.coeffs.alpha);
    manifest.beta = Some(args.coeffs.beta);
    manifest.gamma = Some(args.coeffs.gamma);
    manifest.lambda = Some(args.coeffs.lambda);
    manifest.format = Some(format!("{:?}", args.format).to_lowercase());
    write_manifest(&args.out, &manifest)?;

    eprintln!("scored {} observations -> {}", records.len(), args.out.display());
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    let text = read_input(&args.input)?;
    let coeffs = coefficient_set(&args.coeffs)?;
    if args.ci.is_nan() || args.ci <= 0.0 || args.ci >= 1.0 {
        return Err(CliError::Validation(format!(
            "confidence level must be in (0, 1), got {}",
            args.ci
        )));
    }
    let dataset = parse_dataset(&text, args.format.into())?;
    let config = AnalysisConfig {
        coeffs,
        grid_levels: args.levels.clone(),
        ci_level: args.ci,
    };
    let analysis = run_analysis(&dataset.observations, &config)?;
    let bundle = render_tables(&analysis);
    bundle.write_to_dir(&args.out)?;

    let mut manifest = RunManifest::empty("report", args.out.display().to_string());
    manifest.input = Some(args.input.display().to_string());
    manifest.input_digest = Some(fnv1a64(text.as_bytes()));
    manifest.alpha = Some(args.coeffs.alpha);
    manifest.beta = Some(args.coeffs.beta);
    manifest.gamma = Some(args.coeffs.gamma);
    manifest.lambda = Some(args.coeffs.lambda);
    manifest.levels = Some(config.grid_levels.clone());
    manifest.ci_level = Some(args.ci);
    manifest.format = Some(format!("{:?}", args.format).to_lowercase());
    write_manifest(&args.out, &manifest)?;

    eprintln!(
        "report with {} files -> {}",
        bundle.files().len() + 1,
        args.out.display()
    );
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    let spec = match args.preset.as_deref() {
        Some("paper") => SyntheticSpec::paper_preset(args.seed),
        Some(other) => {
            return Err(CliError::Validation(format!(
                "unknown preset `{other}` (available: paper)"
            )));
        }
        None => SyntheticSpec::generic(args.models, args.scenarios, args.seed),
    };
    let dataset = generate_dataset(&spec)?;
    let csv = dataset.to_csv_string();
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&args.out, &csv)?;

    let mut manifest = RunManifest::empty("synth", args.out.display().to_string());
    manifest.preset = args.preset.clone();
    if args.preset.is_none() {
        manifest.models = Some(args.models);
        manifest.scenarios = Some(args.scenarios);
    }
    manifest.seed = Some(args.seed);
    manifest.output_digest = Some(fnv1a64(csv.as_bytes()));
    let manifest_json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let manifest_path = args.out.with_extension("manifest.json");
    std::fs::write(&manifest_path, manifest_json + "\n")?;

    eprintln!(
        "wrote {} observations -> {}",
        dataset.observations.len(),
        args.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Score(args) => cmd_score(args),
        Command::Report(args) => cmd_report(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}
