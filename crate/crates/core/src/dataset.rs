//! Observation table ingestion and the canonical on-disk formats.
//!
//! Canonical input is comma-separated text with a header carrying exactly the
//! six columns `model, scenario, utility, entropy, integration, reflective`
//! in any order. A JSON alternative (array of objects with the same keys) is
//! accepted. All emission is byte-deterministic: floats are written with
//! Rust's shortest round-trip formatting so a parse -> emit -> parse cycle
//! reproduces identical values.

use crate::scoring::{
    validate_observation, Observation, RawObservation, ScoreError, ValidationError,
    DEFAULT_BOUND_TOLERANCE,
};
use std::fmt;
use thiserror::Error;

pub const CANONICAL_COLUMNS: [&str; 6] = [
    "model",
    "scenario",
    "utility",
    "entropy",
    "integration",
    "reflective",
];

/// Source format of a dataset file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Csv,
    Json,
}

impl fmt::Display for SourceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceFormat::Csv => write!(f, "csv"),
            SourceFormat::Json => write!(f, "json"),
        }
    }
}

/// One malformed input row: 1-based line number (or array index for JSON)
/// plus the cause.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFault {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("input contains no observation rows")]
    EmptyFile,
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("unexpected column `{0}`")]
    UnexpectedColumn(String),
    #[error("duplicate (model, scenario) key: ({model}, {scenario})")]
    DuplicateKey { model: String, scenario: String },
    #[error("{}", format_row_faults(.0))]
    MalformedRows(Vec<RowFault>),
    #[error("input is not valid JSON: {0}")]
    InvalidJson(String),
}

fn format_row_faults(faults: &[RowFault]) -> String {
    let mut out = format!("{} malformed row(s):", faults.len());
    for fault in faults {
        out.push_str(&format!("\n  line {}: {}", fault.line, fault.message));
    }
    out
}

/// A parsed and fully validated observation table.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub header: Vec<String>,
    pub observations: Vec<Observation>,
    pub source_format: SourceFormat,
}

impl DatasetFile {
    /// Wrap already-validated observations (used by the synthetic generator).
    pub fn from_observations(observations: Vec<Observation>) -> Result<Self, DatasetError> {
        if observations.is_empty() {
            return Err(DatasetError::EmptyFile);
        }
        check_duplicates(&observations)?;
        Ok(Self {
            header: CANONICAL_COLUMNS.iter().map(|s| s.to_string()).collect(),
            observations,
            source_format: SourceFormat::Csv,
        })
    }

    /// Serialize as canonical CSV with full round-trip float precision.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("model,scenario,utility,entropy,integration,reflective\n");
        for obs in &self.observations {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                obs.model_id,
                obs.scenario_id,
                obs.utility,
                obs.entropy,
                obs.integration,
                obs.reflective
            ));
        }
        out
    }
}

/// Parse an observation table from text in the given format.
pub fn parse_dataset(input: &str, format: SourceFormat) -> Result<DatasetFile, DatasetError> {
    match format {
        SourceFormat::Csv => parse_csv(input),
        SourceFormat::Json => parse_json(input),
    }
}

fn parse_csv(input: &str) -> Result<DatasetFile, DatasetError> {
    let mut lines = input
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());

    let (_, header_line) = lines.next().ok_or(DatasetError::EmptyFile)?;
    let header: Vec<String> = header_line
        .split(',')
        .map(|h| h.trim().to_string())
        .collect();
    let column_index = check_header(&header)?;

    let mut observations = Vec::new();
    let mut faults = Vec::new();
    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        if fields.len() != header.len() {
            faults.push(RowFault {
                line: line_no,
                message: format!("expected {} fields, found {}", header.len(), fields.len()),
            });
            continue;
        }
        let mut raw = RawObservation {
            model_id: fields[column_index[0]].to_string(),
            scenario_id: fields[column_index[1]].to_string(),
            ..RawObservation::default()
        };
        let mut field_fault = None;
        for (slot, name) in [(2usize, "utility"), (3, "entropy"), (4, "integration"), (5, "reflective")]
        {
            let text = fields[column_index[slot]];
            match text.parse::<f64>() {
                Ok(v) => match slot {
                    2 => raw.utility = Some(v),
                    3 => raw.entropy = Some(v),
                    4 => raw.integration = Some(v),
                    _ => raw.reflective = Some(v),
                },
                Err(_) => {
                    field_fault = Some(format!("field `{name}` is not a number: `{text}`"));
                    break;
                }
            }
        }
        if let Some(message) = field_fault {
            faults.push(RowFault { line: line_no, message });
            continue;
        }
        match validate_observation(&raw, DEFAULT_BOUND_TOLERANCE) {
            Ok(obs) => observations.push(obs),
            Err(err) => faults.push(RowFault {
                line: line_no,
                message: err.to_string(),
            }),
        }
    }
    if !faults.is_empty() {
        return Err(DatasetError::MalformedRows(faults));
    }
    if observations.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    check_duplicates(&observations)?;
    Ok(DatasetFile {
        header,
        observations,
        source_format: SourceFormat::Csv,
    })
}

fn parse_json(input: &str) -> Result<DatasetFile, DatasetError> {
    let value: serde_json::Value =
        serde_json::from_str(input).map_err(|e| DatasetError::InvalidJson(e.to_string()))?;
    let rows = value
        .as_array()
        .ok_or_else(|| DatasetError::InvalidJson("top-level value must be an array".into()))?;
    if rows.is_empty() {
        return Err(DatasetError::EmptyFile);
    }

    let mut observations = Vec::new();
    let mut faults = Vec::new();
    for (idx, row) in rows.iter().enumerate() {
        let line = idx + 1;
        let object = match row.as_object() {
            Some(o) => o,
            None => {
                faults.push(RowFault {
                    line,
                    message: "row is not an object".into(),
                });
                continue;
            }
        };
        if let Some(unexpected) = object.keys().find(|k| !CANONICAL_COLUMNS.contains(&k.as_str()))
        {
            return Err(DatasetError::UnexpectedColumn(unexpected.clone()));
        }
        let text = |key: &str| object.get(key).and_then(|v| v.as_str()).map(String::from);
        let number = |key: &str| object.get(key).and_then(|v| v.as_f64());
        let raw = RawObservation {
            model_id: text("model").unwrap_or_default(),
            scenario_id: text("scenario").unwrap_or_default(),
            utility: number("utility"),
            entropy: number("entropy"),
            integration: number("integration"),
            reflective: number("reflective"),
        };
        if raw.model_id.is_empty() || raw.scenario_id.is_empty() {
            faults.push(RowFault {
                line,
                message: "missing `model` or `scenario` string".into(),
            });
            continue;
        }
        match validate_observation(&raw, DEFAULT_BOUND_TOLERANCE) {
            Ok(obs) => observations.push(obs),
            Err(err) => faults.push(RowFault {
                line,
                message: err.to_string(),
            }),
        }
    }
    if !faults.is_empty() {
        return Err(DatasetError::MalformedRows(faults));
    }
    check_duplicates(&observations)?;
    Ok(DatasetFile {
        header: CANONICAL_COLUMNS.iter().map(|s| s.to_string()).collect(),
        observations,
        source_format: SourceFormat::Json,
    })
}

fn check_header(header: &[String]) -> Result<[usize; 6], DatasetError> {
    for required in CANONICAL_COLUMNS {
        if !header.iter().any(|h| h == required) {
            return Err(DatasetError::MissingColumn(required.to_string()));
        }
    }
    if let Some(extra) = header.iter().find(|h| !CANONICAL_COLUMNS.contains(&h.as_str())) {
        return Err(DatasetError::UnexpectedColumn(extra.clone()));
    }
    let mut index = [0usize; 6];
    for (i, name) in CANONICAL_COLUMNS.iter().enumerate() {
        index[i] = header.iter().position(|h| h == name).expect("checked above");
    }
    Ok(index)
}

fn check_duplicates(observations: &[Observation]) -> Result<(), DatasetError> {
    let mut keys: Vec<(&str, &str)> = observations.iter().map(|o| o.key()).collect();
    keys.sort();
    for pair in keys.windows(2) {
        if pair[0] == pair[1] {
            return Err(DatasetError::DuplicateKey {
                model: pair[0].0.to_string(),
                scenario: pair[0].1.to_string(),
            });
        }
    }
    Ok(())
}

impl From<ScoreError> for DatasetError {
    fn from(err: ScoreError) -> Self {
        match err {
            ScoreError::EmptyDataset => DatasetError::EmptyFile,
            ScoreError::DuplicateKey { model, scenario } => {
                DatasetError::DuplicateKey { model, scenario }
            }
            other => DatasetError::MalformedRows(vec![RowFault {
                line: 0,
                message: other.to_string(),
            }]),
        }
    }
}

impl From<ValidationError> for DatasetError {
    fn from(err: ValidationError) -> Self {
        DatasetError::MalformedRows(vec![RowFault {
            line: 0,
            message: err.to_string(),
        }])
    }
}
