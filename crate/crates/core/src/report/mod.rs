//! Report assembly: model aggregation, the full analysis pipeline, and
//! byte-deterministic rendering of every output table.
//!
//! Rendering conventions: numeric cells carry four decimals, p-values carry
//! three significant figures (scientific below 0.001), counts stay plain
//! integers. Sections that cannot be computed (for example a paired test on
//! constant differences) degrade to an explicit notice line instead of
//! failing the whole report.

pub mod figures;

use crate::inference::{
    paired_t_test, pearson_correlation, wilcoxon_signed_rank, CorrelationResult,
    PairedTestResult, WilcoxonResult,
};
use crate::scoring::{score_dataset, CoefficientSet, Observation, ScoreError, ScoreRecord};
use crate::sensitivity::{
    evaluate_grid, ranking_stability, RankingStability, SensitivityError, SensitivityGrid,
};
use crate::stats::{describe, DescriptiveSummary, SampleVector};
use std::io::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
}

/// Per-model means of every scored quantity, plus the gain dispersion used
/// for error bars.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAggregate {
    pub model_id: String,
    pub n: usize,
    pub mean_utility: f64,
    pub mean_entropy: f64,
    pub mean_integration: f64,
    pub mean_reflective: f64,
    pub mean_denominator: f64,
    pub mean_reduced: f64,
    pub mean_generalized: f64,
    pub mean_gain: f64,
    pub sd_gain: Option<f64>,
}

/// Group scored records by model and average each column.
///
/// Records are assumed canonical-ordered (as produced by `score_dataset`),
/// so sums run left to right over a fixed order and the result is
/// bit-reproducible.
pub fn aggregate_by_model(records: &[ScoreRecord]) -> Result<Vec<ModelAggregate>, ReportError> {
    if records.is_empty() {
        return Err(ReportError::Score(ScoreError::EmptyDataset));
    }
    let mut aggregates = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let model = &records[start].observation.model_id;
        let mut end = start + 1;
        while end < records.len() && &records[end].observation.model_id == model {
            end += 1;
        }
        let group = &records[start..end];
        let n = group.len();
        let mean = |f: fn(&ScoreRecord) -> f64| group.iter().map(f).sum::<f64>() / n as f64;
        let mean_gain = mean(|r| r.gain);
        let sd_gain = if n >= 2 {
            let ss: f64 = group
                .iter()
                .map(|r| (r.gain - mean_gain) * (r.gain - mean_gain))
                .sum();
            Some((ss / (n - 1) as f64).sqrt())
        } else {
            None
        };
        aggregates.push(ModelAggregate {
            model_id: model.clone(),
            n,
            mean_utility: mean(|r| r.observation.utility),
            mean_entropy: mean(|r| r.observation.entropy),
            mean_integration: mean(|r| r.observation.integration),
            mean_reflective: mean(|r| r.observation.reflective),
            mean_denominator: mean(|r| r.denominator),
            mean_reduced: mean(|r| r.reduced),
            mean_generalized: mean(|r| r.generalized),
            mean_gain,
            sd_gain,
        });
        start = end;
    }
    Ok(aggregates)
}

/// Configuration for the full analysis pipeline.
#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub coeffs: CoefficientSet,
    pub grid_levels: Vec<f64>,
    pub ci_level: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            coeffs: CoefficientSet::default(),
            grid_levels: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            ci_level: 0.95,
        }
    }
}

/// Everything the report knows: scores, summaries, tests, sweep.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub records: Vec<ScoreRecord>,
    pub aggregates: Vec<ModelAggregate>,
    /// (column label, summary) for the eight scored quantities.
    pub descriptives: Vec<(&'static str, DescriptiveSummary)>,
    pub paired: Result<PairedTestResult, String>,
    pub wilcoxon: Result<WilcoxonResult, String>,
    pub correlations: Vec<(&'static str, Result<CorrelationResult, String>)>,
    pub grid: SensitivityGrid,
    pub ranking: Result<RankingStability, String>,
}

/// Run descriptives, paired tests, correlations, and the coefficient sweep.
pub fn run_analysis(
    observations: &[Observation],
    config: &AnalysisConfig,
) -> Result<Analysis, ReportError> {
    let records = score_dataset(observations, &config.coeffs)?;
    let aggregates = aggregate_by_model(&records)?;

    let column = |f: fn(&ScoreRecord) -> f64| -> Vec<f64> { records.iter().map(f).collect() };
    let utility = column(|r| r.observation.utility);
    let entropy = column(|r| r.observation.entropy);
    let integration = column(|r| r.observation.integration);
    let reflective = column(|r| r.observation.reflective);
    let denominator = column(|r| r.denominator);
    let reduced = column(|r| r.reduced);
    let generalized = column(|r| r.generalized);
    let gain = column(|r| r.gain);

    let descriptives = vec![
        ("utility", &utility),
        ("entropy", &entropy),
        ("integration", &integration),
        ("reflective", &reflective),
        ("denominator", &denominator),
        ("reduced", &reduced),
        ("generalized", &generalized),
        ("gain", &gain),
    ]
    .into_iter()
    .map(|(label, values)| {
        let sample = SampleVector::new(values.clone()).expect("scored columns are finite");
        (label, describe(&sample))
    })
    .collect();

    let sv = |values: &[f64]| SampleVector::new(values.to_vec()).expect("finite");
    let paired = paired_t_test(&sv(&generalized), &sv(&reduced), config.ci_level)
        .map_err(|e| e.to_string());
    let wilcoxon =
        wilcoxon_signed_rank(&sv(&generalized), &sv(&reduced)).map_err(|e| e.to_string());

    let correlations = vec![
        ("entropy_vs_reduced", &entropy, &reduced),
        ("entropy_vs_generalized", &entropy, &generalized),
        ("denominator_vs_generalized", &denominator, &generalized),
        ("gain_vs_entropy", &gain, &entropy),
    ]
    .into_iter()
    .map(|(label, x, y)| {
        (
            label,
            pearson_correlation(&sv(x), &sv(y)).map_err(|e| e.to_string()),
        )
    })
    .collect();

    let grid = evaluate_grid(
        observations,
        &config.grid_levels,
        config.coeffs.alpha,
        config.coeffs.beta,
    )?;
    let ranking = ranking_stability(&grid).map_err(|e| e.to_string());

    Ok(Analysis {
        records,
        aggregates,
        descriptives,
        paired,
        wilcoxon,
        correlations,
        grid,
        ranking,
    })
}

/// One rendered table in both delimited and aligned-text form.
#[derive(Debug, Clone, PartialEq)]
pub struct TableArtifact {
    pub csv: String,
    pub text: String,
}

/// One rendered figure plus its plot-data sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureArtifact {
    pub name: &'static str,
    pub svg: String,
    pub sidecar_csv: String,
}

/// The complete set of report files, all held in memory so rendering stays a
/// pure function of the analysis.
#[derive(Debug, Clone)]
pub struct ReportBundle {
    pub descriptive: TableArtifact,
    pub paired: TableArtifact,
    pub models: TableArtifact,
    pub correlations: TableArtifact,
    pub sensitivity: TableArtifact,
    pub selected: TableArtifact,
    pub figures: Vec<FigureArtifact>,
    /// Canonical six-column echo of the scored observations; re-parsing it
    /// reproduces the score records bit for bit.
    pub observations_echo: String,
    /// Per-observation scores with the derived columns appended.
    pub scored_table: String,
}

impl ReportBundle {
    /// Deterministic (file name, content) listing for writing or comparing.
    pub fn files(&self) -> Vec<(String, &str)> {
        let mut out: Vec<(String, &str)> = vec![
            ("table2_descriptive.csv".into(), &self.descriptive.csv),
            ("table2_descriptive.txt".into(), &self.descriptive.text),
            ("table3_paired.csv".into(), &self.paired.csv),
            ("table3_paired.txt".into(), &self.paired.text),
            ("table4_models.csv".into(), &self.models.csv),
            ("table4_models.txt".into(), &self.models.text),
            ("table5_correlations.csv".into(), &self.correlations.csv),
            ("table5_correlations.txt".into(), &self.correlations.text),
            ("table6_sensitivity.csv".into(), &self.sensitivity.csv),
            ("table6_sensitivity.txt".into(), &self.sensitivity.text),
            ("table7_selected.csv".into(), &self.selected.csv),
            ("table7_selected.txt".into(), &self.selected.text),
            ("observations_echo.csv".into(), &self.observations_echo),
            ("scored.csv".into(), &self.scored_table),
        ];
        for figure in &self.figures {
            out.push((format!("{}.svg", figure.name), &figure.svg));
            out.push((format!("{}_data.csv", figure.name), &figure.sidecar_csv));
        }
        out
    }

    pub fn write_to_dir(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, content) in self.files() {
            let mut file = std::fs::File::create(dir.join(name))?;
            file.write_all(content.as_bytes())?;
        }
        Ok(())
    }
}

/// Fixed-decimal cell rendering (Rust's formatter rounds half to even).
pub fn format_fixed(value: f64, decimals: usize) -> String {
    format!("{value:.decimals$}")
}

/// p-value rendering: three significant figures, scientific below 0.001.
pub fn format_p(p: f64) -> String {
    if p == 0.0 {
        return "0".to_string();
    }
    if p < 0.001 {
        format!("{p:.2e}")
    } else {
        let decimals = (2 - p.log10().floor() as i32).max(0) as usize;
        format!("{p:.decimals$}")
    }
}

fn cell(value: f64) -> String {
    format_fixed(value, 4)
}

fn render_csv(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = headers.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn render_text(title: &str, headers: &[&str], rows: &[Vec<String>], notes: &[String]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, value) in row.iter().enumerate() {
            widths[i] = widths[i].max(value.len());
        }
    }
    let mut out = String::new();
    out.push_str(title);
    out.push('\n');
    let pad = |values: &[String]| -> String {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{:>width$}", v, width = widths[i]))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    out.push_str(&pad(&header_cells));
    out.push('\n');
    out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
    out.push('\n');
    for row in rows {
        out.push_str(&pad(row));
        out.push('\n');
    }
    for note in notes {
        out.push_str(note);
        out.push('\n');
    }
    out
}

/// Render every table of the bundle from a completed analysis.
pub fn render_tables(analysis: &Analysis) -> ReportBundle {
    ReportBundle {
        descriptive: render_descriptive(analysis),
        paired: render_paired(analysis),
        models: render_models(analysis),
        correlations: render_correlations(analysis),
        sensitivity: render_sensitivity(analysis),
        selected: render_selected(analysis),
        figures: figures::emit_figures(&analysis.records, &analysis.aggregates),
        observations_echo: render_echo(&analysis.records),
        scored_table: render_scored(&analysis.records),
    }
}

fn render_descriptive(analysis: &Analysis) -> TableArtifact {
    let headers = ["variable", "n", "mean", "sd", "min", "median", "max"];
    let rows: Vec<Vec<String>> = analysis
        .descriptives
        .iter()
        .map(|(label, d)| {
            vec![
                label.to_string(),
                d.n.to_string(),
                cell(d.mean),
                d.sd.map_or_else(|| "n/a".into(), cell),
                cell(d.min),
                cell(d.median),
                cell(d.max),
            ]
        })
        .collect();
    TableArtifact {
        csv: render_csv(&headers, &rows),
        text: render_text("Descriptive statistics", &headers, &rows, &[]),
    }
}

fn render_paired(analysis: &Analysis) -> TableArtifact {
    let headers = [
        "comparison",
        "n",
        "mean_generalized",
        "mean_reduced",
        "mean_diff",
        "sd_diff",
        "t_statistic",
        "df",
        "ci_low",
        "ci_high",
        "ci_level",
        "t_test_p",
        "wilcoxon_z",
        "wilcoxon_p",
    ];
    let mean_gen = analysis
        .descriptives
        .iter()
        .find(|(l, _)| *l == "generalized")
        .map(|(_, d)| d.mean)
        .unwrap_or(f64::NAN);
    let mean_red = analysis
        .descriptives
        .iter()
        .find(|(l, _)| *l == "reduced")
        .map(|(_, d)| d.mean)
        .unwrap_or(f64::NAN);

    let mut rows = Vec::new();
    let mut notes = Vec::new();
    match (&analysis.paired, &analysis.wilcoxon) {
        (Ok(t), wilcoxon) => {
            let (wz, wp) = match wilcoxon {
                Ok(w) => (cell(w.z_statistic), format_p(w.p_two_sided)),
                Err(reason) => {
                    notes.push(format!("note: wilcoxon test skipped: {reason}"));
                    ("n/a".into(), "n/a".into())
                }
            };
            rows.push(vec![
                "generalized_vs_reduced".into(),
                t.n.to_string(),
                cell(mean_gen),
                cell(mean_red),
                cell(t.mean_diff),
                cell(t.sd_diff),
                cell(t.t_statistic),
                t.df.to_string(),
                cell(t.ci_low),
                cell(t.ci_high),
                format_fixed(t.ci_level, 2),
                format_p(t.p_two_sided),
                wz,
                wp,
            ]);
        }
        (Err(reason), wilcoxon) => {
            notes.push(format!("note: paired comparison skipped: {reason}"));
            match wilcoxon {
                Ok(w) => notes.push(format!(
                    "note: wilcoxon alone: z = {}, p = {}",
                    cell(w.z_statistic),
                    format_p(w.p_two_sided)
                )),
                Err(reason) => notes.push(format!("note: wilcoxon test skipped: {reason}")),
            }
        }
    }
    TableArtifact {
        csv: render_csv(&headers, &rows),
        text: render_text(
            "Paired comparison of generalized vs reduced scores",
            &headers,
            &rows,
            &notes,
        ),
    }
}

fn render_models(analysis: &Analysis) -> TableArtifact {
    let headers = [
        "model",
        "n",
        "mean_utility",
        "mean_entropy",
        "mean_integration",
        "mean_reflective",
        "mean_denominator",
        "mean_reduced",
        "mean_generalized",
        "mean_gain",
        "sd_gain",
    ];
    let rows: Vec<Vec<String>> = analysis
        .aggregates
        .iter()
        .map(|a| {
            vec![
                a.model_id.clone(),
                a.n.to_string(),
                cell(a.mean_utility),
                cell(a.mean_entropy),
                cell(a.mean_integration),
                cell(a.mean_reflective),
                cell(a.mean_denominator),
                cell(a.mean_reduced),
                cell(a.mean_generalized),
                cell(a.mean_gain),
                a.sd_gain.map_or_else(|| "n/a".into(), cell),
            ]
        })
        .collect();
    TableArtifact {
        csv: render_csv(&headers, &rows),
        text: render_text("Mean scores by model", &headers, &rows, &[]),
    }
}

fn render_correlations(analysis: &Analysis) -> TableArtifact {
    let headers = ["pair", "n", "r", "t_statistic", "df", "p"];
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for (label, outcome) in &analysis.correlations {
        match outcome {
            Ok(c) => rows.push(vec![
                label.to_string(),
                c.n.to_string(),
                cell(c.r),
                if c.degenerate {
                    "inf".into()
                } else {
                    cell(c.t_statistic)
                },
                c.df.to_string(),
                format_p(c.p_two_sided),
            ]),
            Err(reason) => notes.push(format!("note: correlation {label} skipped: {reason}")),
        }
    }
    if rows.is_empty() {
        notes.push("note: no correlations could be computed".into());
    }
    TableArtifact {
        csv: render_csv(&headers, &rows),
        text: render_text("Selected correlations", &headers, &rows, &notes),
    }
}

fn render_sensitivity(analysis: &Analysis) -> TableArtifact {
    let grid = &analysis.grid;
    let mut headers: Vec<String> = vec!["gamma_vs_lambda".into()];
    headers.extend(grid.grid_values.iter().map(|v| cell(*v)));
    let header_refs: Vec<&str> = headers.iter().map(|s| s.as_str()).collect();

    let rows: Vec<Vec<String>> = grid
        .grid_values
        .iter()
        .enumerate()
        .map(|(i, gamma)| {
            let mut row = vec![cell(*gamma)];
            for j in 0..grid.grid_values.len() {
                row.push(cell(grid.cell(i, j).mean_gain));
            }
            row
        })
        .collect();
    TableArtifact {
        csv: render_csv(&header_refs, &rows),
        text: render_text(
            "Mean stability gain by damping coefficients (gamma rows, lambda columns)",
            &header_refs,
            &rows,
            &[],
        ),
    }
}

/// Table-7 style selection: the zero corner, its first nonzero neighbor, the
/// center, and the far corner of the grid.
fn selected_indices(count: usize) -> Vec<(usize, usize)> {
    let mut picks = vec![(0, 0)];
    if count > 1 {
        picks.push((0, 1));
    }
    picks.push((count / 2, count / 2));
    picks.push((count - 1, count - 1));
    let mut seen = Vec::new();
    picks.retain(|p| {
        if seen.contains(p) {
            false
        } else {
            seen.push(*p);
            true
        }
    });
    picks
}

fn render_selected(analysis: &Analysis) -> TableArtifact {
    let grid = &analysis.grid;
    let headers = ["gamma", "lambda", "mean_gain", "min_gain", "proportion_positive"];
    let rows: Vec<Vec<String>> = selected_indices(grid.grid_values.len())
        .into_iter()
        .map(|(i, j)| {
            let c = grid.cell(i, j);
            vec![
                cell(c.gamma),
                cell(c.lambda),
                cell(c.mean_gain),
                cell(c.min_gain),
                cell(c.proportion_positive),
            ]
        })
        .collect();

    let mut notes = Vec::new();
    match &analysis.ranking {
        Ok(stability) if stability.stable => {
            let ranking = stability.groups.keys().next().expect("stable has one group");
            notes.push(format!(
                "model ranking stable across all cells: {}",
                ranking.join(" > ")
            ));
        }
        Ok(stability) => {
            notes.push(format!(
                "model ranking varies across cells ({} distinct orderings):",
                stability.groups.len()
            ));
            for (ranking, cells) in &stability.groups {
                notes.push(format!(
                    "  {} in {} cell(s)",
                    ranking.join(" > "),
                    cells.len()
                ));
            }
        }
        Err(reason) => notes.push(format!("note: ranking stability skipped: {reason}")),
    }
    TableArtifact {
        csv: render_csv(&headers, &rows),
        text: render_text(
            "Gain floor and positivity under selected coefficient settings",
            &headers,
            &rows,
            &notes,
        ),
    }
}

fn render_echo(records: &[ScoreRecord]) -> String {
    let mut out = String::from("model,scenario,utility,entropy,integration,reflective\n");
    for r in records {
        let o = &r.observation;
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            o.model_id, o.scenario_id, o.utility, o.entropy, o.integration, o.reflective
        ));
    }
    out
}

/// Scored table with derived columns, full float precision.
pub fn render_scored(records: &[ScoreRecord]) -> String {
    let mut out = String::from(
        "model,scenario,utility,entropy,integration,reflective,barrier,denominator,reduced,generalized,gain\n",
    );
    for r in records {
        let o = &r.observation;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            o.model_id,
            o.scenario_id,
            o.utility,
            o.entropy,
            o.integration,
            o.reflective,
            r.barrier,
            r.denominator,
            r.reduced,
            r.generalized,
            r.gain
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_dataset, SourceFormat};
    use crate::synth::{generate_dataset, SyntheticSpec, PAPER_PRESET_SEED};

    fn paper_analysis() -> Analysis {
        let ds = generate_dataset(&SyntheticSpec::paper_preset(PAPER_PRESET_SEED)).unwrap();
        run_analysis(&ds.observations, &AnalysisConfig::default()).unwrap()
    }

    #[test]
    fn aggregates_match_profile_means() {
        let analysis = paper_analysis();
        assert_eq!(analysis.aggregates.len(), 4);
        let names: Vec<_> = analysis.aggregates.iter().map(|a| a.model_id.as_str()).collect();
        assert_eq!(names, vec!["DeepSeek-V3", "GPT-4o", "Gemini-1.5", "Grok-3"]);

        // Against the published model-mean rows, at synthetic-calibration
        // tolerance.
        let expected = [
            ("DeepSeek-V3", 0.9695, 0.0517, 1.9062, 0.9178, 0.9424, 0.0246),
            ("GPT-4o", 0.9845, 0.0440, 1.9539, 0.9406, 0.9620, 0.0215),
            ("Gemini-1.5", 0.9545, 0.1480, 1.8485, 0.8065, 0.8744, 0.0679),
            ("Grok-3", 0.9895, 0.0120, 1.8518, 0.9775, 0.9830, 0.0055),
        ];
        for (model, u, s, d, e, estar, gain) in expected {
            let a = analysis
                .aggregates
                .iter()
                .find(|a| a.model_id == model)
                .unwrap();
            assert_eq!(a.n, 20);
            assert!((a.mean_utility - u).abs() < 5e-3, "{model} utility");
            assert!((a.mean_entropy - s).abs() < 5e-3, "{model} entropy");
            assert!((a.mean_denominator - d).abs() < 5e-3, "{model} denominator");
            assert!((a.mean_reduced - e).abs() < 5e-3, "{model} reduced");
            assert!((a.mean_generalized - estar).abs() < 5e-3, "{model} generalized");
            assert!((a.mean_gain - gain).abs() < 5e-3, "{model} gain");
        }
    }

    #[test]
    fn aggregate_single_model_equals_global_mean() {
        let records = score_dataset(
            &[
                Observation::new("only", "s01", 0.9, 0.1, 0.8, 0.8).unwrap(),
                Observation::new("only", "s02", 0.7, 0.2, 0.6, 0.9).unwrap(),
            ],
            &CoefficientSet::default(),
        )
        .unwrap();
        let aggregates = aggregate_by_model(&records).unwrap();
        assert_eq!(aggregates.len(), 1);
        assert!((aggregates[0].mean_utility - 0.8).abs() < 1e-15);
    }

    #[test]
    fn aggregate_identical_rows_have_zero_sd() {
        let records = score_dataset(
            &[
                Observation::new("m", "s01", 0.9, 0.1, 0.8, 0.8).unwrap(),
                Observation::new("m", "s02", 0.9, 0.1, 0.8, 0.8).unwrap(),
            ],
            &CoefficientSet::default(),
        )
        .unwrap();
        let aggregates = aggregate_by_model(&records).unwrap();
        assert_eq!(aggregates[0].sd_gain, Some(0.0));
        assert!(aggregate_by_model(&[]).is_err());
    }

    #[test]
    fn gain_tracks_entropy_on_calibrated_data() {
        // The gain is structurally near-linear in entropy; heterogeneous
        // barriers only blur it slightly.
        let analysis = paper_analysis();
        let (_, outcome) = analysis
            .correlations
            .iter()
            .find(|(l, _)| *l == "gain_vs_entropy")
            .unwrap();
        let r = outcome.as_ref().unwrap().r;
        assert!(r >= 0.99, "r = {r}");
    }

    #[test]
    fn table_shapes_match_reference_layout() {
        let analysis = paper_analysis();
        let bundle = render_tables(&analysis);

        let data_rows = |csv: &str| csv.lines().count() - 1;
        assert_eq!(data_rows(&bundle.descriptive.csv), 8);
        assert_eq!(data_rows(&bundle.paired.csv), 1);
        assert_eq!(data_rows(&bundle.models.csv), 4);
        assert_eq!(data_rows(&bundle.correlations.csv), 4);
        assert_eq!(data_rows(&bundle.sensitivity.csv), 5);
        assert_eq!(data_rows(&bundle.selected.csv), 4);
        assert_eq!(bundle.figures.len(), 4);

        // Selected settings are the zero corner, its neighbor, center, far
        // corner.
        let first_cells: Vec<&str> = bundle
            .selected
            .csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(first_cells, vec!["0.0000", "0.0000", "0.5000", "1.0000"]);
    }

    #[test]
    fn zero_cell_row_renders_exact_zeroes() {
        let analysis = paper_analysis();
        let bundle = render_tables(&analysis);
        let first_row: Vec<&str> = bundle.selected.csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(first_row[2], "0.0000"); // mean gain
        assert_eq!(first_row[3], "0.0000"); // min gain
        assert_eq!(first_row[4], "0.0000"); // proportion positive
    }

    #[test]
    fn echo_round_trip_reproduces_scores() {
        let analysis = paper_analysis();
        let bundle = render_tables(&analysis);
        let reparsed = parse_dataset(&bundle.observations_echo, SourceFormat::Csv).unwrap();
        let rescored = score_dataset(&reparsed.observations, &CoefficientSet::default()).unwrap();
        assert_eq!(analysis.records, rescored);
    }

    #[test]
    fn rendering_is_deterministic() {
        let a = render_tables(&paper_analysis());
        let b = render_tables(&paper_analysis());
        for ((name_a, content_a), (name_b, content_b)) in a.files().iter().zip(b.files().iter()) {
            assert_eq!(name_a, name_b);
            assert_eq!(content_a, content_b, "file {name_a} differs");
        }
    }

    #[test]
    fn degraded_sections_render_notices() {
        // All-zero entropy: gains are identically zero, so the paired test,
        // the wilcoxon test, and two correlations all degrade.
        let observations = vec![
            Observation::new("m1", "s01", 0.9, 0.0, 0.8, 0.8).unwrap(),
            Observation::new("m1", "s02", 0.8, 0.0, 0.7, 0.9).unwrap(),
            Observation::new("m2", "s01", 0.7, 0.0, 0.6, 0.5).unwrap(),
        ];
        let analysis = run_analysis(&observations, &AnalysisConfig::default()).unwrap();
        assert!(analysis.paired.is_err());
        assert!(analysis.wilcoxon.is_err());
        let bundle = render_tables(&analysis);
        assert!(bundle.paired.text.contains("skipped"));
        assert!(bundle.correlations.text.contains("skipped"));
        // Correlation rows involving entropy are gone; entropy-free pair
        // stays.
        assert!(bundle.correlations.csv.contains("denominator_vs_generalized"));
        assert!(!bundle.correlations.csv.contains("gain_vs_entropy"));
    }

    #[test]
    fn constant_gain_keeps_wilcoxon_when_paired_test_degrades() {
        // Same entropy and structure everywhere but varying utility: every
        // gain is exactly 0.125, so the t-test sees zero variance while the
        // wilcoxon still ranks the (all-positive) differences.
        let observations = vec![
            Observation::new("m1", "s01", 0.5, 0.25, 1.0, 1.0).unwrap(),
            Observation::new("m1", "s02", 0.625, 0.25, 1.0, 1.0).unwrap(),
            Observation::new("m2", "s01", 0.75, 0.25, 1.0, 1.0).unwrap(),
        ];
        let analysis = run_analysis(&observations, &AnalysisConfig::default()).unwrap();
        assert!(analysis.paired.is_err());
        let wilcoxon = analysis.wilcoxon.as_ref().unwrap();
        assert_eq!(wilcoxon.w_minus, 0.0);
        let bundle = render_tables(&analysis);
        assert!(bundle.paired.text.contains("paired comparison skipped"));
        assert!(bundle.paired.text.contains("wilcoxon alone"));
    }

    #[test]
    fn all_correlations_skipped_leaves_explicit_notice() {
        // Identical dyadic signal values across rows: every scored column is
        // exactly constant, so each correlation hits zero variance and the
        // whole table degrades to the notice.
        let observations = vec![
            Observation::new("m1", "s01", 0.5, 0.25, 1.0, 1.0).unwrap(),
            Observation::new("m1", "s02", 0.5, 0.25, 1.0, 1.0).unwrap(),
            Observation::new("m2", "s01", 0.5, 0.25, 1.0, 1.0).unwrap(),
        ];
        let analysis = run_analysis(&observations, &AnalysisConfig::default()).unwrap();
        assert!(analysis.correlations.iter().all(|(_, o)| o.is_err()));
        let bundle = render_tables(&analysis);
        assert_eq!(bundle.correlations.csv.lines().count(), 1); // header only
        assert!(bundle
            .correlations
            .text
            .contains("no correlations could be computed"));
    }

    #[test]
    fn single_model_skips_ranking_with_notice() {
        let observations = vec![
            Observation::new("only", "s01", 0.9, 0.1, 0.8, 0.8).unwrap(),
            Observation::new("only", "s02", 0.8, 0.15, 0.7, 0.9).unwrap(),
        ];
        let analysis = run_analysis(&observations, &AnalysisConfig::default()).unwrap();
        assert!(analysis.ranking.is_err());
        let bundle = render_tables(&analysis);
        assert!(bundle.selected.text.contains("ranking stability skipped"));
        assert_eq!(bundle.models.csv.lines().count() - 1, 1);
    }

    #[test]
    fn p_value_formatting() {
        assert_eq!(format_p(0.5), "0.500");
        assert_eq!(format_p(1.0), "1.00");
        assert_eq!(format_p(0.0742), "0.0742");
        assert_eq!(format_p(0.0033), "0.00330");
        assert_eq!(format_p(0.001), "0.00100");
        assert_eq!(format_p(2.22e-18), "2.22e-18");
        assert_eq!(format_p(7.84e-15), "7.84e-15");
        assert_eq!(format_p(0.0), "0");
    }

    #[test]
    fn fixed_formatting_rounds_half_to_even() {
        // 0.015625 = 2^-6 is exact in binary; the tie at two decimals
        // resolves to the even digit.
        assert_eq!(format_fixed(0.015625, 5), "0.01562");
        assert_eq!(format_fixed(0.046875, 5), "0.04688");
        assert_eq!(format_fixed(1.9062, 4), "1.9062");
    }
}
