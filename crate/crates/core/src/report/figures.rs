//! Self-contained SVG figure emission.
//!
//! Fixed 800x600 canvas, no plotting dependency, byte-deterministic output.
//! Every figure embeds its plot data as an XML comment and ships with a
//! sidecar CSV holding exactly the numbers the drawing used.

use super::{FigureArtifact, ModelAggregate};
use crate::scoring::ScoreRecord;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;

const POINT_COLOR: &str = "#3b6ea5";
const BAR_COLOR: &str = "#5b8db8";
const BOX_FILL: &str = "#dce8f2";
const GUIDE_COLOR: &str = "#888888";

/// Emit all four figures for a scored dataset.
pub fn emit_figures(records: &[ScoreRecord], aggregates: &[ModelAggregate]) -> Vec<FigureArtifact> {
    vec![
        gain_by_model(aggregates),
        entropy_vs_generalized(records),
        reduced_vs_generalized(records),
        score_distributions(records),
    ]
}

fn gain_by_model(aggregates: &[ModelAggregate]) -> FigureArtifact {
    let mut sidecar = String::from("model,mean_gain,sd_gain\n");
    for a in aggregates {
        sidecar.push_str(&format!(
            "{},{},{}\n",
            a.model_id,
            a.mean_gain,
            a.sd_gain.map_or_else(|| "".into(), |v| v.to_string())
        ));
    }

    let y_top = aggregates
        .iter()
        .map(|a| a.mean_gain + a.sd_gain.unwrap_or(0.0))
        .fold(0.0_f64, f64::max)
        .max(1e-6)
        * 1.15;
    let frame = Frame::new(0.0, aggregates.len() as f64, 0.0, y_top);

    let mut svg = SvgBuilder::new("Mean stability gain by model", &sidecar);
    frame.draw_y_axis(&mut svg, "mean gain");
    // Categorical x axis: one slot per model.
    svg.line(frame.px(0.0), frame.py(0.0), frame.px(aggregates.len() as f64), frame.py(0.0));
    let slot = frame.plot_width() / aggregates.len() as f64;
    for (i, a) in aggregates.iter().enumerate() {
        let center = frame.px(i as f64 + 0.5);
        let bar_width = slot * 0.55;
        let top = frame.py(a.mean_gain);
        svg.rect(center - bar_width / 2.0, top, bar_width, frame.py(0.0) - top, BAR_COLOR);
        if let Some(sd) = a.sd_gain {
            let hi = frame.py((a.mean_gain + sd).min(frame.y_max));
            let lo = frame.py((a.mean_gain - sd).max(0.0));
            svg.stroke_line(center, hi, center, lo, GUIDE_COLOR, 1.5, None);
            svg.stroke_line(center - 6.0, hi, center + 6.0, hi, GUIDE_COLOR, 1.5, None);
            svg.stroke_line(center - 6.0, lo, center + 6.0, lo, GUIDE_COLOR, 1.5, None);
        }
        svg.text(center, frame.py(0.0) + 20.0, &a.model_id, "middle");
    }
    svg.text(WIDTH / 2.0, HEIGHT - 12.0, "model", "middle");

    FigureArtifact {
        name: "fig1_gain_by_model",
        svg: svg.finish(),
        sidecar_csv: sidecar,
    }
}

fn entropy_vs_generalized(records: &[ScoreRecord]) -> FigureArtifact {
    let mut sidecar = String::from("model,scenario,entropy,generalized\n");
    for r in records {
        sidecar.push_str(&format!(
            "{},{},{},{}\n",
            r.observation.model_id, r.observation.scenario_id, r.observation.entropy, r.generalized
        ));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.observation.entropy).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.generalized).collect();
    let (x_min, x_max) = padded_range(&xs);
    let (y_min, y_max) = padded_range(&ys);
    let frame = Frame::new(x_min, x_max, y_min, y_max);

    let mut svg = SvgBuilder::new("Entropy vs generalized score", &sidecar);
    frame.draw_axes(&mut svg, "entropy", "generalized score");
    for (x, y) in xs.iter().zip(&ys) {
        svg.circle(frame.px(*x), frame.py(*y), 3.0, POINT_COLOR);
    }
    FigureArtifact {
        name: "fig2_entropy_vs_estar",
        svg: svg.finish(),
        sidecar_csv: sidecar,
    }
}

fn reduced_vs_generalized(records: &[ScoreRecord]) -> FigureArtifact {
    let mut sidecar = String::from("model,scenario,reduced,generalized\n");
    for r in records {
        sidecar.push_str(&format!(
            "{},{},{},{}\n",
            r.observation.model_id, r.observation.scenario_id, r.reduced, r.generalized
        ));
    }
    // Shared range keeps the identity line at 45 degrees in data space.
    let all: Vec<f64> = records
        .iter()
        .flat_map(|r| [r.reduced, r.generalized])
        .collect();
    let (lo, hi) = padded_range(&all);
    let frame = Frame::new(lo, hi, lo, hi);

    let mut svg = SvgBuilder::new("Reduced vs generalized score", &sidecar);
    frame.draw_axes(&mut svg, "reduced score", "generalized score");
    // Dashed equality guide.
    svg.stroke_line(
        frame.px(lo),
        frame.py(lo),
        frame.px(hi),
        frame.py(hi),
        GUIDE_COLOR,
        1.0,
        Some("6,4"),
    );
    for r in records {
        svg.circle(frame.px(r.reduced), frame.py(r.generalized), 3.0, POINT_COLOR);
    }
    FigureArtifact {
        name: "fig3_e_vs_estar",
        svg: svg.finish(),
        sidecar_csv: sidecar,
    }
}

fn score_distributions(records: &[ScoreRecord]) -> FigureArtifact {
    let reduced: Vec<f64> = records.iter().map(|r| r.reduced).collect();
    let generalized: Vec<f64> = records.iter().map(|r| r.generalized).collect();
    let series = [("reduced", &reduced), ("generalized", &generalized)];

    let mut sidecar = String::from("series,statistic,value\n");
    let mut stats = Vec::new();
    for (name, values) in &series {
        let s = box_stats(values);
        sidecar.push_str(&format!("{name},whisker_low,{}\n", s.whisker_low));
        sidecar.push_str(&format!("{name},q1,{}\n", s.q1));
        sidecar.push_str(&format!("{name},median,{}\n", s.median));
        sidecar.push_str(&format!("{name},q3,{}\n", s.q3));
        sidecar.push_str(&format!("{name},whisker_high,{}\n", s.whisker_high));
        for outlier in &s.outliers {
            sidecar.push_str(&format!("{name},outlier,{outlier}\n"));
        }
        stats.push((*name, s));
    }

    let all: Vec<f64> = reduced.iter().chain(&generalized).copied().collect();
    let (lo, hi) = padded_range(&all);
    let frame = Frame::new(0.0, stats.len() as f64, lo, hi);

    let mut svg = SvgBuilder::new("Score distributions", &sidecar);
    frame.draw_y_axis(&mut svg, "score");
    svg.line(frame.px(0.0), frame.py(lo), frame.px(stats.len() as f64), frame.py(lo));
    let slot = frame.plot_width() / stats.len() as f64;
    for (i, (name, s)) in stats.iter().enumerate() {
        let center = frame.px(i as f64 + 0.5);
        let half = slot * 0.22;
        // Whisker stem and caps.
        svg.stroke_line(center, frame.py(s.whisker_high), center, frame.py(s.q3), GUIDE_COLOR, 1.0, None);
        svg.stroke_line(center, frame.py(s.q1), center, frame.py(s.whisker_low), GUIDE_COLOR, 1.0, None);
        svg.stroke_line(center - half / 2.0, frame.py(s.whisker_high), center + half / 2.0, frame.py(s.whisker_high), GUIDE_COLOR, 1.0, None);
        svg.stroke_line(center - half / 2.0, frame.py(s.whisker_low), center + half / 2.0, frame.py(s.whisker_low), GUIDE_COLOR, 1.0, None);
        // Box and median.
        svg.outlined_rect(
            center - half,
            frame.py(s.q3),
            2.0 * half,
            frame.py(s.q1) - frame.py(s.q3),
            BOX_FILL,
            POINT_COLOR,
        );
        svg.stroke_line(center - half, frame.py(s.median), center + half, frame.py(s.median), POINT_COLOR, 2.0, None);
        for outlier in &s.outliers {
            svg.circle(center, frame.py(*outlier), 2.5, GUIDE_COLOR);
        }
        svg.text(center, frame.py(lo) + 20.0, name, "middle");
    }

    FigureArtifact {
        name: "fig4_distributions",
        svg: svg.finish(),
        sidecar_csv: sidecar,
    }
}

pub(crate) struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Quartiles by linear interpolation between order statistics; whiskers at
/// the most extreme points within 1.5 IQR of the box.
pub(crate) fn box_stats(values: &[f64]) -> BoxStats {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let quantile = |p: f64| -> f64 {
        let pos = p * (sorted.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
    };
    let q1 = quantile(0.25);
    let median = quantile(0.5);
    let q3 = quantile(0.75);
    let iqr = q3 - q1;
    let low_fence = q1 - 1.5 * iqr;
    let high_fence = q3 + 1.5 * iqr;
    let whisker_low = sorted
        .iter()
        .copied()
        .find(|v| *v >= low_fence)
        .unwrap_or(q1);
    let whisker_high = sorted
        .iter()
        .rev()
        .copied()
        .find(|v| *v <= high_fence)
        .unwrap_or(q3);
    let outliers = sorted
        .iter()
        .copied()
        .filter(|v| *v < low_fence || *v > high_fence)
        .collect();
    BoxStats {
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers,
    }
}

fn padded_range(values: &[f64]) -> (f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = (max - min).max(1e-9);
    (min - 0.05 * span, max + 0.05 * span)
}

/// Affine map from data space to the fixed plot area.
struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn plot_width(&self) -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_height(&self) -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * self.plot_width()
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y_min) / (self.y_max - self.y_min) * self.plot_height()
    }

    fn draw_axes(&self, svg: &mut SvgBuilder, x_label: &str, y_label: &str) {
        self.draw_y_axis(svg, y_label);
        svg.line(self.px(self.x_min), self.py(self.y_min), self.px(self.x_max), self.py(self.y_min));
        for tick in linear_ticks(self.x_min, self.x_max) {
            let x = self.px(tick);
            let y = self.py(self.y_min);
            svg.line(x, y, x, y + 5.0);
            svg.text(x, y + 20.0, &tick_label(tick), "middle");
        }
        svg.text(WIDTH / 2.0, HEIGHT - 12.0, x_label, "middle");
    }

    fn draw_y_axis(&self, svg: &mut SvgBuilder, y_label: &str) {
        svg.line(self.px(self.x_min), self.py(self.y_min), self.px(self.x_min), self.py(self.y_max));
        for tick in linear_ticks(self.y_min, self.y_max) {
            let x = self.px(self.x_min);
            let y = self.py(tick);
            svg.line(x - 5.0, y, x, y);
            svg.text(x - 8.0, y + 4.0, &tick_label(tick), "end");
        }
        svg.vertical_text(18.0, HEIGHT / 2.0, y_label);
    }
}

/// Tick positions with a 1/2/5 step covering [min, max].
fn linear_ticks(min: f64, max: f64) -> Vec<f64> {
    let span = (max - min).max(1e-12);
    let raw_step = span / 5.0;
    let magnitude = 10f64.powf(raw_step.log10().floor());
    let normalized = raw_step / magnitude;
    let step = if normalized <= 1.0 {
        1.0
    } else if normalized <= 2.0 {
        2.0
    } else if normalized <= 5.0 {
        5.0
    } else {
        10.0
    } * magnitude;
    let mut ticks = Vec::new();
    let mut tick = (min / step).ceil() * step;
    while tick <= max + step * 1e-9 {
        // Snap near-zero ticks to exactly zero for clean labels.
        ticks.push(if tick.abs() < step * 1e-9 { 0.0 } else { tick });
        tick += step;
    }
    ticks
}

fn tick_label(value: f64) -> String {
    let mut label = format!("{value:.4}");
    while label.contains('.') && label.ends_with('0') {
        label.pop();
    }
    if label.ends_with('.') {
        label.pop();
    }
    label
}

/// Minimal deterministic SVG writer.
struct SvgBuilder {
    buf: String,
}

impl SvgBuilder {
    fn new(title: &str, embedded_data: &str) -> Self {
        let mut buf = String::new();
        buf.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        // Embed the plot data so the figure is self-describing. XML comments
        // must not contain "--".
        buf.push_str("<!-- plot-data\n");
        buf.push_str(&embedded_data.replace("--", "- -"));
        buf.push_str("-->\n");
        buf.push_str(&format!(
            "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        buf.push_str(&format!(
            "<text x=\"{:.2}\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        ));
        Self { buf }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64) {
        self.stroke_line(x1, y1, x2, y2, "black", 1.0, None);
    }

    #[allow(clippy::too_many_arguments)]
    fn stroke_line(
        &mut self,
        x1: f64,
        y1: f64,
        x2: f64,
        y2: f64,
        color: &str,
        width: f64,
        dash: Option<&str>,
    ) {
        let dash_attr = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        self.buf.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"{color}\" stroke-width=\"{width}\"{dash_attr}/>\n"
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.buf.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>\n"
        ));
    }

    fn outlined_rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        self.buf.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\" stroke=\"{stroke}\"/>\n"
        ));
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        self.buf.push_str(&format!(
            "<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r}\" fill=\"{fill}\" fill-opacity=\"0.8\"/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, content: &str, anchor: &str) {
        self.buf.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\" font-family=\"monospace\" font-size=\"12\">{}</text>\n",
            escape(content)
        ));
    }

    fn vertical_text(&mut self, x: f64, y: f64, content: &str) {
        self.buf.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"12\" transform=\"rotate(-90 {x:.2} {y:.2})\">{}</text>\n",
            escape(content)
        ));
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::aggregate_by_model;
    use crate::scoring::{score_dataset, CoefficientSet, Observation};
    use crate::synth::{generate_dataset, SyntheticSpec, PAPER_PRESET_SEED};

    fn paper_records() -> Vec<ScoreRecord> {
        let ds = generate_dataset(&SyntheticSpec::paper_preset(PAPER_PRESET_SEED)).unwrap();
        score_dataset(&ds.observations, &CoefficientSet::default()).unwrap()
    }

    #[test]
    fn four_figures_with_expected_names() {
        let records = paper_records();
        let aggregates = aggregate_by_model(&records).unwrap();
        let figures = emit_figures(&records, &aggregates);
        let names: Vec<&str> = figures.iter().map(|f| f.name).collect();
        assert_eq!(
            names,
            vec![
                "fig1_gain_by_model",
                "fig2_entropy_vs_estar",
                "fig3_e_vs_estar",
                "fig4_distributions"
            ]
        );
        for figure in &figures {
            assert!(figure.svg.starts_with("<svg"));
            assert!(figure.svg.ends_with("</svg>\n"));
            assert!(figure.svg.contains("plot-data"));
            assert!(!figure.sidecar_csv.is_empty());
        }
    }

    #[test]
    fn bar_sidecar_matches_aggregates() {
        let records = paper_records();
        let aggregates = aggregate_by_model(&records).unwrap();
        let figures = emit_figures(&records, &aggregates);
        let sidecar = &figures[0].sidecar_csv;
        let rows: Vec<&str> = sidecar.lines().skip(1).collect();
        assert_eq!(rows.len(), aggregates.len());
        for (row, aggregate) in rows.iter().zip(&aggregates) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields[0], aggregate.model_id);
            let mean: f64 = fields[1].parse().unwrap();
            assert_eq!(mean, aggregate.mean_gain);
        }
    }

    #[test]
    fn identity_scatter_points_lie_above_line_on_calibrated_data() {
        let records = paper_records();
        for r in &records {
            assert!(r.generalized > r.reduced);
        }
        // And with zero entropy every point sits exactly on the line.
        let flat = score_dataset(
            &[
                Observation::new("m", "s01", 0.9, 0.0, 0.8, 0.8).unwrap(),
                Observation::new("m", "s02", 0.7, 0.0, 0.6, 0.9).unwrap(),
            ],
            &CoefficientSet::default(),
        )
        .unwrap();
        for r in &flat {
            assert_eq!(r.generalized, r.reduced);
        }
        let aggregates = aggregate_by_model(&flat).unwrap();
        let figures = emit_figures(&flat, &aggregates);
        let sidecar = &figures[2].sidecar_csv;
        for row in sidecar.lines().skip(1) {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields[2], fields[3]);
        }
    }

    #[test]
    fn box_stats_quartile_interpolation() {
        let s = box_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert!((s.q1 - 1.75).abs() < 1e-15);
        assert!((s.median - 2.5).abs() < 1e-15);
        assert!((s.q3 - 3.25).abs() < 1e-15);
        assert!(s.outliers.is_empty());
        assert_eq!(s.whisker_low, 1.0);
        assert_eq!(s.whisker_high, 4.0);
    }

    #[test]
    fn box_stats_flags_outliers() {
        let mut values: Vec<f64> = (0..20).map(|i| 0.5 + i as f64 * 0.01).collect();
        values.push(5.0);
        let s = box_stats(&values);
        assert_eq!(s.outliers, vec![5.0]);
        assert!(s.whisker_high < 5.0);
    }

    #[test]
    fn emission_is_deterministic() {
        let records = paper_records();
        let aggregates = aggregate_by_model(&records).unwrap();
        let a = emit_figures(&records, &aggregates);
        let b = emit_figures(&records, &aggregates);
        for (fa, fb) in a.iter().zip(&b) {
            assert_eq!(fa.svg, fb.svg);
            assert_eq!(fa.sidecar_csv, fb.sidecar_csv);
        }
    }
}
