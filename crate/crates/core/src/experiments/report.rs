//! Experiment reports and their markdown / CSV renderings.
//!
//! Numbers print with three decimals. Rendering is a pure function of the
//! report, so identical reports render to identical bytes.

use std::fmt::Write as _;

/// One metric across the report's columns. Missing cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub metric: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub title: String,
    /// Condition names, e.g. `C`, `C′`, `ΔC`, or `C`, `S`, `system`.
    pub columns: Vec<String>,
    pub rows: Vec<MetricRow>,
    /// Externally computed scores not tied to a column.
    pub external: Vec<(String, f64)>,
    pub provenance: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Markdown => "md",
            Self::Csv => "csv",
        }
    }
}

impl ExperimentReport {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn add_row(&mut self, metric: &str, values: Vec<Option<f64>>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(MetricRow {
            metric: metric.to_string(),
            values,
        });
    }

    /// Sets one cell, creating the row if needed. False if `column` is unknown.
    pub fn set_cell(&mut self, metric: &str, column: &str, value: f64) -> bool {
        let Some(ci) = self.columns.iter().position(|c| c == column) else {
            return false;
        };
        let width = self.columns.len();
        let row = match self.rows.iter().position(|r| r.metric == metric) {
            Some(i) => &mut self.rows[i],
            None => {
                self.rows.push(MetricRow {
                    metric: metric.to_string(),
                    values: vec![None; width],
                });
                self.rows.last_mut().unwrap()
            }
        };
        row.values[ci] = Some(value);
        true
    }

    pub fn get(&self, metric: &str, column: &str) -> Option<f64> {
        let ci = self.columns.iter().position(|c| c == column)?;
        self.rows.iter().find(|r| r.metric == metric)?.values[ci]
    }

    pub fn has_metric(&self, metric: &str) -> bool {
        self.rows.iter().any(|r| r.metric == metric)
    }

    pub fn external_score(&self, metric: &str) -> Option<f64> {
        self.external
            .iter()
            .find(|(m, _)| m == metric)
            .map(|(_, v)| *v)
    }

    pub fn provenance_value(&self, key: &str) -> Option<&str> {
        self.provenance
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

pub fn format_number(v: f64) -> String {
    let s = format!("{v:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn render_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Markdown => render_markdown(report),
        ReportFormat::Csv => render_csv(report),
    }
}

fn md_row(out: &mut String, cells: impl IntoIterator<Item = String>) {
    out.push('|');
    for c in cells {
        let _ = write!(out, " {} |", c.replace('|', "\\|"));
    }
    out.push('\n');
}

fn render_markdown(r: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}\n", r.title);
    md_row(
        &mut out,
        std::iter::once("Metric".to_string()).chain(r.columns.iter().cloned()),
    );
    md_row(
        &mut out,
        std::iter::repeat_n("---".to_string(), r.columns.len() + 1),
    );
    for row in &r.rows {
        md_row(
            &mut out,
            std::iter::once(row.metric.clone()).chain(row.values.iter().map(|v| cell(*v))),
        );
    }
    if !r.external.is_empty() {
        out.push_str("\n## External metrics\n\n");
        md_row(&mut out, ["Metric".to_string(), "Value".to_string()]);
        md_row(&mut out, ["---".to_string(), "---".to_string()]);
        for (m, v) in &r.external {
            md_row(&mut out, [m.clone(), format_number(*v)]);
        }
    }
    out.push_str("\n## Provenance\n\n");
    md_row(&mut out, ["Key".to_string(), "Value".to_string()]);
    md_row(&mut out, ["---".to_string(), "---".to_string()]);
    for (k, v) in &r.provenance {
        md_row(&mut out, [k.clone(), v.clone()]);
    }
    out
}

fn csv_section(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    for rec in records {
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8")
}

/// Sections (metrics, external scores, provenance) separated by blank lines.
fn render_csv(r: &ExperimentReport) -> String {
    let header = std::iter::once("metric".to_string())
        .chain(r.columns.iter().cloned())
        .collect();
    let rows = r.rows.iter().map(|row| {
        std::iter::once(row.metric.clone())
            .chain(row.values.iter().map(|v| cell(*v)))
            .collect()
    });
    let mut out = csv_section(std::iter::once(header).chain(rows));
    if !r.external.is_empty() {
        out.push('\n');
        out.push_str(&csv_section(
            std::iter::once(vec!["external_metric".to_string(), "value".to_string()]).chain(
                r.external
                    .iter()
                    .map(|(m, v)| vec![m.clone(), format_number(*v)]),
            ),
        ));
    }
    out.push('\n');
    out.push_str(&csv_section(
        std::iter::once(vec!["provenance".to_string(), "value".to_string()])
            .chain(r.provenance.iter().map(|(k, v)| vec![k.clone(), v.clone()])),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table1() -> ExperimentReport {
        let mut r = ExperimentReport::new("Reconstruction", &["C", "C′", "ΔC", "S", "S′", "ΔS"]);
        r.add_row(
            "FKGL",
            vec![
                Some(11.25),
                Some(11.175),
                Some(-0.075),
                Some(8.463),
                Some(8.546),
                Some(0.083),
            ],
        );
        r.provenance.push(("seed".into(), "42".into()));
        r
    }

    #[test]
    fn empty_metrics_give_header_only_table() {
        let r = ExperimentReport::new("Empty", &["C", "S"]);
        let md = render_report(&r, ReportFormat::Markdown);
        let table: Vec<_> = md.lines().skip(2).take_while(|l| !l.is_empty()).collect();
        assert_eq!(table, ["| Metric | C | S |", "| --- | --- | --- |"]);
        let csv = render_report(&r, ReportFormat::Csv);
        assert_eq!(csv.lines().next().unwrap(), "metric,C,S");
        assert_eq!(csv.lines().nth(1).unwrap(), "");
    }

    #[test]
    fn table1_layout_and_precision() {
        let md = render_report(&table1(), ReportFormat::Markdown);
        assert!(md.contains("| Metric | C | C′ | ΔC | S | S′ | ΔS |"));
        assert!(md.contains("| FKGL | 11.250 | 11.175 | -0.075 | 8.463 | 8.546 | 0.083 |"));
        assert!(md.contains("## Provenance"));
        assert!(md.contains("| seed | 42 |"));
        let csv = render_report(&table1(), ReportFormat::Csv);
        assert!(csv.contains("FKGL,11.250,11.175,-0.075,8.463,8.546,0.083"));
        assert!(csv.contains("seed,42"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let r = table1();
        for f in [ReportFormat::Markdown, ReportFormat::Csv] {
            assert_eq!(render_report(&r, f), render_report(&r.clone(), f));
        }
    }

    #[test]
    fn negative_zero_prints_as_zero() {
        assert_eq!(format_number(-0.0), "0.000");
        assert_eq!(format_number(-0.0004), "0.000");
        assert_eq!(format_number(38.0614), "38.061");
    }

    #[test]
    fn set_cell_creates_rows() {
        let mut r = table1();
        assert!(r.set_cell("BLEURT", "C′", 0.923));
        assert_eq!(r.get("BLEURT", "C′"), Some(0.923));
        assert_eq!(r.get("BLEURT", "C"), None);
        assert!(!r.set_cell("BLEURT", "nope", 1.0));
    }
}
