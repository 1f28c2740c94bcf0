//! Scores produced by learned metrics (BLEURT, LENS, CEFR predictors, ...)
//! computed elsewhere and carried into reports verbatim.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::MetricsError;
use crate::experiments::ExperimentReport;

/// One `{"metric": ..., "value": ...}` line. `condition`, when present, names
/// the report column the value belongs to (e.g. `"C′"` or `"system"`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ExternalScore {
    pub metric: String,
    pub value: f64,
    #[serde(default)]
    pub condition: Option<String>,
}

pub fn load_external_scores(path: &Path) -> Result<Vec<ExternalScore>, MetricsError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<ExternalScore>(l)
                .ok()
                .filter(|s| s.value.is_finite())
                .ok_or(MetricsError::MalformedRecord(i + 1))
        })
        .collect()
}

/// Adds every score in `scores_path` to `report` without recomputing anything.
pub fn merge_external_scores(
    mut report: ExperimentReport,
    scores_path: &Path,
) -> Result<ExperimentReport, MetricsError> {
    let scores = load_external_scores(scores_path)?;
    for (i, s) in scores.into_iter().enumerate() {
        match s.condition {
            Some(cond) => {
                if !report.set_cell(&s.metric, &cond, s.value) {
                    return Err(MetricsError::UnknownCondition {
                        line: i + 1,
                        condition: cond,
                    });
                }
            }
            None => report.external.push((s.metric, s.value)),
        }
    }
    Ok(report)
}
