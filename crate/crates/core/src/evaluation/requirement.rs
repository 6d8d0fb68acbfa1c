//! Per-requirement outcome classes, macro recall and vetting cost.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::TraceLinkSet;
use crate::error::{Error, Result};
use crate::linker::PredictionSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchMode {
    /// Prediction is a strict superset of a non-empty ground truth.
    #[default]
    Superset,
    /// Prediction shares at least one code with the ground truth.
    Overlap,
}

impl std::str::FromStr for MatchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "superset" => Ok(Self::Superset),
            "overlap" => Ok(Self::Overlap),
            other => Err(Error::invalid("match_mode", format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    Exact,
    Partial,
    Incorrect,
}

pub fn classify(pred: &BTreeSet<String>, gt: &BTreeSet<String>, mode: MatchMode) -> MatchOutcome {
    if pred == gt {
        return MatchOutcome::Exact;
    }
    let partial = match mode {
        MatchMode::Superset => !gt.is_empty() && pred.is_superset(gt),
        MatchMode::Overlap => !pred.is_disjoint(gt),
    };
    if partial {
        MatchOutcome::Partial
    } else {
        MatchOutcome::Incorrect
    }
}

/// Recall of one requirement; 1 when both sets are empty, 0 when only the
/// ground truth is empty.
pub fn requirement_recall(pred: &BTreeSet<String>, gt: &BTreeSet<String>) -> f64 {
    match (gt.is_empty(), pred.is_empty()) {
        (true, true) => 1.0,
        (true, false) => 0.0,
        _ => pred.intersection(gt).count() as f64 / gt.len() as f64,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequirementLevelReport {
    pub n_requirements: usize,
    pub exact_match: usize,
    pub partial_match: usize,
    pub incorrect: usize,
    pub success_rate: f64,
    pub macro_recall: f64,
    pub cost: f64,
}

impl RequirementLevelReport {
    /// Builds the ratios from raw counts, for published tables that report
    /// only counts.
    pub fn from_counts(exact: usize, partial: usize, n: usize) -> Self {
        Self {
            n_requirements: n,
            exact_match: exact,
            partial_match: partial,
            incorrect: n - exact - partial,
            success_rate: if n == 0 { 0.0 } else { (exact + partial) as f64 / n as f64 },
            macro_recall: 0.0,
            cost: 0.0,
        }
    }
}

/// Requirements without a prediction entry count as predicting nothing.
pub fn requirement_level_report(
    pred: &PredictionSet,
    gt: &TraceLinkSet,
    req_ids: &[String],
    n_provisions: usize,
    mode: MatchMode,
) -> Result<RequirementLevelReport> {
    if n_provisions == 0 {
        return Err(Error::invalid("n_provisions", "catalog is empty"));
    }
    let empty = BTreeSet::new();
    let mut report = RequirementLevelReport::from_counts(0, 0, 0);
    report.n_requirements = req_ids.len();
    let (mut recall_sum, mut cost_sum) = (0.0, 0.0);
    for r in req_ids {
        let p = pred.codes_for(r).unwrap_or(&empty);
        let g = gt.links_for(r);
        match classify(p, &g, mode) {
            MatchOutcome::Exact => report.exact_match += 1,
            MatchOutcome::Partial => report.partial_match += 1,
            MatchOutcome::Incorrect => report.incorrect += 1,
        }
        recall_sum += requirement_recall(p, &g);
        cost_sum += p.len() as f64 / n_provisions as f64;
    }
    if !req_ids.is_empty() {
        let n = req_ids.len() as f64;
        report.success_rate = (report.exact_match + report.partial_match) as f64 / n;
        report.macro_recall = recall_sum / n;
        report.cost = cost_sum / n;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(codes: &[&str]) -> BTreeSet<String> {
        codes.iter().map(|c| (*c).to_owned()).collect()
    }

    #[test]
    fn published_success_rate() {
        let r = RequirementLevelReport::from_counts(19, 16, 73);
        assert!((r.success_rate * 100.0 - 47.9).abs() <= 0.05);
    }

    #[test]
    fn outcome_classes() {
        assert_eq!(classify(&set(&[]), &set(&[]), MatchMode::Superset), MatchOutcome::Exact);
        assert_eq!(classify(&set(&["A", "B"]), &set(&["A"]), MatchMode::Superset), MatchOutcome::Partial);
        assert_eq!(classify(&set(&["A"]), &set(&["A", "B"]), MatchMode::Superset), MatchOutcome::Incorrect);
        assert_eq!(classify(&set(&["A"]), &set(&["A", "B"]), MatchMode::Overlap), MatchOutcome::Partial);
        assert_eq!(classify(&set(&["A"]), &set(&[]), MatchMode::Superset), MatchOutcome::Incorrect);
    }

    #[test]
    fn recall_conventions() {
        assert_eq!(requirement_recall(&set(&[]), &set(&[])), 1.0);
        assert_eq!(requirement_recall(&set(&["A"]), &set(&[])), 0.0);
        assert_eq!(requirement_recall(&set(&["A"]), &set(&["A", "B"])), 0.5);
    }

    #[test]
    fn report_arithmetic() {
        let mut pred = PredictionSet::empty("t", &[]);
        pred.insert("R1", "A");
        pred.insert("R1", "B");
        let gt: TraceLinkSet = [("R1".to_owned(), "A".to_owned())].into_iter().collect();
        let ids = vec!["R1".to_owned(), "R2".to_owned()];
        let r = requirement_level_report(&pred, &gt, &ids, 26, MatchMode::Superset).unwrap();
        assert_eq!((r.exact_match, r.partial_match, r.incorrect), (1, 1, 0));
        assert_eq!(r.success_rate, 1.0);
        assert_eq!(r.macro_recall, 1.0);
        assert!((r.cost - (2.0 / 26.0) / 2.0).abs() < 1e-15);
    }
}
