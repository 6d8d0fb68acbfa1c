//! Link-level metrics: confusion counts, precision/recall/F-beta, mean
//! average precision and micro ROC-AUC.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::TraceLinkSet;
use crate::embeddings::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::linker::PredictionSet;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Undefined when nothing was predicted.
    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    /// Undefined when there is nothing to find.
    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f2(&self) -> Option<f64> {
        f_beta(self, 2.0)
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.fn_ + o.fn_, self.tn + o.tn)
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `(1 + b^2) P R / (b^2 P + R)`; absent when there is no true positive.
/// Evaluated as `(1 + b^2) TP / ((1 + b^2) TP + b^2 FN + FP)`, so for integer
/// `b^2` equal ratios of counts give bit-identical scores.
pub fn f_beta(counts: &ConfusionCounts, beta: f64) -> Option<f64> {
    assert!(beta > 0.0, "beta must be positive");
    if counts.tp == 0 {
        return None;
    }
    let b2 = beta * beta;
    let num = (1.0 + b2) * counts.tp as f64;
    Some(num / (num + b2 * counts.fn_ as f64 + counts.fp as f64))
}

pub fn f_beta_from(precision: Option<f64>, recall: Option<f64>, beta: f64) -> Option<f64> {
    let (p, r) = (precision?, recall?);
    let b2 = beta * beta;
    let den = b2 * p + r;
    (den > 0.0).then(|| (1.0 + b2) * p * r / den)
}

/// Mean of per-document scores where an undefined score counts as 0.
pub fn mean_undefined_as_zero(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().map(|v| v.unwrap_or(0.0)).sum::<f64>() / values.len() as f64)
}

/// Population standard deviation, undefined entries as 0.
pub fn std_undefined_as_zero(values: &[Option<f64>]) -> Option<f64> {
    let mean = mean_undefined_as_zero(values)?;
    let var = values
        .iter()
        .map(|v| (v.unwrap_or(0.0) - mean).powi(2))
        .sum::<f64>()
        / values.len() as f64;
    Some(var.sqrt())
}

fn check_universe(
    links: impl Iterator<Item = (String, String)>,
    reqs: &BTreeSet<&str>,
    codes: &BTreeSet<&str>,
    what: &'static str,
) -> Result<()> {
    for (r, c) in links {
        if !reqs.contains(r.as_str()) {
            return Err(Error::Dangling {
                field: what.into(),
                kind: "requirement",
                id: r,
            });
        }
        if !codes.contains(c.as_str()) {
            return Err(Error::Dangling {
                field: format!("{what}.{r}"),
                kind: "provision code",
                id: c,
            });
        }
    }
    Ok(())
}

/// Counts over the full `req_ids x codes` universe.
pub fn confusion(
    pred: &PredictionSet,
    gt: &TraceLinkSet,
    req_ids: &[String],
    codes: &[String],
) -> Result<ConfusionCounts> {
    let req_set: BTreeSet<&str> = req_ids.iter().map(String::as_str).collect();
    let code_set: BTreeSet<&str> = codes.iter().map(String::as_str).collect();
    check_universe(
        pred.links().map(|(r, c)| (r.to_owned(), c.to_owned())),
        &req_set,
        &code_set,
        "predictions",
    )?;
    check_universe(
        gt.iter().map(|(r, c)| (r.to_owned(), c.to_owned())),
        &req_set,
        &code_set,
        "ground truth",
    )?;
    let mut counts = ConfusionCounts::default();
    for r in &req_set {
        for c in &code_set {
            match (pred.contains(r, c), gt.contains(r, c)) {
                (true, true) => counts.tp += 1,
                (true, false) => counts.fp += 1,
                (false, true) => counts.fn_ += 1,
                (false, false) => counts.tn += 1,
            }
        }
    }
    Ok(counts)
}

/// Provision indices of one matrix row ranked by descending score, ties by
/// ascending code.
pub fn rank_row(row: &[f64], codes: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .partial_cmp(&row[a])
            .unwrap_or(Ordering::Equal)
            .then_with(|| codes[a].cmp(&codes[b]))
    });
    order
}

/// Average precision of one ranking given relevance flags in rank order.
pub fn average_precision(relevant_in_rank_order: &[bool]) -> Option<f64> {
    let total = relevant_in_rank_order.iter().filter(|r| **r).count();
    if total == 0 {
        return None;
    }
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (k, rel) in relevant_in_rank_order.iter().enumerate() {
        if *rel {
            hits += 1;
            sum += hits as f64 / (k + 1) as f64;
        }
    }
    Some(sum / total as f64)
}

/// Mean over requirements with at least one ground-truth link of the
/// average precision of the provision ranking.
pub fn map_score(matrix: &SimilarityMatrix, gt: &TraceLinkSet) -> Result<f64> {
    let codes = matrix.prov_codes();
    let known: BTreeSet<&str> = codes.iter().map(String::as_str).collect();
    let mut aps = Vec::new();
    for (i, req_id) in matrix.req_ids().iter().enumerate() {
        let relevant = gt.links_for(req_id);
        if relevant.is_empty() {
            continue;
        }
        if let Some(c) = relevant.iter().find(|c| !known.contains(c.as_str())) {
            return Err(Error::Dangling {
                field: format!("ground truth.{req_id}"),
                kind: "provision code",
                id: c.clone(),
            });
        }
        let flags: Vec<bool> = rank_row(matrix.row(i), codes)
            .into_iter()
            .map(|j| relevant.contains(&codes[j]))
            .collect();
        aps.extend(average_precision(&flags));
    }
    if aps.is_empty() {
        return Err(Error::Undefined(
            "MAP is undefined: no requirement has a ground-truth link".into(),
        ));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Scores and labels of every (requirement, provision) cell, row-major.
pub fn pooled_pairs(matrix: &SimilarityMatrix, gt: &TraceLinkSet) -> (Vec<f64>, Vec<bool>) {
    let mut scores = Vec::with_capacity(matrix.n_rows() * matrix.n_cols());
    let mut labels = Vec::with_capacity(scores.capacity());
    for (i, req_id) in matrix.req_ids().iter().enumerate() {
        for (j, code) in matrix.prov_codes().iter().enumerate() {
            scores.push(matrix.get(i, j));
            labels.push(gt.contains(req_id, code));
        }
    }
    (scores, labels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AucMode {
    /// Rank statistic over all pairs, tied scores sharing the average rank.
    Full,
    /// Trapezoidal area under the (FPR, TPR) points obtained by thresholding
    /// at `lo, lo + step, ..., hi`, plus the (0,0) and (1,1) anchors.
    ThresholdSweep { lo: f64, hi: f64, step: f64 },
}

pub fn sweep_thresholds_between(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0 && hi >= lo);
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// (FPR, TPR) when predicting `score > theta`.
pub fn roc_point(scores: &[f64], labels: &[bool], theta: f64) -> (f64, f64) {
    let (mut tp, mut fp, mut pos, mut neg) = (0usize, 0usize, 0usize, 0usize);
    for (s, l) in scores.iter().zip(labels) {
        if *l {
            pos += 1;
            tp += usize::from(*s > theta);
        } else {
            neg += 1;
            fp += usize::from(*s > theta);
        }
    }
    (fp as f64 / neg.max(1) as f64, tp as f64 / pos.max(1) as f64)
}

/// Sorted ROC points (with anchors) for the given thresholds.
pub fn roc_curve(scores: &[f64], labels: &[bool], thresholds: &[f64]) -> Vec<(f64, f64)> {
    let mut points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|t| roc_point(scores, labels, *t))
        .collect();
    points.push((0.0, 0.0));
    points.push((1.0, 1.0));
    points.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    points
}

pub fn roc_auc(scores: &[f64], labels: &[bool], mode: AucMode) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("labels", "length differs from scores"));
    }
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::Undefined("ROC-AUC needs both classes".into()));
    }
    match mode {
        AucMode::Full => {
            let mut order: Vec<usize> = (0..scores.len()).collect();
            order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));
            let mut rank_sum_pos = 0.0;
            let mut i = 0;
            while i < order.len() {
                let mut j = i;
                while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
                    j += 1;
                }
                // ranks i+1 ..= j+1 share their mean
                let avg = (i + j) as f64 / 2.0 + 1.0;
                rank_sum_pos += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
                i = j + 1;
            }
            let (p, n) = (pos as f64, neg as f64);
            Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
        }
        AucMode::ThresholdSweep { lo, hi, step } => {
            let points = roc_curve(scores, labels, &sweep_thresholds_between(lo, hi, step));
            Ok(points
                .windows(2)
                .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
                .sum())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pct(x: Option<f64>) -> f64 {
        x.unwrap() * 100.0
    }

    #[test]
    fn published_kashif_constant_row() {
        let c = ConfusionCounts::new(111, 114, 54, 0);
        assert!((pct(c.precision()) - 49.3).abs() <= 0.05);
        assert!((pct(c.recall()) - 67.3).abs() <= 0.05);
        assert!((pct(c.f2()) - 62.7).abs() <= 0.05);
    }

    #[test]
    fn f_beta_undefined_without_true_positives() {
        assert_eq!(ConfusionCounts::new(0, 1, 57, 0).f2(), None);
        assert_eq!(ConfusionCounts::new(0, 0, 0, 9).f2(), None);
    }

    #[test]
    fn f_beta_equals_p_when_p_equals_r() {
        let c = ConfusionCounts::new(3, 2, 2, 0);
        for beta in [0.5, 1.0, 2.0, 3.0] {
            assert!((f_beta(&c, beta).unwrap() - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn undefined_documents_average_as_zero() {
        let m = mean_undefined_as_zero(&[None, Some(24.9), None, Some(12.5)]).unwrap();
        assert!((m - 9.3).abs() <= 0.05);
    }

    #[test]
    fn average_precision_by_hand() {
        assert_eq!(average_precision(&[true, false, false]), Some(1.0));
        let ap = average_precision(&[true, false, true, false]).unwrap();
        assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
        assert_eq!(average_precision(&[false, false]), None);
    }

    #[test]
    fn auc_extremes() {
        let labels = [true, true, false, false];
        assert_eq!(roc_auc(&[0.9, 0.8, 0.2, 0.1], &labels, AucMode::Full).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels, AucMode::Full).unwrap(), 0.5);
        let sweep = AucMode::ThresholdSweep { lo: 0.1, hi: 0.9, step: 0.05 };
        assert_eq!(roc_auc(&[0.95, 0.8, 0.05, 0.02], &labels, sweep).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &labels, sweep).unwrap(), 0.5);
        assert!(roc_auc(&[0.1, 0.2], &[true, true], AucMode::Full).is_err());
    }

    #[test]
    fn sweep_grid_has_seventeen_points() {
        let grid = sweep_thresholds_between(0.1, 0.9, 0.05);
        assert_eq!(grid.len(), 17);
        assert!((grid[16] - 0.9).abs() < 1e-12);
    }
}
