//! Machine (JSON, CSV) and human (plain-text table) renderings of results.

use serde::{Deserialize, Serialize};

use super::metrics::{
    confusion, map_score, mean_undefined_as_zero, pooled_pairs, roc_auc, std_undefined_as_zero, AucMode,
    ConfusionCounts,
};
use super::requirement::RequirementLevelReport;
use crate::corpus::TraceLinkSet;
use crate::embeddings::SimilarityMatrix;
use crate::error::{Error, Result};
use crate::linker::PredictionSet;

/// Link-level metrics of one evaluation unit. Ranking metrics are absent when
/// no score surface is available or they are undefined on the unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkMetrics {
    pub counts: ConfusionCounts,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f2: Option<f64>,
    pub map: Option<f64>,
    pub auc: Option<f64>,
}

impl LinkMetrics {
    pub fn from_counts(counts: ConfusionCounts) -> Self {
        Self {
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f2: counts.f2(),
            map: None,
            auc: None,
        }
    }
}

fn undefined_to_none(r: Result<f64>) -> Result<Option<f64>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Undefined(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Counts over `matrix`'s rows and columns, plus MAP and full-mode AUC of
/// its scores.
pub fn link_metrics(
    pred: &PredictionSet,
    gt: &TraceLinkSet,
    matrix: &SimilarityMatrix,
    auc_mode: AucMode,
) -> Result<LinkMetrics> {
    let rows: Vec<&str> = matrix.req_ids().iter().map(String::as_str).collect();
    let gt = gt.restrict(rows.iter().copied());
    let pred = pred.restrict(rows.iter().copied());
    let mut m = LinkMetrics::from_counts(confusion(&pred, &gt, matrix.req_ids(), matrix.prov_codes())?);
    m.map = undefined_to_none(map_score(matrix, &gt))?;
    let (scores, labels) = pooled_pairs(matrix, &gt);
    m.auc = undefined_to_none(roc_auc(&scores, &labels, auc_mode))?;
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentRow {
    pub doc_id: String,
    #[serde(flatten)]
    pub metrics: LinkMetrics,
}

/// Mean and population deviation across documents, undefined values as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl Spread {
    pub fn of(values: &[Option<f64>]) -> Self {
        Self {
            mean: mean_undefined_as_zero(values),
            std: std_undefined_as_zero(values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: String,
    /// Metrics of the summed counts.
    pub pooled: LinkMetrics,
    pub precision: Spread,
    pub recall: Spread,
    pub f2: Spread,
    pub map: Spread,
    pub auc: Spread,
    pub documents: Vec<DocumentRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement_level: Option<RequirementLevelReport>,
}

impl MetricsReport {
    pub fn from_documents(strategy: impl Into<String>, documents: Vec<DocumentRow>) -> Self {
        let collect = |f: fn(&LinkMetrics) -> Option<f64>| -> Vec<Option<f64>> {
            documents.iter().map(|d| f(&d.metrics)).collect()
        };
        let pooled = LinkMetrics::from_counts(documents.iter().map(|d| d.metrics.counts).sum());
        Self {
            strategy: strategy.into(),
            pooled,
            precision: Spread::of(&collect(|m| m.precision)),
            recall: Spread::of(&collect(|m| m.recall)),
            f2: Spread::of(&collect(|m| m.f2)),
            map: Spread::of(&collect(|m| m.map)),
            auc: Spread::of(&collect(|m| m.auc)),
            documents,
            requirement_level: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned table: one row per document then the average row.
    pub fn to_table(&self) -> String {
        let mut t = TextTable::new(&["Document", "TP", "FP", "FN", "P", "R", "F2", "MAP", "AUC"]);
        for d in &self.documents {
            let m = &d.metrics;
            t.row(vec![
                d.doc_id.clone(),
                m.counts.tp.to_string(),
                m.counts.fp.to_string(),
                m.counts.fn_.to_string(),
                percent(m.precision),
                percent(m.recall),
                percent(m.f2),
                percent(m.map),
                percent(m.auc),
            ]);
        }
        let c = self.pooled.counts;
        t.row(vec![
            "Average".into(),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            percent(self.precision.mean),
            percent(self.recall.mean),
            percent(self.f2.mean),
            percent(self.map.mean),
            percent(self.auc.mean),
        ]);
        format!("strategy: {}\n{}", self.strategy, t.render())
    }
}

/// One decimal percentage, `nan` when undefined.
pub fn percent(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".to_owned(), |v| format!("{:.1}", v * 100.0))
}

/// Minimal column-aligned plain-text table.
pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| (*h).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.header.len(), "row width");
        self.rows.push(cells);
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|i| {
                std::iter::once(&self.header)
                    .chain(&self.rows)
                    .map(|r| r[i].chars().count())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            parts.join("  ").trim_end().to_owned() + "\n"
        };
        let mut out = line(&self.header);
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1)));
        out.push('\n');
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }
}

/// `fpr,tpr` lines.
pub fn roc_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (fpr, tpr) in points {
        out.push_str(&format!("{fpr},{tpr}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_marks_undefined_scores() {
        let rows = vec![
            DocumentRow {
                doc_id: "RD1".into(),
                metrics: LinkMetrics::from_counts(ConfusionCounts::new(0, 1, 57, 0)),
            },
            DocumentRow {
                doc_id: "RD2".into(),
                metrics: LinkMetrics::from_counts(ConfusionCounts::new(111, 114, 54, 0)),
            },
        ];
        let report = MetricsReport::from_documents("constant", rows);
        let table = report.to_table();
        assert!(table.contains("nan"));
        assert!(table.contains("62.7"));
        assert_eq!(report.pooled.counts.fn_, 111);
        let back: MetricsReport = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(back, report);
    }
}
