//! Probabilistic indicator-term classifier.
//!
//! For a term `t` and provision `c`, with `R_c` the training requirements
//! traced to `c` and `D_c` the training documents containing any of them:
//!
//! * `f1 = count(t in R_c) / count(t in all training requirements)`
//! * `f2 = |{r in R_c : t in r}| / |R_c|`
//! * `f3 = |{d in D_c : t in some r in R_c of d}| / |D_c|`
//!
//! and the weight is `f1 * f2 * f3`. A requirement's score for `c` is the
//! weight of the indicator terms it contains over the total weight of `c`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess, Corpus, PreprocessConfig};
use crate::embeddings::SimilarityMatrix;
use crate::error::{Error, Result};

pub const INDICATOR_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermFactors {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl TermFactors {
    pub fn weight(&self) -> f64 {
        self.f1 * self.f2 * self.f3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorTermModel {
    format_version: u32,
    config: PreprocessConfig,
    /// Provision code to term to factors; only non-zero weights are kept.
    factors: BTreeMap<String, BTreeMap<String, TermFactors>>,
    /// Total weight per provision.
    normalizer: BTreeMap<String, f64>,
    /// Provisions with no training link, whose weight tables are empty.
    untrained: BTreeSet<String>,
}

/// Fits on the requirements of `train_doc_ids`, tokenized with `config`.
pub fn fit_indicator_model(
    corpus: &Corpus,
    train_doc_ids: &BTreeSet<String>,
    config: PreprocessConfig,
) -> Result<IndicatorTermModel> {
    config.validate()?;
    corpus.check_doc_ids(train_doc_ids)?;
    let gt = corpus.ground_truth();
    let mut total_count: BTreeMap<String, usize> = BTreeMap::new();
    // (doc id, tokens, codes) per training requirement
    let mut reqs = Vec::new();
    for doc in corpus.documents().iter().filter(|d| train_doc_ids.contains(&d.id)) {
        for r in &doc.requirements {
            let tokens = preprocess(&r.text, &config);
            for t in &tokens {
                *total_count.entry(t.clone()).or_default() += 1;
            }
            reqs.push((doc.id.as_str(), tokens, gt.links_for(&r.id)));
        }
    }
    if reqs.iter().all(|(_, _, codes)| codes.is_empty()) {
        return Err(Error::invalid("train_doc_ids", "training documents contain no trace link"));
    }
    let mut factors = BTreeMap::new();
    let mut normalizer = BTreeMap::new();
    let mut untrained = BTreeSet::new();
    for code in corpus.provision_codes() {
        let traced: Vec<&(&str, Vec<String>, BTreeSet<String>)> =
            reqs.iter().filter(|(_, _, codes)| codes.contains(&code)).collect();
        let mut table = BTreeMap::new();
        if traced.is_empty() {
            untrained.insert(code.clone());
        } else {
            let docs: BTreeSet<&str> = traced.iter().map(|(d, _, _)| *d).collect();
            let mut count: BTreeMap<&str, usize> = BTreeMap::new();
            let mut reqs_with: BTreeMap<&str, usize> = BTreeMap::new();
            let mut docs_with: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
            for (doc, tokens, _) in &traced {
                for t in tokens {
                    *count.entry(t).or_default() += 1;
                }
                for t in tokens.iter().map(String::as_str).collect::<BTreeSet<_>>() {
                    *reqs_with.entry(t).or_default() += 1;
                    docs_with.entry(t).or_default().insert(doc);
                }
            }
            for (t, c) in count {
                let f = TermFactors {
                    f1: c as f64 / total_count[t] as f64,
                    f2: reqs_with[t] as f64 / traced.len() as f64,
                    f3: docs_with[t].len() as f64 / docs.len() as f64,
                };
                if f.weight() > 0.0 {
                    table.insert(t.to_owned(), f);
                }
            }
        }
        normalizer.insert(code.clone(), table.values().map(TermFactors::weight).sum());
        factors.insert(code, table);
    }
    Ok(IndicatorTermModel {
        format_version: INDICATOR_FORMAT_VERSION,
        config,
        factors,
        normalizer,
        untrained,
    })
}

impl IndicatorTermModel {
    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn factors(&self, code: &str) -> Option<&BTreeMap<String, TermFactors>> {
        self.factors.get(code)
    }

    pub fn weight(&self, term: &str, code: &str) -> f64 {
        self.factors
            .get(code)
            .and_then(|t| t.get(term))
            .map_or(0.0, TermFactors::weight)
    }

    pub fn untrained_provisions(&self) -> &BTreeSet<String> {
        &self.untrained
    }

    /// Share of `code`'s indicator weight present in `tokens`; 0 for codes
    /// without weights.
    pub fn score(&self, tokens: &[String], code: &str) -> f64 {
        let (Some(table), Some(&total)) = (self.factors.get(code), self.normalizer.get(code)) else {
            return 0.0;
        };
        if total <= 0.0 {
            return 0.0;
        }
        let present: BTreeSet<&str> = tokens.iter().map(String::as_str).collect();
        let hit: f64 = present.iter().filter_map(|t| table.get(*t)).map(TermFactors::weight).sum();
        (hit / total).clamp(0.0, 1.0)
    }

    pub fn score_text(&self, text: &str, code: &str) -> f64 {
        self.score(&preprocess(text, &self.config), code)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let m: IndicatorTermModel = serde_json::from_str(json).map_err(|e| Error::json("indicator model", e))?;
        if m.format_version != INDICATOR_FORMAT_VERSION {
            return Err(Error::invalid("format_version", format!("unsupported version {}", m.format_version)));
        }
        Ok(m)
    }
}

/// Indicator scores of `(id, text)` requirements against `codes`.
pub fn indicator_similarity_matrix(
    model: &IndicatorTermModel,
    reqs: &[(String, String)],
    codes: &[String],
) -> Result<SimilarityMatrix> {
    let scores = reqs
        .iter()
        .map(|(_, text)| {
            let tokens = preprocess(text, &model.config);
            codes.iter().map(|c| model.score(&tokens, c)).collect()
        })
        .collect();
    SimilarityMatrix::new(reqs.iter().map(|(id, _)| id.clone()).collect(), codes.to_vec(), scores)
}
