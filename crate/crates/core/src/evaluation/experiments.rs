//! Document-level leave-one-out splits and embedding model ranking.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::metrics::{pooled_pairs, roc_auc, AucMode};
use crate::corpus::Corpus;
use crate::embeddings::{build_similarity_matrix, EmbeddingSet};
use crate::error::{Error, Result};

/// Threshold sweep used when ranking embedding models.
pub const RANKING_AUC: AucMode = AucMode::ThresholdSweep {
    lo: 0.1,
    hi: 0.9,
    step: 0.05,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LooSplit {
    pub train: Vec<String>,
    pub test: String,
}

/// One split per retained document, in corpus order.
pub fn loo_splits(corpus: &Corpus, excluded_doc_ids: &BTreeSet<String>) -> Result<Vec<LooSplit>> {
    corpus.check_doc_ids(excluded_doc_ids)?;
    let kept: Vec<String> = corpus
        .doc_ids()
        .into_iter()
        .filter(|d| !excluded_doc_ids.contains(d))
        .collect();
    if kept.len() < 2 {
        return Err(Error::invalid(
            "documents",
            format!("leave-one-out needs at least 2 documents, {} remain", kept.len()),
        ));
    }
    Ok(kept
        .iter()
        .map(|test| LooSplit {
            train: kept.iter().filter(|d| *d != test).cloned().collect(),
            test: test.clone(),
        })
        .collect())
}

/// Requirement and provision vectors produced by one embedding model.
#[derive(Debug, Clone)]
pub struct ModelEmbeddings {
    pub tag: String,
    pub requirements: EmbeddingSet,
    pub provisions: EmbeddingSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedModel {
    pub rank: usize,
    pub tag: String,
    pub auc: f64,
}

/// Micro AUC of a model over every (requirement, provision) pair of the corpus.
pub fn model_auc(model: &ModelEmbeddings, corpus: &Corpus) -> Result<f64> {
    let req_ids: Vec<String> = corpus.requirements().map(|r| r.id.clone()).collect();
    let matrix = build_similarity_matrix(
        &model.requirements,
        &req_ids,
        &model.provisions,
        &corpus.provision_codes(),
    )?;
    let (scores, labels) = pooled_pairs(&matrix, corpus.ground_truth());
    roc_auc(&scores, &labels, RANKING_AUC)
}

/// Highest AUC first; equal AUCs ordered by tag.
pub fn rank_models(models: &[ModelEmbeddings], corpus: &Corpus) -> Result<Vec<RankedModel>> {
    if models.is_empty() {
        return Err(Error::invalid("models", "nothing to rank"));
    }
    let mut scored: Vec<(String, f64)> = models
        .iter()
        .map(|m| Ok((m.tag.clone(), model_auc(m, corpus)?)))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (tag, auc))| RankedModel { rank: i + 1, tag, auc })
        .collect())
}
