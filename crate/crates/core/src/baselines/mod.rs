//! Classic information-retrieval baselines: TF-IDF vector space model, LSI,
//! LDA and the indicator-term classifier.
//!
//! The unsupervised models are fitted on every provision and requirement
//! text of the corpus with requirements acting as queries against provision
//! pseudo-documents. The indicator model is fitted on training documents
//! only.

mod indicator;
mod lda;
mod lsi;
mod svd;
mod tfidf;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use indicator::{
    fit_indicator_model, indicator_similarity_matrix, IndicatorTermModel, TermFactors,
};
pub use lda::{fit_lda, lda_similarity_matrix, LdaConfig, LdaModel};
pub use lsi::{fit_lsi, lsi_similarity_matrix, LsiModel, DEFAULT_LSI_K};
pub use svd::{svd, Svd};
pub use tfidf::{fit_tfidf, fit_tfidf_texts, smoothed_idf, SparseVector, TfIdfModel};

use crate::corpus::{preprocess, Corpus, PreprocessConfig};
use crate::embeddings::{build_similarity_matrix, EmbeddingSet, SimilarityMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Tfidf,
    Lsi,
    Lda,
    Indicator,
}

impl BaselineKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Tfidf => "tfidf",
            Self::Lsi => "lsi",
            Self::Lda => "lda",
            Self::Indicator => "indicator",
        }
    }
}

impl std::str::FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Self::Tfidf),
            "lsi" => Ok(Self::Lsi),
            "lda" => Ok(Self::Lda),
            "indicator" => Ok(Self::Indicator),
            other => Err(Error::invalid("baseline", format!("unknown baseline {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    /// Capped at the rank bound of the fitted matrix.
    pub lsi_k: usize,
    pub lda: LdaConfig,
    pub max_df: Option<f64>,
}

impl Default for BaselineOptions {
    fn default() -> Self {
        Self {
            lsi_k: DEFAULT_LSI_K,
            lda: LdaConfig::default(),
            max_df: None,
        }
    }
}

pub enum FittedBaseline {
    Tfidf(TfIdfModel),
    Lsi { tfidf: TfIdfModel, lsi: LsiModel },
    Lda(LdaModel),
    Indicator(IndicatorTermModel),
}

/// Provision texts first, then requirement texts, in corpus order.
fn all_texts(corpus: &Corpus) -> Vec<String> {
    corpus
        .catalog()
        .iter()
        .map(|p| p.text())
        .chain(corpus.requirements().map(|r| r.text.clone()))
        .collect()
}

pub fn fit_baseline(
    kind: BaselineKind,
    corpus: &Corpus,
    train_doc_ids: &BTreeSet<String>,
    options: &BaselineOptions,
) -> Result<FittedBaseline> {
    let texts = all_texts(corpus);
    let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
    match kind {
        BaselineKind::Tfidf => Ok(FittedBaseline::Tfidf(fit_tfidf_texts(
            &refs,
            options.max_df,
            PreprocessConfig::without_stopwords(),
        )?)),
        BaselineKind::Lsi => {
            let tfidf = fit_tfidf_texts(&refs, options.max_df, PreprocessConfig::without_stopwords())?;
            let dim = tfidf.vocabulary().len();
            let rows: Vec<Vec<f64>> = refs.iter().map(|t| tfidf.text_vector(t).to_dense(dim)).collect();
            let k = options.lsi_k.min(rows.len()).min(dim);
            let lsi = fit_lsi(&rows, k)?;
            Ok(FittedBaseline::Lsi { tfidf, lsi })
        }
        BaselineKind::Lda => {
            let config = PreprocessConfig::full();
            let docs: Vec<Vec<String>> = refs.iter().map(|t| preprocess(t, &config)).collect();
            Ok(FittedBaseline::Lda(fit_lda(&docs, options.lda)?))
        }
        BaselineKind::Indicator => Ok(FittedBaseline::Indicator(fit_indicator_model(
            corpus,
            train_doc_ids,
            PreprocessConfig::full(),
        )?)),
    }
}

impl FittedBaseline {
    pub fn kind(&self) -> BaselineKind {
        match self {
            Self::Tfidf(_) => BaselineKind::Tfidf,
            Self::Lsi { .. } => BaselineKind::Lsi,
            Self::Lda(_) => BaselineKind::Lda,
            Self::Indicator(_) => BaselineKind::Indicator,
        }
    }

    /// Scores of `req_ids` against the whole catalog.
    pub fn similarity_matrix(&self, corpus: &Corpus, req_ids: &[String]) -> Result<SimilarityMatrix> {
        let reqs: Vec<(String, String)> = req_ids
            .iter()
            .map(|id| {
                corpus
                    .requirement(id)
                    .map(|r| (id.clone(), r.text.clone()))
                    .ok_or_else(|| Error::UnknownId { kind: "requirement", id: id.clone() })
            })
            .collect::<Result<_>>()?;
        let provs: Vec<(String, String)> = corpus.catalog().iter().map(|p| (p.code.clone(), p.text())).collect();
        let codes = corpus.provision_codes();
        match self {
            Self::Tfidf(m) => {
                let dim = m.vocabulary().len();
                let embed = |items: &[(String, String)]| -> Result<EmbeddingSet> {
                    let mut set = EmbeddingSet::new(dim, "tfidf")?;
                    for (id, text) in items {
                        set.insert(id.clone(), m.text_vector(text).to_dense(dim))?;
                    }
                    Ok(set)
                };
                build_similarity_matrix(&embed(&reqs)?, req_ids, &embed(&provs)?, &codes)
            }
            Self::Lsi { tfidf, lsi } => {
                let vectors = |items: &[(String, String)]| -> Vec<(String, SparseVector)> {
                    items.iter().map(|(id, t)| (id.clone(), tfidf.text_vector(t))).collect()
                };
                lsi_similarity_matrix(lsi, &vectors(&reqs), &vectors(&provs))
            }
            Self::Lda(m) => {
                let config = PreprocessConfig::full();
                let docs = |items: &[(String, String)]| -> Vec<(String, Vec<String>)> {
                    items.iter().map(|(id, t)| (id.clone(), preprocess(t, &config))).collect()
                };
                lda_similarity_matrix(m, &docs(&reqs), &docs(&provs))
            }
            Self::Indicator(m) => indicator_similarity_matrix(m, &reqs, &codes),
        }
    }
}
