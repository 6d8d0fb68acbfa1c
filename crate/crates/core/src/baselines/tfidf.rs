//! Smoothed TF-IDF weighting for the vector space model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::{preprocess, PreprocessConfig};
use crate::error::{Error, Result};

/// Sorted `(term index, weight)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector(pub Vec<(usize, f64)>);

impl SparseVector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// No non-zero entry, e.g. every token out of vocabulary.
    pub fn is_degenerate(&self) -> bool {
        self.0.iter().all(|(_, w)| *w == 0.0)
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut sum) = (0, 0, 0.0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += self.0[i].1 * other.0[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for (i, w) in &self.0 {
            out[*i] = *w;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    format_version: u32,
    vocabulary: Vec<String>,
    idf: Vec<f64>,
    config: PreprocessConfig,
    max_df_cutoff: Option<f64>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

pub const TFIDF_FORMAT_VERSION: u32 = 1;

/// `ln((1 + n_docs) / (1 + df)) + 1`
pub fn smoothed_idf(n_docs: usize, df: usize) -> f64 {
    ((1.0 + n_docs as f64) / (1.0 + df as f64)).ln() + 1.0
}

/// Fits on already-normalized token sequences. Terms whose document
/// frequency ratio exceeds `max_df` are dropped; there is no lower cutoff.
pub fn fit_tfidf(docs: &[Vec<String>], max_df: Option<f64>, config: PreprocessConfig) -> Result<TfIdfModel> {
    if let Some(m) = max_df {
        if !(m > 0.0 && m <= 1.0) {
            return Err(Error::invalid("max_df", format!("{m} is outside (0, 1]")));
        }
    }
    if docs.iter().all(Vec::is_empty) {
        return Err(Error::invalid("docs", "every document is empty"));
    }
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for t in doc.iter().map(String::as_str).collect::<BTreeSet<_>>() {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = docs.len();
    let (vocabulary, idf): (Vec<String>, Vec<f64>) = df
        .into_iter()
        .filter(|(_, d)| max_df.map_or(true, |m| *d as f64 / n as f64 <= m))
        .map(|(t, d)| (t.to_owned(), smoothed_idf(n, d)))
        .unzip();
    Ok(TfIdfModel::assemble(vocabulary, idf, config, max_df))
}

/// Tokenizes `texts` with `config` and fits on the result.
pub fn fit_tfidf_texts(texts: &[&str], max_df: Option<f64>, config: PreprocessConfig) -> Result<TfIdfModel> {
    config.validate()?;
    let docs: Vec<Vec<String>> = texts.iter().map(|t| preprocess(t, &config)).collect();
    fit_tfidf(&docs, max_df, config)
}

impl TfIdfModel {
    fn assemble(vocabulary: Vec<String>, idf: Vec<f64>, config: PreprocessConfig, max_df_cutoff: Option<f64>) -> Self {
        let index = vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self {
            format_version: TFIDF_FORMAT_VERSION,
            vocabulary,
            idf,
            config,
            max_df_cutoff,
            index,
        }
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.index.get(term).map(|i| self.idf[*i])
    }

    pub fn config(&self) -> &PreprocessConfig {
        &self.config
    }

    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// `tf * idf` per in-vocabulary token, L2-normalized. All-OOV input gives
    /// the empty (degenerate) vector.
    pub fn vector(&self, tokens: &[String]) -> SparseVector {
        let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(i) = self.index.get(t) {
                *tf.entry(*i).or_default() += 1.0;
            }
        }
        let mut v = SparseVector(tf.into_iter().map(|(i, c)| (i, c * self.idf[i])).collect());
        let norm = v.norm();
        if norm > 0.0 {
            v.0.iter_mut().for_each(|(_, w)| *w /= norm);
        }
        v
    }

    pub fn text_vector(&self, text: &str) -> SparseVector {
        self.vector(&preprocess(text, &self.config))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: TfIdfModel = serde_json::from_str(json).map_err(|e| Error::json("tf-idf model", e))?;
        if raw.format_version != TFIDF_FORMAT_VERSION {
            return Err(Error::invalid("format_version", format!("unsupported version {}", raw.format_version)));
        }
        if raw.vocabulary.len() != raw.idf.len() {
            return Err(Error::invalid("idf", "length differs from vocabulary"));
        }
        Ok(Self::assemble(raw.vocabulary, raw.idf, raw.config, raw.max_df_cutoff))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&str]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.split_whitespace().map(str::to_owned).collect())
            .collect()
    }

    #[test]
    fn smoothed_idf_values() {
        let m = fit_tfidf(&docs(&["a b", "a"]), None, PreprocessConfig::default()).unwrap();
        assert_eq!(m.idf("a"), Some(1.0));
        assert!((m.idf("b").unwrap() - 1.405465108).abs() < 1e-9);
    }

    #[test]
    fn max_df_drops_ubiquitous_terms() {
        let m = fit_tfidf(&docs(&["a b", "a c"]), Some(0.5), PreprocessConfig::default()).unwrap();
        assert_eq!(m.idf("a"), None);
        assert!(m.idf("b").is_some());
        assert!(fit_tfidf(&docs(&["", ""]), None, PreprocessConfig::default()).is_err());
    }

    #[test]
    fn vector_by_hand() {
        // df: a=2, b=1, c=1, d=1 over 3 docs
        let m = fit_tfidf(&docs(&["a b", "a c", "d"]), None, PreprocessConfig::default()).unwrap();
        let v = m.vector(&docs(&["a a b zzz"])[0]);
        let (ia, ib) = (smoothed_idf(3, 2) * 2.0, smoothed_idf(3, 1));
        let n = (ia * ia + ib * ib).sqrt();
        assert_eq!(v.0.len(), 2);
        assert!((v.0[0].1 - ia / n).abs() < 1e-12);
        assert!((v.0[1].1 - ib / n).abs() < 1e-12);
        assert!(m.vector(&docs(&["zzz"])[0]).is_degenerate());
        let own = m.vector(&docs(&["a c"])[0]);
        assert!((own.dot(&own) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let m = fit_tfidf_texts(&["Encrypt the data.", "Delete data"], None, PreprocessConfig::without_stopwords()).unwrap();
        let back = TfIdfModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.term_index("encrypt"), m.term_index("encrypt"));
    }
}
