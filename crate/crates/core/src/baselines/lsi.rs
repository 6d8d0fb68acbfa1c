//! Latent semantic indexing over a TF-IDF document-term matrix.

use serde::{Deserialize, Serialize};

use super::svd::svd;
use super::tfidf::SparseVector;
use crate::embeddings::{build_similarity_matrix, EmbeddingSet, SimilarityMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_LSI_K: usize = 50;
pub const LSI_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiModel {
    format_version: u32,
    k: usize,
    /// `|V| x k`, the leading right singular vectors of the documents-by-terms
    /// input.
    term_projection: Vec<Vec<f64>>,
    singular_values: Vec<f64>,
}

/// Rank-`k` truncation of the SVD of `tfidf_matrix` (documents by terms).
pub fn fit_lsi(tfidf_matrix: &[Vec<f64>], k: usize) -> Result<LsiModel> {
    let docs = tfidf_matrix.len();
    let terms = tfidf_matrix.first().map_or(0, Vec::len);
    if k == 0 || k > docs.min(terms) {
        return Err(Error::invalid(
            "k",
            format!("{k} latent dimensions requested for a {docs}x{terms} matrix"),
        ));
    }
    let d = svd(tfidf_matrix)?;
    Ok(LsiModel {
        format_version: LSI_FORMAT_VERSION,
        k,
        term_projection: d.v.iter().map(|row| row[..k].to_vec()).collect(),
        singular_values: d.singular_values[..k].to_vec(),
    })
}

impl LsiModel {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn num_terms(&self) -> usize {
        self.term_projection.len()
    }

    /// `V_k^T q`, the query's coordinates scaled by the singular values.
    /// Cosines between these reproduce the input-space cosines at full rank.
    pub fn latent(&self, q: &SparseVector) -> Vec<f64> {
        let mut out = vec![0.0; self.k];
        for (i, w) in &q.0 {
            for (o, p) in out.iter_mut().zip(&self.term_projection[*i]) {
                *o += w * p;
            }
        }
        out
    }

    /// Folding-in projection `S_k^-1 V_k^T q`; directions with a zero
    /// singular value map to 0.
    pub fn project(&self, q: &SparseVector) -> Vec<f64> {
        self.latent(q)
            .into_iter()
            .zip(&self.singular_values)
            .map(|(x, s)| if *s > 0.0 { x / s } else { 0.0 })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let m: LsiModel = serde_json::from_str(json).map_err(|e| Error::json("lsi model", e))?;
        if m.format_version != LSI_FORMAT_VERSION {
            return Err(Error::invalid("format_version", format!("unsupported version {}", m.format_version)));
        }
        Ok(m)
    }
}

/// Cosine of latent vectors for every (requirement, provision) pair.
pub fn lsi_similarity_matrix(
    model: &LsiModel,
    req_vectors: &[(String, SparseVector)],
    prov_vectors: &[(String, SparseVector)],
) -> Result<SimilarityMatrix> {
    let embed = |items: &[(String, SparseVector)]| -> Result<EmbeddingSet> {
        let mut set = EmbeddingSet::new(model.k, format!("lsi:k={}", model.k))?;
        for (id, v) in items {
            set.insert(id.clone(), model.latent(v))?;
        }
        Ok(set)
    };
    let req_ids: Vec<String> = req_vectors.iter().map(|(id, _)| id.clone()).collect();
    let codes: Vec<String> = prov_vectors.iter().map(|(id, _)| id.clone()).collect();
    build_similarity_matrix(&embed(req_vectors)?, &req_ids, &embed(prov_vectors)?, &codes)
}
