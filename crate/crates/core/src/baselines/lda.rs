//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embeddings::{build_similarity_matrix, EmbeddingSet, SimilarityMatrix};
use crate::error::{Error, Result};

pub const LDA_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Gibbs sweeps over the training corpus.
    pub iterations: usize,
    /// Posterior means average over this many final sweeps.
    pub averaged_sweeps: usize,
    /// Sweeps when folding in an unseen document.
    pub fold_in_iterations: usize,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: 50,
            alpha: 0.02,
            beta: 0.02,
            iterations: 500,
            averaged_sweeps: 100,
            fold_in_iterations: 100,
            seed: 16,
        }
    }
}

impl LdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::invalid("topics", "must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) || !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("alpha/beta", "Dirichlet priors must be positive"));
        }
        if self.iterations == 0 || self.fold_in_iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if self.averaged_sweeps == 0 || self.averaged_sweeps > self.iterations {
            return Err(Error::invalid("averaged_sweeps", "must lie in 1..=iterations"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    format_version: u32,
    config: LdaConfig,
    vocabulary: Vec<String>,
    /// `T x |V|`, each row a word distribution.
    topic_word: Vec<Vec<f64>>,
    /// Topic distribution of each training document, in input order.
    doc_topic: Vec<Vec<f64>>,
    #[serde(skip)]
    index: HashMap<String, usize>,
}

fn sample_topic(rng: &mut ChaCha8Rng, weights: &mut [f64], f: impl Fn(usize) -> f64) -> usize {
    let mut total = 0.0;
    for (t, w) in weights.iter_mut().enumerate() {
        total += f(t);
        *w = total;
    }
    let u = rng.gen::<f64>() * total;
    weights.iter().position(|c| u < *c).unwrap_or(weights.len() - 1)
}

fn token_hash(tokens: &[usize]) -> u64 {
    tokens.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, t| {
        t.to_le_bytes()
            .iter()
            .fold(h, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3))
    })
}

/// Fits on already-normalized token sequences. Empty documents take part
/// with a prior-only topic distribution.
pub fn fit_lda(docs: &[Vec<String>], config: LdaConfig) -> Result<LdaModel> {
    config.validate()?;
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut vocabulary = Vec::new();
    let mut sorted: Vec<&String> = docs.iter().flatten().collect();
    sorted.sort();
    sorted.dedup();
    for t in sorted {
        index.insert(t.clone(), vocabulary.len());
        vocabulary.push(t.clone());
    }
    if vocabulary.is_empty() {
        return Err(Error::invalid("docs", "corpus has no tokens"));
    }
    let (nt, nv) = (config.topics, vocabulary.len());
    let words: Vec<Vec<usize>> = docs.iter().map(|d| d.iter().map(|t| index[t]).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut n_wt = vec![vec![0u32; nt]; nv];
    let mut n_t = vec![0u32; nt];
    let mut n_dt = vec![vec![0u32; nt]; docs.len()];
    let mut z: Vec<Vec<usize>> = Vec::with_capacity(docs.len());
    for (d, doc) in words.iter().enumerate() {
        let zd: Vec<usize> = doc.iter().map(|_| rng.gen_range(0..nt)).collect();
        for (w, t) in doc.iter().zip(&zd) {
            n_wt[*w][*t] += 1;
            n_t[*t] += 1;
            n_dt[d][*t] += 1;
        }
        z.push(zd);
    }

    let (alpha, beta, vbeta) = (config.alpha, config.beta, nv as f64 * config.beta);
    let mut weights = vec![0.0; nt];
    let mut phi_sum = vec![vec![0.0; nv]; nt];
    let mut theta_sum = vec![vec![0.0; nt]; docs.len()];
    let first_averaged = config.iterations - config.averaged_sweeps;
    for sweep in 0..config.iterations {
        for (d, doc) in words.iter().enumerate() {
            for (i, &w) in doc.iter().enumerate() {
                let old = z[d][i];
                n_wt[w][old] -= 1;
                n_t[old] -= 1;
                n_dt[d][old] -= 1;
                let new = sample_topic(&mut rng, &mut weights, |t| {
                    (f64::from(n_dt[d][t]) + alpha) * (f64::from(n_wt[w][t]) + beta) / (f64::from(n_t[t]) + vbeta)
                });
                z[d][i] = new;
                n_wt[w][new] += 1;
                n_t[new] += 1;
                n_dt[d][new] += 1;
            }
        }
        if sweep >= first_averaged {
            for t in 0..nt {
                let den = f64::from(n_t[t]) + vbeta;
                for w in 0..nv {
                    phi_sum[t][w] += (f64::from(n_wt[w][t]) + beta) / den;
                }
            }
            for (d, doc) in words.iter().enumerate() {
                let den = doc.len() as f64 + nt as f64 * alpha;
                for t in 0..nt {
                    theta_sum[d][t] += (f64::from(n_dt[d][t]) + alpha) / den;
                }
            }
        }
    }
    Ok(LdaModel {
        format_version: LDA_FORMAT_VERSION,
        config,
        vocabulary,
        topic_word: phi_sum.into_iter().map(normalized).collect(),
        doc_topic: theta_sum.into_iter().map(normalized).collect(),
        index,
    })
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

impl LdaModel {
    pub fn config(&self) -> &LdaConfig {
        &self.config
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn topic_word(&self) -> &[Vec<f64>] {
        &self.topic_word
    }

    pub fn doc_topic(&self) -> &[Vec<f64>] {
        &self.doc_topic
    }

    /// Topic distribution of an unseen document with the word distributions
    /// held fixed. Identical token sequences always give identical results.
    pub fn infer(&self, tokens: &[String]) -> Result<Vec<f64>> {
        let words: Vec<usize> = tokens.iter().filter_map(|t| self.index.get(t).copied()).collect();
        if words.is_empty() {
            return Err(Error::invalid("document", "no in-vocabulary tokens to fold in"));
        }
        let nt = self.config.topics;
        let alpha = self.config.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ token_hash(&words));
        let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..nt)).collect();
        let mut n_t = vec![0u32; nt];
        z.iter().for_each(|t| n_t[*t] += 1);
        let mut weights = vec![0.0; nt];
        let mut theta = vec![0.0; nt];
        let iterations = self.config.fold_in_iterations;
        let averaged = (iterations / 2).max(1);
        let den = words.len() as f64 + nt as f64 * alpha;
        for sweep in 0..iterations {
            for (i, &w) in words.iter().enumerate() {
                n_t[z[i]] -= 1;
                let new = sample_topic(&mut rng, &mut weights, |t| {
                    (f64::from(n_t[t]) + alpha) * self.topic_word[t][w]
                });
                z[i] = new;
                n_t[new] += 1;
            }
            if sweep >= iterations - averaged {
                for t in 0..nt {
                    theta[t] += (f64::from(n_t[t]) + alpha) / den;
                }
            }
        }
        Ok(normalized(theta))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let mut m: LdaModel = serde_json::from_str(json).map_err(|e| Error::json("lda model", e))?;
        if m.format_version != LDA_FORMAT_VERSION {
            return Err(Error::invalid("format_version", format!("unsupported version {}", m.format_version)));
        }
        m.config.validate()?;
        m.index = m.vocabulary.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Ok(m)
    }
}

/// Cosine of folded-in topic distributions.
pub fn lda_similarity_matrix(
    model: &LdaModel,
    req_docs: &[(String, Vec<String>)],
    prov_docs: &[(String, Vec<String>)],
) -> Result<SimilarityMatrix> {
    let embed = |items: &[(String, Vec<String>)]| -> Result<EmbeddingSet> {
        let mut set = EmbeddingSet::new(model.config.topics, format!("lda:topics={}", model.config.topics))?;
        for (id, tokens) in items {
            let theta = model.infer(tokens).map_err(|e| match e {
                Error::Validation { message, .. } => Error::invalid(format!("document {id}"), message),
                other => other,
            })?;
            set.insert(id.clone(), theta)?;
        }
        Ok(set)
    };
    let req_ids: Vec<String> = req_docs.iter().map(|(id, _)| id.clone()).collect();
    let codes: Vec<String> = prov_docs.iter().map(|(id, _)| id.clone()).collect();
    build_similarity_matrix(&embed(req_docs)?, &req_ids, &embed(prov_docs)?, &codes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> Vec<String> {
        s.split_whitespace().map(str::to_owned).collect()
    }

    fn small() -> LdaConfig {
        LdaConfig { topics: 1, iterations: 20, averaged_sweeps: 5, fold_in_iterations: 10, ..LdaConfig::default() }
    }

    #[test]
    fn single_topic_is_degenerate() {
        let m = fit_lda(&[doc("a b"), doc("c d")], small()).unwrap();
        assert_eq!(m.doc_topic()[0], vec![1.0]);
        assert_eq!(m.infer(&doc("a d")).unwrap(), vec![1.0]);
        let s = lda_similarity_matrix(&m, &[("R".into(), doc("a"))], &[("C".into(), doc("d"))]).unwrap();
        assert_eq!(s.get(0, 0), 1.0);
    }

    #[test]
    fn seeded_and_stochastic() {
        let cfg = LdaConfig { topics: 3, iterations: 30, averaged_sweeps: 10, ..LdaConfig::default() };
        let docs = [doc("a b c"), doc("c d e"), doc("e f a")];
        let m1 = fit_lda(&docs, cfg).unwrap();
        let m2 = fit_lda(&docs, cfg).unwrap();
        assert_eq!(m1, m2);
        for row in m1.topic_word().iter().chain(m1.doc_topic()) {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(m1.infer(&doc("a b")).unwrap(), m1.infer(&doc("a b")).unwrap());
        assert!(m1.infer(&doc("zzz")).is_err());
        assert_eq!(LdaModel::from_json(&m1.to_json()).unwrap(), m1);
    }
}
