//! Dense text vectors and the requirement-by-provision similarity matrix.
//!
//! Vectors come from one of three providers behind [`EmbeddingProvider`]:
//! a precomputed interchange file, an HTTP embedding endpoint, or the
//! offline feature-hashing provider. Everything downstream only sees an
//! [`EmbeddingSet`].

mod hashing;
mod http;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hashing::{hash_embed, HashProvider, MIN_HASH_DIM};
pub use http::{fetch_embeddings, HttpProvider, HttpProviderConfig};

pub const EMBEDDING_FORMAT_VERSION: u32 = 1;

/// A non-empty vector of finite reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::checked(values, "vector")
    }

    fn checked(values: Vec<f64>, id: &str) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid(format!("vectors.{id}"), "vector is empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { id: id.to_owned() });
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|v| v * factor).collect())
    }
}

/// Cosine similarity, clamped to `[-1, 1]`.
///
/// Zero-norm inputs are an error rather than a silent 0 score.
pub fn cosine(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    cosine_ids(u, "left", v, "right")
}

pub(crate) fn cosine_ids(u: &EmbeddingVector, uid: &str, v: &EmbeddingVector, vid: &str) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            id: vid.to_owned(),
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 {
        return Err(Error::ZeroNorm { id: uid.to_owned() });
    }
    if nv == 0.0 {
        return Err(Error::ZeroNorm { id: vid.to_owned() });
    }
    Ok(cosine_with_norms(u.values(), nu, v.values(), nv))
}

fn cosine_with_norms(u: &[f64], nu: f64, v: &[f64], nv: f64) -> f64 {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    (dot / (nu * nv)).clamp(-1.0, 1.0)
}

/// Id-keyed vectors sharing one dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    provider: String,
    vectors: BTreeMap<String, EmbeddingVector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFile {
    format_version: u32,
    dim: usize,
    provider: String,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingSet {
    pub fn new(dim: usize, provider: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        Ok(Self {
            dim,
            provider: provider.into(),
            vectors: BTreeMap::new(),
        })
    }

    /// Builds a set from `(id, values)` pairs; the first vector fixes `dim`.
    pub fn from_vectors(
        provider: impl Into<String>,
        vectors: impl IntoIterator<Item = (String, Vec<f64>)>,
    ) -> Result<Self> {
        let mut iter = vectors.into_iter().peekable();
        let dim = iter
            .peek()
            .map(|(_, v)| v.len())
            .ok_or_else(|| Error::invalid("vectors", "no vectors given"))?;
        let mut set = Self::new(dim, provider)?;
        for (id, values) in iter {
            set.insert(id, values)?;
        }
        Ok(set)
    }

    pub fn insert(&mut self, id: String, values: Vec<f64>) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::DimensionMismatch {
                id,
                expected: self.dim,
                found: values.len(),
            });
        }
        if self.vectors.contains_key(&id) {
            return Err(Error::invalid(format!("vectors.{id}"), "duplicate id"));
        }
        let v = EmbeddingVector::checked(values, &id)?;
        self.vectors.insert(id, v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn provider(&self) -> &str {
        &self.provider
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&EmbeddingVector> {
        self.vectors.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&EmbeddingVector> {
        self.vectors.get(id).ok_or_else(|| Error::UnknownId {
            kind: "embedding id",
            id: id.to_owned(),
        })
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EmbeddingVector)> {
        self.vectors.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Sub-set holding only `ids`; fails on the first missing id.
    pub fn restrict<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut out = Self::new(self.dim, self.provider.clone())?;
        for id in ids {
            out.vectors.insert(id.to_owned(), self.require(id)?.clone());
        }
        Ok(out)
    }

    /// Merges `other` into `self`; dimensionality must agree, ids must not clash.
    pub fn extend(&mut self, other: &EmbeddingSet) -> Result<()> {
        for (id, v) in other.iter() {
            self.insert(id.to_owned(), v.values().to_vec())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = EmbeddingFile {
            format_version: EMBEDDING_FORMAT_VERSION,
            dim: self.dim,
            provider: self.provider.clone(),
            vectors: self
                .vectors
                .iter()
                .map(|(k, v)| (k.clone(), v.values().to_vec()))
                .collect(),
        };
        serde_json::to_string(&file).expect("embedding set serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::parse(json, "embeddings")
    }

    fn parse(json: &str, context: &str) -> Result<Self> {
        let file: EmbeddingFile = serde_json::from_str(json).map_err(|e| Error::json(context, e))?;
        if file.format_version != EMBEDDING_FORMAT_VERSION {
            return Err(Error::invalid(
                "format_version",
                format!("unsupported version {}", file.format_version),
            ));
        }
        let mut set = Self::new(file.dim, file.provider)?;
        for (id, values) in file.vectors {
            set.insert(id, values)?;
        }
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Reads and validates an embedding interchange file.
pub fn load_embedding_set(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    EmbeddingSet::parse(&json, &path.display().to_string())
}

/// Turns `(id, text)` pairs into vectors.
pub trait EmbeddingProvider {
    fn embed(&self, texts: &[(String, String)]) -> Result<EmbeddingSet>;
}

/// Serves vectors from a precomputed set, e.g. one written by the exporter.
#[derive(Debug, Clone)]
pub struct FileProvider {
    set: EmbeddingSet,
}

impl FileProvider {
    pub fn new(set: EmbeddingSet) -> Self {
        Self { set }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_embedding_set(path).map(Self::new)
    }
}

impl EmbeddingProvider for FileProvider {
    fn embed(&self, texts: &[(String, String)]) -> Result<EmbeddingSet> {
        self.set.restrict(texts.iter().map(|(id, _)| id.as_str()))
    }
}

/// Requirement-by-provision score grid. Rows follow `req_ids`, columns
/// follow `prov_codes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    req_ids: Vec<String>,
    prov_codes: Vec<String>,
    scores: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    pub fn new(req_ids: Vec<String>, prov_codes: Vec<String>, scores: Vec<Vec<f64>>) -> Result<Self> {
        if scores.len() != req_ids.len() {
            return Err(Error::invalid(
                "scores",
                format!("{} rows for {} requirement ids", scores.len(), req_ids.len()),
            ));
        }
        for (i, row) in scores.iter().enumerate() {
            if row.len() != prov_codes.len() {
                return Err(Error::invalid(
                    format!("scores[{i}]"),
                    format!("{} columns for {} provision codes", row.len(), prov_codes.len()),
                ));
            }
            if let Some(j) = row.iter().position(|s| !s.is_finite() || !(-1.0..=1.0).contains(s)) {
                return Err(Error::invalid(
                    format!("scores[{i}][{j}]"),
                    format!("score {} outside [-1, 1]", row[j]),
                ));
            }
        }
        if req_ids.iter().collect::<BTreeSet<_>>().len() != req_ids.len() {
            return Err(Error::invalid("req_ids", "duplicate requirement id"));
        }
        if prov_codes.iter().collect::<BTreeSet<_>>().len() != prov_codes.len() {
            return Err(Error::invalid("prov_codes", "duplicate provision code"));
        }
        Ok(Self {
            req_ids,
            prov_codes,
            scores,
        })
    }

    pub fn req_ids(&self) -> &[String] {
        &self.req_ids
    }

    pub fn prov_codes(&self) -> &[String] {
        &self.prov_codes
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.scores
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.scores[i]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.scores[i][j]
    }

    pub fn n_rows(&self) -> usize {
        self.req_ids.len()
    }

    pub fn n_cols(&self) -> usize {
        self.prov_codes.len()
    }

    pub fn score(&self, req_id: &str, code: &str) -> Option<f64> {
        let i = self.req_ids.iter().position(|r| r == req_id)?;
        let j = self.prov_codes.iter().position(|c| c == code)?;
        Some(self.scores[i][j])
    }

    /// Rows for `ids` in the given order.
    pub fn select_rows<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let index: HashMap<&str, usize> = self
            .req_ids
            .iter()
            .enumerate()
            .map(|(i, r)| (r.as_str(), i))
            .collect();
        let mut req_ids = Vec::new();
        let mut scores = Vec::new();
        for id in ids {
            let i = *index.get(id).ok_or_else(|| Error::UnknownId {
                kind: "requirement",
                id: id.to_owned(),
            })?;
            req_ids.push(id.to_owned());
            scores.push(self.scores[i].clone());
        }
        Self::new(req_ids, self.prov_codes.clone(), scores)
    }

    /// Collapses sentence-level rows onto their parent requirement by taking
    /// the column-wise maximum. `parents` maps row id to parent id; parents
    /// appear in order of first occurrence.
    pub fn max_pool(&self, parents: &HashMap<String, String>) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut pooled: HashMap<String, Vec<f64>> = HashMap::new();
        for (id, row) in self.req_ids.iter().zip(&self.scores) {
            let parent = parents.get(id).ok_or_else(|| Error::UnknownId {
                kind: "sentence unit",
                id: id.clone(),
            })?;
            match pooled.get_mut(parent) {
                Some(acc) => acc.iter_mut().zip(row).for_each(|(a, s)| *a = a.max(*s)),
                None => {
                    order.push(parent.clone());
                    pooled.insert(parent.clone(), row.clone());
                }
            }
        }
        let scores = order.iter().map(|p| pooled.remove(p).unwrap()).collect();
        Self::new(order, self.prov_codes.clone(), scores)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: SimilarityMatrix =
            serde_json::from_str(json).map_err(|e| Error::json("similarity matrix", e))?;
        Self::new(raw.req_ids, raw.prov_codes, raw.scores)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let json = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&json)
    }
}

/// `scores[i][j] = cosine(reqs[req_ids[i]], provs[prov_codes[j]])`.
pub fn build_similarity_matrix(
    reqs: &EmbeddingSet,
    req_ids: &[String],
    provs: &EmbeddingSet,
    prov_codes: &[String],
) -> Result<SimilarityMatrix> {
    let columns: Vec<(&EmbeddingVector, f64)> = prov_codes
        .iter()
        .map(|c| provs.require(c).map(|v| (v, v.norm())))
        .collect::<Result<_>>()?;
    let mut scores = Vec::with_capacity(req_ids.len());
    for req_id in req_ids {
        let u = reqs.require(req_id)?;
        let nu = u.norm();
        let mut row = Vec::with_capacity(columns.len());
        for (code, (v, nv)) in prov_codes.iter().zip(&columns) {
            if u.dim() != v.dim() || nu == 0.0 || *nv == 0.0 {
                let source = cosine_ids(u, req_id, v, code).unwrap_err();
                return Err(Error::Pair {
                    req_id: req_id.clone(),
                    code: code.clone(),
                    source: Box::new(source),
                });
            }
            row.push(cosine_with_norms(u.values(), nu, v.values(), *nv));
        }
        scores.push(row);
    }
    SimilarityMatrix::new(req_ids.to_vec(), prov_codes.to_vec(), scores)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(values: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(values.to_vec()).unwrap()
    }

    #[test]
    fn cosine_examples() {
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[1.0, 0.0])).unwrap(), 1.0);
        assert_eq!(cosine(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 0.0);
        // 32 / (sqrt(14) * sqrt(77))
        let c = cosine(&v(&[1.0, 2.0, 3.0]), &v(&[4.0, 5.0, 6.0])).unwrap();
        assert!((c - 0.974_631_846).abs() < 1e-9);
    }

    #[test]
    fn cosine_errors() {
        assert!(matches!(
            cosine(&v(&[1.0, 0.0]), &v(&[1.0, 0.0, 0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            cosine(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::ZeroNorm { .. })
        ));
        assert!(EmbeddingVector::new(vec![]).is_err());
        assert!(EmbeddingVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn wrong_length_names_the_id() {
        let json = r#"{"format_version":1,"dim":2,"provider":"t","vectors":{"a":[1,0],"b":[1,0,0]}}"#;
        match EmbeddingSet::from_json(json) {
            Err(Error::DimensionMismatch { id, expected, found }) => {
                assert_eq!((id.as_str(), expected, found), ("b", 2, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_and_orthogonal_matrices() {
        let set = EmbeddingSet::from_vectors(
            "t",
            [
                ("r1".to_string(), vec![1.0, 0.0]),
                ("r2".to_string(), vec![0.0, 2.0]),
                ("A".to_string(), vec![3.0, 0.0]),
                ("B".to_string(), vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        let m = build_similarity_matrix(
            &set,
            &["r1".into(), "r2".into()],
            &set,
            &["A".into(), "B".into()],
        )
        .unwrap();
        assert_eq!(m.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let single = build_similarity_matrix(&set, &["r1".into()], &set, &["A".into()]).unwrap();
        assert_eq!(single.rows(), &[vec![1.0]]);
    }

    #[test]
    fn zero_vector_error_carries_the_pair() {
        let set = EmbeddingSet::from_vectors(
            "t",
            [("r".to_string(), vec![0.0, 0.0]), ("A".to_string(), vec![1.0, 0.0])],
        )
        .unwrap();
        match build_similarity_matrix(&set, &["r".into()], &set, &["A".into()]) {
            Err(Error::Pair { req_id, code, .. }) => assert_eq!((req_id.as_str(), code.as_str()), ("r", "A")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn max_pool_unions_sentences() {
        let m = SimilarityMatrix::new(
            vec!["R1#0".into(), "R1#1".into(), "R2#0".into()],
            vec!["A".into(), "B".into()],
            vec![vec![0.1, 0.9], vec![0.6, 0.2], vec![0.3, 0.3]],
        )
        .unwrap();
        let parents: HashMap<String, String> = [("R1#0", "R1"), ("R1#1", "R1"), ("R2#0", "R2")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        let pooled = m.max_pool(&parents).unwrap();
        assert_eq!(pooled.req_ids(), &["R1".to_string(), "R2".to_string()]);
        assert_eq!(pooled.rows(), &[vec![0.6, 0.9], vec![0.3, 0.3]]);
    }

    fn nonzero_vec(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, dim).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn cosine_is_scale_invariant_and_symmetric(
            u in nonzero_vec(5), w in nonzero_vec(5), a in 0.01f64..100.0, b in 0.01f64..100.0
        ) {
            let (u, w) = (v(&u), v(&w));
            let base = cosine(&u, &w).unwrap();
            prop_assert!((cosine(&u.scaled(a), &w.scaled(b)).unwrap() - base).abs() < 1e-12);
            prop_assert!((cosine(&w, &u).unwrap() - base).abs() < 1e-15);
            prop_assert!((cosine(&u, &u).unwrap() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn matrix_build_is_order_equivariant(
            vecs in prop::collection::vec(nonzero_vec(4), 6),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let ids: Vec<String> = (0..6).map(|i| format!("id{i}")).collect();
            let set = EmbeddingSet::from_vectors("t", ids.iter().cloned().zip(vecs)).unwrap();
            let (rows, cols) = (ids[..3].to_vec(), ids[3..].to_vec());
            let m = build_similarity_matrix(&set, &rows, &set, &cols).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (mut prow, mut pcol) = (rows.clone(), cols.clone());
            prow.shuffle(&mut rng);
            pcol.shuffle(&mut rng);
            let p = build_similarity_matrix(&set, &prow, &set, &pcol).unwrap();
            for r in &rows {
                for c in &cols {
                    prop_assert_eq!(m.score(r, c), p.score(r, c));
                }
            }
        }
    }
}
