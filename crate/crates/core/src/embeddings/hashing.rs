//! Offline, deterministic embeddings by signed feature hashing.
//!
//! Each normalized token is hashed (64-bit FNV-1a over the little-endian
//! seed followed by the token's UTF-8 bytes) into one of `dim` buckets, and a
//! second, independently seeded hash picks the sign. Bucket values are the
//! signed token counts, and the result is L2-normalized. The scheme depends
//! only on byte strings and integer arithmetic, so vectors are identical on
//! every platform.

use std::collections::BTreeMap;

use super::{EmbeddingProvider, EmbeddingSet, EmbeddingVector};
use crate::corpus::{preprocess, PreprocessConfig};
use crate::error::{Error, Result};

pub const MIN_HASH_DIM: usize = 8;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const SIGN_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

fn fnv1a(seed: u64, token: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in seed.to_le_bytes().iter().chain(token.as_bytes()) {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Unnormalized signed bucket counts.
pub(crate) fn hashed_counts(text: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for token in preprocess(text, &PreprocessConfig::default()) {
        *counts.entry(token).or_default() += 1;
    }
    let mut values = vec![0.0; dim];
    for (token, count) in counts {
        let bucket = (fnv1a(seed, &token) % dim as u64) as usize;
        let sign = if fnv1a(seed ^ SIGN_SALT, &token) & 1 == 0 { 1.0 } else { -1.0 };
        values[bucket] += sign * count as f64;
    }
    values
}

/// Feature-hashed, L2-normalized vector for `text`.
///
/// Text without tokens (or whose signed counts cancel exactly) yields the
/// zero vector, which later fails cosine scoring.
pub fn hash_embed(text: &str, dim: usize, seed: u64) -> Result<EmbeddingVector> {
    if dim < MIN_HASH_DIM {
        return Err(Error::invalid(
            "dim",
            format!("hash embeddings need at least {MIN_HASH_DIM} dimensions, got {dim}"),
        ));
    }
    let mut values = hashed_counts(text, dim, seed);
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        values.iter_mut().for_each(|v| *v /= norm);
    }
    EmbeddingVector::new(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashProvider {
    pub dim: usize,
    pub seed: u64,
}

impl HashProvider {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self { dim, seed }
    }

    pub fn tag(&self) -> String {
        format!("hash:dim={},seed={}", self.dim, self.seed)
    }
}

impl EmbeddingProvider for HashProvider {
    fn embed(&self, texts: &[(String, String)]) -> Result<EmbeddingSet> {
        let mut set = EmbeddingSet::new(self.dim, self.tag())?;
        for (id, text) in texts {
            set.insert(id.clone(), hash_embed(text, self.dim, self.seed)?.values().to_vec())?;
        }
        Ok(set)
    }
}
