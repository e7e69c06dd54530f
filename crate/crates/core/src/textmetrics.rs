//! Answer-similarity measures and the threshold gate applied to them.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Similarity;

/// Multiset of lowercase tokens, in input order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenBag {
    pub tokens: Vec<String>,
}

impl TokenBag {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn counts(&self) -> HashMap<&str, usize> {
        let mut counts = HashMap::new();
        for t in &self.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        counts
    }

    pub fn distinct(&self) -> BTreeSet<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }
}

/// Lowercases and splits on runs of non-alphanumeric characters.
pub fn tokenize(text: &str) -> TokenBag {
    let tokens = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect();
    TokenBag { tokens }
}

/// Exact match after case folding and trimming, else Jaccard over token sets.
pub fn empm_similarity(a: &str, b: &str) -> f64 {
    if a.trim().to_lowercase() == b.trim().to_lowercase() {
        return 1.0;
    }
    let (ta, tb) = (tokenize(a), tokenize(b));
    let (sa, sb) = (ta.distinct(), tb.distinct());
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// ROUGE-1 F1 over clipped unigram counts.
pub fn rouge1_f1(candidate: &str, reference: &str) -> f64 {
    let (cand, refr) = (tokenize(candidate), tokenize(reference));
    if cand.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let ref_counts = refr.counts();
    let overlap: usize = cand
        .counts()
        .iter()
        .map(|(tok, &n)| n.min(ref_counts.get(tok).copied().unwrap_or(0)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / cand.len() as f64;
    let recall = overlap as f64 / refr.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidValue(
                "embedding must have dimension >= 1".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(
                "embedding contains non-finite values".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Cosine clamped to [0, 1]. A single zero vector scores 0.
pub fn cosine_similarity(u: &EmbeddingVector, v: &EmbeddingVector) -> Result<f64> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch(u.dim(), v.dim()));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == 0.0 && nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    let dot: f64 = u.values.iter().zip(&v.values).map(|(a, b)| a * b).sum();
    Ok((dot / (nu * nv)).clamp(0.0, 1.0))
}

/// Source of text embeddings for the cosine measure.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> Result<EmbeddingVector>;
}

/// s_i = Sim(a, b) under the chosen measure.
pub fn answer_similarity(
    a: &str,
    b: &str,
    measure: Similarity,
    embedder: Option<&dyn Embedder>,
) -> Result<f64> {
    match measure {
        Similarity::Empm => Ok(empm_similarity(a, b)),
        Similarity::Rouge1F1 => Ok(rouge1_f1(a, b)),
        Similarity::Cosine => {
            let embedder = embedder.ok_or(Error::MissingEmbedder)?;
            cosine_similarity(&embedder.embed(a)?, &embedder.embed(b)?)
        }
    }
}

/// `s` when strictly above `tau`, else 0.
pub fn gated_contribution(s: f64, tau: f64) -> f64 {
    if s > tau {
        s
    } else {
        0.0
    }
}

/// (1/n) Σ gated_contribution(s_i, tau); 0 for an empty slice.
pub fn mean_gated(similarities: &[f64], tau: f64) -> f64 {
    if similarities.is_empty() {
        return 0.0;
    }
    let total: f64 = similarities
        .iter()
        .map(|&s| gated_contribution(s, tau))
        .sum();
    total / similarities.len() as f64
}
