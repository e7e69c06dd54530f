use crate::error::Result;
use crate::textmetrics::{Embedder, EmbeddingVector};

pub const STUB_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Deterministic offline embedder: lowercase character 3-grams hashed with
/// FNV-1a into `STUB_DIM` buckets, counted, then L2-normalized.
///
/// Texts shorter than three characters form a single gram. Empty text maps
/// to the zero vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubEmbedder;

impl StubEmbedder {
    /// Bucket index of each 3-gram of `text`, in order.
    pub fn buckets(text: &str) -> Vec<usize> {
        let chars: Vec<char> = text.chars().flat_map(char::to_lowercase).collect();
        let grams: Vec<String> = if chars.is_empty() {
            Vec::new()
        } else if chars.len() < 3 {
            vec![chars.iter().collect()]
        } else {
            chars.windows(3).map(|w| w.iter().collect()).collect()
        };
        grams
            .iter()
            .map(|g| (fnv1a(g.as_bytes()) % STUB_DIM as u64) as usize)
            .collect()
    }
}

impl Embedder for StubEmbedder {
    fn embed(&self, text: &str) -> Result<EmbeddingVector> {
        let mut values = vec![0.0; STUB_DIM];
        for b in Self::buckets(text) {
            values[b] += 1.0;
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        EmbeddingVector::new(values)
    }
}
