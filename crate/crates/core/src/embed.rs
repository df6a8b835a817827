//! Text embeddings and dot-product similarity.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linker::truncate_chars;
use crate::model::WebPage;
use crate::rng::fnv1a64;
use crate::{Error, Result};

pub const DEFAULT_DIM: usize = 256;
/// Page bodies are cut to this many characters before embedding.
pub const DEFAULT_BODY_CHAR_LIMIT: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub values: Vec<f64>,
}

impl Embedding {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }

    /// Scales to unit length. A zero vector stays zero.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        if norm > 0.0 {
            for v in &mut self.values {
                *v /= norm;
            }
        }
        self
    }
}

pub trait Embedder {
    fn embed(&self, text: &str) -> Result<Embedding>;

    fn embed_batch(&self, texts: &[&str]) -> Result<Vec<Embedding>> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

/// Dot product. Both sides must have the same dimension.
pub fn similarity(a: &Embedding, b: &Embedding) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(alloc::format!(
            "embedding dimensions differ: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.values.iter().zip(&b.values).map(|(x, y)| x * y).sum())
}

/// Feature-hashed bag of words.
///
/// Text is lowercased and split on non-alphanumeric characters; each token
/// adds one to bucket `fnv1a64(token) mod dim`, and the counts are
/// L2-normalized. Text without tokens embeds to the zero vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        Ok(HashingEmbedder { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        HashingEmbedder { dim: DEFAULT_DIM }
    }
}

impl Embedder for HashingEmbedder {
    fn embed(&self, text: &str) -> Result<Embedding> {
        let mut values = vec![0.0; self.dim];
        let lower = text.to_lowercase();
        for token in lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            values[(fnv1a64(token.as_bytes()) % self.dim as u64) as usize] += 1.0;
        }
        Ok(Embedding { values }.normalized())
    }
}

/// Text used to represent a page: title, a space, then the truncated body.
pub fn page_text(page: &WebPage, body_char_limit: usize) -> String {
    let body = truncate_chars(&page.body_text, body_char_limit);
    let mut s = String::with_capacity(page.title.len() + 1 + body.len());
    s.push_str(&page.title);
    s.push(' ');
    s.push_str(body);
    s
}
