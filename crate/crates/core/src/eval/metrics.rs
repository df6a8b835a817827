//! Embedding-based automatic metrics.
//!
//! All three compare the suggested query against a reference text by dot
//! product of embeddings: the top search result (validity), the retrieved
//! personal entities (relatedness), and the queries the user actually issued
//! next (usefulness).

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::{similarity, Embedder};
use crate::model::EntityId;
use crate::Result;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub title: String,
    pub snippet: String,
}

pub trait SearchClient {
    /// Top result for `query`, if any.
    fn top_result(&self, query: &str) -> Result<Option<SearchResult>>;
}

/// Offline search over a fixed corpus.
///
/// A document whose title equals the query (ignoring case) wins outright.
/// Otherwise documents are scored by how many distinct query tokens occur as
/// substrings of the lowercased title and snippet; the highest positive score
/// wins and ties go to the earlier document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureSearch {
    docs: Vec<(SearchResult, String)>,
}

impl FixtureSearch {
    pub fn new(docs: Vec<SearchResult>) -> Self {
        let docs = docs
            .into_iter()
            .map(|d| {
                let mut hay = d.title.to_lowercase();
                hay.push(' ');
                hay.push_str(&d.snippet.to_lowercase());
                (d, hay)
            })
            .collect();
        FixtureSearch { docs }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

impl SearchClient for FixtureSearch {
    fn top_result(&self, query: &str) -> Result<Option<SearchResult>> {
        let q = query.trim().to_lowercase();
        if let Some((doc, _)) = self.docs.iter().find(|(d, _)| d.title.to_lowercase() == q) {
            return Ok(Some(doc.clone()));
        }
        let mut tokens: Vec<&str> = q
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .collect();
        tokens.sort_unstable();
        tokens.dedup();
        let mut best: Option<(usize, &SearchResult)> = None;
        for (doc, hay) in &self.docs {
            let score = tokens.iter().filter(|t| hay.contains(**t)).count();
            if score > 0 && best.is_none_or(|(s, _)| score > s) {
                best = Some((score, doc));
            }
        }
        Ok(best.map(|(_, d)| d.clone()))
    }
}

fn text_similarity(a: &str, b: &str, embedder: &dyn Embedder) -> Result<f64> {
    similarity(&embedder.embed(a)?, &embedder.embed(b)?)
}

/// Similarity to the top search result's title and snippet; 0 when the
/// search returns nothing. Search failures propagate so the caller can mark
/// the metric missing.
pub fn auto_validity(
    suggestion: &str,
    search: &dyn SearchClient,
    embedder: &dyn Embedder,
) -> Result<f64> {
    match search.top_result(suggestion)? {
        None => Ok(0.0),
        Some(hit) => {
            let mut text = hit.title;
            text.push(' ');
            text.push_str(&hit.snippet);
            text_similarity(suggestion, &text, embedder)
        }
    }
}

/// Similarity to the retrieved entities joined by spaces; 0 for no entities.
pub fn auto_relatedness(
    suggestion: &str,
    retrieved_entities: &[EntityId],
    embedder: &dyn Embedder,
) -> Result<f64> {
    if retrieved_entities.is_empty() {
        return Ok(0.0);
    }
    let joined = retrieved_entities
        .iter()
        .map(EntityId::as_str)
        .collect::<Vec<_>>()
        .join(" ");
    text_similarity(suggestion, &joined, embedder)
}

/// Best similarity to any of the queries the user issued next; 0 if none.
pub fn auto_usefulness(
    suggestion: &str,
    next_queries: &[String],
    embedder: &dyn Embedder,
) -> Result<f64> {
    if next_queries.is_empty() {
        return Ok(0.0);
    }
    let s = embedder.embed(suggestion)?;
    let mut best = f64::NEG_INFINITY;
    for q in next_queries {
        best = best.max(similarity(&s, &embedder.embed(q)?)?);
    }
    Ok(best)
}

impl From<(&str, &str)> for SearchResult {
    fn from((title, snippet): (&str, &str)) -> Self {
        SearchResult {
            title: title.to_string(),
            snippet: snippet.to_string(),
        }
    }
}
