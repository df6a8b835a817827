//! Contextual knowledge retrieval.
//!
//! Entity strategies sample from the entities of the current context, using
//! the user's entity store for weights. History retrieval ranks previously
//! clicked pages from the memory stream by embedding similarity to the
//! current query.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::embed::{page_text, similarity, Embedder, Embedding, DEFAULT_BODY_CHAR_LIMIT};
use crate::model::{EntityId, SearchContext, Timestamp, WebPage};
use crate::rng::SplitMix64;
use crate::store::{EntityKnowledgeStore, MemoryStream};
use crate::{Error, Result};

pub const TWO_WEEKS: i64 = 14 * 24 * 60 * 60;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub sample_size: usize,
    pub lapse_window_seconds: i64,
    pub history_top_k: usize,
    pub rng_seed: u64,
    pub body_char_limit: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            sample_size: 5,
            lapse_window_seconds: TWO_WEEKS,
            history_top_k: 1,
            rng_seed: 0,
            body_char_limit: DEFAULT_BODY_CHAR_LIMIT,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 || self.history_top_k == 0 {
            return Err(Error::invalid(
                "sample_size and history_top_k must be at least 1",
            ));
        }
        if self.lapse_window_seconds <= 0 {
            return Err(Error::invalid("lapse window must be positive"));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RetrievalConfig {
            rng_seed: seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Familiar,
    Unfamiliar,
    Lapsed,
    Combined,
    History,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Familiar => "familiar",
            Strategy::Unfamiliar => "unfamiliar",
            Strategy::Lapsed => "lapsed",
            Strategy::Combined => "combined",
            Strategy::History => "history",
        }
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

impl core::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "familiar" => Strategy::Familiar,
            "unfamiliar" => Strategy::Unfamiliar,
            "lapsed" => Strategy::Lapsed,
            "combined" => Strategy::Combined,
            "history" => Strategy::History,
            other => {
                return Err(Error::InvalidInput(alloc::format!(
                    "unknown strategy `{other}`"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedKnowledge {
    pub strategy: Strategy,
    pub entities: Vec<EntityId>,
    pub pages: Vec<WebPage>,
}

impl RetrievedKnowledge {
    pub fn entities(strategy: Strategy, entities: Vec<EntityId>) -> Self {
        RetrievedKnowledge {
            strategy,
            entities,
            pages: Vec::new(),
        }
    }

    pub fn pages(pages: Vec<WebPage>) -> Self {
        RetrievedKnowledge {
            strategy: Strategy::History,
            entities: Vec::new(),
            pages,
        }
    }
}

/// Draws up to `k` items without replacement, each draw proportional to the
/// weight among the items still left. Items with non-positive weight are
/// never drawn.
pub fn weighted_sample<T: Clone>(items: &[(T, f64)], k: usize, rng: &mut SplitMix64) -> Vec<T> {
    let mut pool: Vec<(T, f64)> = items.iter().filter(|(_, w)| *w > 0.0).cloned().collect();
    let mut out = Vec::with_capacity(k.min(pool.len()));
    while out.len() < k && !pool.is_empty() {
        let total: f64 = pool.iter().map(|(_, w)| w).sum();
        let target = rng.next_f64() * total;
        let mut acc = 0.0;
        let mut pick = pool.len() - 1;
        for (i, (_, w)) in pool.iter().enumerate() {
            acc += w;
            if target < acc {
                pick = i;
                break;
            }
        }
        out.push(pool.remove(pick).0);
    }
    out
}

fn by_count_desc(a: &(EntityId, u64), b: &(EntityId, u64)) -> Ordering {
    b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0))
}

fn sample_by(
    mut candidates: Vec<(EntityId, u64)>,
    order: fn(&(EntityId, u64), &(EntityId, u64)) -> Ordering,
    weight: fn(u64) -> f64,
    cfg: &RetrievalConfig,
    strategy: Strategy,
) -> Vec<EntityId> {
    candidates.sort_by(order);
    let weighted: Vec<(EntityId, f64)> = candidates
        .into_iter()
        .map(|(e, c)| (e, weight(c)))
        .collect();
    let mut rng = SplitMix64::derive(cfg.rng_seed, strategy.stream());
    weighted_sample(&weighted, cfg.sample_size, &mut rng)
}

/// Context entities the user has seen, sampled in proportion to store count.
pub fn retrieve_familiar(
    ctx_entities: &[EntityId],
    store: &EntityKnowledgeStore,
    cfg: &RetrievalConfig,
    _now: Timestamp,
) -> Vec<EntityId> {
    let candidates = ctx_entities
        .iter()
        .map(|e| (e.clone(), store.count(e)))
        .filter(|&(_, c)| c >= 1)
        .collect();
    sample_by(
        candidates,
        by_count_desc,
        |c| c as f64,
        cfg,
        Strategy::Familiar,
    )
}

/// All context entities, sampled with weight `1 / (1 + count)`.
pub fn retrieve_unfamiliar(
    ctx_entities: &[EntityId],
    store: &EntityKnowledgeStore,
    cfg: &RetrievalConfig,
    _now: Timestamp,
) -> Vec<EntityId> {
    let candidates = ctx_entities
        .iter()
        .map(|e| (e.clone(), store.count(e)))
        .collect();
    sample_by(
        candidates,
        |a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)),
        |c| 1.0 / (1.0 + c as f64),
        cfg,
        Strategy::Unfamiliar,
    )
}

/// Context entities known to the store but not seen since before
/// `now - lapse_window` (strictly), sampled by count.
pub fn retrieve_lapsed(
    ctx_entities: &[EntityId],
    store: &EntityKnowledgeStore,
    cfg: &RetrievalConfig,
    now: Timestamp,
) -> Vec<EntityId> {
    let cutoff = now - cfg.lapse_window_seconds;
    let candidates = ctx_entities
        .iter()
        .filter_map(|e| store.get(e).map(|s| (e, s)))
        .filter(|(_, s)| s.count >= 1 && s.last_seen < cutoff)
        .map(|(e, s)| (e.clone(), s.count))
        .collect();
    sample_by(
        candidates,
        by_count_desc,
        |c| c as f64,
        cfg,
        Strategy::Lapsed,
    )
}

/// Familiar, then unfamiliar, then lapsed, keeping the first occurrence of
/// each entity.
pub fn retrieve_combined(
    ctx_entities: &[EntityId],
    store: &EntityKnowledgeStore,
    cfg: &RetrievalConfig,
    now: Timestamp,
) -> RetrievedKnowledge {
    let parts = [
        retrieve_familiar(ctx_entities, store, cfg, now),
        retrieve_unfamiliar(ctx_entities, store, cfg, now),
        retrieve_lapsed(ctx_entities, store, cfg, now),
    ];
    RetrievedKnowledge::entities(Strategy::Combined, merge_dedup(parts))
}

pub(crate) fn merge_dedup<I: IntoIterator<Item = Vec<EntityId>>>(parts: I) -> Vec<EntityId> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for e in parts.into_iter().flatten() {
        if seen.insert(e.clone()) {
            out.push(e);
        }
    }
    out
}

/// Entity knowledge for one of the entity strategies.
pub fn retrieve_entities(
    strategy: Strategy,
    ctx_entities: &[EntityId],
    store: &EntityKnowledgeStore,
    cfg: &RetrievalConfig,
    now: Timestamp,
) -> Result<RetrievedKnowledge> {
    let entities = match strategy {
        Strategy::Familiar => retrieve_familiar(ctx_entities, store, cfg, now),
        Strategy::Unfamiliar => retrieve_unfamiliar(ctx_entities, store, cfg, now),
        Strategy::Lapsed => retrieve_lapsed(ctx_entities, store, cfg, now),
        Strategy::Combined => return Ok(retrieve_combined(ctx_entities, store, cfg, now)),
        Strategy::History => {
            return Err(Error::invalid("history is not an entity strategy"));
        }
    };
    Ok(RetrievedKnowledge::entities(strategy, entities))
}

/// Clicked pages of a memory stream with their embeddings, ready to rank.
pub struct HistoryIndex<'a> {
    entries: Vec<(Embedding, Timestamp, &'a WebPage)>,
}

impl<'a> HistoryIndex<'a> {
    pub fn build(
        stream: &'a MemoryStream,
        embedder: &dyn Embedder,
        body_char_limit: usize,
    ) -> Result<Self> {
        let mut entries = Vec::new();
        for record in &stream.records {
            if let Some(page) = &record.clicked_page {
                let emb = embedder.embed(&page_text(page, body_char_limit))?;
                entries.push((emb, record.timestamp, page));
            }
        }
        Ok(HistoryIndex { entries })
    }

    /// Top `k` pages by dot product, ties to the earlier record.
    pub fn search(&self, query: &Embedding, k: usize) -> Result<Vec<(f64, &'a WebPage)>> {
        let mut scored = Vec::with_capacity(self.entries.len());
        for (i, (emb, ts, page)) in self.entries.iter().enumerate() {
            scored.push((similarity(query, emb)?, *ts, i, *page));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(s, _, _, p)| (s, p))
            .collect())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Past clicked pages most similar to the current query. Queries without a
/// click are never returned.
pub fn retrieve_history(
    ctx: &SearchContext,
    stream: &MemoryStream,
    embedder: &dyn Embedder,
    cfg: &RetrievalConfig,
) -> Result<Vec<WebPage>> {
    let index = HistoryIndex::build(stream, embedder, cfg.body_char_limit)?;
    let query = embedder.embed(&ctx.current_query)?;
    Ok(index
        .search(&query, cfg.history_top_k)?
        .into_iter()
        .map(|(_, p)| p.clone())
        .collect())
}
