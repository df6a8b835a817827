//! Per-user knowledge stores.
//!
//! [`MemoryStream`] is the linear, time-ordered log of queries and clicked
//! pages. [`EntityKnowledgeStore`] aggregates linked entity mentions into
//! counts with first/last-seen times.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ingest::UserDataset;
use crate::linker::{page_link_text, EntityLinker};
use crate::model::{EntityId, SearchRecord, Timestamp, UserId};
use crate::{Error, Result};

/// Trending reports never list more than this many entities.
pub const TRENDING_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryStream {
    pub user: UserId,
    pub records: Vec<SearchRecord>,
}

impl MemoryStream {
    pub fn new(user: UserId) -> Self {
        MemoryStream {
            user,
            records: Vec::new(),
        }
    }

    /// Inserts after any records with the same timestamp.
    pub fn push(&mut self, record: SearchRecord) {
        let at = self
            .records
            .partition_point(|r| r.timestamp <= record.timestamp);
        self.records.insert(at, record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Flattens the history sessions (never the holdout) into one sorted stream.
pub fn build_memory_stream(dataset: &UserDataset) -> MemoryStream {
    let mut records: Vec<SearchRecord> = dataset.history_records().cloned().collect();
    records.sort_by_key(|r| r.timestamp);
    MemoryStream {
        user: dataset.user.clone(),
        records,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityStats {
    pub count: u64,
    pub first_seen: Timestamp,
    pub last_seen: Timestamp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityKnowledgeStore {
    pub user: UserId,
    pub entries: BTreeMap<EntityId, EntityStats>,
}

impl EntityKnowledgeStore {
    pub fn new(user: UserId) -> Self {
        EntityKnowledgeStore {
            user,
            entries: BTreeMap::new(),
        }
    }

    /// Counts one mention of `entity` at `ts`.
    pub fn observe(&mut self, entity: EntityId, ts: Timestamp) {
        self.entries
            .entry(entity)
            .and_modify(|s| {
                s.count += 1;
                s.first_seen = s.first_seen.min(ts);
                s.last_seen = s.last_seen.max(ts);
            })
            .or_insert(EntityStats {
                count: 1,
                first_seen: ts,
                last_seen: ts,
            });
    }

    /// Links a record and counts every mention in its query and clicked page.
    pub fn ingest_record(&mut self, record: &SearchRecord, linker: &dyn EntityLinker) {
        for entity in record_mentions(record, linker) {
            self.observe(entity, record.timestamp);
        }
    }

    pub fn count(&self, entity: &EntityId) -> u64 {
        self.entries.get(entity).map_or(0, |s| s.count)
    }

    pub fn get(&self, entity: &EntityId) -> Option<&EntityStats> {
        self.entries.get(entity)
    }

    pub fn total_mentions(&self) -> u64 {
        self.entries.values().map(|s| s.count).sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Forgets an entity entirely. Removing an absent entity is a no-op.
    pub fn remove_entity(&mut self, entity: &EntityId) -> Option<EntityStats> {
        self.entries.remove(entity)
    }

    /// Checks the stored invariants; used after loading snapshots.
    pub fn validate(&self) -> Result<()> {
        for (id, s) in &self.entries {
            if s.count == 0 || s.first_seen > s.last_seen {
                return Err(Error::InvalidInput(alloc::format!(
                    "inconsistent stats for entity {id}"
                )));
            }
        }
        Ok(())
    }
}

/// Every entity mention in a record: query first, then page title and body.
/// Repeated mentions are all kept.
pub fn record_mentions(record: &SearchRecord, linker: &dyn EntityLinker) -> Vec<EntityId> {
    let mut out: Vec<EntityId> = linker
        .link(&record.query_text)
        .into_iter()
        .map(|m| m.entity)
        .collect();
    if let Some(page) = &record.clicked_page {
        let text = page_link_text(&page.title, &page.body_text, linker.page_char_limit());
        out.extend(linker.link(&text).into_iter().map(|m| m.entity));
    }
    out
}

pub fn build_entity_store(
    dataset: &UserDataset,
    linker: &dyn EntityLinker,
) -> EntityKnowledgeStore {
    let mut store = EntityKnowledgeStore::new(dataset.user.clone());
    for record in dataset.history_records() {
        store.ingest_record(record, linker);
    }
    store
}

/// Most frequent entities; ties broken by entity id.
pub fn top_k_entities(store: &EntityKnowledgeStore, k: usize) -> Vec<(EntityId, u64)> {
    let mut all: Vec<(EntityId, u64)> = store
        .entries
        .iter()
        .map(|(id, s)| (id.clone(), s.count))
        .collect();
    all.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendingReport {
    pub window: (Timestamp, Timestamp),
    pub entries: Vec<(EntityId, f64)>,
}

/// Surge score of every entity mentioned in either window.
///
/// The recent window is `[now - window, now]`, the prior window
/// `[now - 2·window, now - window)`. Score is the number of distinct users
/// mentioning the entity recently divided by one plus the distinct users in
/// the prior window.
pub fn surge_scores(
    streams: &[MemoryStream],
    linker: &dyn EntityLinker,
    window: i64,
    now: Timestamp,
) -> Result<BTreeMap<EntityId, f64>> {
    if window <= 0 {
        return Err(Error::invalid("trending window must be positive"));
    }
    let recent_start = now - window;
    let prior_start = now - 2 * window;
    let mut recent: BTreeMap<EntityId, BTreeSet<&UserId>> = BTreeMap::new();
    let mut prior: BTreeMap<EntityId, BTreeSet<&UserId>> = BTreeMap::new();
    for stream in streams {
        for record in &stream.records {
            let ts = record.timestamp;
            let bucket = if (recent_start..=now).contains(&ts) {
                &mut recent
            } else if (prior_start..recent_start).contains(&ts) {
                &mut prior
            } else {
                continue;
            };
            for entity in record_mentions(record, linker) {
                bucket.entry(entity).or_default().insert(&record.user);
            }
        }
    }
    let mut scores = BTreeMap::new();
    for entity in recent.keys().chain(prior.keys()) {
        let now_users = recent.get(entity).map_or(0, BTreeSet::len) as f64;
        let before = prior.get(entity).map_or(0, BTreeSet::len) as f64;
        scores.insert(entity.clone(), now_users / (1.0 + before));
    }
    Ok(scores)
}

/// Top entities by surge score (positive scores only), ties by entity id.
pub fn trending_entities(
    streams: &[MemoryStream],
    linker: &dyn EntityLinker,
    window: i64,
    now: Timestamp,
) -> Result<TrendingReport> {
    let mut entries: Vec<(EntityId, f64)> = surge_scores(streams, linker, window, now)?
        .into_iter()
        .filter(|(_, s)| *s > 0.0)
        .collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(TRENDING_LIMIT);
    Ok(TrendingReport {
        window: (now - window, now),
        entries,
    })
}
