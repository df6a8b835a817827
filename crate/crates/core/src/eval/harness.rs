//! Replays holdout sessions through each prompt variant and scores them.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embed::Embedder;
use crate::eval::metrics::{auto_relatedness, auto_usefulness, auto_validity, SearchClient};
use crate::ingest::UserDataset;
use crate::linker::{link_context, EntityLinker};
use crate::model::{SearchContext, Timestamp, UserId};
use crate::retrieval::{
    retrieve_entities, HistoryIndex, RetrievalConfig, RetrievedKnowledge, Strategy,
};
use crate::rng::{fnv1a64, SplitMix64};
use crate::store::{build_entity_store, build_memory_stream};
use crate::suggest::{generate, ChatBackend, GenerationParams, PromptBuilder, Variant};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct HarnessConfig {
    pub retrieval: RetrievalConfig,
    /// Entity strategy feeding klamp prompts and the relatedness metric.
    pub entity_strategy: Strategy,
    pub generation: GenerationParams,
    pub prompts: PromptBuilder,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            retrieval: RetrievalConfig::default(),
            entity_strategy: Strategy::Combined,
            generation: GenerationParams::default(),
            prompts: PromptBuilder::default(),
        }
    }
}

pub struct Backends<'a> {
    pub linker: &'a dyn EntityLinker,
    pub embedder: &'a dyn Embedder,
    pub chat: &'a dyn ChatBackend,
    pub search: &'a dyn SearchClient,
}

/// One clicked holdout record, seen as a live search context.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalContext {
    pub user: UserId,
    pub context_id: String,
    pub context: SearchContext,
    pub next_queries: Vec<String>,
    pub now: Timestamp,
}

/// Every clicked record of every holdout session, in session order.
pub fn holdout_contexts(dataset: &UserDataset) -> Result<Vec<EvalContext>> {
    let mut out = Vec::new();
    for session in &dataset.holdout_sessions {
        for (idx, record) in session.records.iter().enumerate() {
            let Some(page) = &record.clicked_page else {
                continue;
            };
            let before = session.records[..idx]
                .iter()
                .map(|r| r.query_text.clone())
                .collect();
            let after = session.records[idx + 1..]
                .iter()
                .map(|r| r.query_text.clone())
                .collect();
            out.push(EvalContext {
                user: dataset.user.clone(),
                context_id: format!("{}#{}", session.id, idx),
                context: SearchContext::new(record.query_text.clone(), before, Some(page.clone()))?,
                next_queries: after,
                now: record.timestamp,
            });
        }
    }
    Ok(out)
}

/// Scores for one successfully parsed suggestion. `validity` is `None` when
/// the search client failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub user: UserId,
    pub context_id: String,
    pub variant: Variant,
    pub suggestion: String,
    pub validity: Option<f64>,
    pub relatedness: f64,
    pub usefulness: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub missing_knowledge: usize,
    pub backend: usize,
    pub parse: usize,
    pub other: usize,
    pub validity_missing: usize,
}

impl FailureCounts {
    fn tally(&mut self, err: &Error) {
        match err {
            Error::MissingKnowledge { .. } => self.missing_knowledge += 1,
            Error::BackendUnavailable { .. } => self.backend += 1,
            Error::ParseFailure { .. } => self.parse += 1,
            _ => self.other += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.missing_knowledge + self.backend + self.parse + self.other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: Variant,
    pub validity: Option<f64>,
    pub relatedness: Option<f64>,
    pub usefulness: Option<f64>,
    /// Mean per-context rank, 1 = best.
    pub mean_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRanking {
    pub user: UserId,
    pub context_id: String,
    pub ranking: Vec<Variant>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub variants: Vec<Variant>,
    pub contexts_total: usize,
    /// Contexts where every variant produced a scored suggestion.
    pub contexts_scored: usize,
    pub contexts_excluded: usize,
    pub summaries: Vec<VariantSummary>,
    /// Variants ordered by mean usefulness, best first.
    pub ranking: Vec<Variant>,
    pub failures: BTreeMap<Variant, FailureCounts>,
    pub context_rankings: Vec<ContextRanking>,
    pub records: Vec<MetricRecord>,
}

fn context_seed(base: u64, user: &UserId, context_id: &str) -> u64 {
    let mut key = String::with_capacity(user.as_str().len() + context_id.len() + 1);
    key.push_str(user.as_str());
    key.push('\0');
    key.push_str(context_id);
    SplitMix64::derive(base, fnv1a64(key.as_bytes())).next_u64()
}

fn dedup_variants(variants: &[Variant]) -> Vec<Variant> {
    let mut out: Vec<Variant> = Vec::new();
    for v in variants {
        if !out.contains(v) {
            out.push(*v);
        }
    }
    out
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs every variant over every holdout context.
///
/// Stores are built from history sessions only. Datasets are processed in
/// user order, so the report does not depend on input order.
pub fn run_comparison(
    datasets: &[UserDataset],
    variants: &[Variant],
    cfg: &HarnessConfig,
    backends: &Backends<'_>,
) -> Result<ComparisonReport> {
    cfg.retrieval.validate()?;
    cfg.generation.validate()?;
    if cfg.entity_strategy == Strategy::History {
        return Err(Error::invalid("entity strategy must not be history"));
    }
    let variants = dedup_variants(variants);
    if variants.is_empty() {
        return Err(Error::invalid("no variants to compare"));
    }
    let mut ordered: Vec<&UserDataset> = datasets.iter().collect();
    ordered.sort_by(|a, b| a.user.cmp(&b.user));

    let mut failures: BTreeMap<Variant, FailureCounts> = variants
        .iter()
        .map(|v| (*v, FailureCounts::default()))
        .collect();
    let mut records = Vec::new();
    let mut complete: Vec<Vec<MetricRecord>> = Vec::new();
    let mut contexts_total = 0;

    for dataset in ordered {
        let store = build_entity_store(dataset, backends.linker);
        let stream = build_memory_stream(dataset);
        let index = HistoryIndex::build(&stream, backends.embedder, cfg.retrieval.body_char_limit)?;

        for ec in holdout_contexts(dataset)? {
            contexts_total += 1;
            let rcfg = cfg.retrieval.with_seed(context_seed(
                cfg.retrieval.rng_seed,
                &ec.user,
                &ec.context_id,
            ));
            let ctx_entities = link_context(&ec.context, backends.linker);
            let entity_knowledge =
                retrieve_entities(cfg.entity_strategy, &ctx_entities, &store, &rcfg, ec.now)?;
            let query_emb = backends.embedder.embed(&ec.context.current_query)?;
            let history_pages = index
                .search(&query_emb, 1)?
                .into_iter()
                .map(|(_, p)| p.clone())
                .collect();
            let history_knowledge = RetrievedKnowledge::pages(history_pages);

            let mut scored = Vec::with_capacity(variants.len());
            for &variant in &variants {
                let knowledge = match variant {
                    Variant::CqsKs => Some(&history_knowledge),
                    Variant::Klamp => Some(&entity_knowledge),
                    Variant::Qs | Variant::Cqs => None,
                };
                let outcome = cfg
                    .prompts
                    .build(variant, &ec.context, knowledge)
                    .and_then(|bundle| generate(&bundle, &cfg.generation, backends.chat))
                    .and_then(|s| {
                        let validity =
                            match auto_validity(&s.query, backends.search, backends.embedder) {
                                Ok(v) => Some(v),
                                Err(Error::SearchFailure(_)) => None,
                                Err(e) => return Err(e),
                            };
                        Ok(MetricRecord {
                            user: ec.user.clone(),
                            context_id: ec.context_id.clone(),
                            variant,
                            validity,
                            relatedness: auto_relatedness(
                                &s.query,
                                &entity_knowledge.entities,
                                backends.embedder,
                            )?,
                            usefulness: auto_usefulness(
                                &s.query,
                                &ec.next_queries,
                                backends.embedder,
                            )?,
                            suggestion: s.query,
                        })
                    });
                let counts = failures.get_mut(&variant).expect("variant registered");
                match outcome {
                    Ok(rec) => {
                        if rec.validity.is_none() {
                            counts.validity_missing += 1;
                        }
                        scored.push(rec);
                    }
                    Err(e) => counts.tally(&e),
                }
            }
            if scored.len() == variants.len() {
                complete.push(scored.clone());
            }
            records.extend(scored);
        }
    }

    let context_rankings: Vec<ContextRanking> = complete
        .iter()
        .map(|recs| ContextRanking {
            user: recs[0].user.clone(),
            context_id: recs[0].context_id.clone(),
            ranking: rank_context(recs, &variants),
        })
        .collect();

    let summaries: Vec<VariantSummary> = variants
        .iter()
        .enumerate()
        .map(|(vi, &variant)| {
            let rows = complete.iter().map(|recs| &recs[vi]);
            VariantSummary {
                variant,
                validity: mean(rows.clone().filter_map(|r| r.validity)),
                relatedness: mean(rows.clone().map(|r| r.relatedness)),
                usefulness: mean(rows.map(|r| r.usefulness)),
                mean_rank: mean(context_rankings.iter().map(|cr| {
                    (cr.ranking
                        .iter()
                        .position(|v| *v == variant)
                        .expect("ranked")
                        + 1) as f64
                })),
            }
        })
        .collect();

    let mut ranking: Vec<(usize, &VariantSummary)> = summaries.iter().enumerate().collect();
    ranking.sort_by(|(ia, a), (ib, b)| {
        let ua = a.usefulness.unwrap_or(f64::NEG_INFINITY);
        let ub = b.usefulness.unwrap_or(f64::NEG_INFINITY);
        ub.total_cmp(&ua).then(ia.cmp(ib))
    });

    Ok(ComparisonReport {
        contexts_scored: complete.len(),
        contexts_excluded: contexts_total - complete.len(),
        contexts_total,
        ranking: ranking.into_iter().map(|(_, s)| s.variant).collect(),
        variants,
        summaries,
        failures,
        context_rankings,
        records,
    })
}

/// Usefulness, then relatedness, then validity (all descending), then the
/// caller's variant order.
fn rank_context(recs: &[MetricRecord], variants: &[Variant]) -> Vec<Variant> {
    let mut idx: Vec<usize> = (0..recs.len()).collect();
    idx.sort_by(|&a, &b| {
        let (ra, rb) = (&recs[a], &recs[b]);
        rb.usefulness
            .total_cmp(&ra.usefulness)
            .then(rb.relatedness.total_cmp(&ra.relatedness))
            .then(
                rb.validity
                    .unwrap_or(f64::NEG_INFINITY)
                    .total_cmp(&ra.validity.unwrap_or(f64::NEG_INFINITY)),
            )
            .then(a.cmp(&b))
    });
    idx.into_iter().map(|i| variants[i]).collect()
}

fn fmt_metric(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"))
}

impl ComparisonReport {
    /// Aligned text table, one row per variant.
    pub fn render_table(&self) -> String {
        let header = ["Model", "Validity", "Relatedness", "Usefulness", "Ranking"];
        let rows: Vec<[String; 5]> = self
            .summaries
            .iter()
            .map(|s| {
                [
                    s.variant.label().to_string(),
                    fmt_metric(s.validity),
                    fmt_metric(s.relatedness),
                    fmt_metric(s.usefulness),
                    s.mean_rank
                        .map_or_else(|| "-".to_string(), |v| format!("{v:.2}")),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let mut line = |cells: [&str; 5]| {
            for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(out, "{cell:<w$}");
                } else {
                    let _ = write!(out, "  {cell:>w$}");
                }
            }
            out.push('\n');
        };
        line(header);
        let rule: [String; 5] = widths.map(|w| "-".repeat(w));
        line(rule.each_ref().map(String::as_str));
        for row in &rows {
            line(row.each_ref().map(String::as_str));
        }
        let _ = writeln!(
            out,
            "contexts: {} scored, {} excluded of {}",
            self.contexts_scored, self.contexts_excluded, self.contexts_total
        );
        out
    }
}
