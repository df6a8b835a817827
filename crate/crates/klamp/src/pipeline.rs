//! Backends wired from configuration, plus the batch and per-request flows
//! built on them.

use std::path::Path;

use klamp_core::embed::{Embedder, HashingEmbedder};
use klamp_core::eval::{run_comparison, Backends, ComparisonReport, FixtureSearch, HarnessConfig};
use klamp_core::ingest::{prepare_datasets, FilterReport, UserDataset};
use klamp_core::linker::{link_context, Gazetteer};
use klamp_core::retrieval::{
    retrieve_entities, retrieve_history, RetrievalConfig, RetrievedKnowledge, Strategy,
};
use klamp_core::store::{EntityKnowledgeStore, MemoryStream};
use klamp_core::suggest::{
    generate, ChatBackend, GenerationParams, MockBackend, PromptBuilder, Suggestion, Variant,
};
use klamp_core::{EntityId, SearchContext, Timestamp, WebPage};
use serde::{Deserialize, Serialize};

use crate::config::{EmbedderKind, GeneratorKind, ServiceConfig};
use crate::io::{self, LineError, ParseMode};
use crate::remote::{RemoteChat, RemoteEmbedder, RemoteOptions};
use crate::Result;

pub type SharedChat = Box<dyn ChatBackend + Send + Sync>;
pub type SharedEmbedder = Box<dyn Embedder + Send + Sync>;

pub struct Pipeline {
    pub linker: Gazetteer,
    pub embedder: SharedEmbedder,
    pub chat: SharedChat,
    pub search: FixtureSearch,
    pub prompts: PromptBuilder,
    pub retrieval: RetrievalConfig,
    pub generation: GenerationParams,
}

/// Inputs of one suggestion request.
#[derive(Debug, Clone)]
pub struct SuggestInput {
    pub query: String,
    pub page: Option<WebPage>,
    pub session_history: Vec<String>,
    pub variant: Variant,
    pub strategy: Strategy,
    pub now: Timestamp,
    pub seed: u64,
}

/// Everything decided before the backend call.
#[derive(Debug, Clone)]
pub struct PreparedPrompt {
    pub bundle: klamp_core::suggest::PromptBundle,
    pub knowledge: Option<RetrievedKnowledge>,
    pub context_entities: Vec<EntityId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestOutcome {
    pub suggestion: Suggestion,
    pub knowledge: Option<RetrievedKnowledge>,
    pub context_entities: Vec<EntityId>,
}

impl Pipeline {
    /// Offline pipeline: mock generator, hashing embedder, empty search corpus.
    pub fn offline(linker: Gazetteer) -> Self {
        Pipeline {
            linker,
            embedder: Box::new(HashingEmbedder::default()),
            chat: Box::new(MockBackend),
            search: FixtureSearch::default(),
            prompts: PromptBuilder::default(),
            retrieval: RetrievalConfig::default(),
            generation: GenerationParams::default(),
        }
    }

    pub fn from_config(cfg: &ServiceConfig) -> Result<Self> {
        let linker = match &cfg.paths.gazetteer {
            Some(p) => io::load_gazetteer(p)?,
            None => Gazetteer::new(),
        };
        let opts = RemoteOptions::from(&cfg.backends);
        let b = &cfg.backends;
        let embedder: SharedEmbedder = match b.embedder {
            EmbedderKind::Fallback => Box::new(HashingEmbedder::new(b.embed_dim)?),
            EmbedderKind::Remote => Box::new(RemoteEmbedder::new(
                b.embed_endpoint.as_deref().unwrap_or_default(),
                b.embed_dim,
                opts.clone(),
            )?),
        };
        let chat: SharedChat = match b.generator {
            GeneratorKind::Mock => Box::new(MockBackend),
            GeneratorKind::Remote => Box::new(RemoteChat::new(
                b.chat_endpoint.as_deref().unwrap_or_default(),
                opts,
            )?),
        };
        let search = match &cfg.paths.search_corpus {
            Some(p) => io::load_search_corpus(p)?,
            None => FixtureSearch::default(),
        };
        let mut prompts = PromptBuilder::default();
        if let Some(dir) = &cfg.paths.templates {
            prompts.templates = io::load_templates(dir)?;
        }
        Ok(Pipeline {
            linker,
            embedder,
            chat,
            search,
            prompts,
            retrieval: cfg.retrieval.clone(),
            generation: cfg.generation,
        })
    }

    /// Links the context, retrieves what the variant needs and renders the
    /// prompt. Pure with respect to the user's state.
    pub fn prepare(
        &self,
        stream: &MemoryStream,
        store: &EntityKnowledgeStore,
        input: &SuggestInput,
    ) -> klamp_core::Result<PreparedPrompt> {
        let ctx = SearchContext::new(
            input.query.clone(),
            input.session_history.clone(),
            input.page.clone(),
        )?;
        let rcfg = self.retrieval.with_seed(input.seed);
        let context_entities = link_context(&ctx, &self.linker);
        let knowledge = match input.variant {
            Variant::Qs | Variant::Cqs => None,
            Variant::CqsKs => {
                let mut pages = retrieve_history(&ctx, stream, self.embedder.as_ref(), &rcfg)?;
                pages.truncate(1);
                Some(RetrievedKnowledge::pages(pages))
            }
            Variant::Klamp => {
                if input.strategy == Strategy::History {
                    return Err(klamp_core::Error::MissingKnowledge {
                        variant: Variant::Klamp.as_str(),
                        needed: "an entity strategy",
                    });
                }
                Some(retrieve_entities(
                    input.strategy,
                    &context_entities,
                    store,
                    &rcfg,
                    input.now,
                )?)
            }
        };
        let bundle = self
            .prompts
            .build(input.variant, &ctx, knowledge.as_ref())?;
        Ok(PreparedPrompt {
            bundle,
            knowledge,
            context_entities,
        })
    }

    pub fn complete(&self, prepared: PreparedPrompt) -> klamp_core::Result<SuggestOutcome> {
        let suggestion = generate(&prepared.bundle, &self.generation, self.chat.as_ref())?;
        Ok(SuggestOutcome {
            suggestion,
            knowledge: prepared.knowledge,
            context_entities: prepared.context_entities,
        })
    }

    pub fn suggest(
        &self,
        stream: &MemoryStream,
        store: &EntityKnowledgeStore,
        input: &SuggestInput,
    ) -> klamp_core::Result<SuggestOutcome> {
        self.complete(self.prepare(stream, store, input)?)
    }

    pub fn compare(
        &self,
        datasets: &[UserDataset],
        variants: &[Variant],
        strategy: Strategy,
    ) -> klamp_core::Result<ComparisonReport> {
        let cfg = HarnessConfig {
            retrieval: self.retrieval.clone(),
            entity_strategy: strategy,
            generation: self.generation,
            prompts: self.prompts.clone(),
        };
        let backends = Backends {
            linker: &self.linker,
            embedder: self.embedder.as_ref(),
            chat: self.chat.as_ref(),
            search: &self.search,
        };
        run_comparison(datasets, variants, &cfg, &backends)
    }
}

/// Result of reading and filtering an event log.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub datasets: Vec<UserDataset>,
    pub report: FilterReport,
    pub line_errors: Vec<LineError>,
}

pub fn ingest_log(path: &Path, cfg: &ServiceConfig, mode: ParseMode) -> Result<Ingested> {
    let parsed = io::read_log(path, mode)?;
    let (datasets, report) = prepare_datasets(parsed.records, &cfg.ingest_config()?)?;
    Ok(Ingested {
        datasets,
        report,
        line_errors: parsed.errors,
    })
}
