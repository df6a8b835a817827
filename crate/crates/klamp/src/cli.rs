//! `klamp` command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use klamp_core::ingest::UserDataset;
use klamp_core::retrieval::Strategy;
use klamp_core::store::{
    build_entity_store, build_memory_stream, trending_entities, EntityKnowledgeStore, MemoryStream,
};
use klamp_core::suggest::Variant;
use klamp_core::{Timestamp, UserId, WebPage};
use serde::Serialize;

use crate::config::{GeneratorKind, ServiceConfig};
use crate::io::{self, ParseMode};
use crate::persist::StateDir;
use crate::pipeline::{ingest_log, Pipeline, SuggestInput};
use crate::service::AppState;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "klamp",
    version,
    about = "Personal entity stores and contextual query suggestion"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides retrieval.rng_seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides backends.generator.
    #[arg(long, global = true, value_enum)]
    backend: Option<GeneratorKind>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and filter the event log, then split users into history and holdout.
    Ingest {
        /// Event log; defaults to paths.events.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Fail on the first malformed line.
        #[arg(long)]
        strict: bool,
        /// Where to write the datasets; defaults to <store_dir>/datasets.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the filter report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Build entity stores from history sessions into <store_dir>/stores.
    BuildStores {
        #[arg(long)]
        datasets: Option<PathBuf>,
    },
    /// One suggestion for one user.
    Suggest {
        #[arg(long)]
        user: String,
        #[arg(long)]
        query: String,
        /// Earlier queries of the session, oldest first.
        #[arg(long = "session")]
        session: Vec<String>,
        #[arg(long)]
        page_url: Option<String>,
        #[arg(long, requires = "page_url")]
        page_title: Option<String>,
        #[arg(long, requires = "page_url")]
        page_text: Option<String>,
        #[arg(long, default_value = "klamp")]
        variant: Variant,
        #[arg(long, default_value = "combined")]
        strategy: Strategy,
        /// Reference time; defaults to the user's latest history event.
        #[arg(long)]
        now: Option<Timestamp>,
        #[arg(long)]
        datasets: Option<PathBuf>,
    },
    /// Compare prompt variants over every holdout context.
    Eval {
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "qs,cqs,cqs_ks,klamp",
            alias = "variant"
        )]
        variants: Vec<Variant>,
        #[arg(long, default_value = "combined")]
        strategy: Strategy,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        datasets: Option<PathBuf>,
    },
    /// Entities with a surge of distinct users in the latest window.
    Trending {
        /// Window length, e.g. 7d or 12h.
        #[arg(long, default_value = "7d")]
        window: String,
        /// End of the window; defaults to the latest event.
        #[arg(long)]
        now: Option<Timestamp>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[arg(long)]
        datasets: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// Overrides server.listen_address.
        #[arg(long)]
        listen: Option<String>,
    },
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(config) = cli.config.clone() else {
        eprintln!("error: --config <PATH> is required\n\nUsage: klamp --config <PATH> <COMMAND>");
        return ExitCode::from(2);
    };
    if !config.is_file() {
        eprintln!(
            "error: config file {} not found\n\nUsage: klamp --config <PATH> <COMMAND>",
            config.display()
        );
        return ExitCode::from(2);
    }
    match run(cli, &config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Writes to stdout, ignoring a closed pipe (`klamp ... | head`).
fn write_stdout(text: &str) {
    use std::io::Write;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush());
}

fn print_json<T: Serialize>(value: &T) {
    write_stdout(&(serde_json::to_string_pretty(value).expect("value serializes") + "\n"));
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            write_stdout(text);
            Ok(())
        }
    }
}

fn load_datasets(cfg: &ServiceConfig, path: Option<&Path>) -> Result<Vec<UserDataset>> {
    if let Some(p) = path {
        return io::read_json(p);
    }
    let events =
        cfg.paths.events.as_deref().ok_or_else(|| {
            Error::Config("no --datasets given and paths.events is not set".into())
        })?;
    Ok(ingest_log(events, cfg, ParseMode::Lenient)?.datasets)
}

fn run(cli: Cli, config: &Path) -> Result<()> {
    let mut cfg = ServiceConfig::load(config)?;
    if let Some(seed) = cli.seed {
        cfg.retrieval.rng_seed = seed;
    }
    if let Some(kind) = cli.backend {
        cfg.backends.generator = kind;
        cfg.validate()?;
    }

    match cli.command {
        Command::Ingest {
            input,
            strict,
            out,
            report,
        } => {
            let input = input.or_else(|| cfg.paths.events.clone()).ok_or_else(|| {
                Error::Config("no --input given and paths.events is not set".into())
            })?;
            let mode = if strict {
                ParseMode::Strict
            } else {
                ParseMode::Lenient
            };
            let ingested = ingest_log(&input, &cfg, mode)?;
            for e in &ingested.line_errors {
                eprintln!("{}: line {}: {}", input.display(), e.line, e.message);
            }
            let out = out.unwrap_or_else(|| cfg.paths.store_dir.join("datasets.json"));
            if let Some(parent) = out.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            io::write_json(&out, &ingested.datasets)?;
            if let Some(p) = report {
                io::write_json(&p, &ingested.report)?;
            }
            print_json(&serde_json::json!({
                "datasets": out,
                "malformed_lines": ingested.line_errors.len(),
                "report": ingested.report,
            }));
        }
        Command::BuildStores { datasets } => {
            let datasets = load_datasets(&cfg, datasets.as_deref())?;
            let pipeline = Pipeline::from_config(&cfg)?;
            let dir = cfg.paths.store_dir.join("stores");
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            let mut summary = Vec::new();
            for d in &datasets {
                let store = build_entity_store(d, &pipeline.linker);
                let path = dir.join(format!("{}.json", crate::persist::encode_user(&d.user)));
                io::write_json(&path, &store)?;
                summary.push(serde_json::json!({
                    "user": d.user,
                    "entities": store.len(),
                    "mentions": store.total_mentions(),
                    "path": path,
                }));
            }
            print_json(&summary);
        }
        Command::Suggest {
            user,
            query,
            session,
            page_url,
            page_title,
            page_text,
            variant,
            strategy,
            now,
            datasets,
        } => {
            let user = UserId::new(user)?;
            let datasets = load_datasets(&cfg, datasets.as_deref())?;
            let pipeline = Pipeline::from_config(&cfg)?;
            let (stream, store) = match datasets.iter().find(|d| d.user == user) {
                Some(d) => (
                    build_memory_stream(d),
                    build_entity_store(d, &pipeline.linker),
                ),
                None => (
                    MemoryStream::new(user.clone()),
                    EntityKnowledgeStore::new(user.clone()),
                ),
            };
            let page = page_url
                .map(|url| {
                    WebPage::new(
                        url,
                        page_title.unwrap_or_default(),
                        page_text.unwrap_or_default(),
                    )
                })
                .transpose()?;
            let now = now
                .or_else(|| stream.records.last().map(|r| r.timestamp))
                .unwrap_or(0);
            let input = SuggestInput {
                query,
                page,
                session_history: session,
                variant,
                strategy,
                now,
                seed: cfg.retrieval.rng_seed,
            };
            print_json(&pipeline.suggest(&stream, &store, &input)?);
        }
        Command::Eval {
            variants,
            strategy,
            format,
            out,
            datasets,
        } => {
            let datasets = load_datasets(&cfg, datasets.as_deref())?;
            let pipeline = Pipeline::from_config(&cfg)?;
            let report = pipeline.compare(&datasets, &variants, strategy)?;
            let text = match format {
                Format::Json => {
                    serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
                }
                Format::Table => report.render_table(),
            };
            emit(&text, out.as_deref())?;
        }
        Command::Trending {
            window,
            now,
            format,
            datasets,
        } => {
            let window = humantime::parse_duration(&window)
                .map_err(|e| Error::Config(format!("--window {window:?}: {e}")))?
                .as_secs() as i64;
            let datasets = load_datasets(&cfg, datasets.as_deref())?;
            let pipeline = Pipeline::from_config(&cfg)?;
            let streams: Vec<MemoryStream> = datasets
                .iter()
                .map(|d| {
                    let mut s = MemoryStream::new(d.user.clone());
                    for r in d
                        .history_sessions
                        .iter()
                        .chain(&d.holdout_sessions)
                        .flat_map(|s| &s.records)
                    {
                        s.push(r.clone());
                    }
                    s
                })
                .collect();
            let now = now
                .or_else(|| {
                    streams
                        .iter()
                        .filter_map(|s| s.records.last())
                        .map(|r| r.timestamp)
                        .max()
                })
                .unwrap_or(0);
            let report = trending_entities(&streams, &pipeline.linker, window, now)?;
            match format {
                Format::Json => print_json(&report),
                Format::Table => {
                    let mut text = format!("window {} .. {}\n", report.window.0, report.window.1);
                    for (e, score) in &report.entries {
                        text.push_str(&format!("{score:>8.3}  {e}\n"));
                    }
                    write_stdout(&text);
                }
            }
        }
        Command::Serve { listen } => {
            let addr = listen.unwrap_or_else(|| cfg.server.listen_address.clone());
            let pipeline = Pipeline::from_config(&cfg)?;
            let state = AppState::open(
                pipeline,
                StateDir::open(&cfg.paths.store_dir)?,
                cfg.server.snapshot_every,
            )?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Error::Config(e.to_string()))?;
            rt.block_on(crate::service::serve(state, &addr))?;
        }
    }
    Ok(())
}
