//! Line-delimited event logs and the other on-disk formats.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use klamp_core::eval::{FixtureSearch, SearchResult};
use klamp_core::ingest::normalize_domain;
use klamp_core::linker::Gazetteer;
use klamp_core::store::EntityKnowledgeStore;
use klamp_core::suggest::PromptTemplates;
use klamp_core::{SearchRecord, UserId, WebPage};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A clicked page as it appears on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirePage {
    pub url: String,
    pub title: String,
    #[serde(default)]
    pub text: String,
}

impl WirePage {
    pub fn to_page(&self) -> klamp_core::Result<WebPage> {
        WebPage::new(self.url.clone(), self.title.clone(), self.text.clone())
    }
}

impl From<&WebPage> for WirePage {
    fn from(p: &WebPage) -> Self {
        WirePage {
            url: p.url.clone(),
            title: p.title.clone(),
            text: p.body_text.clone(),
        }
    }
}

/// One event log line: `{"user", "ts", "query", "click"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRecord {
    pub user: String,
    pub ts: i64,
    pub query: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub click: Option<WirePage>,
}

impl WireRecord {
    pub fn to_record(&self) -> klamp_core::Result<SearchRecord> {
        let page = self.click.as_ref().map(WirePage::to_page).transpose()?;
        SearchRecord::new(
            UserId::new(self.user.clone())?,
            self.ts,
            self.query.clone(),
            page,
        )
    }
}

impl From<&SearchRecord> for WireRecord {
    fn from(r: &SearchRecord) -> Self {
        WireRecord {
            user: r.user.to_string(),
            ts: r.timestamp,
            query: r.query_text.clone(),
            click: r.clicked_page.as_ref().map(WirePage::from),
        }
    }
}

/// Parses one line into a validated record.
pub fn parse_line(line: &str) -> std::result::Result<SearchRecord, String> {
    let wire: WireRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    wire.to_record().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ParseMode {
    /// Bad lines are reported and skipped.
    #[default]
    Lenient,
    /// The first bad line is fatal.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedLog {
    pub records: Vec<SearchRecord>,
    pub errors: Vec<LineError>,
}

/// Reads one JSON record per line. Blank lines are ignored. Line numbers
/// are 1-based.
pub fn parse_log<R: BufRead>(reader: R, mode: ParseMode, origin: &str) -> Result<ParsedLog> {
    let mut out = ParsedLog::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(r) => out.records.push(r),
            Err(message) if mode == ParseMode::Strict => {
                return Err(Error::Line {
                    origin: origin.to_string(),
                    line: idx + 1,
                    message,
                })
            }
            Err(message) => out.errors.push(LineError {
                line: idx + 1,
                message,
            }),
        }
    }
    Ok(out)
}

pub fn read_log(path: &Path, mode: ParseMode) -> Result<ParsedLog> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_log(BufReader::new(file), mode, &path.display().to_string())
}

pub fn write_log(path: &Path, records: &[SearchRecord]) -> Result<()> {
    let mut buf = String::new();
    for r in records {
        buf.push_str(&serde_json::to_string(&WireRecord::from(r)).expect("wire record serializes"));
        buf.push('\n');
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_gazetteer(path: &Path) -> Result<Gazetteer> {
    Ok(Gazetteer::parse_tsv(&read_text(path)?)?)
}

/// One domain per line; `#` comments and blank lines skipped.
pub fn parse_allowlist(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_domain)
        .collect()
}

pub fn load_allowlist(path: &Path) -> Result<BTreeSet<String>> {
    Ok(parse_allowlist(&read_text(path)?))
}

/// Search corpus for the offline validity metric: JSON lines of
/// `{"title", "snippet"}`.
pub fn load_search_corpus(path: &Path) -> Result<FixtureSearch> {
    let text = read_text(path)?;
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let doc: SearchResult = serde_json::from_str(line).map_err(|e| Error::Line {
            origin: path.display().to_string(),
            line: idx + 1,
            message: e.to_string(),
        })?;
        docs.push(doc);
    }
    Ok(FixtureSearch::new(docs))
}

/// Templates from a directory holding any of `system.txt`, `qs.txt`,
/// `cqs.txt`, `cqs_ks.txt`, `klamp.txt`, `summary_system.txt` and
/// `summary.txt`. Missing files keep the bundled text.
pub fn load_templates(dir: &Path) -> Result<PromptTemplates> {
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "template directory {} not found",
            dir.display()
        )));
    }
    let d = PromptTemplates::default();
    let read = |name: &str, fallback: &str| -> Result<String> {
        let p = dir.join(name);
        if p.exists() {
            read_text(&p)
        } else {
            Ok(fallback.to_string())
        }
    };
    Ok(PromptTemplates::from_texts(
        &read("system.txt", &d.system)?,
        &read("qs.txt", &d.qs)?,
        &read("cqs.txt", &d.cqs)?,
        &read("cqs_ks.txt", &d.cqs_ks)?,
        &read("klamp.txt", &d.klamp)?,
        &read("summary_system.txt", &d.summary_system)?,
        &read("summary.txt", &d.summary)?,
    ))
}

/// Writes via a temporary sibling, fsyncs, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Line {
        origin: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Loads and validates a store snapshot.
pub fn read_store(path: &Path) -> Result<EntityKnowledgeStore> {
    let store: EntityKnowledgeStore = read_json(path)?;
    store.validate()?;
    Ok(store)
}
