//! Gazetteer-based entity linking.
//!
//! Matching is greedy leftmost-longest over token boundaries. A boundary is
//! any position where the character class changes between alphanumeric,
//! whitespace and other (punctuation, symbols), plus both ends of the text.
//! Candidate spans must start and end on a boundary and may not start or end
//! with whitespace, so an alias like "art" never fires inside "start".

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{canonicalize_entity, collapse_whitespace, EntityId, SearchContext};
use crate::{Error, Result};

/// Page text beyond this many characters is not linked.
pub const DEFAULT_PAGE_CHAR_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mention {
    pub entity: EntityId,
    pub surface: String,
    /// Byte offsets into the linked text.
    pub char_span: (usize, usize),
}

/// Anything that turns text into non-overlapping, start-ordered mentions.
pub trait EntityLinker {
    fn link(&self, text: &str) -> Vec<Mention>;

    /// Maximum number of characters of page text to link.
    fn page_char_limit(&self) -> usize {
        DEFAULT_PAGE_CHAR_LIMIT
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Gazetteer {
    aliases: BTreeMap<String, EntityId>,
    max_alias_len: usize,
    page_char_limit: Option<usize>,
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `alias → id`. The first mapping for an alias wins; returns
    /// whether this call inserted it. The canonical id is registered as an
    /// alias of itself if no earlier entry claimed that spelling.
    pub fn insert(&mut self, alias: &str, id: EntityId) -> Result<bool> {
        let key = alias_key(alias);
        if key.is_empty() {
            return Err(Error::invalid("gazetteer alias must not be empty"));
        }
        let self_key = alias_key(id.as_str());
        let inserted = self.insert_key(key, id.clone());
        self.insert_key(self_key, id);
        Ok(inserted)
    }

    fn insert_key(&mut self, key: String, id: EntityId) -> bool {
        if self.aliases.contains_key(&key) {
            return false;
        }
        self.max_alias_len = self.max_alias_len.max(key.len());
        self.aliases.insert(key, id);
        true
    }

    /// Parses `alias<TAB>canonical_id` lines. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut gaz = Gazetteer::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (alias, canonical) = line
                .split_once('\t')
                .ok_or_else(|| Error::invalid(format!("gazetteer line {}: missing tab", n + 1)))?;
            let id = canonicalize_entity(canonical)
                .map_err(|_| Error::invalid(format!("gazetteer line {}: empty id", n + 1)))?;
            gaz.insert(alias, id)
                .map_err(|_| Error::invalid(format!("gazetteer line {}: empty alias", n + 1)))?;
        }
        Ok(gaz)
    }

    pub fn with_page_char_limit(mut self, limit: usize) -> Self {
        self.page_char_limit = Some(limit);
        self
    }

    pub fn lookup(&self, alias: &str) -> Option<&EntityId> {
        self.aliases.get(&alias_key(alias))
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn entities(&self) -> BTreeSet<&EntityId> {
        self.aliases.values().collect()
    }
}

fn alias_key(s: &str) -> String {
    collapse_whitespace(&s.to_lowercase())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Alnum,
    Space,
    Other,
}

fn class(c: char) -> Class {
    if c.is_alphanumeric() {
        Class::Alnum
    } else if c.is_whitespace() {
        Class::Space
    } else {
        Class::Other
    }
}

/// Byte positions of token boundaries, with flags for valid span start/end.
fn boundaries(text: &str) -> Vec<(usize, bool, bool)> {
    let mut out = Vec::new();
    let mut prev: Option<Class> = None;
    for (i, c) in text.char_indices() {
        let cur = class(c);
        if prev != Some(cur) {
            out.push((
                i,
                cur != Class::Space,
                prev.is_some_and(|p| p != Class::Space),
            ));
        }
        prev = Some(cur);
    }
    if let Some(p) = prev {
        out.push((text.len(), false, p != Class::Space));
    }
    out
}

pub fn link(text: &str, gaz: &Gazetteer) -> Vec<Mention> {
    let mut mentions = Vec::new();
    if gaz.is_empty() {
        return mentions;
    }
    let bounds = boundaries(text);
    let mut i = 0;
    while i < bounds.len() {
        let (start, can_start, _) = bounds[i];
        if !can_start {
            i += 1;
            continue;
        }
        let mut best: Option<(usize, &EntityId)> = None;
        for (j, &(end, _, can_end)) in bounds.iter().enumerate().skip(i + 1) {
            let key = alias_key(&text[start..end]);
            if key.len() > gaz.max_alias_len {
                break;
            }
            if !can_end {
                continue;
            }
            if let Some(id) = gaz.aliases.get(&key) {
                best = Some((j, id));
            }
        }
        match best {
            Some((j, id)) => {
                let end = bounds[j].0;
                mentions.push(Mention {
                    entity: id.clone(),
                    surface: text[start..end].to_string(),
                    char_span: (start, end),
                });
                i = j;
            }
            None => i += 1,
        }
    }
    mentions
}

impl EntityLinker for Gazetteer {
    fn link(&self, text: &str) -> Vec<Mention> {
        link(text, self)
    }

    fn page_char_limit(&self) -> usize {
        self.page_char_limit.unwrap_or(DEFAULT_PAGE_CHAR_LIMIT)
    }
}

/// First `limit` characters of `text`.
pub fn truncate_chars(text: &str, limit: usize) -> &str {
    match text.char_indices().nth(limit) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

/// Title and truncated body of a page as one linkable string.
pub(crate) fn page_link_text(title: &str, body: &str, limit: usize) -> String {
    let mut s = String::with_capacity(title.len() + 1 + body.len().min(limit * 4));
    s.push_str(title);
    s.push('\n');
    s.push_str(truncate_chars(body, limit));
    s
}

/// Entities of the query followed by those of the page, deduplicated in
/// first-occurrence order.
pub fn link_context(ctx: &SearchContext, linker: &dyn EntityLinker) -> Vec<EntityId> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut push = |mentions: Vec<Mention>| {
        for m in mentions {
            if seen.insert(m.entity.clone()) {
                out.push(m.entity);
            }
        }
    };
    push(linker.link(&ctx.current_query));
    if let Some(page) = &ctx.current_page {
        push(linker.link(&page_link_text(
            &page.title,
            &page.body_text,
            linker.page_char_limit(),
        )));
    }
    out
}
