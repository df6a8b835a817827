//! Domain types shared across the pipeline.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Seconds since the Unix epoch, UTC.
pub type Timestamp = i64;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct UserId(String);

impl UserId {
    pub fn new(value: impl Into<String>) -> Result<Self> {
        let value = value.into();
        if value.is_empty() {
            return Err(Error::invalid("user id must not be empty"));
        }
        Ok(UserId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for UserId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        UserId::new(value)
    }
}

impl From<UserId> for String {
    fn from(id: UserId) -> String {
        id.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Canonical knowledge-base identifier, e.g. a Wikipedia page title.
///
/// Ordering is plain byte order on the canonical string; every tie-break in
/// the crate relies on it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EntityId(String);

impl EntityId {
    pub fn new(raw: &str) -> Result<Self> {
        canonicalize_entity(raw)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for EntityId {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        canonicalize_entity(&value)
    }
}

impl From<EntityId> for String {
    fn from(id: EntityId) -> String {
        id.0
    }
}

impl AsRef<str> for EntityId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Trims and collapses internal whitespace runs to one space. Case is kept.
pub fn canonicalize_entity(raw: &str) -> Result<EntityId> {
    let collapsed = collapse_whitespace(raw);
    if collapsed.is_empty() {
        return Err(Error::InvalidEntity(raw.to_string()));
    }
    Ok(EntityId(collapsed))
}

pub(crate) fn collapse_whitespace(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Joins context parts with a newline, skipping empty parts.
pub fn concat_context<S: AsRef<str>>(parts: &[S]) -> String {
    let mut out = String::new();
    for part in parts.iter().map(AsRef::as_ref).filter(|p| !p.is_empty()) {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(part);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WebPage {
    pub url: String,
    pub title: String,
    pub body_text: String,
    pub source_domain: String,
}

impl WebPage {
    /// Builds a page, deriving `source_domain` from the url host.
    pub fn new(
        url: impl Into<String>,
        title: impl Into<String>,
        body_text: impl Into<String>,
    ) -> Result<Self> {
        let url = url.into();
        let source_domain =
            host_of(&url).ok_or_else(|| Error::invalid("page url has no host component"))?;
        Ok(WebPage {
            url,
            title: title.into(),
            body_text: body_text.into(),
            source_domain,
        })
    }
}

/// Lowercased host component of an absolute or scheme-less url.
pub fn host_of(url: &str) -> Option<String> {
    let url = url.trim();
    let rest = match url.find("://") {
        Some(i) => &url[i + 3..],
        None => url.strip_prefix("//").unwrap_or(url),
    };
    let authority = rest.split(['/', '?', '#']).next().unwrap_or("");
    let host_port = authority.rsplit('@').next().unwrap_or("");
    let host = if let Some(v6) = host_port.strip_prefix('[') {
        v6.split(']').next().unwrap_or("")
    } else {
        host_port.split(':').next().unwrap_or("")
    };
    if host.is_empty() {
        None
    } else {
        Some(host.to_ascii_lowercase())
    }
}

/// One logged interaction: a query, optionally followed by a click.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub user: UserId,
    pub timestamp: Timestamp,
    pub query_text: String,
    #[serde(default)]
    pub clicked_page: Option<WebPage>,
    #[serde(default)]
    pub session_id: Option<String>,
}

impl SearchRecord {
    pub fn new(
        user: UserId,
        timestamp: Timestamp,
        query_text: impl Into<String>,
        clicked_page: Option<WebPage>,
    ) -> Result<Self> {
        let query_text = query_text.into();
        if timestamp <= 0 {
            return Err(Error::invalid("timestamp must be positive"));
        }
        if query_text.trim().is_empty() {
            return Err(Error::invalid("query text must not be empty"));
        }
        Ok(SearchRecord {
            user,
            timestamp,
            query_text,
            clicked_page,
            session_id: None,
        })
    }

    pub fn has_click(&self) -> bool {
        self.clicked_page.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub user: UserId,
    pub records: Vec<SearchRecord>,
}

impl Session {
    pub fn first_timestamp(&self) -> Option<Timestamp> {
        self.records.first().map(|r| r.timestamp)
    }

    pub fn click_count(&self) -> usize {
        self.records.iter().filter(|r| r.has_click()).count()
    }
}

/// What the user is doing right now: the query, what came before it in the
/// session, and the page they opened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchContext {
    pub current_query: String,
    #[serde(default)]
    pub session_history: Vec<String>,
    #[serde(default)]
    pub current_page: Option<WebPage>,
}

impl SearchContext {
    pub fn new(
        current_query: impl Into<String>,
        session_history: Vec<String>,
        current_page: Option<WebPage>,
    ) -> Result<Self> {
        let current_query = current_query.into();
        if current_query.trim().is_empty() {
            return Err(Error::invalid("current query must not be empty"));
        }
        Ok(SearchContext {
            current_query,
            session_history,
            current_page,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn canonicalize_collapses_whitespace() {
        assert_eq!(
            canonicalize_entity("  Machine  Learning ")
                .unwrap()
                .as_str(),
            "Machine Learning"
        );
        assert_eq!(
            canonicalize_entity("Machine Learning").unwrap().as_str(),
            "Machine Learning"
        );
        assert!(matches!(
            canonicalize_entity(""),
            Err(Error::InvalidEntity(_))
        ));
        assert!(matches!(
            canonicalize_entity(" \t\n"),
            Err(Error::InvalidEntity(_))
        ));
    }

    #[test]
    fn concat_skips_empty_parts() {
        assert_eq!(concat_context(&["a", "b"]), "a\nb");
        assert_eq!(concat_context(&["a"]), "a");
        assert_eq!(concat_context(&["a", "", "b"]), "a\nb");
        assert_eq!(concat_context::<&str>(&[]), "");
    }

    #[test]
    fn host_extraction() {
        assert_eq!(
            host_of("https://www.Example.com/a?b").unwrap(),
            "www.example.com"
        );
        assert_eq!(
            host_of("http://user@en.wikipedia.org:8080/wiki/X").unwrap(),
            "en.wikipedia.org"
        );
        assert_eq!(host_of("http://[::1]:80/").unwrap(), "::1");
        assert_eq!(
            host_of("news.example.org/path").unwrap(),
            "news.example.org"
        );
        assert!(host_of("https:///nohost").is_none());
        assert!(host_of("").is_none());
    }

    #[test]
    fn record_validation() {
        let u = UserId::new("u1").unwrap();
        assert!(SearchRecord::new(u.clone(), 0, "q", None).is_err());
        assert!(SearchRecord::new(u.clone(), 5, "  ", None).is_err());
        assert!(SearchRecord::new(u, 5, "q", None).is_ok());
        assert!(UserId::new("").is_err());
    }

    #[test]
    fn ids_reject_invalid_on_deserialize() {
        assert!(serde_json::from_str::<UserId>("\"\"").is_err());
        assert!(serde_json::from_str::<EntityId>("\"   \"").is_err());
        let e: EntityId = serde_json::from_str("\"Apple  Inc.\"").unwrap();
        assert_eq!(e.as_str(), "Apple Inc.");
    }

    #[test]
    fn context_round_trips() {
        let page = WebPage::new("https://apple.com/x", "T", "body").unwrap();
        let ctx = SearchContext::new("q", vec!["a".into()], Some(page)).unwrap();
        let json = serde_json::to_string(&ctx).unwrap();
        assert_eq!(serde_json::from_str::<SearchContext>(&json).unwrap(), ctx);
    }
}
