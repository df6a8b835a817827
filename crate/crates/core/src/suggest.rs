//! Prompt assembly, generation backends and suggestion parsing.

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linker::truncate_chars;
use crate::model::{collapse_whitespace, EntityId, SearchContext, UserId};
use crate::retrieval::{RetrievedKnowledge, Strategy};
use crate::store::{top_k_entities, EntityKnowledgeStore};
use crate::{Error, Result};

/// Article text in prompts is cut to this many characters.
pub const DEFAULT_ARTICLE_CHAR_LIMIT: usize = 4_000;
/// Entities fed to the interest summary.
pub const SUMMARY_TOP_K: usize = 30;
pub const LIST_SEPARATOR: &str = " | ";
pub const MOCK_RATIONALE: &str = "Deterministic mock suggestion built from the prompt context.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Qs,
    Cqs,
    CqsKs,
    Klamp,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Qs, Variant::Cqs, Variant::CqsKs, Variant::Klamp];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Qs => "qs",
            Variant::Cqs => "cqs",
            Variant::CqsKs => "cqs_ks",
            Variant::Klamp => "klamp",
        }
    }

    /// Display name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Qs => "Query Suggestion",
            Variant::Cqs => "Contextual Query Suggestion",
            Variant::CqsKs => "Contextual Query Suggestion w/ Ks",
            Variant::Klamp => "K-LaMP",
        }
    }

    pub fn needs_page(self) -> bool {
        !matches!(self, Variant::Qs)
    }
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown variant `{s}`")))
    }
}

fn strip_final_newline(s: &str) -> String {
    s.strip_suffix('\n')
        .map(|s| s.strip_suffix('\r').unwrap_or(s))
        .unwrap_or(s)
        .to_owned()
}

/// The prompt texts. Placeholders are `{name}`; unknown names are left as is.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplates {
    pub system: String,
    pub qs: String,
    pub cqs: String,
    pub cqs_ks: String,
    pub klamp: String,
    pub summary_system: String,
    pub summary: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates::from_texts(
            include_str!("../templates/system.txt"),
            include_str!("../templates/qs.txt"),
            include_str!("../templates/cqs.txt"),
            include_str!("../templates/cqs_ks.txt"),
            include_str!("../templates/klamp.txt"),
            include_str!("../templates/summary_system.txt"),
            include_str!("../templates/summary.txt"),
        )
    }
}

impl PromptTemplates {
    /// Builds templates from file contents; one trailing newline per text is
    /// dropped.
    pub fn from_texts(
        system: &str,
        qs: &str,
        cqs: &str,
        cqs_ks: &str,
        klamp: &str,
        summary_system: &str,
        summary: &str,
    ) -> Self {
        PromptTemplates {
            system: strip_final_newline(system),
            qs: strip_final_newline(qs),
            cqs: strip_final_newline(cqs),
            cqs_ks: strip_final_newline(cqs_ks),
            klamp: strip_final_newline(klamp),
            summary_system: strip_final_newline(summary_system),
            summary: strip_final_newline(summary),
        }
    }

    pub fn for_variant(&self, variant: Variant) -> &str {
        match variant {
            Variant::Qs => &self.qs,
            Variant::Cqs => &self.cqs,
            Variant::CqsKs => &self.cqs_ks,
            Variant::Klamp => &self.klamp,
        }
    }
}

/// Single-pass substitution, so inserted values are never re-expanded.
pub fn render_template(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let found = after.find('}').and_then(|close| {
            let name = &after[..close];
            values
                .iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match found {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptBundle {
    pub system_message: String,
    pub user_message: String,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBuilder {
    pub templates: PromptTemplates,
    pub article_char_limit: usize,
}

impl Default for PromptBuilder {
    fn default() -> Self {
        PromptBuilder {
            templates: PromptTemplates::default(),
            article_char_limit: DEFAULT_ARTICLE_CHAR_LIMIT,
        }
    }
}

/// Context values go on one labeled line each, so line breaks inside them
/// are folded to spaces.
fn one_line(s: &str) -> String {
    collapse_whitespace(s)
}

fn join_list<S: AsRef<str>>(items: &[S]) -> String {
    items
        .iter()
        .map(|s| one_line(s.as_ref()))
        .collect::<Vec<_>>()
        .join(LIST_SEPARATOR)
}

impl PromptBuilder {
    pub fn build(
        &self,
        variant: Variant,
        ctx: &SearchContext,
        knowledge: Option<&RetrievedKnowledge>,
    ) -> Result<PromptBundle> {
        let query = one_line(&ctx.current_query);
        let session = join_list(&ctx.session_history);
        let page = match (&ctx.current_page, variant.needs_page()) {
            (Some(p), true) => Some(p),
            (None, true) => {
                return Err(Error::MissingKnowledge {
                    variant: variant.as_str(),
                    needed: "a current page",
                })
            }
            (_, false) => None,
        };
        let (article_title, article_text) = page
            .map(|p| {
                (
                    one_line(&p.title),
                    one_line(truncate_chars(&p.body_text, self.article_char_limit)),
                )
            })
            .unwrap_or_default();

        let mut related_title = String::new();
        let mut related_text = String::new();
        let mut entities = String::new();
        match variant {
            Variant::CqsKs => match knowledge {
                Some(k) if k.pages.len() == 1 => {
                    related_title = one_line(&k.pages[0].title);
                    related_text = one_line(truncate_chars(
                        &k.pages[0].body_text,
                        self.article_char_limit,
                    ));
                }
                _ => {
                    return Err(Error::MissingKnowledge {
                        variant: variant.as_str(),
                        needed: "exactly one retrieved page",
                    })
                }
            },
            Variant::Klamp => match knowledge {
                Some(k) if k.strategy != Strategy::History => {
                    entities = join_list(&k.entities);
                }
                _ => {
                    return Err(Error::MissingKnowledge {
                        variant: variant.as_str(),
                        needed: "entity knowledge",
                    })
                }
            },
            Variant::Qs | Variant::Cqs => {}
        }

        let user_message = render_template(
            self.templates.for_variant(variant),
            &[
                ("query", &query),
                ("session", &session),
                ("article_title", &article_title),
                ("article_text", &article_text),
                ("related_title", &related_title),
                ("related_text", &related_text),
                ("entities", &entities),
            ],
        );
        Ok(PromptBundle {
            system_message: self.templates.system.clone(),
            user_message,
            variant,
        })
    }
}

/// [`PromptBuilder::build`] with the bundled templates.
pub fn build_prompt(
    variant: Variant,
    ctx: &SearchContext,
    knowledge: Option<&RetrievedKnowledge>,
) -> Result<PromptBundle> {
    PromptBuilder::default().build(variant, ctx, knowledge)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_output_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 0.7,
            top_p: 0.95,
            max_output_tokens: 256,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(Error::invalid("temperature must be within [0, 2]"));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(Error::invalid("top_p must be within (0, 1]"));
        }
        Ok(())
    }
}

/// What a chat backend receives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub top_p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
}

impl ChatRequest {
    pub fn new(system: &str, user: &str, params: &GenerationParams) -> Self {
        ChatRequest {
            system: system.to_string(),
            user: user.to_string(),
            temperature: params.temperature,
            top_p: params.top_p,
            max_tokens: Some(params.max_output_tokens),
        }
    }
}

pub trait ChatBackend {
    /// Raw completion text for one request.
    fn complete(&self, request: &ChatRequest) -> Result<String>;
}

/// Offline backend that answers from the prompt's own labeled lines.
///
/// Suggestion prompts get `Query Suggestion: <query> <extra>` where `extra`
/// is the first personal entity, else the related article title, else the
/// article title, else the first session query. Summary prompts get
/// `Interested in: ` followed by the first five listed entities.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MockBackend;

fn labeled<'a>(text: &'a str, label: &str) -> Option<&'a str> {
    text.lines().find_map(|l| l.strip_prefix(label))
}

fn first_item(list: &str) -> &str {
    list.split(LIST_SEPARATOR).next().unwrap_or("").trim()
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String> {
        let user = &request.user;
        if let Some(list) = labeled(user, "Top Entities: ") {
            let top: Vec<&str> = list
                .split(LIST_SEPARATOR)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .take(5)
                .collect();
            return Ok(format!("Interested in: {}", top.join(", ")));
        }
        let query = labeled(user, "Query: ").unwrap_or("").trim();
        let extra = if let Some(list) = labeled(user, "Personal Entities: ") {
            first_item(list)
        } else if let Some(t) = labeled(user, "Related Article Title: ") {
            t.trim()
        } else if let Some(t) = labeled(user, "Article Title: ") {
            t.trim()
        } else {
            labeled(user, "Session: ").map(first_item).unwrap_or("")
        };
        let suggestion = if extra.is_empty() {
            query.to_string()
        } else {
            format!("{query} {extra}")
        };
        Ok(render_suggestion(&suggestion, MOCK_RATIONALE))
    }
}

/// The output format the templates ask for.
pub fn render_suggestion(query: &str, rationale: &str) -> String {
    format!("Query Suggestion: {query}\nRationale: {rationale}")
}

fn find_ignore_ascii_case(haystack: &str, needle: &str) -> Option<usize> {
    let (h, n) = (haystack.as_bytes(), needle.as_bytes());
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

const QUOTES: &[char] = &[
    '"', '\'', '\u{201C}', '\u{201D}', '\u{2018}', '\u{2019}', '`',
];

/// Extracts `(query, rationale)` from backend output.
pub fn parse_suggestion(raw: &str) -> Result<(String, String)> {
    let fail = || Error::ParseFailure {
        raw_output: raw.to_string(),
    };
    const MARKER: &str = "query suggestion:";
    let start = find_ignore_ascii_case(raw, MARKER).ok_or_else(fail)? + MARKER.len();
    let rest = &raw[start..];
    let line_end = rest.find('\n').unwrap_or(rest.len());
    let query = rest[..line_end]
        .trim()
        .trim_matches(QUOTES)
        .trim()
        .to_string();
    if query.is_empty() {
        return Err(fail());
    }
    let tail = &rest[line_end..];
    let rationale = find_ignore_ascii_case(tail, "rationale:")
        .map(|i| tail[i + "rationale:".len()..].trim().to_string())
        .unwrap_or_default();
    Ok((query, rationale))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suggestion {
    pub query: String,
    pub rationale: String,
    pub variant: Variant,
    pub raw_output: String,
}

pub fn generate(
    bundle: &PromptBundle,
    params: &GenerationParams,
    backend: &dyn ChatBackend,
) -> Result<Suggestion> {
    params.validate()?;
    let request = ChatRequest::new(&bundle.system_message, &bundle.user_message, params);
    let raw_output = backend.complete(&request)?;
    let (query, rationale) = parse_suggestion(&raw_output)?;
    Ok(Suggestion {
        query,
        rationale,
        variant: bundle.variant,
        raw_output,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserSummary {
    pub user: UserId,
    pub top_entities: Vec<(EntityId, u64)>,
    pub summary_text: String,
}

/// Describes the user's interests from their most frequent entities.
pub fn summarize_user(
    store: &EntityKnowledgeStore,
    backend: &dyn ChatBackend,
    params: &GenerationParams,
    templates: &PromptTemplates,
) -> Result<UserSummary> {
    if store.is_empty() {
        return Err(Error::EmptyStore);
    }
    let top_entities = top_k_entities(store, SUMMARY_TOP_K);
    let names: Vec<&str> = top_entities.iter().map(|(e, _)| e.as_str()).collect();
    let user = render_template(&templates.summary, &[("entities", &join_list(&names))]);
    let request = ChatRequest::new(&templates.summary_system, &user, params);
    let summary_text = backend.complete(&request)?;
    Ok(UserSummary {
        user: store.user.clone(),
        top_entities,
        summary_text,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::WebPage;
    use alloc::vec;

    fn table5_ctx() -> SearchContext {
        let page = WebPage::new(
            "https://news.example.com/tim-cook",
            "Tim Cook Leadership",
            "Apple CEO Tim Cook.",
        )
        .unwrap();
        SearchContext::new(
            "Tim Cook",
            vec!["Apple".into(), "Tim Cook".into()],
            Some(page),
        )
        .unwrap()
    }

    fn entities(names: &[&str]) -> RetrievedKnowledge {
        RetrievedKnowledge::entities(
            Strategy::Combined,
            names.iter().map(|n| EntityId::new(n).unwrap()).collect(),
        )
    }

    #[test]
    fn klamp_prompt_lines() {
        let k = entities(&["Macbook", "macOS"]);
        let b = build_prompt(Variant::Klamp, &table5_ctx(), Some(&k)).unwrap();
        assert!(b.user_message.contains("\nQuery: Tim Cook\n"));
        assert!(b.user_message.contains("\nSession: Apple | Tim Cook\n"));
        assert!(b
            .user_message
            .contains("\nPersonal Entities: Macbook | macOS\n"));
        assert!(b.user_message.ends_with("Query Suggestion:\nRationale:"));
        assert!(b
            .system_message
            .starts_with("You are an AI assistant whose primary goal"));
    }

    #[test]
    fn qs_has_no_article() {
        let mut ctx = table5_ctx();
        ctx.current_page = None;
        let b = build_prompt(Variant::Qs, &ctx, None).unwrap();
        assert!(!b.user_message.contains("Article Title"));
    }

    #[test]
    fn empty_session_keeps_line() {
        let mut ctx = table5_ctx();
        ctx.session_history.clear();
        let b = build_prompt(Variant::Cqs, &ctx, None).unwrap();
        assert!(b.user_message.contains("\nSession: \n"));
    }

    #[test]
    fn missing_knowledge_errors() {
        let ctx = table5_ctx();
        assert!(matches!(
            build_prompt(Variant::Klamp, &ctx, None),
            Err(Error::MissingKnowledge {
                variant: "klamp",
                ..
            })
        ));
        assert!(matches!(
            build_prompt(
                Variant::CqsKs,
                &ctx,
                Some(&RetrievedKnowledge::pages(vec![]))
            ),
            Err(Error::MissingKnowledge {
                variant: "cqs_ks",
                ..
            })
        ));
        assert!(matches!(
            build_prompt(
                Variant::Klamp,
                &ctx,
                Some(&RetrievedKnowledge::pages(vec![]))
            ),
            Err(Error::MissingKnowledge { .. })
        ));
        let mut no_page = ctx.clone();
        no_page.current_page = None;
        assert!(build_prompt(Variant::Cqs, &no_page, None).is_err());
    }

    #[test]
    fn article_truncation_and_flattening() {
        let page = WebPage::new("https://a.com", "T\nx", "line one\nline two").unwrap();
        let ctx = SearchContext::new("q", vec![], Some(page)).unwrap();
        let builder = PromptBuilder {
            article_char_limit: 8,
            ..PromptBuilder::default()
        };
        let b = builder.build(Variant::Cqs, &ctx, None).unwrap();
        assert!(b.user_message.contains("\nArticle Title: T x\n"));
        assert!(b.user_message.contains("\nArticle Text: line one\n"));
    }

    #[test]
    fn render_is_single_pass() {
        let out = render_template("a {x} {y} {z", &[("x", "{y}"), ("y", "Y")]);
        assert_eq!(out, "a {y} Y {z");
    }

    #[test]
    fn parse_cases() {
        assert_eq!(
            parse_suggestion("Query Suggestion: a b\nRationale: because").unwrap(),
            ("a b".to_string(), "because".to_string())
        );
        assert_eq!(
            parse_suggestion("query suggestion: \"x\"").unwrap(),
            ("x".to_string(), String::new())
        );
        assert_eq!(
            parse_suggestion("Sure!\nQUERY SUGGESTION: \u{201C}Tim Cook\u{2019}s impact\u{201D}\nrationale: fits").unwrap().0,
            "Tim Cook\u{2019}s impact"
        );
        assert!(matches!(
            parse_suggestion("no markers here"),
            Err(Error::ParseFailure { .. })
        ));
        assert!(matches!(
            parse_suggestion("Query Suggestion:   \nRationale: x"),
            Err(Error::ParseFailure { .. })
        ));
    }

    #[test]
    fn mock_klamp_uses_first_entity() {
        let k = entities(&["Apple Inc.", "Macbook"]);
        let b = build_prompt(Variant::Klamp, &table5_ctx(), Some(&k)).unwrap();
        let s = generate(&b, &GenerationParams::default(), &MockBackend).unwrap();
        assert_eq!(s.query, "Tim Cook Apple Inc.");
        assert_eq!(s.rationale, MOCK_RATIONALE);
        assert_eq!(
            s,
            generate(&b, &GenerationParams::default(), &MockBackend).unwrap()
        );
    }

    #[test]
    fn mock_other_variants() {
        let ctx = table5_ctx();
        let p = GenerationParams::default();
        let q = |v, k: Option<&RetrievedKnowledge>| {
            generate(&build_prompt(v, &ctx, k).unwrap(), &p, &MockBackend)
                .unwrap()
                .query
        };
        assert_eq!(q(Variant::Qs, None), "Tim Cook Apple");
        assert_eq!(q(Variant::Cqs, None), "Tim Cook Tim Cook Leadership");
        let related = WebPage::new("https://a.com", "MacBook Air review", "x").unwrap();
        assert_eq!(
            q(
                Variant::CqsKs,
                Some(&RetrievedKnowledge::pages(vec![related]))
            ),
            "Tim Cook MacBook Air review"
        );
        assert_eq!(q(Variant::Klamp, Some(&entities(&[]))), "Tim Cook");
    }

    struct Fixed(&'static str);
    impl ChatBackend for Fixed {
        fn complete(&self, _: &ChatRequest) -> Result<String> {
            Ok(self.0.to_string())
        }
    }

    #[test]
    fn remote_style_output_is_parsed() {
        let b = build_prompt(Variant::Cqs, &table5_ctx(), None).unwrap();
        let raw = "Query Suggestion: Tim Cook's impact on Apple's product line\nRationale: The user follows Apple products.";
        let s = generate(&b, &GenerationParams::default(), &Fixed(raw)).unwrap();
        assert_eq!(s.query, "Tim Cook's impact on Apple's product line");
        assert_eq!(s.raw_output, raw);
        let err = generate(&b, &GenerationParams::default(), &Fixed("nothing")).unwrap_err();
        assert_eq!(
            err,
            Error::ParseFailure {
                raw_output: "nothing".into()
            }
        );
    }

    #[test]
    fn params_validation() {
        assert!(GenerationParams::default().validate().is_ok());
        assert!(GenerationParams {
            temperature: 2.5,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(GenerationParams {
            top_p: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn summary_with_mock() {
        let mut store = EntityKnowledgeStore::new(UserId::new("u").unwrap());
        store.observe(EntityId::new("A").unwrap(), 1);
        store.observe(EntityId::new("A").unwrap(), 2);
        store.observe(EntityId::new("B").unwrap(), 1);
        let s = summarize_user(
            &store,
            &MockBackend,
            &GenerationParams::default(),
            &PromptTemplates::default(),
        )
        .unwrap();
        assert_eq!(s.summary_text, "Interested in: A, B");
        assert_eq!(s.top_entities.len(), 2);
        let empty = EntityKnowledgeStore::new(UserId::new("u").unwrap());
        assert_eq!(
            summarize_user(
                &empty,
                &MockBackend,
                &GenerationParams::default(),
                &PromptTemplates::default()
            ),
            Err(Error::EmptyStore)
        );
    }

    #[test]
    fn variant_names() {
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
        assert_eq!(
            serde_json::to_string(&Variant::CqsKs).unwrap(),
            "\"cqs_ks\""
        );
    }

    proptest::proptest! {
        #[test]
        fn parse_round_trips_rendered_output(q in "[A-Za-z0-9][A-Za-z0-9 ,.?]{0,40}[A-Za-z0-9?]", r in "[A-Za-z0-9 ,.]{0,60}") {
            let (pq, pr) = parse_suggestion(&render_suggestion(&q, &r)).unwrap();
            proptest::prop_assert_eq!(pq, q);
            proptest::prop_assert_eq!(pr, r.trim());
        }
    }
}
