//! Fixtures shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use std::path::PathBuf;

use klamp_core::ingest::{FilterReport, IngestConfig};

pub fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn data_dir() -> PathBuf {
    manifest_dir().join("data")
}

pub fn fixture(name: &str) -> PathBuf {
    manifest_dir().join("tests").join("fixtures").join(name)
}

/// Settings for `filter_users.jsonl`.
pub fn filter_config() -> IngestConfig {
    IngestConfig {
        session_gap_seconds: 1800,
        min_visitations: 3,
        k_anonymity_threshold: 2,
        domain_allowlist: None,
        holdout_sessions: 1,
    }
    .with_allowlist(["good.example.com"])
}

/// Counted by hand from `filter_users.jsonl`:
///
/// - bob's last click and both of fay's are off-list; fay ends with no clicks
/// - offsets below are seconds after 1_000_000
/// - no-click sessions: ann@20000, bob@20000, fay@0, fay@10000
/// - pass 1 drops dan (2 clicks); removes "solo bob", "rare cat", "solo eve";
///   cat's second session empties, eve's first splits at the 2000s hole
/// - pass 2 drops cat (2 clicks left)
/// - survivors: ann 2 sessions, bob 2, eve 3; 3 records each
pub fn expected_filter_report() -> FilterReport {
    FilterReport {
        input_sessions: 14,
        input_records: 21,
        clicks_outside_allowlist: 3,
        no_click_sessions: 4,
        users_below_min_visitations: 2,
        sessions_of_dropped_users: 3,
        k_anonymity_records_removed: 3,
        k_anonymity_sessions_emptied: 1,
        output_users: 3,
        output_sessions: 7,
        output_records: 9,
    }
}

use std::path::Path;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use klamp::persist::StateDir;
use klamp::pipeline::Pipeline;
use klamp::service::{router, AppState};
use serde_json::{json, Value};
use tower::ServiceExt;

pub fn bundled_pipeline() -> Pipeline {
    Pipeline::offline(klamp::io::load_gazetteer(&data_dir().join("gazetteer.tsv")).unwrap())
}

pub fn open_app(dir: &Path, pipeline: Pipeline, snapshot_every: usize) -> Arc<AppState> {
    AppState::open(pipeline, StateDir::open(dir).unwrap(), snapshot_every).unwrap()
}

pub async fn call(
    app: &Router,
    method: Method,
    uri: &str,
    body: Option<&str>,
) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

pub fn app_router(state: Arc<AppState>) -> Router {
    router(state)
}

/// Under the bundled gazetteer this mentions Tim Cook twice (query and
/// text) and Apple TV twice (title and text).
pub fn tim_cook_event(user: &str, ts: i64) -> String {
    json!({
        "user": user,
        "ts": ts,
        "query": "tim cook",
        "click": {
            "url": "https://techdaily.example.org/apple/tv",
            "title": "Apple TV review",
            "text": "Tim Cook shows the Apple TV."
        }
    })
    .to_string()
}

/// Count of `entity` from `GET /users/{user}/entities`, or 0 when absent.
pub fn entity_count(listing: &Value, entity: &str) -> u64 {
    listing["entities"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["entity"] == entity)
        .map_or(0, |e| e["count"].as_u64().unwrap())
}

/// Writes a config for the bundled corpus into `dir`, with state kept there.
pub fn bundled_config(dir: &Path) -> PathBuf {
    let data = data_dir();
    let text = std::fs::read_to_string(data.join("klamp.toml"))
        .unwrap()
        .lines()
        .map(|l| match l.split_once(" = ") {
            Some((k @ ("events" | "gazetteer" | "allowlist" | "search_corpus"), v)) => {
                format!(
                    "{k} = {:?}",
                    data.join(v.trim_matches('"')).display().to_string()
                )
            }
            Some(("store_dir", _)) => {
                format!("store_dir = {:?}", dir.join("state").display().to_string())
            }
            _ => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n");
    let path = dir.join("klamp.toml");
    std::fs::write(&path, text).unwrap();
    path
}
