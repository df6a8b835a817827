//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.
//!
//!     cargo test -p klamp --test acceptance

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use axum::http::Method;
use klamp::io::{read_log, ParseMode};
use klamp::persist::{replay_log, StateDir};
use klamp::pipeline::{ingest_log, Pipeline};
use klamp_core::embed::{page_text, Embedder, HashingEmbedder};
use klamp_core::eval::{
    auto_relatedness, auto_usefulness, auto_validity, cohens_kappa, spearman, FixtureSearch,
    SearchResult,
};
use klamp_core::ingest::{apply_filters, prepare_datasets, sessionize, UserDataset};
use klamp_core::linker::Gazetteer;
use klamp_core::retrieval::{
    retrieve_familiar, retrieve_history, retrieve_lapsed, retrieve_unfamiliar, RetrievalConfig,
    RetrievedKnowledge, Strategy,
};
use klamp_core::rng::SplitMix64;
use klamp_core::store::{build_entity_store, EntityKnowledgeStore, MemoryStream};
use klamp_core::suggest::{build_prompt, Variant};
use klamp_core::{EntityId, SearchContext, SearchRecord, Session, UserId, WebPage};
use serde_json::json;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ent(s: &str) -> EntityId {
    EntityId::new(s).unwrap()
}

fn uid(s: &str) -> UserId {
    UserId::new(s).unwrap()
}

// chi-squared critical values at alpha = 0.01
const CHI2_DF1: f64 = 6.635;
const CHI2_DF2: f64 = 9.210;

fn chi_squared(observed: &[u64], expected_p: &[f64], n: u64) -> f64 {
    observed
        .iter()
        .zip(expected_p)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

fn draw_frequencies(
    names: &[&str],
    store: &EntityKnowledgeStore,
    n: u64,
    draw: fn(&[EntityId], &EntityKnowledgeStore, &RetrievalConfig, i64) -> Vec<EntityId>,
) -> Result<Vec<u64>, String> {
    let ctx: Vec<EntityId> = names.iter().map(|s| ent(s)).collect();
    let base = RetrievalConfig {
        sample_size: 1,
        ..RetrievalConfig::default()
    };
    let mut counts = vec![0u64; names.len()];
    for seed in 0..n {
        let got = draw(&ctx, store, &base.with_seed(seed), 0);
        ensure!(got.len() == 1, "seed {seed} drew {} entities", got.len());
        let i = names.iter().position(|s| *s == got[0].as_str()).unwrap();
        counts[i] += 1;
    }
    Ok(counts)
}

fn sampling() -> Outcome {
    const N: u64 = 100_000;
    let start = Instant::now();
    let mut store = EntityKnowledgeStore::new(uid("u"));
    for (name, count) in [("A", 7), ("B", 2), ("C", 1)] {
        for _ in 0..count {
            store.observe(ent(name), 1);
        }
    }
    let fam = draw_frequencies(&["A", "B", "C"], &store, N, retrieve_familiar)?;
    let fam_p = [0.7, 0.2, 0.1];

    // weights 1/(1+0) and 1/(1+9)
    let mut store = EntityKnowledgeStore::new(uid("u"));
    for _ in 0..9 {
        store.observe(ent("Y"), 1);
    }
    let unf = draw_frequencies(&["X", "Y"], &store, N, retrieve_unfamiliar)?;
    let unf_p = [10.0 / 11.0, 1.0 / 11.0];
    let elapsed = start.elapsed();

    for (obs, p) in [(&fam, &fam_p[..]), (&unf, &unf_p[..])] {
        for (&o, &p) in obs.iter().zip(p) {
            let hat = o as f64 / N as f64;
            ensure!((hat - p).abs() <= 0.01, "empirical {hat:.4} vs {p:.4}");
        }
    }
    let chi_fam = chi_squared(&fam, &fam_p, N);
    let chi_unf = chi_squared(&unf, &unf_p, N);
    ensure!(
        chi_fam < CHI2_DF2,
        "familiar chi2 {chi_fam:.3} >= {CHI2_DF2}"
    );
    ensure!(
        chi_unf < CHI2_DF1,
        "unfamiliar chi2 {chi_unf:.3} >= {CHI2_DF1}"
    );
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "familiar {fam:?} chi2 {chi_fam:.2}; unfamiliar {unf:?} chi2 {chi_unf:.2}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn lapse_boundary() -> Outcome {
    const DAY: i64 = 86_400;
    let now = 100 * DAY;
    let mut store = EntityKnowledgeStore::new(uid("u"));
    let ctx: Vec<EntityId> = [("d13", 13), ("d14", 14), ("d15", 15)]
        .iter()
        .map(|&(name, days)| {
            store.observe(ent(name), now - days * DAY);
            ent(name)
        })
        .collect();
    let cfg = RetrievalConfig {
        sample_size: 10,
        ..RetrievalConfig::default()
    };
    let got = retrieve_lapsed(&ctx, &store, &cfg, now);
    ensure!(got == vec![ent("d15")], "lapsed {got:?}");
    Ok("13d excluded, 14d excluded, 15d included".into())
}

const WORDS: [&str; 24] = [
    "apple",
    "macbook",
    "pixar",
    "yankees",
    "baseball",
    "ghibli",
    "totoro",
    "laptop",
    "review",
    "price",
    "learning",
    "optimization",
    "movie",
    "stadium",
    "battery",
    "chip",
    "disney",
    "tv",
    "ceo",
    "profile",
    "season",
    "trade",
    "release",
    "store",
];

fn phrase(rng: &mut SplitMix64, max: u64) -> String {
    let n = 1 + rng.next_u64() % max;
    (0..n)
        .map(|_| WORDS[(rng.next_u64() % WORDS.len() as u64) as usize])
        .collect::<Vec<_>>()
        .join(" ")
}

fn history_oracle() -> Outcome {
    let mut rng = SplitMix64::new(2024);
    let mut stream = MemoryStream::new(uid("u"));
    for i in 0..1_000 {
        let ts = 1_000 + (rng.next_u64() % 300) as i64;
        let click = (!rng.next_u64().is_multiple_of(4)).then(|| {
            WebPage::new(
                format!("https://ex.com/{i}"),
                phrase(&mut rng, 3),
                phrase(&mut rng, 12),
            )
            .unwrap()
        });
        stream.push(SearchRecord::new(uid("u"), ts, phrase(&mut rng, 3), click).unwrap());
    }
    let e = HashingEmbedder::default();
    let cfg = RetrievalConfig {
        history_top_k: 5,
        ..RetrievalConfig::default()
    };
    let pages: Vec<(usize, Vec<f64>, &WebPage)> = stream
        .records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.clicked_page.as_ref().map(|p| (i, p)))
        .map(|(i, p)| {
            (
                i,
                e.embed(&page_text(p, cfg.body_char_limit)).unwrap().values,
                p,
            )
        })
        .collect();
    for n in 0..100 {
        let q = phrase(&mut rng, 4);
        let qv = e.embed(&q).unwrap().values;
        let mut scored: Vec<(f64, usize, &WebPage)> = pages
            .iter()
            .map(|(i, v, p)| (qv.iter().zip(v).map(|(a, b)| a * b).sum(), *i, *p))
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let want: Vec<WebPage> = scored
            .into_iter()
            .take(5)
            .map(|(_, _, p)| p.clone())
            .collect();
        let ctx = SearchContext::new(q.clone(), vec![], None).unwrap();
        let got = retrieve_history(&ctx, &stream, &e, &cfg).map_err(|e| e.to_string())?;
        ensure!(got == want, "query #{n} {q:?} differs from the full scan");
    }
    Ok(format!(
        "100 queries over {} clicked pages, top 5",
        pages.len()
    ))
}

const PERSONAL: [&str; 16] = [
    "Macbook",
    "macOS",
    "Machine Learning",
    "Optimization",
    "Supervised Learning",
    "Apple TV",
    "Animation",
    "Studio Ghibli",
    "DVD",
    "Walt Disney",
    "Pixar Animation Studios",
    "Apple Inc.",
    "Baseball",
    "HDTV",
    "Major League Baseball",
    "New York Yankees",
];

fn section_lines(msg: &str) -> Vec<&str> {
    const LABELS: [&str; 7] = [
        "Query: ",
        "Session: ",
        "Article Title: ",
        "Article Text: ",
        "Related Article Title: ",
        "Related Article Text: ",
        "Personal Entities: ",
    ];
    msg.lines()
        .filter(|l| LABELS.iter().any(|p| l.starts_with(p)))
        .collect()
}

fn prompt_fidelity() -> Outcome {
    let page = WebPage::new(
        "https://news.example.com/tim-cook-leadership",
        "Tim Cook Leadership",
        "A new profile examines how Apple CEO Tim Cook, with \"cautious, collaborative and tactical\" \
         leadership, honed the Cupertino tech giant into the world's largest company.",
    )
    .unwrap();
    let ctx = SearchContext::new(
        "Tim Cook",
        vec!["Apple".into(), "Tim Cook".into()],
        Some(page),
    )
    .unwrap();
    let related = WebPage::new(
        "https://reviews.example.com/macbook-air",
        "MacBook Air Review",
        "The thinnest Apple laptop gets a faster chip and a longer battery life.",
    )
    .unwrap();
    let golden_dir = common::manifest_dir().join("../core/tests/golden");
    let mut rendered = BTreeMap::new();
    for variant in Variant::ALL {
        let knowledge = match variant {
            Variant::Qs | Variant::Cqs => None,
            Variant::CqsKs => Some(RetrievedKnowledge::pages(vec![related.clone()])),
            Variant::Klamp => Some(RetrievedKnowledge::entities(
                Strategy::Combined,
                PERSONAL.iter().map(|e| ent(e)).collect(),
            )),
        };
        let msg = build_prompt(variant, &ctx, knowledge.as_ref())
            .map_err(|e| e.to_string())?
            .user_message;
        let path = golden_dir.join(format!("{}.txt", variant.as_str()));
        let golden = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure!(
            msg.as_bytes() == golden.as_slice(),
            "{variant} differs from {}",
            path.display()
        );
        rendered.insert(variant, msg);
    }
    let qs = section_lines(&rendered[&Variant::Qs]);
    let cqs = section_lines(&rendered[&Variant::Cqs]);
    let kl = section_lines(&rendered[&Variant::Klamp]);
    let strictly = |big: &[&str], small: &[&str]| {
        small.iter().all(|s| big.contains(s)) && big.len() > small.len()
    };
    ensure!(strictly(&cqs, &qs), "cqs does not strictly contain qs");
    ensure!(strictly(&kl, &cqs), "klamp does not strictly contain cqs");
    Ok("4 golden files byte-identical; klamp > cqs > qs".into())
}

fn statistics() -> Outcome {
    let rho = spearman(&[1, 2, 3, 4], &[2, 1, 4, 3]).map_err(|e| e.to_string())?;
    ensure!(rho == 0.6, "spearman fixture {rho}");
    let id: Vec<usize> = (1..=7).collect();
    let rev: Vec<usize> = id.iter().rev().copied().collect();
    ensure!(spearman(&id, &id).unwrap() == 1.0, "identity");
    ensure!(spearman(&id, &rev).unwrap() == -1.0, "reversal");

    let mut rng = SplitMix64::new(77);
    for case in 0..1_000 {
        let n = 2 + (rng.next_u64() % 40) as usize;
        let a: Vec<usize> = (1..=n).collect();
        let mut b = a.clone();
        for i in (1..n).rev() {
            b.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let got = spearman(&a, &b).unwrap();
        let d2: f64 = a
            .iter()
            .zip(&b)
            .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
            .sum();
        let nf = n as f64;
        let closed = 1.0 - 6.0 * d2 / (nf * (nf * nf - 1.0));
        ensure!(
            (got - closed).abs() < 1e-12,
            "case {case}: {got} vs {closed}"
        );
    }

    let k = cohens_kappa(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    ensure!(k.abs() < 1e-12, "kappa fixture {k}");
    Ok(format!("rho 0.6 exact; 1000 permutations; kappa {k}"))
}

fn metrics() -> Outcome {
    let e = HashingEmbedder::default();
    let mut rng = SplitMix64::new(5);
    let search = FixtureSearch::new(
        (0..30)
            .map(|_| SearchResult {
                title: phrase(&mut rng, 4),
                snippet: phrase(&mut rng, 10),
            })
            .collect(),
    );
    let in_unit = |v: f64| (0.0..=1.0).contains(&v);
    for _ in 0..500 {
        let s = phrase(&mut rng, 5);
        let ents: Vec<EntityId> = (0..rng.next_u64() % 4)
            .map(|_| ent(&phrase(&mut rng, 2)))
            .collect();
        let next: Vec<String> = (0..rng.next_u64() % 4)
            .map(|_| phrase(&mut rng, 4))
            .collect();
        let v = auto_validity(&s, &search, &e).unwrap();
        let r = auto_relatedness(&s, &ents, &e).unwrap();
        let u = auto_usefulness(&s, &next, &e).unwrap();
        ensure!(in_unit(v) && in_unit(r) && in_unit(u), "{s:?}: {v} {r} {u}");
    }

    let s = "macbook air battery review";
    let self_search = FixtureSearch::new(vec![SearchResult {
        title: s.into(),
        snippet: String::new(),
    }]);
    let v = auto_validity(s, &self_search, &e).unwrap();
    let r = auto_relatedness(
        "Tim Cook Apple Inc.",
        &[ent("Tim Cook"), ent("Apple Inc.")],
        &e,
    )
    .unwrap();
    let u = auto_usefulness(s, &["other query".into(), s.into()], &e).unwrap();
    for (name, x) in [("validity", v), ("relatedness", r), ("usefulness", u)] {
        ensure!((x - 1.0).abs() <= 1e-6, "self-match {name} {x}");
    }

    let v = auto_validity(s, &FixtureSearch::default(), &e).unwrap();
    let r = auto_relatedness(s, &[], &e).unwrap();
    let u = auto_usefulness(s, &[], &e).unwrap();
    ensure!(
        v == 0.0 && r == 0.0 && u == 0.0,
        "empty references {v} {r} {u}"
    );
    Ok("500 random triples in [0,1]; self-match 1.0; empty 0.0".into())
}

fn bundled_report() -> Result<String, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = common::bundled_config(tmp.path());
    let cfg = klamp::config::ServiceConfig::load(&cfg_path).map_err(|e| e.to_string())?;
    let ingested = ingest_log(cfg.paths.events.as_ref().unwrap(), &cfg, ParseMode::Strict)
        .map_err(|e| e.to_string())?;
    let pipeline = Pipeline::from_config(&cfg).map_err(|e| e.to_string())?;
    let report = pipeline
        .compare(&ingested.datasets, &Variant::ALL, Strategy::Combined)
        .map_err(|e| e.to_string())?;
    Ok(serde_json::to_string_pretty(&report).unwrap() + "\n")
}

fn determinism() -> Outcome {
    let start = Instant::now();
    let first = bundled_report()?;
    let second = bundled_report()?;
    let elapsed = start.elapsed();
    ensure!(first == second, "two runs differ");
    let frozen = std::fs::read_to_string(common::data_dir().join("expected_report.json"))
        .map_err(|e| e.to_string())?;
    ensure!(
        first == frozen,
        "report differs from data/expected_report.json"
    );
    ensure!(elapsed < Duration::from_secs(30), "took {elapsed:?}");
    Ok(format!(
        "{} bytes, matches frozen report; {:.2}s for two runs",
        first.len(),
        elapsed.as_secs_f64()
    ))
}

fn ingestion_filters() -> Outcome {
    let cfg = common::filter_config();
    let log = read_log(&common::fixture("filter_users.jsonl"), ParseMode::Strict)
        .map_err(|e| e.to_string())?;
    let (_, report) = prepare_datasets(log.records.clone(), &cfg).map_err(|e| e.to_string())?;
    ensure!(
        report == common::expected_filter_report(),
        "report {report:?}"
    );

    let mut by_user: BTreeMap<UserId, Vec<SearchRecord>> = BTreeMap::new();
    for r in log.records {
        by_user.entry(r.user.clone()).or_default().push(r);
    }
    let sessions: Vec<Session> = by_user
        .into_values()
        .flat_map(|recs| sessionize(recs, cfg.session_gap_seconds).unwrap())
        .collect();
    let (once, _) = apply_filters(sessions, &cfg);
    let (twice, again) = apply_filters(once.clone(), &cfg);
    ensure!(once == twice, "second pass changed the sessions");
    ensure!(
        again.no_click_sessions
            + again.k_anonymity_records_removed
            + again.users_below_min_visitations
            == 0,
        "second pass removed data"
    );
    Ok(format!(
        "no-click {}, users dropped {}, k-anon records {}; idempotent",
        report.no_click_sessions,
        report.users_below_min_visitations,
        report.k_anonymity_records_removed
    ))
}

const VOCAB: [(&str, &str); 8] = [
    ("apple", "Apple Inc."),
    ("tim cook", "Tim Cook"),
    ("macbook", "MacBook"),
    ("pixar", "Pixar Animation Studios"),
    ("yankees", "New York Yankees"),
    ("studio ghibli", "Studio Ghibli"),
    ("hdtv", "HDTV"),
    ("supervised learning", "Supervised Learning"),
];

fn store_properties() -> Outcome {
    let tsv: String = VOCAB.iter().map(|(a, c)| format!("{a}\t{c}\n")).collect();
    let gaz = Gazetteer::parse_tsv(&tsv).unwrap();
    let user = uid("u");
    let mut rng = SplitMix64::new(31);
    let mut tally: BTreeMap<String, (u64, i64, i64)> = BTreeMap::new();
    let mut records = Vec::new();
    for _ in 0..10_000 {
        let ts = 1_000_000 + (rng.next_u64() % 5_000_000) as i64;
        let mut words = vec!["find"];
        for _ in 0..rng.next_u64() % 4 {
            let (alias, id) = VOCAB[(rng.next_u64() % 8) as usize];
            words.extend([alias, "today"]);
            let t = tally.entry(id.into()).or_insert((0, ts, ts));
            *t = (t.0 + 1, t.1.min(ts), t.2.max(ts));
        }
        records.push(SearchRecord::new(user.clone(), ts, words.join(" "), None).unwrap());
    }
    let incremental = |recs: &[SearchRecord]| {
        let mut s = EntityKnowledgeStore::new(user.clone());
        for r in recs {
            s.ingest_record(r, &gaz);
        }
        s
    };
    let base = incremental(&records);
    let seen: BTreeMap<String, (u64, i64, i64)> = base
        .entries
        .iter()
        .map(|(k, s)| (k.as_str().to_string(), (s.count, s.first_seen, s.last_seen)))
        .collect();
    ensure!(seen == tally, "store differs from the hand tally");
    for seed in 1..=3 {
        let mut shuffled = records.clone();
        let mut r = SplitMix64::new(seed);
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, (r.next_u64() % (i as u64 + 1)) as usize);
        }
        ensure!(
            incremental(&shuffled) == base,
            "order {seed} changed the store"
        );
    }
    let mut sorted = records.clone();
    sorted.sort_by_key(|r| r.timestamp);
    let sessions = sorted
        .chunks(50)
        .enumerate()
        .map(|(i, c)| Session {
            id: format!("u:{i}"),
            user: user.clone(),
            records: c.to_vec(),
        })
        .collect();
    let batch = build_entity_store(
        &UserDataset {
            user: user.clone(),
            history_sessions: sessions,
            holdout_sessions: vec![],
        },
        &gaz,
    );
    ensure!(batch == base, "batch build differs from incremental");
    Ok(format!(
        "10000 records, {} mentions; 3 shuffles; batch == incremental",
        base.total_mentions()
    ))
}

fn service() -> Outcome {
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    rt.block_on(async {
        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let now = 1_700_100_000;
        let page = json!({ "url": "https://techdaily.example.org/apple/tv", "title": "Apple TV 4K", "text": "Tim Cook on the box." });
        let suggest = json!({ "query": "tim cook", "page": page, "variant": "klamp", "strategy": "familiar", "now": now }).to_string();
        let before;
        {
            let state = common::open_app(tmp.path(), common::bundled_pipeline(), 4);
            let app = common::app_router(state.clone());
            let (s, v) = common::call(&app, Method::POST, "/users/ann/suggest", Some(&suggest)).await;
            ensure!(s == 200, "cold suggest {s} {v}");
            ensure!(v["knowledge"]["entities"].as_array().unwrap().is_empty(), "cold start knew entities");

            for i in 0..3 {
                let (s, _) = common::call(&app, Method::POST, "/events", Some(&common::tim_cook_event("ann", now + i))).await;
                ensure!(s == 200, "event {i} -> {s}");
            }
            let (_, v) = common::call(&app, Method::GET, "/users/ann/entities", None).await;
            ensure!(common::entity_count(&v, "Tim Cook") == 6, "count after 3 events {v}");
            let (s, v) = common::call(&app, Method::POST, "/users/ann/suggest", Some(&suggest)).await;
            let used = v["knowledge"]["entities"].as_array().map_or(0, Vec::len);
            ensure!(s == 200 && used == 2, "suggest after writes {s} {v}");

            common::call(&app, Method::DELETE, "/users/ann/entities/Apple%20TV", None).await;
            common::call(&app, Method::POST, "/events", Some(&common::tim_cook_event("ann", now + 9))).await;
            before = state.store_of(&uid("ann")).unwrap();
        }
        let reopened = common::open_app(tmp.path(), common::bundled_pipeline(), 4);
        let after = reopened.store_of(&uid("ann")).unwrap();
        ensure!(after == before, "reopened store differs");
        let dir = StateDir::open(tmp.path()).unwrap().user_dir(&uid("ann"));
        let replayed = replay_log(&dir, &uid("ann"), &common::bundled_pipeline().linker).map_err(|e| e.to_string())?;
        ensure!(replayed == before, "full replay differs");
        Ok(format!(
            "read-your-writes ok; replay restored {} entities, Tim Cook x{}",
            after.len(),
            after.count(&ent("Tim Cook"))
        ))
    })
}

fn main() -> ExitCode {
    let checks: [Check; 10] = [
        ("sampling distributions", sampling),
        ("lapse boundary", lapse_boundary),
        ("history retrieval oracle", history_oracle),
        ("prompt fidelity", prompt_fidelity),
        ("statistics", statistics),
        ("metric bounds and identities", metrics),
        ("end-to-end determinism", determinism),
        ("ingestion filters", ingestion_filters),
        ("store properties", store_properties),
        ("service read-your-writes and replay", service),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS  {name:<38} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<38} {why}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
