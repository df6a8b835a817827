//! Sessionization, quality/privacy filtering and the history/holdout split.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{SearchRecord, Session, Timestamp, UserId};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub session_gap_seconds: i64,
    pub min_visitations: usize,
    pub k_anonymity_threshold: usize,
    /// `None` keeps clicks on every domain.
    pub domain_allowlist: Option<BTreeSet<String>>,
    pub holdout_sessions: usize,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            session_gap_seconds: 1800,
            min_visitations: 100,
            k_anonymity_threshold: 50,
            domain_allowlist: None,
            holdout_sessions: 10,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<()> {
        if self.session_gap_seconds <= 0 {
            return Err(Error::invalid("session_gap_seconds must be positive"));
        }
        if self.min_visitations == 0
            || self.k_anonymity_threshold == 0
            || self.holdout_sessions == 0
        {
            return Err(Error::invalid("ingest counts must be at least 1"));
        }
        Ok(())
    }

    /// Replaces the allowlist, normalizing every entry.
    pub fn with_allowlist<I, S>(mut self, domains: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.domain_allowlist = Some(
            domains
                .into_iter()
                .map(|d| normalize_domain(d.as_ref()))
                .filter(|d| !d.is_empty())
                .collect(),
        );
        self
    }

    fn allows(&self, domain: &str) -> bool {
        match &self.domain_allowlist {
            None => true,
            Some(set) => set.contains(&normalize_domain(domain)),
        }
    }
}

/// Lowercases and strips a leading `www.`.
pub fn normalize_domain(domain: &str) -> String {
    let lower = domain.trim().to_ascii_lowercase();
    match lower.strip_prefix("www.") {
        Some(rest) => rest.to_string(),
        None => lower,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub input_sessions: usize,
    pub input_records: usize,
    pub clicks_outside_allowlist: usize,
    pub no_click_sessions: usize,
    pub users_below_min_visitations: usize,
    pub sessions_of_dropped_users: usize,
    pub k_anonymity_records_removed: usize,
    pub k_anonymity_sessions_emptied: usize,
    pub output_users: usize,
    pub output_sessions: usize,
    pub output_records: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserDataset {
    pub user: UserId,
    pub history_sessions: Vec<Session>,
    pub holdout_sessions: Vec<Session>,
}

impl UserDataset {
    pub fn history_records(&self) -> impl Iterator<Item = &SearchRecord> {
        self.history_sessions.iter().flat_map(|s| s.records.iter())
    }
}

/// Splits one user's records into sessions at inactivity gaps longer than `gap`.
pub fn sessionize(mut records: Vec<SearchRecord>, gap: i64) -> Result<Vec<Session>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    let user = first.user.clone();
    if records.iter().any(|r| r.user != user) {
        return Err(Error::invalid(
            "sessionize expects records of a single user",
        ));
    }
    records.sort_by_key(|r| r.timestamp);
    let mut sessions = split_at_gaps(&user, records, gap);
    renumber(&user, &mut sessions);
    Ok(sessions)
}

fn split_at_gaps(user: &UserId, records: Vec<SearchRecord>, gap: i64) -> Vec<Session> {
    let mut sessions: Vec<Session> = Vec::new();
    let mut last: Option<Timestamp> = None;
    for record in records {
        let start_new = match last {
            None => true,
            Some(prev) => record.timestamp - prev > gap,
        };
        last = Some(record.timestamp);
        if start_new {
            sessions.push(Session {
                id: String::new(),
                user: user.clone(),
                records: Vec::new(),
            });
        }
        sessions.last_mut().unwrap().records.push(record);
    }
    sessions
}

fn renumber(user: &UserId, sessions: &mut [Session]) {
    for (index, session) in sessions.iter_mut().enumerate() {
        session.id = format!("{user}:{index}");
        for record in &mut session.records {
            record.session_id = Some(session.id.clone());
        }
    }
}

/// Applies the click, domain, activity and k-anonymity filters.
///
/// Later filters can invalidate earlier ones (removing a query can leave a
/// session without clicks, or a user below the visitation floor), so the
/// session/user/query passes repeat until nothing changes. The output is a
/// fixpoint, which makes the whole operation idempotent. Sessions that lost
/// records are re-split at gaps so the session invariant still holds, and
/// ids are reassigned per user in time order.
pub fn apply_filters(sessions: Vec<Session>, cfg: &IngestConfig) -> (Vec<Session>, FilterReport) {
    let mut report = FilterReport {
        input_sessions: sessions.len(),
        input_records: sessions.iter().map(|s| s.records.len()).sum(),
        ..FilterReport::default()
    };
    let mut sessions = sessions;

    for record in sessions.iter_mut().flat_map(|s| s.records.iter_mut()) {
        let outside =
            matches!(&record.clicked_page, Some(page) if !cfg.allows(&page.source_domain));
        if outside {
            record.clicked_page = None;
            report.clicks_outside_allowlist += 1;
        }
    }

    loop {
        let before = sessions.len();
        sessions.retain(|s| s.click_count() > 0);
        let no_click = before - sessions.len();
        report.no_click_sessions += no_click;

        let mut clicks_per_user: BTreeMap<&UserId, usize> = BTreeMap::new();
        for s in &sessions {
            *clicks_per_user.entry(&s.user).or_default() += s.click_count();
        }
        let dropped_users: BTreeSet<UserId> = clicks_per_user
            .into_iter()
            .filter(|&(_, clicks)| clicks < cfg.min_visitations)
            .map(|(u, _)| u.clone())
            .collect();
        let before = sessions.len();
        sessions.retain(|s| !dropped_users.contains(&s.user));
        report.users_below_min_visitations += dropped_users.len();
        report.sessions_of_dropped_users += before - sessions.len();

        let mut users_per_query: BTreeMap<String, BTreeSet<&UserId>> = BTreeMap::new();
        for s in &sessions {
            for r in &s.records {
                users_per_query
                    .entry(r.query_text.to_lowercase())
                    .or_default()
                    .insert(&r.user);
            }
        }
        let rare: BTreeSet<String> = users_per_query
            .into_iter()
            .filter(|(_, users)| users.len() < cfg.k_anonymity_threshold)
            .map(|(q, _)| q)
            .collect();

        let mut removed = 0;
        let mut next = Vec::with_capacity(sessions.len());
        for mut s in sessions {
            let len = s.records.len();
            s.records
                .retain(|r| !rare.contains(&r.query_text.to_lowercase()));
            if s.records.len() == len {
                next.push(s);
                continue;
            }
            removed += len - s.records.len();
            if s.records.is_empty() {
                report.k_anonymity_sessions_emptied += 1;
                continue;
            }
            let user = s.user.clone();
            next.extend(split_at_gaps(&user, s.records, cfg.session_gap_seconds));
        }
        sessions = next;
        report.k_anonymity_records_removed += removed;

        if no_click == 0 && dropped_users.is_empty() && removed == 0 {
            break;
        }
    }

    sessions.sort_by(|a, b| (&a.user, a.first_timestamp()).cmp(&(&b.user, b.first_timestamp())));
    let mut start = 0;
    while start < sessions.len() {
        let user = sessions[start].user.clone();
        let end = start
            + sessions[start..]
                .iter()
                .take_while(|s| s.user == user)
                .count();
        renumber(&user, &mut sessions[start..end]);
        start = end;
    }

    report.output_users = sessions
        .iter()
        .map(|s| &s.user)
        .collect::<BTreeSet<_>>()
        .len();
    report.output_sessions = sessions.len();
    report.output_records = sessions.iter().map(|s| s.records.len()).sum();
    (sessions, report)
}

/// Reserves the most recent `n` sessions for evaluation.
pub fn split_holdout(user: UserId, mut sessions: Vec<Session>, n: usize) -> UserDataset {
    sessions.sort_by_key(|s| s.first_timestamp());
    let cut = sessions.len().saturating_sub(n);
    let holdout_sessions = sessions.split_off(cut);
    UserDataset {
        user,
        history_sessions: sessions,
        holdout_sessions,
    }
}

/// Full offline pipeline: group by user, sessionize, filter, split.
///
/// Datasets come back ordered by user id.
pub fn prepare_datasets(
    records: Vec<SearchRecord>,
    cfg: &IngestConfig,
) -> Result<(Vec<UserDataset>, FilterReport)> {
    cfg.validate()?;
    let mut by_user: BTreeMap<UserId, Vec<SearchRecord>> = BTreeMap::new();
    for r in records {
        by_user.entry(r.user.clone()).or_default().push(r);
    }
    let mut sessions = Vec::new();
    for (_, recs) in by_user {
        sessions.extend(sessionize(recs, cfg.session_gap_seconds)?);
    }
    let (filtered, report) = apply_filters(sessions, cfg);

    let mut grouped: BTreeMap<UserId, Vec<Session>> = BTreeMap::new();
    for s in filtered {
        grouped.entry(s.user.clone()).or_default().push(s);
    }
    let datasets = grouped
        .into_iter()
        .map(|(user, sessions)| split_holdout(user, sessions, cfg.holdout_sessions))
        .collect();
    Ok((datasets, report))
}
