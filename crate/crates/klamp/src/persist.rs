//! Durable per-user state.
//!
//! Each user owns a directory under `<root>/users/` holding an append-only
//! `events.jsonl` and at most one `snapshot-<offset>.json`, a store snapshot
//! covering the log up to byte `offset`. Loading takes the snapshot and
//! replays the log from its offset. A final line without a newline was never
//! acknowledged and is cut off.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use klamp_core::linker::EntityLinker;
use klamp_core::store::{EntityKnowledgeStore, MemoryStream};
use klamp_core::{EntityId, SearchRecord, UserId};
use serde::{Deserialize, Serialize};

use crate::io::{self, WireRecord};
use crate::{Error, Result};

const EVENTS: &str = "events.jsonl";
const SNAPSHOT_PREFIX: &str = "snapshot-";

/// One log line: a search event or a request to forget an entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LogEntry {
    Forget { forget: EntityId },
    Event(WireRecord),
}

pub fn encode_user(user: &UserId) -> String {
    let mut s = String::from("u-");
    for b in user.as_str().bytes() {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

fn decode_user(name: &str) -> Option<UserId> {
    let hex = name.strip_prefix("u-")?;
    if hex.len() % 2 != 0 {
        return None;
    }
    let bytes: Option<Vec<u8>> = (0..hex.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).ok())
        .collect();
    UserId::new(String::from_utf8(bytes?).ok()?).ok()
}

#[derive(Debug, Clone)]
pub struct StateDir {
    root: PathBuf,
}

impl StateDir {
    pub fn open(root: &Path) -> Result<Self> {
        let users = root.join("users");
        fs::create_dir_all(&users).map_err(|e| Error::io(&users, e))?;
        Ok(StateDir {
            root: root.to_path_buf(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn user_dir(&self, user: &UserId) -> PathBuf {
        self.root.join("users").join(encode_user(user))
    }

    /// Users with a state directory, in id order.
    pub fn users(&self) -> Result<Vec<UserId>> {
        let dir = self.root.join("users");
        let mut out = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            if let Some(user) = entry.file_name().to_str().and_then(decode_user) {
                out.push(user);
            }
        }
        out.sort();
        Ok(out)
    }

    /// Opens (creating if needed) a user's state and replays it.
    pub fn load_user(&self, user: &UserId, linker: &dyn EntityLinker) -> Result<UserState> {
        let dir = self.user_dir(user);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        UserState::load(user.clone(), dir, linker)
    }
}

pub struct UserState {
    pub user: UserId,
    pub stream: MemoryStream,
    pub store: EntityKnowledgeStore,
    dir: PathBuf,
    log: File,
    offset: u64,
    since_snapshot: usize,
}

/// Log lines with the byte offset where each ends, after cutting off a torn
/// final line.
fn read_entries(path: &Path) -> Result<Vec<(u64, LogEntry)>> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let complete = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    if complete < bytes.len() {
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        f.set_len(complete as u64).map_err(|e| Error::io(path, e))?;
        f.sync_all().map_err(|e| Error::io(path, e))?;
    }
    let mut out = Vec::new();
    let mut start = 0;
    for (n, line) in bytes[..complete]
        .split_inclusive(|&b| b == b'\n')
        .enumerate()
    {
        let end = start + line.len();
        let entry: LogEntry = serde_json::from_slice(line).map_err(|e| Error::Line {
            origin: path.display().to_string(),
            line: n + 1,
            message: e.to_string(),
        })?;
        out.push((end as u64, entry));
        start = end;
    }
    Ok(out)
}

fn snapshot_files(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        let Some(offset) = name
            .to_str()
            .and_then(|n| n.strip_prefix(SNAPSHOT_PREFIX))
            .and_then(|n| n.strip_suffix(".json"))
            .and_then(|n| n.parse::<u64>().ok())
        else {
            continue;
        };
        out.push((offset, entry.path()));
    }
    out.sort();
    Ok(out)
}

fn apply(
    entry: &LogEntry,
    user: &UserId,
    stream: Option<&mut MemoryStream>,
    store: &mut EntityKnowledgeStore,
    linker: &dyn EntityLinker,
) -> Result<()> {
    match entry {
        LogEntry::Event(wire) => {
            let record = wire.to_record()?;
            if &record.user != user {
                return Err(Error::Config(format!(
                    "event for {} found in the log of {user}",
                    record.user
                )));
            }
            store.ingest_record(&record, linker);
            if let Some(s) = stream {
                s.push(record);
            }
        }
        LogEntry::Forget { forget } => {
            store.remove_entity(forget);
        }
    }
    Ok(())
}

/// Store obtained by replaying a user's whole log, ignoring snapshots.
pub fn replay_log(
    dir: &Path,
    user: &UserId,
    linker: &dyn EntityLinker,
) -> Result<EntityKnowledgeStore> {
    let mut store = EntityKnowledgeStore::new(user.clone());
    for (_, entry) in read_entries(&dir.join(EVENTS))? {
        apply(&entry, user, None, &mut store, linker)?;
    }
    Ok(store)
}

impl UserState {
    fn load(user: UserId, dir: PathBuf, linker: &dyn EntityLinker) -> Result<Self> {
        let log_path = dir.join(EVENTS);
        let entries = read_entries(&log_path)?;
        let log_len = entries.last().map_or(0, |(end, _)| *end);

        let mut snapshot = None;
        for (offset, path) in snapshot_files(&dir)?.into_iter().rev() {
            if offset <= log_len {
                if let Ok(store) = io::read_store(&path) {
                    if store.user == user {
                        snapshot = Some((offset, store));
                        break;
                    }
                }
            }
        }
        let (snap_offset, mut store) =
            snapshot.unwrap_or_else(|| (0, EntityKnowledgeStore::new(user.clone())));

        let mut stream = MemoryStream::new(user.clone());
        let mut since_snapshot = 0;
        for (end, entry) in &entries {
            if *end > snap_offset {
                apply(entry, &user, Some(&mut stream), &mut store, linker)?;
                since_snapshot += 1;
            } else if let LogEntry::Event(wire) = entry {
                stream.push(wire.to_record()?);
            }
        }

        let log = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| Error::io(&log_path, e))?;
        Ok(UserState {
            user,
            stream,
            store,
            dir,
            log,
            offset: log_len,
            since_snapshot,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn append(&mut self, entry: &LogEntry) -> Result<()> {
        let mut line = serde_json::to_vec(entry).expect("log entry serializes");
        line.push(b'\n');
        let path = self.dir.join(EVENTS);
        self.log.write_all(&line).map_err(|e| Error::io(&path, e))?;
        self.log.sync_data().map_err(|e| Error::io(&path, e))?;
        self.offset += line.len() as u64;
        self.since_snapshot += 1;
        Ok(())
    }

    /// Durably logs the event, then updates the stream and store.
    pub fn record_event(&mut self, record: SearchRecord, linker: &dyn EntityLinker) -> Result<()> {
        if record.user != self.user {
            return Err(Error::Config(format!(
                "event for {} sent to {}",
                record.user, self.user
            )));
        }
        self.append(&LogEntry::Event(WireRecord::from(&record)))?;
        self.store.ingest_record(&record, linker);
        self.stream.push(record);
        Ok(())
    }

    /// Removes an entity from the store; returns whether it was present.
    /// Only an actual removal is logged.
    pub fn forget(&mut self, entity: &EntityId) -> Result<bool> {
        if self.store.get(entity).is_none() {
            return Ok(false);
        }
        self.append(&LogEntry::Forget {
            forget: entity.clone(),
        })?;
        self.store.remove_entity(entity);
        Ok(true)
    }

    /// Writes a snapshot at the current log offset and drops older ones.
    pub fn snapshot(&mut self) -> Result<()> {
        let path = self
            .dir
            .join(format!("{SNAPSHOT_PREFIX}{:020}.json", self.offset));
        io::write_json(&path, &self.store)?;
        for (offset, old) in snapshot_files(&self.dir)? {
            if offset != self.offset {
                fs::remove_file(&old).map_err(|e| Error::io(&old, e))?;
            }
        }
        self.since_snapshot = 0;
        Ok(())
    }

    pub fn snapshot_if_due(&mut self, every: usize) -> Result<()> {
        if self.since_snapshot >= every {
            self.snapshot()?;
        }
        Ok(())
    }
}
