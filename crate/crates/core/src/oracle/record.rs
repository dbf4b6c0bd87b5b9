//! Deterministic backends: the scripted table and the append-only replay
//! cache. Both share one JSON-lines record schema.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use super::{prompt_digest, Oracle, OracleError, OracleRequest, PromptKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordKey {
    pub kind: PromptKind,
    pub digest: String,
    pub sample: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub kind: PromptKind,
    pub digest: String,
    pub sample: u32,
    pub response: String,
}

impl OracleRecord {
    pub fn new(kind: PromptKind, prompt: &str, sample: u32, response: impl Into<String>) -> Self {
        Self { kind, digest: prompt_digest(prompt), sample, response: response.into() }
    }

    pub fn key(&self) -> RecordKey {
        RecordKey { kind: self.kind, digest: self.digest.clone(), sample: self.sample }
    }

    fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }
}

fn parse_lines(text: &str) -> Result<Vec<OracleRecord>, OracleError> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| serde_json::from_str(line).map_err(|e| OracleError::Store(format!("line {}: {e}", n + 1))))
        .collect()
}

/// Hand-authored or exported responses keyed by (kind, prompt digest,
/// sample index). Lookups never touch the network.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedTable {
    records: Vec<OracleRecord>,
    index: HashMap<RecordKey, usize>,
}

impl ScriptedTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: impl IntoIterator<Item = OracleRecord>) -> Result<Self, OracleError> {
        let mut table = Self::new();
        for record in records {
            table.push(record)?;
        }
        Ok(table)
    }

    pub fn from_jsonl(text: &str) -> Result<Self, OracleError> {
        Self::from_records(parse_lines(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| OracleError::Store(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_jsonl(&text)
    }

    /// Adds a record; a second, different response for the same key is an error.
    pub fn push(&mut self, record: OracleRecord) -> Result<(), OracleError> {
        let key = record.key();
        if let Some(&at) = self.index.get(&key) {
            if self.records[at].response == record.response {
                return Ok(());
            }
            return Err(OracleError::CacheConflict(format!("{} {} sample {}", key.kind, key.digest, key.sample)));
        }
        self.index.insert(key, self.records.len());
        self.records.push(record);
        Ok(())
    }

    pub fn insert(
        &mut self,
        kind: PromptKind,
        prompt: &str,
        sample: u32,
        response: impl Into<String>,
    ) -> Result<(), OracleError> {
        self.push(OracleRecord::new(kind, prompt, sample, response))
    }

    pub fn get(&self, key: &RecordKey) -> Option<&str> {
        self.index.get(key).map(|&at| self.records[at].response.as_str())
    }

    pub fn records(&self) -> &[OracleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One record per line, in insertion order.
    pub fn to_jsonl(&self) -> String {
        self.records.iter().map(|r| r.to_line() + "\n").collect()
    }
}

impl Oracle for ScriptedTable {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let key = request.key();
        self.get(&key).map(str::to_string).ok_or(OracleError::ScriptedMiss {
            kind: key.kind,
            digest: key.digest,
            sample: key.sample,
        })
    }
}

/// Append-only response store. Reads are concurrent; appends are
/// serialized and, when file-backed, flushed line by line.
#[derive(Debug, Default)]
pub struct ReplayCache {
    path: Option<PathBuf>,
    entries: RwLock<HashMap<RecordKey, String>>,
    order: Mutex<Vec<RecordKey>>,
    file: Mutex<Option<File>>,
}

impl ReplayCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a JSON-lines cache file and loads it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, OracleError> {
        let path = path.as_ref().to_path_buf();
        let store = |e: std::io::Error| OracleError::Store(format!("{}: {e}", path.display()));
        let existing = match std::fs::read_to_string(&path) {
            Ok(text) => parse_lines(&text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(store(e)),
        };
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(store)?;
        let cache = Self { path: Some(path.clone()), file: Mutex::new(Some(file)), ..Self::default() };
        {
            let mut entries = cache.entries.write().expect("cache lock");
            let mut order = cache.order.lock().expect("cache lock");
            for record in existing {
                let key = record.key();
                match entries.get(&key) {
                    Some(prior) if *prior != record.response => {
                        return Err(OracleError::CacheConflict(format!(
                            "{} {} sample {} in {}",
                            key.kind,
                            key.digest,
                            key.sample,
                            path.display()
                        )));
                    }
                    Some(_) => {}
                    None => {
                        order.push(key.clone());
                        entries.insert(key, record.response);
                    }
                }
            }
        }
        Ok(cache)
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get(&self, key: &RecordKey) -> Option<String> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes a record once. Re-appending the same response is a no-op; a
    /// different response for an existing key is refused.
    pub fn append(&self, record: OracleRecord) -> Result<(), OracleError> {
        let mut file = self.file.lock().expect("cache lock");
        let key = record.key();
        if let Some(prior) = self.get(&key) {
            if prior == record.response {
                return Ok(());
            }
            return Err(OracleError::CacheConflict(format!("{} {} sample {}", key.kind, key.digest, key.sample)));
        }
        if let Some(file) = file.as_mut() {
            let line = record.to_line() + "\n";
            file.write_all(line.as_bytes())
                .and_then(|_| file.flush())
                .map_err(|e| OracleError::Store(e.to_string()))?;
        }
        self.order.lock().expect("cache lock").push(key.clone());
        self.entries.write().expect("cache lock").insert(key, record.response);
        Ok(())
    }

    /// All records in append order.
    pub fn records(&self) -> Vec<OracleRecord> {
        let entries = self.entries.read().expect("cache lock");
        self.order
            .lock()
            .expect("cache lock")
            .iter()
            .map(|key| OracleRecord {
                kind: key.kind,
                digest: key.digest.clone(),
                sample: key.sample,
                response: entries[key].clone(),
            })
            .collect()
    }

    pub fn to_scripted_table(&self) -> ScriptedTable {
        ScriptedTable::from_records(self.records()).expect("cache keys are unique")
    }
}

/// Replay-only backend: every request must already be in the cache.
#[derive(Debug, Clone)]
pub struct ReplayOracle(pub Arc<ReplayCache>);

impl Oracle for ReplayOracle {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let key = request.key();
        self.0.get(&key).ok_or(OracleError::ReplayMiss { kind: key.kind, digest: key.digest, sample: key.sample })
    }
}
