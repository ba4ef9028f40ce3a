//! Flat-file store for materials bundles and uploaded sessions.
//!
//! Layout under the data directory:
//! `materials/<hash>.json`, `uploads/<upload_id>.json`, `rt_log.csv` (complete
//! sessions) and `rt_log.incomplete.csv`. Every write goes to a temporary file
//! that is renamed into place, so readers never observe a partial file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maze::{hash_bytes, MaterialsBundle};
use crate::trials::{check_rows, write_rt_rows, RtRow};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClientInfo {
    #[serde(default)]
    pub refresh_hz: Option<f64>,
    #[serde(default)]
    pub user_agent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub upload_id: String,
    /// Opaque, anonymized participant token.
    pub participant: String,
    pub materials_hash: String,
    #[serde(default)]
    pub list_id: Option<usize>,
    pub complete: bool,
    pub trials: Vec<RtRow>,
    #[serde(default)]
    pub client: ClientInfo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum UploadOutcome {
    Stored { rows: usize },
    AlreadyStored,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub list_id: usize,
    pub lists: usize,
    pub completed: usize,
}

pub struct ResultStore {
    dir: PathBuf,
    lock: Mutex<()>,
}

pub const RT_LOG: &str = "rt_log.csv";
pub const INCOMPLETE_LOG: &str = "rt_log.incomplete.csv";

fn valid_id(s: &str) -> bool {
    !s.is_empty() && s.len() <= 128 && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

impl ResultStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        for sub in ["materials", "uploads"] {
            let p = dir.join(sub);
            fs::create_dir_all(&p).map_err(|e| Error::io(&p, e))?;
        }
        Ok(ResultStore {
            dir,
            lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn rt_log_path(&self) -> PathBuf {
        self.dir.join(RT_LOG)
    }

    pub fn incomplete_log_path(&self) -> PathBuf {
        self.dir.join(INCOMPLETE_LOG)
    }

    fn materials_path(&self, hash: &str) -> Result<PathBuf> {
        if hash.len() != 64 || !hash.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::HashMismatch(format!("{hash:?} is not a sha256 hex digest")));
        }
        Ok(self.dir.join("materials").join(format!("{hash}.json")))
    }

    /// Registers a bundle and returns its hash.
    pub fn put_materials(&self, bundle: &MaterialsBundle) -> Result<String> {
        let json = bundle.to_json();
        let hash = hash_bytes(json.as_bytes());
        let _guard = self.lock.lock().expect("store lock");
        write_atomic(&self.materials_path(&hash)?, json.as_bytes())?;
        Ok(hash)
    }

    /// The stored bundle text for `hash`, verified against the hash.
    pub fn materials_json(&self, hash: &str) -> Result<String> {
        let path = self.materials_path(hash)?;
        let text = fs::read_to_string(&path)
            .map_err(|_| Error::HashMismatch(format!("no materials bundle with hash {hash}")))?;
        if hash_bytes(text.as_bytes()) != hash {
            return Err(Error::HashMismatch(format!("stored bundle {hash} fails verification")));
        }
        Ok(text)
    }

    pub fn materials(&self, hash: &str) -> Result<MaterialsBundle> {
        MaterialsBundle::from_json(&self.materials_json(hash)?)
    }

    fn stored_sessions(&self) -> Result<Vec<SessionRecord>> {
        let dir = self.dir.join("uploads");
        let mut names: Vec<PathBuf> = fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "json"))
            .collect();
        names.sort();
        names
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Ok(serde_json::from_str(&text)?)
            })
            .collect()
    }

    /// Validates and persists a session. Re-sending an identical record is
    /// acknowledged without writing anything.
    pub fn submit(&self, record: &SessionRecord) -> Result<UploadOutcome> {
        if !valid_id(&record.upload_id) {
            return Err(Error::Schema(format!("upload id {:?} must be 1-128 of [A-Za-z0-9_-]", record.upload_id)));
        }
        if !valid_id(&record.participant) {
            return Err(Error::Schema(format!(
                "participant {:?} is not an anonymized token ([A-Za-z0-9_-])",
                record.participant
            )));
        }
        let bundle = self.materials(&record.materials_hash)?;
        validate_trials(record, &bundle)?;

        let _guard = self.lock.lock().expect("store lock");
        let upload_path = self.dir.join("uploads").join(format!("{}.json", record.upload_id));
        if let Ok(existing) = fs::read_to_string(&upload_path) {
            let previous: SessionRecord = serde_json::from_str(&existing)?;
            return if previous == *record {
                Ok(UploadOutcome::AlreadyStored)
            } else {
                Err(Error::DuplicateUpload(record.upload_id.clone()))
            };
        }
        let log = if record.complete {
            self.rt_log_path()
        } else {
            self.incomplete_log_path()
        };
        let mut bytes = match fs::read(&log) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(Error::io(&log, e)),
        };
        let header = bytes.is_empty();
        write_rt_rows(&record.trials, &mut bytes, header)?;
        write_atomic(&log, &bytes)?;
        let json = serde_json::to_string_pretty(record).expect("session serializes");
        write_atomic(&upload_path, json.as_bytes())?;
        Ok(UploadOutcome::Stored {
            rows: record.trials.len(),
        })
    }

    /// The Latin-square list with the fewest completed sessions for `hash`
    /// (lowest id on ties).
    pub fn assign(&self, hash: &str) -> Result<Assignment> {
        let bundle = self.materials(hash)?;
        let mut per_suite: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for m in &bundle.items {
            per_suite.entry(&m.suite).or_default().insert(&m.condition);
        }
        let lists = per_suite.values().map(BTreeSet::len).max().unwrap_or(1).max(1);
        let mut counts = vec![0usize; lists];
        let _guard = self.lock.lock().expect("store lock");
        for s in self.stored_sessions()? {
            if s.complete && s.materials_hash == hash {
                if let Some(l) = s.list_id.filter(|&l| l < lists) {
                    counts[l] += 1;
                }
            }
        }
        let (list_id, completed) = counts
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(i, c)| (c, i))
            .expect("at least one list");
        Ok(Assignment {
            list_id,
            lists,
            completed,
        })
    }
}

fn validate_trials(record: &SessionRecord, bundle: &MaterialsBundle) -> Result<()> {
    if record.trials.is_empty() {
        return Err(Error::Schema("session has no trials".into()));
    }
    for (i, t) in record.trials.iter().enumerate() {
        if t.participant != record.participant {
            return Err(Error::Schema(format!(
                "trial {i}: participant {:?} differs from session participant {:?}",
                t.participant, record.participant
            )));
        }
        let item = bundle
            .item(&t.suite_tag, t.item_id, &t.condition)
            .ok_or_else(|| Error::Schema(format!("trial {i}: {}/{}/{} is not in the materials", t.suite_tag, t.item_id, t.condition)))?;
        let choice = item
            .choices
            .get(t.word_index)
            .ok_or_else(|| Error::Schema(format!("trial {i}: word_index {} out of range", t.word_index)))?;
        if choice.word != t.word
            || choice.distractor != t.distractor
            || choice.kind != t.distractor_kind
            || choice.region != t.region
            || choice.critical != t.critical
        {
            return Err(Error::Schema(format!(
                "trial {i}: choice {}/{}/{}#{} does not match the served materials",
                t.suite_tag, t.item_id, t.condition, t.word_index
            )));
        }
    }
    check_rows(&record.trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::{ChoicePoint, MaterialsMetadata, MazeItem, NonceConfig};
    use crate::trials::{read_rt_rows, DistractorKind};

    fn bundle() -> MaterialsBundle {
        let choice = |i: usize, w: &str, d: &str, k| ChoicePoint {
            index: i,
            word: w.into(),
            distractor: d.into(),
            kind: k,
            region: "r".into(),
            critical: false,
        };
        let item = |cond: &str| MazeItem {
            suite: "S".into(),
            item_id: 1,
            condition: cond.into(),
            choices: vec![choice(0, "The", "x-x-x", DistractorKind::Mask), choice(1, "dog", "blick", DistractorKind::L)],
        };
        MaterialsBundle {
            metadata: MaterialsMetadata {
                version: "t".into(),
                seed: 1,
                rate: 0.25,
                lexicon_hash: String::new(),
                lm: serde_json::Value::Null,
                chars: Default::default(),
                nonce: NonceConfig::default(),
            },
            items: vec![item("a"), item("b")],
        }
    }

    fn session(id: &str, hash: &str, list: usize) -> SessionRecord {
        let row = |i: usize, w: &str, d: &str, k, rt| RtRow {
            participant: "anon-1".into(),
            suite_tag: "S".into(),
            item_id: 1,
            condition: "a".into(),
            word_index: i,
            word: w.into(),
            region: "r".into(),
            critical: false,
            distractor: d.into(),
            distractor_kind: k,
            correct: true,
            rt_ms: rt,
        };
        SessionRecord {
            upload_id: id.into(),
            participant: "anon-1".into(),
            materials_hash: hash.into(),
            list_id: Some(list),
            complete: true,
            trials: vec![row(0, "The", "x-x-x", DistractorKind::Mask, 900.0), row(1, "dog", "blick", DistractorKind::L, 612.5)],
            client: ClientInfo::default(),
        }
    }

    #[test]
    fn submit_is_validated_idempotent_and_append_only() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        let hash = store.put_materials(&bundle()).unwrap();
        assert_eq!(store.materials(&hash).unwrap(), bundle());

        let s = session("u1", &hash, 0);
        assert_eq!(store.submit(&s).unwrap(), UploadOutcome::Stored { rows: 2 });
        assert_eq!(store.submit(&s).unwrap(), UploadOutcome::AlreadyStored);
        let mut changed = s.clone();
        changed.trials[1].rt_ms = 1.0;
        assert!(matches!(store.submit(&changed), Err(Error::DuplicateUpload(_))));

        let mut s2 = session("u2", &hash, 1);
        s2.participant = "anon-2".into();
        for t in &mut s2.trials {
            t.participant = "anon-2".into();
        }
        store.submit(&s2).unwrap();
        let log = fs::read(store.rt_log_path()).unwrap();
        let rows = read_rt_rows(log.as_slice()).unwrap();
        assert_eq!(rows[..2], s.trials[..]);
        assert_eq!(rows[2..], s2.trials[..]);
        let text = String::from_utf8(log).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("participant,")).count(), 1);
    }

    #[test]
    fn rejects_tampering_and_identifying_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        let hash = store.put_materials(&bundle()).unwrap();

        let mut wrong = hash.clone();
        wrong.replace_range(0..1, if hash.starts_with('0') { "1" } else { "0" });
        assert!(matches!(store.submit(&session("u1", &wrong, 0)), Err(Error::HashMismatch(_))));

        let mut s = session("u1", &hash, 0);
        s.trials[1].distractor = "other".into();
        assert!(matches!(store.submit(&s), Err(Error::Schema(_))));

        let mut s = session("u1", &hash, 0);
        s.participant = "jane@example.org".into();
        assert!(matches!(store.submit(&s), Err(Error::Schema(_))));

        let mut s = session("../evil", &hash, 0);
        s.upload_id = "../evil".into();
        assert!(matches!(store.submit(&s), Err(Error::Schema(_))));
        assert!(!store.rt_log_path().exists());
    }

    #[test]
    fn incomplete_sessions_go_to_their_own_log_and_assignment_balances() {
        let dir = tempfile::tempdir().unwrap();
        let store = ResultStore::open(dir.path()).unwrap();
        let hash = store.put_materials(&bundle()).unwrap();
        assert_eq!(store.assign(&hash).unwrap().list_id, 0);

        let mut partial = session("p1", &hash, 0);
        partial.complete = false;
        store.submit(&partial).unwrap();
        assert!(store.incomplete_log_path().exists() && !store.rt_log_path().exists());
        assert_eq!(store.assign(&hash).unwrap().list_id, 0);

        store.submit(&session("c1", &hash, 0)).unwrap();
        let a = store.assign(&hash).unwrap();
        assert_eq!((a.list_id, a.lists, a.completed), (1, 2, 0));
    }
}
