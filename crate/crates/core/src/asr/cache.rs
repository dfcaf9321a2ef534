//! On-disk transcript cache: `<root>/<asr_name>/<key>.json`, one record
//! per key. Writes go through a temp file and an atomic rename, so a
//! killed run never leaves a torn record behind; concurrent writers of
//! the same key race harmlessly because records for a key are identical.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::AsrError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedTranscript {
    pub raw_text: String,
    pub asr: String,
    pub clip_digest: String,
    pub descriptor: String,
}

#[derive(Debug, Clone)]
pub struct TranscriptCache {
    root: PathBuf,
}

impl TranscriptCache {
    pub fn new(root: impl AsRef<Path>) -> Result<Self, AsrError> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root)
            .map_err(|e| AsrError::Cache(format!("create {}: {e}", root.display())))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn record_path(&self, asr: &str, key: &str) -> PathBuf {
        self.root.join(asr).join(format!("{key}.json"))
    }

    pub fn get(&self, asr: &str, key: &str) -> Result<Option<CachedTranscript>, AsrError> {
        let path = self.record_path(asr, key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(AsrError::Cache(format!("read {}: {e}", path.display()))),
        };
        let rec = serde_json::from_slice(&bytes)
            .map_err(|e| AsrError::Cache(format!("parse {}: {e}", path.display())))?;
        Ok(Some(rec))
    }

    pub fn put(&self, asr: &str, key: &str, record: &CachedTranscript) -> Result<(), AsrError> {
        let path = self.record_path(asr, key);
        let dir = path.parent().expect("record path has a parent");
        fs::create_dir_all(dir)
            .map_err(|e| AsrError::Cache(format!("create {}: {e}", dir.display())))?;
        let body = serde_json::to_vec_pretty(record)
            .map_err(|e| AsrError::Cache(format!("serialize record: {e}")))?;
        let tmp = dir.join(format!(".{key}.tmp-{}", std::process::id()));
        fs::write(&tmp, &body)
            .map_err(|e| AsrError::Cache(format!("write {}: {e}", tmp.display())))?;
        fs::rename(&tmp, &path)
            .map_err(|e| AsrError::Cache(format!("rename into {}: {e}", path.display())))?;
        Ok(())
    }
}
