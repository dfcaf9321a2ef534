//! Uniform access to speech recognition backends.
//!
//! A backend maps WAV bytes to a transcript string. Real services sit
//! behind HTTP; a simulated backend provides deterministic transcripts
//! for offline runs. Every transcription goes through a content-addressed
//! on-disk cache so repeated runs never pay for the same request twice.

mod cache;
mod config;
mod http;
mod mock;

pub use cache::{CachedTranscript, TranscriptCache};
pub use config::{load_backends, parse_backends, LoadedBackends};
pub use http::{HttpAsr, HttpBackendConfig, Vendor};
pub use mock::{CorruptionMode, MockAsr, MockAsrSpec};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::tokenize;
use crate::transforms::{TransformKind, Transformation};
use crate::util::sha256_hex;

#[derive(Debug, Error)]
pub enum AsrError {
    #[error("backend '{0}' is not registered")]
    UnknownBackend(String),
    #[error("duplicate backend name '{0}'")]
    DuplicateBackend(String),
    #[error("authentication failed for '{asr}': {reason}")]
    Auth { asr: String, reason: String },
    #[error("'{asr}' still rate-limited after {attempts} attempts")]
    RateLimited { asr: String, attempts: u32 },
    #[error("network error talking to '{asr}': {reason}")]
    Network { asr: String, reason: String },
    #[error("backend '{asr}' rejected the request: {reason}")]
    BackendRejected { asr: String, reason: String },
    #[error("transcript cache: {0}")]
    Cache(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

/// Name of an ASR service within a run's registry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AsrId(String);

impl AsrId {
    pub fn new(name: impl Into<String>) -> Result<Self, AsrError> {
        let name = name.into();
        if name.is_empty() {
            return Err(AsrError::Config("backend name must be non-empty".into()));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AsrId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A backend's answer for one clip, tokenized for measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub raw_text: String,
    pub tokens: Vec<String>,
    pub source_asr: AsrId,
    pub clip_digest: String,
}

/// The transformation a clip went through before transcription, plus its
/// 1-based rank within the severity sweep (0 = untransformed is encoded
/// by the absence of this struct). The simulated backend keys its
/// corruption decisions off the rank.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedTransform {
    pub kind: TransformKind,
    pub theta: f64,
    pub seed: u64,
    pub severity_rank: u32,
}

impl AppliedTransform {
    pub fn descriptor(&self) -> String {
        Transformation::new(self.kind, self.theta, self.seed).descriptor()
    }
}

/// Everything a backend may look at for one transcription.
#[derive(Debug, Clone)]
pub struct TranscribeRequest<'a> {
    pub clip_id: &'a str,
    pub wav_bytes: &'a [u8],
    pub sample_rate: u32,
    pub transform: Option<AppliedTransform>,
}

impl TranscribeRequest<'_> {
    /// Canonical descriptor of the transformation leg, `orig` for
    /// untransformed audio.
    pub fn descriptor(&self) -> String {
        match &self.transform {
            None => "orig".to_string(),
            Some(t) => t.descriptor(),
        }
    }

    pub fn digest(&self) -> String {
        sha256_hex(self.wav_bytes)
    }

    pub fn severity_rank(&self) -> u32 {
        self.transform.map(|t| t.severity_rank).unwrap_or(0)
    }
}

/// Cache key for one (backend, audio, transformation) triple. Stable
/// across runs and platforms.
pub fn cache_key(asr: &AsrId, clip_bytes: &[u8], descriptor: &str) -> String {
    format!("{}__{}__{}", asr, &sha256_hex(clip_bytes)[..16], descriptor)
}

/// One recognition service.
pub trait AsrBackend: Send + Sync {
    fn id(&self) -> &AsrId;

    /// Produce the top-hypothesis transcript for the request. Called on
    /// cache miss only.
    fn transcribe_raw(&self, req: &TranscribeRequest<'_>) -> Result<String, AsrError>;
}

/// The registry of backends available to a run.
#[derive(Default, Clone)]
pub struct BackendSet {
    backends: BTreeMap<String, Arc<dyn AsrBackend>>,
}

impl BackendSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, backend: Arc<dyn AsrBackend>) -> Result<(), AsrError> {
        let name = backend.id().as_str().to_string();
        if self.backends.contains_key(&name) {
            return Err(AsrError::DuplicateBackend(name));
        }
        self.backends.insert(name, backend);
        Ok(())
    }

    pub fn get(&self, asr: &AsrId) -> Result<&Arc<dyn AsrBackend>, AsrError> {
        self.backends
            .get(asr.as_str())
            .ok_or_else(|| AsrError::UnknownBackend(asr.as_str().to_string()))
    }

    pub fn ids(&self) -> Vec<AsrId> {
        self.backends.keys().map(|k| AsrId(k.clone())).collect()
    }

    pub fn len(&self) -> usize {
        self.backends.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backends.is_empty()
    }

    /// All unordered backend pairs, in registry (alphabetical) order.
    pub fn all_pairs(&self) -> Vec<(AsrId, AsrId)> {
        let ids = self.ids();
        let mut pairs = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                pairs.push((ids[i].clone(), ids[j].clone()));
            }
        }
        pairs
    }

    /// Transcribe through the cache: hit returns the stored text without
    /// touching the backend; miss asks the backend and stores the answer.
    pub fn transcribe(
        &self,
        asr: &AsrId,
        req: &TranscribeRequest<'_>,
        cache: Option<&TranscriptCache>,
    ) -> Result<Transcript, AsrError> {
        let backend = self.get(asr)?;
        let digest = req.digest();
        let descriptor = req.descriptor();
        let key = cache_key(asr, req.wav_bytes, &descriptor);

        if let Some(cache) = cache {
            if let Some(hit) = cache.get(asr.as_str(), &key)? {
                return Ok(Transcript {
                    tokens: tokenize(&hit.raw_text),
                    raw_text: hit.raw_text,
                    source_asr: asr.clone(),
                    clip_digest: hit.clip_digest,
                });
            }
        }

        let raw_text = backend.transcribe_raw(req)?;
        if let Some(cache) = cache {
            cache.put(
                asr.as_str(),
                &key,
                &CachedTranscript {
                    raw_text: raw_text.clone(),
                    asr: asr.as_str().to_string(),
                    clip_digest: digest.clone(),
                    descriptor,
                },
            )?;
        }
        Ok(Transcript {
            tokens: tokenize(&raw_text),
            raw_text,
            source_asr: asr.clone(),
            clip_digest: digest,
        })
    }
}
