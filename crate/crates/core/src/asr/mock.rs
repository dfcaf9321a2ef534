//! A deterministic simulated recognizer for offline runs and oracles.
//!
//! The mock holds the reference text for each clip it knows about and
//! corrupts words as a pure function of (spec, clip digest, transformation
//! descriptor, word position). Corruption probability grows with the
//! severity rank of the applied transformation; words on the weakness
//! list are corrupted unconditionally once the rank reaches the
//! configured threshold. Because every decision is hash-driven, planted
//! scenarios produce exact, hand-computable distances.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{AsrBackend, AsrError, AsrId, TranscribeRequest};
use crate::transforms::TransformKind;
use crate::util::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorruptionMode {
    /// Replace the word with the sentinel token (one substitution each).
    #[default]
    Substitute,
    /// Drop the word from the transcript.
    Delete,
}

fn default_sentinel() -> String {
    "blur".to_string()
}

fn default_weakness_rank() -> u32 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MockAsrSpec {
    /// What the recognizer "hears" per clip id when nothing goes wrong.
    #[serde(default)]
    pub reference_texts: BTreeMap<String, String>,
    /// Chance of corrupting any word, transformation or not.
    #[serde(default)]
    pub base_error_rate: f64,
    /// Extra per-word corruption probability per severity rank, by kind.
    #[serde(default)]
    pub noise_sensitivity: BTreeMap<TransformKind, f64>,
    /// Words corrupted unconditionally at rank >= `weakness_rank`.
    #[serde(default)]
    pub vocabulary_weakness: BTreeSet<String>,
    #[serde(default = "default_weakness_rank")]
    pub weakness_rank: u32,
    #[serde(default = "default_sentinel")]
    pub sentinel: String,
    #[serde(default)]
    pub corruption: CorruptionMode,
    #[serde(default)]
    pub seed: u64,
}

impl Default for MockAsrSpec {
    fn default() -> Self {
        Self {
            reference_texts: BTreeMap::new(),
            base_error_rate: 0.0,
            noise_sensitivity: BTreeMap::new(),
            vocabulary_weakness: BTreeSet::new(),
            weakness_rank: default_weakness_rank(),
            sentinel: default_sentinel(),
            corruption: CorruptionMode::default(),
            seed: 0,
        }
    }
}

impl MockAsrSpec {
    pub fn validate(&self) -> Result<(), AsrError> {
        if !(0.0..=1.0).contains(&self.base_error_rate) {
            return Err(AsrError::Config(format!(
                "base_error_rate {} outside [0, 1]",
                self.base_error_rate
            )));
        }
        for (kind, p) in &self.noise_sensitivity {
            if !(0.0..=1.0).contains(p) {
                return Err(AsrError::Config(format!(
                    "noise_sensitivity[{kind}] = {p} outside [0, 1]"
                )));
            }
        }
        if self.sentinel.trim().is_empty() {
            return Err(AsrError::Config("sentinel must be a word".into()));
        }
        Ok(())
    }
}

pub struct MockAsr {
    id: AsrId,
    spec: MockAsrSpec,
}

impl MockAsr {
    pub fn new(name: impl Into<String>, spec: MockAsrSpec) -> Result<Self, AsrError> {
        spec.validate()?;
        Ok(Self { id: AsrId::new(name)?, spec })
    }

    /// Uniform draw in [0, 1) from the decision hash for one word slot.
    fn draw(&self, digest: &str, descriptor: &str, index: usize) -> f64 {
        let h = derive_seed(self.spec.seed, &[digest, descriptor, &index.to_string()]);
        // take the top 53 bits so the quotient is exact in f64
        (h >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl AsrBackend for MockAsr {
    fn id(&self) -> &AsrId {
        &self.id
    }

    fn transcribe_raw(&self, req: &TranscribeRequest<'_>) -> Result<String, AsrError> {
        let reference = self.spec.reference_texts.get(req.clip_id).ok_or_else(|| {
            AsrError::BackendRejected {
                asr: self.id.as_str().to_string(),
                reason: format!("no reference text for clip '{}'", req.clip_id),
            }
        })?;

        let rank = req.severity_rank();
        let kind = req.transform.map(|t| t.kind);
        let descriptor = req.descriptor();
        let digest = req.digest();

        let sensitivity = kind
            .and_then(|k| self.spec.noise_sensitivity.get(&k))
            .copied()
            .unwrap_or(0.0);
        let p = (self.spec.base_error_rate + sensitivity * rank as f64).clamp(0.0, 1.0);

        let mut out: Vec<&str> = Vec::new();
        for (i, word) in reference.split_whitespace().enumerate() {
            let weak = rank >= self.spec.weakness_rank
                && self.spec.vocabulary_weakness.contains(word);
            let corrupted = weak || (p > 0.0 && self.draw(&digest, &descriptor, i) < p);
            if corrupted {
                match self.spec.corruption {
                    CorruptionMode::Substitute => out.push(&self.spec.sentinel),
                    CorruptionMode::Delete => {}
                }
            } else {
                out.push(word);
            }
        }
        Ok(out.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asr::AppliedTransform;

    fn spec_with(text: &str) -> MockAsrSpec {
        MockAsrSpec {
            reference_texts: [("c1".to_string(), text.to_string())].into(),
            ..MockAsrSpec::default()
        }
    }

    fn req<'a>(bytes: &'a [u8], transform: Option<AppliedTransform>) -> TranscribeRequest<'a> {
        TranscribeRequest { clip_id: "c1", wav_bytes: bytes, sample_rate: 16_000, transform }
    }

    fn noise_at_rank(rank: u32) -> AppliedTransform {
        AppliedTransform { kind: TransformKind::Noise, theta: 2.0, seed: 1, severity_rank: rank }
    }

    #[test]
    fn zero_error_rate_echoes_the_reference() {
        let mock = MockAsr::new("m", spec_with("the quick brown fox")).unwrap();
        let text = mock.transcribe_raw(&req(b"bytes", None)).unwrap();
        assert_eq!(text, "the quick brown fox");
        let transformed = mock
            .transcribe_raw(&req(b"bytes", Some(noise_at_rank(5))))
            .unwrap();
        assert_eq!(transformed, "the quick brown fox");
    }

    #[test]
    fn weak_words_vanish_at_and_above_the_rank_threshold() {
        let mut spec = spec_with("my brother is nice");
        spec.vocabulary_weakness = ["brother".to_string()].into();
        spec.weakness_rank = 3;
        let mock = MockAsr::new("m", spec).unwrap();

        for rank in [0u32, 1, 2] {
            let t = (rank > 0).then(|| noise_at_rank(rank));
            let text = mock.transcribe_raw(&req(b"b", t)).unwrap();
            assert!(text.contains("brother"), "rank {rank}: {text}");
        }
        for rank in [3u32, 4, 5] {
            let text = mock
                .transcribe_raw(&req(b"b", Some(noise_at_rank(rank))))
                .unwrap();
            assert!(!text.contains("brother"), "rank {rank}: {text}");
            assert!(text.contains("blur"));
        }
    }

    #[test]
    fn delete_mode_shortens_the_transcript() {
        let mut spec = spec_with("one two three");
        spec.vocabulary_weakness = ["two".to_string()].into();
        spec.corruption = CorruptionMode::Delete;
        let mock = MockAsr::new("m", spec).unwrap();
        let text = mock.transcribe_raw(&req(b"b", Some(noise_at_rank(1)))).unwrap();
        assert_eq!(text, "one three");
    }

    #[test]
    fn probabilistic_corruption_is_deterministic_and_rank_sensitive() {
        let mut spec = spec_with(&vec!["word"; 400].join(" "));
        spec.noise_sensitivity = [(TransformKind::Noise, 0.1)].into();
        let mock = MockAsr::new("m", spec).unwrap();

        let once = mock.transcribe_raw(&req(b"b", Some(noise_at_rank(2)))).unwrap();
        let twice = mock.transcribe_raw(&req(b"b", Some(noise_at_rank(2)))).unwrap();
        assert_eq!(once, twice);

        let count = |t: &str| t.split_whitespace().filter(|w| *w == "blur").count();
        let low = count(&mock.transcribe_raw(&req(b"b", Some(noise_at_rank(1)))).unwrap());
        let high = count(&mock.transcribe_raw(&req(b"b", Some(noise_at_rank(5)))).unwrap());
        assert!(low > 0);
        assert!(high > low, "rank 5 ({high}) should corrupt more than rank 1 ({low})");
        // a different kind without sensitivity stays clean
        let clean = mock
            .transcribe_raw(&req(
                b"b",
                Some(AppliedTransform {
                    kind: TransformKind::Amplitude,
                    theta: 0.5,
                    seed: 1,
                    severity_rank: 5,
                }),
            ))
            .unwrap();
        assert_eq!(count(&clean), 0);
    }

    #[test]
    fn unknown_clip_is_rejected() {
        let mock = MockAsr::new("m", MockAsrSpec::default()).unwrap();
        assert!(matches!(
            mock.transcribe_raw(&req(b"b", None)),
            Err(AsrError::BackendRejected { .. })
        ));
    }

    #[test]
    fn bad_probabilities_fail_validation() {
        let mut spec = MockAsrSpec::default();
        spec.base_error_rate = 1.5;
        assert!(MockAsr::new("m", spec).is_err());
    }
}
