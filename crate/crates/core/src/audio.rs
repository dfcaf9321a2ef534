//! WAV decoding/encoding and reference signal synthesis.
//!
//! Clips are held as normalized `f32` sample buffers. The codec speaks
//! exactly one dialect: RIFF/WAVE, PCM (format tag 1), 16 bits per sample,
//! little endian. Multi-channel input is downmixed to mono by averaging;
//! output is always mono.
//!
//! Normalization convention: decode divides by 32768, encode multiplies by
//! 32768, rounds and clamps to `[-32768, 32767]`. This keeps -1.0 exactly
//! representable, maps +1.0 to 32767 via the clamp, and makes
//! encode(decode(p)) == p for every 16-bit value, so a re-encoded file is
//! byte-identical to its source.

use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt container: {0}")]
    CorruptContainer(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A mono audio clip: normalized samples plus the rate they were captured at.
///
/// Samples decoded from disk always lie in `[-1.0, 1.0]`; transformed
/// clips may transiently exceed that range in memory (e.g. gain > 1) and
/// are clamped when written back out.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub clip_id: String,
    pub samples: Vec<f32>,
    pub sample_rate: u32,
}

impl AudioClip {
    pub fn new(
        clip_id: impl Into<String>,
        samples: Vec<f32>,
        sample_rate: u32,
    ) -> Result<Self, AudioError> {
        if sample_rate == 0 {
            return Err(AudioError::InvalidParameter("sample rate must be > 0".into()));
        }
        if samples.is_empty() {
            return Err(AudioError::InvalidParameter("clip has no samples".into()));
        }
        Ok(Self { clip_id: clip_id.into(), samples, sample_rate })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Largest absolute sample value.
    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0f32, |m, s| m.max(s.abs()))
    }

    /// Root mean square of the samples, computed in f64.
    pub fn rms(&self) -> f64 {
        (self.mean_square()).sqrt()
    }

    /// Mean of squared samples (signal power), computed in f64.
    pub fn mean_square(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
        sum / self.samples.len() as f64
    }

    /// Clone with the same audio but a new identifier.
    pub fn with_id(&self, clip_id: impl Into<String>) -> Self {
        Self { clip_id: clip_id.into(), samples: self.samples.clone(), sample_rate: self.sample_rate }
    }
}

const RIFF: &[u8; 4] = b"RIFF";
const WAVE: &[u8; 4] = b"WAVE";
const FMT: &[u8; 4] = b"fmt ";
const DATA: &[u8; 4] = b"data";

/// Read a 16-bit PCM WAV file. Multi-channel content is downmixed to mono
/// by averaging the channels of each frame.
pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioClip, AudioError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| {
        if e.kind() == io::ErrorKind::NotFound {
            AudioError::FileNotFound(path.display().to_string())
        } else {
            AudioError::Io(e)
        }
    })?;
    let clip_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    decode_wav_bytes(&bytes, clip_id)
}

/// Decode a WAV container held in memory.
pub fn decode_wav_bytes(bytes: &[u8], clip_id: impl Into<String>) -> Result<AudioClip, AudioError> {
    if bytes.len() < 12 || &bytes[0..4] != RIFF || &bytes[8..12] != WAVE {
        return Err(AudioError::CorruptContainer("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<(u16, u16, u32)> = None; // (format tag, channels, rate)
    let mut data: Option<&[u8]> = None;
    let mut pos = 12usize;
    while pos + 8 <= bytes.len() {
        let id: [u8; 4] = bytes[pos..pos + 4].try_into().unwrap();
        let size = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).ok_or_else(|| {
            AudioError::CorruptContainer("chunk size overflows container".into())
        })?;
        if body_end > bytes.len() {
            return Err(AudioError::CorruptContainer(format!(
                "chunk '{}' of {} bytes runs past end of file",
                String::from_utf8_lossy(&id),
                size
            )));
        }
        let body = &bytes[body_start..body_end];
        match &id {
            FMT => {
                if size < 16 {
                    return Err(AudioError::CorruptContainer("fmt chunk too short".into()));
                }
                let tag = u16::from_le_bytes(body[0..2].try_into().unwrap());
                let channels = u16::from_le_bytes(body[2..4].try_into().unwrap());
                let rate = u32::from_le_bytes(body[4..8].try_into().unwrap());
                let bits = u16::from_le_bytes(body[14..16].try_into().unwrap());
                if tag != 1 {
                    return Err(AudioError::UnsupportedFormat(format!(
                        "audio format tag {tag}, only PCM (1) is supported"
                    )));
                }
                if bits != 16 {
                    return Err(AudioError::UnsupportedFormat(format!(
                        "{bits} bits per sample, only 16 is supported"
                    )));
                }
                if channels == 0 || rate == 0 {
                    return Err(AudioError::CorruptContainer(
                        "fmt chunk declares zero channels or zero sample rate".into(),
                    ));
                }
                fmt = Some((tag, channels, rate));
            }
            DATA => data = Some(body),
            _ => {} // skip ancillary chunks (LIST, fact, ...)
        }
        // chunks are word-aligned: odd sizes carry a pad byte
        pos = body_end + (size & 1);
    }

    let (_, channels, rate) = fmt.ok_or_else(|| {
        AudioError::CorruptContainer("no fmt chunk".into())
    })?;
    let data = data.ok_or_else(|| AudioError::CorruptContainer("no data chunk".into()))?;

    let frame_bytes = channels as usize * 2;
    if data.len() % frame_bytes != 0 {
        return Err(AudioError::CorruptContainer(format!(
            "data chunk of {} bytes is not a whole number of {}-byte frames",
            data.len(),
            frame_bytes
        )));
    }
    let n_frames = data.len() / frame_bytes;
    if n_frames == 0 {
        return Err(AudioError::CorruptContainer("data chunk holds no frames".into()));
    }

    let mut samples = Vec::with_capacity(n_frames);
    for frame in data.chunks_exact(frame_bytes) {
        let mut acc = 0i64;
        for ch in frame.chunks_exact(2) {
            acc += i16::from_le_bytes([ch[0], ch[1]]) as i64;
        }
        let mean = acc as f64 / channels as f64;
        samples.push((mean / 32768.0) as f32);
    }
    AudioClip::new(clip_id, samples, rate)
}

fn quantize(s: f32) -> i16 {
    ((s as f64) * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

/// Encode a clip as a canonical mono 16-bit PCM WAV byte buffer.
pub fn encode_wav_bytes(clip: &AudioClip) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(RIFF);
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(WAVE);
    out.extend_from_slice(FMT);
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&clip.sample_rate.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate * 2).to_le_bytes()); // byte rate
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(DATA);
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &clip.samples {
        out.extend_from_slice(&quantize(s).to_le_bytes());
    }
    out
}

/// Write a clip to disk as mono 16-bit PCM WAV.
pub fn write_wav(clip: &AudioClip, path: impl AsRef<Path>) -> Result<(), AudioError> {
    fs::write(path, encode_wav_bytes(clip))?;
    Ok(())
}

/// Synthesize `amplitude * sin(2*pi*freq*t + phase)` at the given rate.
pub fn synth_sine(
    clip_id: impl Into<String>,
    amplitude: f64,
    freq: f64,
    phase: f64,
    duration: f64,
    sample_rate: u32,
) -> Result<AudioClip, AudioError> {
    if !(amplitude >= 0.0 && amplitude <= 1.0) {
        return Err(AudioError::InvalidParameter(format!(
            "amplitude {amplitude} outside [0, 1]"
        )));
    }
    if sample_rate == 0 {
        return Err(AudioError::InvalidParameter("sample rate must be > 0".into()));
    }
    let nyquist = sample_rate as f64 / 2.0;
    if !(freq > 0.0 && freq < nyquist) {
        return Err(AudioError::InvalidParameter(format!(
            "frequency {freq} Hz outside (0, {nyquist}) for rate {sample_rate}"
        )));
    }
    if !(duration > 0.0) {
        return Err(AudioError::InvalidParameter("duration must be positive".into()));
    }
    let n = (duration * sample_rate as f64).round() as usize;
    if n == 0 {
        return Err(AudioError::InvalidParameter("duration rounds to zero samples".into()));
    }
    let step = 2.0 * std::f64::consts::PI * freq / sample_rate as f64;
    let samples = (0..n)
        .map(|i| (amplitude * (step * i as f64 + phase).sin()) as f32)
        .collect();
    AudioClip::new(clip_id, samples, sample_rate)
}
