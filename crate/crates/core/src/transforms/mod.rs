//! The metamorphic audio transformations.
//!
//! Eight kinds, each driven by a severity parameter theta whose units
//! depend on the kind (gain factor, clip bound, percent, milliseconds,
//! Hz, dB SNR, rate factor). Every function here is a pure function of
//! (clip, parameters, seed): the stochastic kinds draw from a
//! seed-determined stream, so outputs are bit-identical across runs and
//! thread schedules.

mod filter;
mod resample;
mod schedule;
pub mod selection;

pub use filter::Biquad;
pub use schedule::{
    default_schedules, load_schedules, parse_schedules, SeveritySchedule, TransformKind,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audio::AudioClip;
use crate::util::format_theta;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("clip '{0}' is silent; transformation undefined on zero signal")]
    SilentClip(String),
    #[error("cannot zero {requested} non-adjacent chunks out of {available}")]
    InfeasibleSelection { requested: usize, available: usize },
}

/// A transformation to apply: kind, severity and the seed the stochastic
/// kinds draw from (deterministic kinds ignore it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transformation {
    pub kind: TransformKind,
    pub theta: f64,
    pub seed: u64,
}

impl Transformation {
    pub fn new(kind: TransformKind, theta: f64, seed: u64) -> Self {
        Self { kind, theta, seed }
    }

    /// Canonical descriptor used in cache keys and file names,
    /// e.g. `noise_t2_s42`.
    pub fn descriptor(&self) -> String {
        format!("{}_t{}_s{}", self.kind, format_theta(self.theta), self.seed)
    }
}

/// Dispatch to the kind-specific transformation.
pub fn apply(clip: &AudioClip, t: &Transformation) -> Result<AudioClip, TransformError> {
    match t.kind {
        TransformKind::Amplitude => apply_amplitude(clip, t.theta),
        TransformKind::Clipping => apply_clipping(clip, t.theta),
        TransformKind::Drop => apply_drop(clip, t.theta, t.seed),
        TransformKind::Frame => apply_frame(clip, t.theta, t.seed),
        TransformKind::HighPass => apply_filter(clip, TransformKind::HighPass, t.theta),
        TransformKind::LowPass => apply_filter(clip, TransformKind::LowPass, t.theta),
        TransformKind::Noise => apply_noise(clip, t.theta, t.seed),
        TransformKind::Scale => apply_scale(clip, t.theta),
    }
}

fn derived(clip: &AudioClip, samples: Vec<f32>) -> AudioClip {
    AudioClip {
        clip_id: clip.clip_id.clone(),
        samples,
        sample_rate: clip.sample_rate,
    }
}

/// Multiply every sample by `theta`. Values may exceed [-1, 1] in memory;
/// the WAV encoder clamps on write.
pub fn apply_amplitude(clip: &AudioClip, theta: f64) -> Result<AudioClip, TransformError> {
    TransformKind::Amplitude.validate_theta(theta)?;
    let g = theta as f32;
    Ok(derived(clip, clip.samples.iter().map(|&s| s * g).collect()))
}

/// Scale so the peak is exactly 1 (errors on silence).
pub fn peak_normalize(clip: &AudioClip) -> Result<AudioClip, TransformError> {
    let peak = clip.peak();
    if peak == 0.0 {
        return Err(TransformError::SilentClip(clip.clip_id.clone()));
    }
    // x / x == 1.0 exactly, so the new peak is exact
    Ok(derived(clip, clip.samples.iter().map(|&s| s / peak).collect()))
}

/// Limit every sample to [-bound, bound].
pub fn hard_clip(clip: &AudioClip, bound: f64) -> AudioClip {
    let b = bound as f32;
    derived(clip, clip.samples.iter().map(|&s| s.clamp(-b, b)).collect())
}

/// Three stages: peak-normalize, clip to [-theta, theta], rescale by
/// 1/theta. A saturated sample comes back to exactly 1.0 after rescale.
pub fn apply_clipping(clip: &AudioClip, theta: f64) -> Result<AudioClip, TransformError> {
    TransformKind::Clipping.validate_theta(theta)?;
    let normalized = peak_normalize(clip)?;
    let clipped = hard_clip(&normalized, theta);
    let t = theta as f32;
    Ok(derived(clip, clipped.samples.iter().map(|&s| s / t).collect()))
}

fn zero_chunks(
    clip: &AudioClip,
    chunk_len: usize,
    k: usize,
    seed: u64,
) -> Result<AudioClip, TransformError> {
    let n_chunks = clip.samples.len().div_ceil(chunk_len);
    let chosen = selection::sample_nonadjacent(n_chunks, k, seed).ok_or(
        TransformError::InfeasibleSelection {
            requested: k,
            available: n_chunks,
        },
    )?;
    let mut samples = clip.samples.clone();
    for idx in chosen {
        let start = idx * chunk_len;
        let end = (start + chunk_len).min(samples.len());
        samples[start..end].fill(0.0);
    }
    Ok(derived(clip, samples))
}

/// Partition into 20 ms chunks and zero floor(theta/100 * chunks) of
/// them, no two adjacent. The trailing partial chunk counts as a chunk.
pub fn apply_drop(clip: &AudioClip, theta: f64, seed: u64) -> Result<AudioClip, TransformError> {
    TransformKind::Drop.validate_theta(theta)?;
    let chunk_len = ((clip.sample_rate as f64) * 0.020).round() as usize;
    if chunk_len == 0 {
        return Err(TransformError::InvalidParameter(
            "sample rate too low for 20 ms chunks".into(),
        ));
    }
    let n_chunks = clip.samples.len().div_ceil(chunk_len);
    let k = ((theta / 100.0) * n_chunks as f64).floor() as usize;
    zero_chunks(clip, chunk_len, k, seed)
}

/// Partition into theta-ms chunks and zero 10% of them (floor), no two
/// adjacent.
pub fn apply_frame(clip: &AudioClip, theta: f64, seed: u64) -> Result<AudioClip, TransformError> {
    TransformKind::Frame.validate_theta(theta)?;
    let chunk_len = ((clip.sample_rate as f64) * theta / 1000.0).round() as usize;
    if chunk_len == 0 {
        return Err(TransformError::InvalidParameter(format!(
            "{theta} ms is shorter than one sample at {} Hz",
            clip.sample_rate
        )));
    }
    let n_chunks = clip.samples.len().div_ceil(chunk_len);
    let k = (0.10 * n_chunks as f64).floor() as usize;
    zero_chunks(clip, chunk_len, k, seed)
}

/// Order-2 butterworth high/low-pass with cutoff `theta` Hz.
pub fn apply_filter(
    clip: &AudioClip,
    kind: TransformKind,
    theta: f64,
) -> Result<AudioClip, TransformError> {
    let nyquist = clip.sample_rate as f64 / 2.0;
    if !(theta > 0.0 && theta < nyquist) {
        return Err(TransformError::InvalidParameter(format!(
            "cutoff {theta} Hz outside (0, {nyquist})"
        )));
    }
    let biquad = match kind {
        TransformKind::LowPass => Biquad::butterworth_lowpass(theta, clip.sample_rate),
        TransformKind::HighPass => Biquad::butterworth_highpass(theta, clip.sample_rate),
        other => {
            return Err(TransformError::InvalidParameter(format!(
                "{other} is not a filter kind"
            )))
        }
    };
    Ok(derived(clip, biquad.process(&clip.samples)))
}

/// Add white gaussian noise sized so the signal-to-noise ratio is exactly
/// `theta` dB. The raw noise draw is rescaled to hit the target power, so
/// the achieved SNR does not wander with clip length.
pub fn apply_noise(clip: &AudioClip, theta: f64, seed: u64) -> Result<AudioClip, TransformError> {
    TransformKind::Noise.validate_theta(theta)?;
    let signal_power = clip.mean_square();
    if signal_power == 0.0 {
        return Err(TransformError::SilentClip(clip.clip_id.clone()));
    }
    let target_power = signal_power / 10f64.powf(theta / 10.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..clip.samples.len())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let raw_power: f64 = raw.iter().map(|n| n * n).sum::<f64>() / raw.len() as f64;
    if raw_power == 0.0 {
        return Err(TransformError::InvalidParameter(
            "degenerate noise draw".into(),
        ));
    }
    let scale = (target_power / raw_power).sqrt();
    let samples = clip
        .samples
        .iter()
        .zip(&raw)
        .map(|(&s, &n)| (s as f64 + scale * n) as f32)
        .collect();
    Ok(derived(clip, samples))
}

/// Slow the audio down by `theta`: output duration is input/theta at the
/// same sample rate, pitch falls with it.
pub fn apply_scale(clip: &AudioClip, theta: f64) -> Result<AudioClip, TransformError> {
    TransformKind::Scale.validate_theta(theta)?;
    Ok(derived(clip, resample::stretch(&clip.samples, theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::{encode_wav_bytes, decode_wav_bytes, synth_sine};
    use rand::Rng;

    fn nonzero_clip(n: usize, rate: u32) -> AudioClip {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = (0..n).map(|_| rng.gen_range(0.1f32..0.9)).collect();
        AudioClip::new("nz", samples, rate).unwrap()
    }

    fn zeroed_chunk_indices(clip: &AudioClip, chunk_len: usize) -> Vec<usize> {
        clip.samples
            .chunks(chunk_len)
            .enumerate()
            .filter(|(_, c)| c.iter().all(|&s| s == 0.0))
            .map(|(i, _)| i)
            .collect()
    }

    #[test]
    fn amplitude_examples() {
        let clip = AudioClip::new("a", vec![0.8, -0.2], 16_000).unwrap();
        let id = apply_amplitude(&clip, 1.0).unwrap();
        assert_eq!(id.samples, clip.samples);
        let half = apply_amplitude(&clip, 0.5).unwrap();
        assert_eq!(half.samples, vec![0.4, -0.1]);
        let double = apply_amplitude(&clip, 2.0).unwrap();
        assert_eq!(double.samples, vec![1.6, -0.4]); // exceeds 1 in memory
        let encoded = decode_wav_bytes(&encode_wav_bytes(&double), "a").unwrap();
        assert_eq!(encoded.samples[0], 32767.0 / 32768.0); // clamped on write
        assert!(apply_amplitude(&clip, 0.0).is_err());
    }

    #[test]
    fn clipping_three_stage_arithmetic() {
        // peak-normalized {0.5, 0.02} with theta 0.05:
        // normalize -> {1.0, 0.04}, clip -> {0.05, 0.04}, rescale -> {1.0, 0.8}
        let clip = AudioClip::new("c", vec![0.5, 0.02], 16_000).unwrap();
        let out = apply_clipping(&clip, 0.05).unwrap();
        assert!((out.samples[0] - 1.0).abs() < 1e-6);
        assert!((out.samples[1] - 0.8).abs() < 1e-6);

        // bound at full scale: peak-normalized identity
        let out = apply_clipping(&clip, 1.0).unwrap();
        assert_eq!(out.samples[0], 1.0);
        assert!((out.samples[1] - 0.04).abs() < 1e-7);

        assert!(matches!(
            apply_clipping(&AudioClip::new("z", vec![0.0; 8], 16_000).unwrap(), 0.05),
            Err(TransformError::SilentClip(_))
        ));
    }

    #[test]
    fn severe_clipping_saturates_a_sine() {
        let clip = synth_sine("s", 0.9, 440.0, 0.0, 1.0, 16_000).unwrap();
        let out = apply_clipping(&clip, 0.01).unwrap();
        assert_eq!(out.peak(), 1.0);
        let saturated = out
            .samples
            .iter()
            .filter(|s| s.abs() == 1.0)
            .count() as f64;
        assert!(saturated / out.len() as f64 >= 0.99);
    }

    #[test]
    fn drop_zeroes_the_stated_chunk_count() {
        let clip = nonzero_clip(16_000, 16_000); // 1 s -> 50 chunks of 320
        let out = apply_drop(&clip, 25.0, 9).unwrap();
        assert_eq!(out.len(), clip.len());
        let zeroed = zeroed_chunk_indices(&out, 320);
        assert_eq!(zeroed.len(), 12); // floor(0.25 * 50)
        for w in zeroed.windows(2) {
            assert!(w[1] > w[0] + 1, "adjacent zeroed chunks {w:?}");
        }

        let same = apply_drop(&clip, 25.0, 9).unwrap();
        assert_eq!(out.samples, same.samples);
        let other = apply_drop(&clip, 25.0, 10).unwrap();
        assert_ne!(out.samples, other.samples);
        assert_eq!(zeroed_chunk_indices(&other, 320).len(), 12);

        let untouched = apply_drop(&clip, 0.0, 9).unwrap();
        assert_eq!(untouched.samples, clip.samples);
    }

    #[test]
    fn drop_rejects_infeasible_density() {
        let clip = nonzero_clip(3200, 16_000); // 10 chunks
        match apply_drop(&clip, 90.0, 1) {
            Err(TransformError::InfeasibleSelection { requested: 9, available: 10 }) => {}
            other => panic!("expected InfeasibleSelection, got {other:?}"),
        }
    }

    #[test]
    fn frame_zeroes_ten_percent_of_chunks() {
        let clip = nonzero_clip(16_000, 16_000); // theta 50ms -> 20 chunks of 800
        let out = apply_frame(&clip, 50.0, 3).unwrap();
        let zeroed = zeroed_chunk_indices(&out, 800);
        assert_eq!(zeroed.len(), 2);
        for w in zeroed.windows(2) {
            assert!(w[1] > w[0] + 1);
        }
        // dropped fraction of samples is within one chunk of 10%
        let zero_samples = 2 * 800;
        assert!((zero_samples as f64 / 16_000.0 - 0.10).abs() <= 800.0 / 16_000.0);
    }

    #[test]
    fn frame_shorter_than_one_chunk_is_identity() {
        let clip = nonzero_clip(100, 16_000); // one 10ms chunk -> k = 0
        let out = apply_frame(&clip, 10.0, 1).unwrap();
        assert_eq!(out.samples, clip.samples);
    }

    #[test]
    fn noise_hits_target_snr_exactly() {
        let clip = synth_sine("s", 0.5, 440.0, 0.0, 1.0, 16_000).unwrap();
        for theta in [10.0, 2.0, -3.0] {
            let out = apply_noise(&clip, theta, 21).unwrap();
            let noise_power: f64 = out
                .samples
                .iter()
                .zip(&clip.samples)
                .map(|(&o, &i)| ((o - i) as f64).powi(2))
                .sum::<f64>()
                / clip.len() as f64;
            let snr = 10.0 * (clip.mean_square() / noise_power).log10();
            assert!((snr - theta).abs() <= 0.1, "theta {theta}: got {snr}");
        }
    }

    #[test]
    fn noise_is_negligible_at_high_snr_and_seeded() {
        let clip = synth_sine("s", 0.5, 440.0, 0.0, 0.5, 16_000).unwrap();
        let out = apply_noise(&clip, 60.0, 4).unwrap();
        let err_ms: f64 = out
            .samples
            .iter()
            .zip(&clip.samples)
            .map(|(&o, &i)| ((o - i) as f64).powi(2))
            .sum::<f64>()
            / clip.len() as f64;
        assert!(err_ms.sqrt() <= 0.00101 * clip.rms());

        let again = apply_noise(&clip, 60.0, 4).unwrap();
        assert_eq!(out.samples, again.samples);
        assert!(matches!(
            apply_noise(&AudioClip::new("z", vec![0.0; 4], 16_000).unwrap(), 10.0, 4),
            Err(TransformError::SilentClip(_))
        ));
    }

    #[test]
    fn scale_length_contract() {
        let clip = nonzero_clip(16_000, 16_000);
        assert_eq!(apply_scale(&clip, 1.0).unwrap().samples, clip.samples);
        assert_eq!(apply_scale(&clip, 0.5).unwrap().len(), 32_000);
        assert!(apply_scale(&clip, 0.0).is_err());
        assert!(apply_scale(&clip, 1.5).is_err());
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let clip = synth_sine("s", 0.5, 440.0, 0.0, 0.25, 16_000).unwrap();
        let t = Transformation::new(TransformKind::Noise, 10.0, 77);
        let via_apply = apply(&clip, &t).unwrap();
        let direct = apply_noise(&clip, 10.0, 77).unwrap();
        assert_eq!(via_apply.samples, direct.samples);

        let id = apply(&clip, &Transformation::new(TransformKind::Amplitude, 1.0, 0)).unwrap();
        assert_eq!(id.samples, clip.samples);
    }

    #[test]
    fn full_default_schedule_yields_41_clips() {
        let clip = synth_sine("s", 0.5, 440.0, 0.0, 0.5, 16_000).unwrap();
        let mut produced = 0;
        for sched in default_schedules() {
            for &theta in &sched.thetas {
                let t = Transformation::new(sched.kind, theta, 1);
                apply(&clip, &t).unwrap();
                produced += 1;
            }
        }
        assert_eq!(produced, 41);
    }

    #[test]
    fn descriptor_is_stable() {
        assert_eq!(
            Transformation::new(TransformKind::Noise, 2.0, 42).descriptor(),
            "noise_t2_s42"
        );
        assert_eq!(
            Transformation::new(TransformKind::Amplitude, 0.5, 7).descriptor(),
            "amplitude_t0p5_s7"
        );
    }
}
