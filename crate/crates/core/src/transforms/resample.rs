//! Band-limited interpolation for the time-stretch transformation.
//!
//! Output position m reads the input at t = m * factor through a
//! Blackman-windowed sinc kernel. Factors are in (0, 1], so this only
//! ever interpolates between existing samples; no anti-alias decimation
//! stage is needed. Integer read positions bypass the kernel entirely,
//! which makes factor 1.0 an exact identity.

use std::f64::consts::PI;

/// Half-width of the interpolation kernel in input samples.
const KERNEL_HALF_WIDTH: usize = 24;

fn blackman(x: f64, half_width: f64) -> f64 {
    // x in [-half_width, half_width]
    let u = (x / half_width + 1.0) * 0.5; // map to [0, 1]
    0.42 - 0.5 * (2.0 * PI * u).cos() + 0.08 * (4.0 * PI * u).cos()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Stretch `input` so its duration grows by 1/factor; `factor` in (0, 1].
/// Output length is `round(len / factor)`.
pub fn stretch(input: &[f32], factor: f64) -> Vec<f32> {
    let out_len = (input.len() as f64 / factor).round() as usize;
    let half = KERNEL_HALF_WIDTH as f64;
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let t = m as f64 * factor;
        let base = t.floor();
        let frac = t - base;
        let base = base as isize;
        if frac == 0.0 {
            let v = if base >= 0 && (base as usize) < input.len() {
                input[base as usize]
            } else {
                0.0
            };
            out.push(v);
            continue;
        }
        let lo = base - KERNEL_HALF_WIDTH as isize + 1;
        let hi = base + KERNEL_HALF_WIDTH as isize;
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for j in lo..=hi {
            let d = t - j as f64;
            let w = sinc(d) * blackman(d, half);
            den += w;
            if j >= 0 && (j as usize) < input.len() {
                num += input[j as usize] as f64 * w;
            }
        }
        // kernel weights always sum to ~1; normalize away the ripple
        out.push((num / den) as f32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audio::synth_sine;

    #[test]
    fn unit_factor_is_identity() {
        let clip = synth_sine("s", 0.7, 440.0, 0.1, 0.25, 16_000).unwrap();
        let out = stretch(&clip.samples, 1.0);
        assert_eq!(out, clip.samples);
    }

    #[test]
    fn length_follows_rounded_ratio() {
        let input = vec![0.0f32; 16_000];
        assert_eq!(stretch(&input, 0.5).len(), 32_000);
        assert_eq!(stretch(&input, 0.9).len(), (16_000f64 / 0.9).round() as usize);
        assert_eq!(stretch(&vec![0.0f32; 7], 0.6).len(), (7f64 / 0.6).round() as usize);
    }

    #[test]
    fn midpoint_interpolation_tracks_the_waveform() {
        // stretching a slow sine by 2 should land near the true midpoints
        let clip = synth_sine("s", 0.5, 200.0, 0.0, 0.1, 16_000).unwrap();
        let out = stretch(&clip.samples, 0.5);
        let step = 2.0 * PI * 200.0 / 16_000.0;
        // skip the edges where the kernel is truncated
        for m in (100..out.len() - 100).step_by(37) {
            let expect = 0.5 * (step * (m as f64) * 0.5).sin();
            assert!(
                (out[m] as f64 - expect).abs() < 1e-3,
                "sample {m}: {} vs {expect}",
                out[m]
            );
        }
    }
}
