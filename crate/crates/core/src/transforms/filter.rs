//! Second-order butterworth filters, discretized by the bilinear transform.
//!
//! The analog prototypes are 1/(s^2 + sqrt(2) s + 1) (low pass) and its
//! s -> 1/s image (high pass). Frequency prewarping pins the -3.01 dB
//! point exactly at the requested cutoff. Filters run with zero initial
//! state; callers measuring spectra skip the transient instead.

use std::f64::consts::{PI, SQRT_2};

/// One biquad section, direct form II transposed, f64 state.
#[derive(Debug, Clone)]
pub struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    /// Low-pass butterworth, -3 dB at `cutoff_hz`. Caller guarantees
    /// 0 < cutoff < rate/2.
    pub fn butterworth_lowpass(cutoff_hz: f64, sample_rate: u32) -> Self {
        let k = 1.0 / (PI * cutoff_hz / sample_rate as f64).tan();
        let a0 = k * k + SQRT_2 * k + 1.0;
        Self {
            b0: 1.0 / a0,
            b1: 2.0 / a0,
            b2: 1.0 / a0,
            a1: (2.0 - 2.0 * k * k) / a0,
            a2: (k * k - SQRT_2 * k + 1.0) / a0,
        }
    }

    /// High-pass butterworth, -3 dB at `cutoff_hz`.
    pub fn butterworth_highpass(cutoff_hz: f64, sample_rate: u32) -> Self {
        let k = 1.0 / (PI * cutoff_hz / sample_rate as f64).tan();
        let a0 = k * k + SQRT_2 * k + 1.0;
        Self {
            b0: k * k / a0,
            b1: -2.0 * k * k / a0,
            b2: k * k / a0,
            a1: (2.0 - 2.0 * k * k) / a0,
            a2: (k * k - SQRT_2 * k + 1.0) / a0,
        }
    }

    /// Run the filter over a buffer, zero initial conditions.
    pub fn process(&self, input: &[f32]) -> Vec<f32> {
        let mut s1 = 0.0f64;
        let mut s2 = 0.0f64;
        input
            .iter()
            .map(|&x| {
                let x = x as f64;
                let y = self.b0 * x + s1;
                s1 = self.b1 * x - self.a1 * y + s2;
                s2 = self.b2 * x - self.a2 * y;
                y as f32
            })
            .collect()
    }
}
