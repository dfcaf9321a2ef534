//! Small helpers shared across the pipeline: stable hashing, seed
//! derivation and canonical number formatting for file names and cache keys.

use sha2::{Digest, Sha256};

/// Hex-encoded SHA-256 of a byte buffer.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let out = h.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

/// Derive a per-task seed from the run seed and a set of labels.
///
/// The derivation is a pure function of its inputs, so re-running a
/// pipeline with the same run seed reproduces every stochastic choice
/// regardless of scheduling order.
pub fn derive_seed(run_seed: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(run_seed.to_le_bytes());
    for label in labels {
        h.update([0xff]); // domain separator between labels
        h.update(label.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Canonical text form of a severity parameter, safe for file names.
///
/// Integral values drop the fraction ("700", "2"); fractional values
/// use 'p' for the decimal point ("0p5", "0p05").
pub fn format_theta(theta: f64) -> String {
    if theta.fract() == 0.0 && theta.abs() < 1e15 {
        format!("{}", theta as i64)
    } else {
        format!("{theta:?}").replace('.', "p")
    }
}
