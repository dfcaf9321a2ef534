//! Tokenization, word-level edit distance and word-count dictionaries.
//!
//! These are the measurement primitives the differential test and the
//! fault localizer share. Tokens are compared by exact scalar equality
//! after Unicode lowercasing; no diacritic folding is applied.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("normalized distance is undefined when both token lists are empty")]
    BothEmpty,
}

/// Lowercase, split on whitespace, trim leading/trailing punctuation from
/// each chunk, drop chunks that end up empty. Internal punctuation
/// (apostrophes, hyphens) survives.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|chunk| {
            let lowered = chunk.to_lowercase();
            let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
            if trimmed.is_empty() { None } else { Some(trimmed.to_string()) }
        })
        .collect()
}

/// Minimum number of word insertions, deletions and substitutions (unit
/// costs) transforming `a` into `b`.
pub fn word_levenshtein<S: AsRef<str>, T: AsRef<str>>(a: &[S], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    // single-row DP over the shorter list
    let av: Vec<&str> = a.iter().map(|s| s.as_ref()).collect();
    let bv: Vec<&str> = b.iter().map(|s| s.as_ref()).collect();
    let (short, long) = if av.len() <= bv.len() { (&av, &bv) } else { (&bv, &av) };
    let mut prev: Vec<usize> = (0..=short.len()).collect();
    let mut curr = vec![0usize; short.len() + 1];
    for i in 1..=long.len() {
        curr[0] = i;
        for j in 1..=short.len() {
            let cost = usize::from(long[i - 1] != short[j - 1]);
            curr[j] = (prev[j] + 1).min(curr[j - 1] + 1).min(prev[j - 1] + cost);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[short.len()]
}

/// Edit distance divided by the length of the longer list; always in [0, 1].
pub fn normalized_distance<S: AsRef<str>, T: AsRef<str>>(
    a: &[S],
    b: &[T],
) -> Result<f64, TextError> {
    let longer = a.len().max(b.len());
    if longer == 0 {
        return Err(TextError::BothEmpty);
    }
    Ok(word_levenshtein(a, b) as f64 / longer as f64)
}

/// Multiset of word occurrence counts. Absent key means count zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCounts {
    pub counts: BTreeMap<String, u64>,
}

impl WordCounts {
    pub fn get(&self, word: &str) -> u64 {
        self.counts.get(word).copied().unwrap_or(0)
    }

    /// Add every token from `tokens` into this dictionary.
    pub fn absorb<S: AsRef<str>>(&mut self, tokens: &[S]) {
        for t in tokens {
            *self.counts.entry(t.as_ref().to_string()).or_insert(0) += 1;
        }
    }
}

/// Count token occurrences.
pub fn word_counts<S: AsRef<str>>(tokens: &[S]) -> WordCounts {
    let mut wc = WordCounts::default();
    wc.absorb(tokens);
    wc
}
