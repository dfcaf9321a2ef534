//! Uniform sampling of pairwise non-adjacent index sets.
//!
//! Choosing k indices from 0..n with no two adjacent is in bijection with
//! choosing k unordered values from 0..(n-k+1): if a_0 < ... < a_{k-1} is a
//! sorted draw from the smaller range, then a_j + j gives the j-th chosen
//! index. Sampling the smaller range uniformly therefore yields a uniform
//! draw over all valid non-adjacent sets, with no rejection loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Largest k for which a non-adjacent selection from `n` slots exists.
pub fn max_nonadjacent(n: usize) -> usize {
    n.div_ceil(2)
}

/// Draw `k` pairwise non-adjacent indices from `0..n`, uniformly over all
/// such sets, as a pure function of `seed`. Returns indices in ascending
/// order. `None` when `k` exceeds [`max_nonadjacent`].
pub fn sample_nonadjacent(n: usize, k: usize, seed: u64) -> Option<Vec<usize>> {
    if k == 0 {
        return Some(Vec::new());
    }
    if k > max_nonadjacent(n) {
        return None;
    }
    let m = n - k + 1;
    let mut pool: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // partial Fisher-Yates: the first k entries become the draw
    pool.partial_shuffle(&mut rng, k);
    let mut draw: Vec<usize> = pool[..k].to_vec();
    draw.sort_unstable();
    for (j, v) in draw.iter_mut().enumerate() {
        *v += j;
    }
    Some(draw)
}
