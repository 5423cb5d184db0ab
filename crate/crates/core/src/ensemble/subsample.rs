//! Uniform subsampling without replacement.

use rand_chacha::rand_core::RngCore;

use crate::error::{Result, VoteError};
use crate::rng::TaskRng;

/// Draws `k` distinct indices from `0..n`, each k-subset equally likely.
///
/// Implemented as a partial Fisher-Yates shuffle that consumes exactly `k`
/// RNG draws, so pre-split streams stay aligned no matter what the caller
/// does with the remainder.
pub fn subsample_indices(n: usize, k: usize, rng: &mut TaskRng) -> Result<Vec<usize>> {
    if k == 0 || k > n {
        return Err(VoteError::InvalidArgument(format!(
            "cannot draw {k} indices without replacement from {n}"
        )));
    }
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let remaining = (n - i) as u64;
        let j = i + (rng.next_u64() % remaining) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    Ok(pool)
}
