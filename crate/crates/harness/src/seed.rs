//! Deterministic seed splitting.
//!
//! Every random draw in an experiment is keyed by a path of integers
//! (purpose, repeat, group, user, ...) below the master seed, so any cell can
//! be recomputed on its own and worker scheduling never changes a result.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TEST_USERS: u64 = 1;
pub const HOLDOUT_USERS: u64 = 2;
pub const HOLDOUT_TASK: u64 = 3;
pub const USER_TASK: u64 = 4;
pub const SS_SPLIT: u64 = 5;
pub const SUBSET: u64 = 6;

/// Child seed of `seed` along `path`.
pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &part| {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        rng.set_stream(part);
        rng.next_u64()
    })
}

pub fn rng(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_independent_and_stable() {
        assert_eq!(derive(7, &[1, 2]), derive(7, &[1, 2]));
        assert_ne!(derive(7, &[1, 2]), derive(7, &[2, 1]));
        assert_ne!(derive(7, &[1]), derive(8, &[1]));
        assert_eq!(derive(7, &[]), 7);
    }
}
