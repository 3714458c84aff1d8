//! Jester-like synthetic ratings, used when the real corpus is unavailable.
//!
//! Ratings follow a low-rank model with per-user offset and scale, a per-item
//! bias and Gaussian noise, clipped to [-10, 10] and rounded to two decimals.
//! Users are drawn in rating-count bands so that every reference group and
//! the test-user range are populated.

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rankpursuit::dataio::{RatingScale, RatingsMatrix};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_items: usize,
    pub n_factors: usize,
    /// `(min count, max count, users)` per band, counts inclusive.
    pub bands: Vec<(usize, usize, usize)>,
    pub noise: f64,
    /// Spread of the latent interaction term before per-user scaling.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_items: 100,
            n_factors: 4,
            bands: vec![(20, 40, 400), (41, 60, 400), (61, 80, 400), (81, 100, 300)],
            noise: 6.0,
            signal: 1.5,
            seed: 2010,
        }
    }
}

fn gaussian_vec<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn generate(spec: &SyntheticSpec) -> Result<RatingsMatrix> {
    let mut rng = seed::rng(spec.seed, &[]);
    let k = spec.n_factors.max(1);
    let items: Vec<Vec<f64>> = (0..spec.n_items).map(|_| gaussian_vec(&mut rng, k)).collect();
    let item_bias: Vec<f64> = (0..spec.n_items).map(|_| Normal::new(0.0, 1.0).unwrap().sample(&mut rng)).collect();
    let noise = Normal::new(0.0, spec.noise.max(0.0)).map_err(|e| crate::HarnessError::Config(e.to_string()))?;
    let offset = Normal::new(0.5, 2.0).unwrap();

    let mut triples = Vec::new();
    let mut user_id = 0u64;
    for &(lo, hi, count) in &spec.bands {
        let hi = hi.min(spec.n_items);
        for _ in 0..count {
            user_id += 1;
            let factors = gaussian_vec(&mut rng, k);
            let mu: f64 = offset.sample(&mut rng);
            let scale = rng.gen_range(0.8..2.0) * spec.signal;
            let n = rng.gen_range(lo.min(hi)..=hi);
            for item in sample(&mut rng, spec.n_items, n) {
                let affinity: f64 = factors.iter().zip(&items[item]).map(|(a, b)| a * b).sum();
                let raw = mu + item_bias[item] + scale * affinity + noise.sample(&mut rng);
                let rating = (raw.clamp(-10.0, 10.0) * 100.0).round() / 100.0;
                triples.push((user_id, item as u64 + 1, rating));
            }
        }
    }
    Ok(RatingsMatrix::from_triples(RatingScale::Jester, triples)?)
}
