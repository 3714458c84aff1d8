#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rankpursuit::dataio::UserGroup;
use rankpursuit::{DataPoint, ScoredDataset, UnscoredDataset};
use rankpursuit_harness::config::{pow2_grid, Grids};
use rankpursuit_harness::synthetic::SyntheticSpec;
use rankpursuit_harness::{ExperimentConfig, Method};

/// A few users, one group, narrow grids: seconds rather than minutes.
pub fn small_config(methods: &[Method]) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        methods: methods.to_vec(),
        groups: vec![UserGroup::Low],
        n_holdout: 2,
        grids: Grids {
            widths: pow2_grid(-8, -2, 3),
            lambdas: pow2_grid(-2, 2, 2),
            nus: vec![0.1, 1.0],
        },
        p_max: Some(8),
        synthetic: SyntheticSpec {
            bands: vec![(20, 40, 40), (41, 60, 40), (61, 80, 20), (81, 100, 30)],
            ..SyntheticSpec::default()
        },
        ..ExperimentConfig::default()
    };
    cfg.task.n_reference = 12;
    cfg.task.n_test_users = 3;
    cfg.task.repeats = 1;
    cfg.task.seed = 17;
    cfg
}

/// Points in two groups whose scores follow a smooth function of the features.
pub fn toy_points(seed: u64, n: usize, dim: usize) -> Vec<DataPoint> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..dim).map(|_| r.gen_range(-1.0..1.0)).collect();
            let s = x.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum::<f64>().sin() * 4.0 + r.gen_range(-0.5..0.5);
            DataPoint::scored((i % 2) as u64, i as u64, x, (s * 100.0).round() / 100.0)
        })
        .collect()
}

pub fn toy_dataset(seed: u64, n: usize, dim: usize) -> ScoredDataset {
    ScoredDataset::new(toy_points(seed, n, dim)).unwrap()
}

pub fn toy_unscored(seed: u64, l: usize, dim: usize) -> UnscoredDataset {
    let points = toy_points(seed, l, dim)
        .into_iter()
        .map(|p| DataPoint::unscored(p.group_id, 1000 + p.item_id, p.features))
        .collect();
    UnscoredDataset::new(points).unwrap()
}
