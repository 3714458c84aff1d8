#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rankpursuit::{DataPoint, ScoredDataset};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Dense `L = D - W` from per-point group labels.
pub fn dense_laplacian(groups: &[u64]) -> DMatrix<f64> {
    let n = groups.len();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j && groups[i] == groups[j] {
                l[(i, j)] = -1.0;
                l[(i, i)] += 1.0;
            }
        }
    }
    l
}

pub fn dense_weighted(groups: &[u64], beta: f64) -> DMatrix<f64> {
    let n = groups.len();
    DMatrix::identity(n, n) * beta + dense_laplacian(groups) * (1.0 - beta)
}

pub fn quad(m: &DMatrix<f64>, u: &[f64], v: &[f64]) -> f64 {
    DVector::from_row_slice(u).dot(&(m * DVector::from_row_slice(v)))
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

/// Group labels with a random mix of group sizes, including singletons.
pub fn random_groups<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    let k = rng.gen_range(1..=n.div_ceil(2).max(1));
    (0..n).map(|_| rng.gen_range(0..k as u64)).collect()
}

/// Groups guaranteed to contain at least one relevant pair.
pub fn groups_with_pair<R: Rng>(rng: &mut R, n: usize) -> Vec<u64> {
    assert!(n >= 2);
    let mut g = random_groups(rng, n);
    g[1] = g[0];
    g
}

pub fn random_dataset<R: Rng>(rng: &mut R, n: usize, dim: usize) -> ScoredDataset {
    let groups = groups_with_pair(rng, n);
    let points = groups
        .iter()
        .enumerate()
        .map(|(i, &g)| DataPoint::scored(g, i as u64, random_vec(rng, dim), rng.gen_range(-5.0..5.0)))
        .collect();
    ScoredDataset::new(points).unwrap()
}

pub fn groups_of(ds: &ScoredDataset) -> Vec<u64> {
    ds.points().iter().map(|p| p.group_id).collect()
}

/// Golden-section search on `[lo, hi]` driven by a comparison `less(x, y)`
/// meaning `f(x) < f(y)`, for a unimodal `f`.
pub fn golden_section<F: Fn(f64, f64) -> bool>(less: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    for _ in 0..400 {
        if hi - lo <= tol * lo.abs().max(hi.abs()).max(1.0) {
            break;
        }
        if less(c, d) {
            hi = d;
            d = c;
            c = hi - phi * (hi - lo);
        } else {
            lo = c;
            c = d;
            d = lo + phi * (hi - lo);
        }
    }
    (lo + hi) / 2.0
}
