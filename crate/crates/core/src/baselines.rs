//! Dense kernel baselines: RLS (kernel ridge regression), RankRLS and
//! subset-of-regressors sparse RankRLS.
//!
//! RLS and RankRLS share one solver: the stationarity condition of
//! `(s - Ka)' M (s - Ka) + λ a'Ka` is `(MK + λI) a = Ms`, with `M = I` for
//! RLS and `M = L` for RankRLS.

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{dot, DataPoint, PreferenceGraph, ScoredDataset, WeightedLaplacian};
use crate::kernels::KernelSpec;
use crate::linalg::{solve_general, solve_spd};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    /// Regularization weight `λ`.
    pub lambda: f64,
    /// Size `r` of the random regressor subset (sparse RankRLS only).
    pub subset_size: usize,
    pub rng_seed: u64,
    /// Initial diagonal jitter for the sparse system.
    pub jitter: f64,
}

impl BaselineConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            subset_size: 0,
            rng_seed: 0,
            jitter: 0.0,
        }
    }

    pub fn subset(mut self, size: usize, seed: u64) -> Self {
        self.subset_size = size;
        self.rng_seed = seed;
        self
    }

    fn check_lambda(&self) -> Result<()> {
        if self.lambda > 0.0 && self.lambda.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("lambda must be positive, got {}", self.lambda)))
        }
    }
}

/// `f(q) = Σ_p a_p k(c_p, q)` over every center it was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseExpansion {
    pub kernel: KernelSpec,
    pub centers: Vec<Vec<f64>>,
    pub coefficients: Vec<f64>,
    /// Training positions of the centers.
    pub indices: Vec<usize>,
}

impl DenseExpansion {
    pub fn predict(&self, points: &[DataPoint]) -> Result<Vec<f64>> {
        points
            .iter()
            .map(|p| {
                let mut f = 0.0;
                for (c, a) in self.centers.iter().zip(&self.coefficients) {
                    f += a * self.kernel.eval(c, &p.features)?;
                }
                Ok(f)
            })
            .collect()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().filter(|a| **a != 0.0).count()
    }
}

/// Kernel matrix between `rows` and `cols`.
pub fn kernel_matrix(spec: &KernelSpec, rows: &[DataPoint], cols: &[DataPoint]) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let mut k = DMatrix::zeros(rows.len(), cols.len());
    for (i, p) in rows.iter().enumerate() {
        for (j, q) in cols.iter().enumerate() {
            k[(i, j)] = spec.eval(&p.features, &q.features)?;
        }
    }
    Ok(k)
}

fn fit_weighted(train: &ScoredDataset, spec: KernelSpec, cfg: &BaselineConfig, lap: &WeightedLaplacian<'_>) -> Result<DenseExpansion> {
    cfg.check_lambda()?;
    let n = train.len();
    let k = kernel_matrix(&spec, train.points(), train.points())?;
    let mut system = DMatrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<f64> = k.column(j).iter().copied().collect();
        system.set_column(j, &DVector::from_vec(lap.apply(&col)?));
        system[(j, j)] += cfg.lambda;
    }
    let rhs = DVector::from_vec(lap.apply(&train.scores())?);
    let a = solve_general(system, &rhs)?;
    Ok(DenseExpansion {
        kernel: spec,
        centers: train.points().iter().map(|p| p.features.clone()).collect(),
        coefficients: a.iter().copied().collect(),
        indices: (0..n).collect(),
    })
}

/// Kernel ridge regression: `(K + λI) a = s`.
pub fn fit_rls(train: &ScoredDataset, spec: KernelSpec, cfg: &BaselineConfig) -> Result<DenseExpansion> {
    let graph = PreferenceGraph::from_points(train.points());
    fit_weighted(train, spec, cfg, &WeightedLaplacian::new(&graph, 1.0)?)
}

/// RankRLS: `(LK + λI) a = Ls`.
pub fn fit_rankrls(train: &ScoredDataset, spec: KernelSpec, cfg: &BaselineConfig) -> Result<DenseExpansion> {
    if !train.has_relevant_pair() {
        return Err(Error::NoRelevantPairs);
    }
    let graph = PreferenceGraph::from_points(train.points());
    fit_weighted(train, spec, cfg, &WeightedLaplacian::ranking(&graph))
}

/// Uniform random subset of `r` distinct training indices, sorted.
pub fn draw_subset(n: usize, r: usize, seed: u64) -> Result<Vec<usize>> {
    if r == 0 || r > n {
        return Err(Error::InvalidParameter(format!("subset size {r} must lie in 1..={n}")));
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut idx = sample(&mut rng, n, r).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Sparse RankRLS on a random regressor subset `R`:
/// `(K_nR' L K_nR + λ K_RR + εI) a_R = K_nR' L s`.
pub fn fit_sparse_rankrls(train: &ScoredDataset, spec: KernelSpec, cfg: &BaselineConfig) -> Result<DenseExpansion> {
    let subset = draw_subset(train.len(), cfg.subset_size, cfg.rng_seed)?;
    fit_sparse_rankrls_on(train, spec, cfg, &subset)
}

/// Sparse RankRLS with an explicit regressor subset.
pub fn fit_sparse_rankrls_on(
    train: &ScoredDataset,
    spec: KernelSpec,
    cfg: &BaselineConfig,
    subset: &[usize],
) -> Result<DenseExpansion> {
    cfg.check_lambda()?;
    if !train.has_relevant_pair() {
        return Err(Error::NoRelevantPairs);
    }
    if subset.is_empty() {
        return Err(Error::InvalidParameter("empty regressor subset".into()));
    }
    let centers = train.subset(subset)?;
    let graph = PreferenceGraph::from_points(train.points());
    let k_nr = kernel_matrix(&spec, train.points(), centers.points())?;
    let k_rr = kernel_matrix(&spec, centers.points(), centers.points())?;
    let r = subset.len();
    let lk: Vec<Vec<f64>> = (0..r)
        .map(|j| graph.laplacian_apply(&k_nr.column(j).iter().copied().collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mut system = DMatrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            let ki: Vec<f64> = k_nr.column(i).iter().copied().collect();
            system[(i, j)] = dot(&ki, &lk[j]) + cfg.lambda * k_rr[(i, j)];
        }
    }
    let s = train.scores();
    let rhs = DVector::from_iterator(r, lk.iter().map(|l| dot(l, &s)));
    let a = solve_spd(&system, &rhs, cfg.jitter)?;
    Ok(DenseExpansion {
        kernel: spec,
        centers: centers.points().iter().map(|p| p.features.clone()).collect(),
        coefficients: a.iter().copied().collect(),
        indices: subset.to_vec(),
    })
}
