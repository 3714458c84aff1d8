//! Sparse preference learning with kernel ranking pursuit.
//!
//! The crate fits ranking functions of the form `f(q) = Σ a_p k(c_p, q)` by
//! greedily selecting kernel basis functions that minimize a pairwise squared
//! loss weighted by the Laplacian of a preference graph. Data points that share
//! a group (a query, a test user) form relevant pairs; points in different
//! groups are never compared.
//!
//! Modules:
//!
//! - [`graph`]: datasets, the preference graph and its (weighted) Laplacian.
//! - [`kernels`]: kernel functions and dictionaries of basis functions.
//! - [`pursuit`]: supervised ranking pursuit, kernel matching pursuit and the
//!   combined ranking/regression variant, all driven by one weighted Laplacian.
//! - [`multiview`]: semi-supervised multi-view ranking pursuit with
//!   co-regularization on unscored points.
//! - [`baselines`]: RLS, RankRLS and subset-of-regressors sparse RankRLS.
//! - [`metrics`]: disagreement error, MSE and the Wilcoxon signed-rank test.
//! - [`dataio`]: Jester/MovieLens loaders and per-user task construction.

pub mod baselines;
pub mod dataio;
mod error;
pub mod graph;
pub mod kernels;
mod linalg;
pub mod metrics;
pub mod multiview;
pub mod pursuit;

pub use error::{Error, Result};
pub use graph::{
    build_preference_graph, DataPoint, PreferenceGraph, ScoredDataset, UnscoredDataset,
    WeightedLaplacian,
};
pub use kernels::{Dictionary, KernelSpec};
pub use multiview::{MultiViewFitOptions, MultiViewModel, ViewSpec};
pub use metrics::ValidationMetric;
pub use pursuit::{FitOptions, SparseExpansion};
