//! Semi-supervised ranking pursuit over several views.
//!
//! Every view `v` has its own feature slice and kernel and grows its own
//! sparse expansion `f^(v)`. A greedy step picks one basis function per view
//! and the coefficient vector `a = (a^(1), …, a^(M))` minimizing
//!
//! ```text
//! J(a) = Σ_v (r^(v) - a^(v) k^(v))' L (r^(v) - a^(v) k^(v))
//!      + ν Σ_{v,u} (a^(v) k̄^(v) - a^(u) k̄^(u))' L̄ (a^(v) k̄^(v) - a^(u) k̄^(u))
//! ```
//!
//! where `k` is a basis column on the scored points, `k̄` the same basis
//! function on the unscored points and `L̄` the Laplacian of the unscored
//! preference graph. Setting the gradient to zero gives an `M × M` system with
//! diagonal `k'Lk + 2ν(M-1) k̄'L̄k̄` and off-diagonal `-2ν k̄^(v)'L̄k̄^(u)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{dot, DataPoint, PreferenceGraph, ScoredDataset, UnscoredDataset};
use crate::kernels::{Dictionary, KernelSpec};
use crate::linalg::{solve_small_spd, solve_spd};
use crate::metrics::ValidationMetric;
use crate::pursuit::{improves, SparseExpansion, DEFAULT_MIN_DENOMINATOR, DEFAULT_RIDGE_JITTER, VALIDATION_PATIENCE};

/// Upper bound on `n · N^M` for the exhaustive per-view index search.
pub const MAX_TUPLE_EVALUATIONS: u128 = 10_000_000;
const MONOTONE_SLACK: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSlice {
    All,
    Indices(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewSpec {
    pub features: FeatureSlice,
    pub kernel: KernelSpec,
}

impl ViewSpec {
    pub fn new(features: FeatureSlice, kernel: KernelSpec) -> Result<Self> {
        if let FeatureSlice::Indices(idx) = &features {
            if idx.is_empty() {
                return Err(Error::InvalidParameter("view feature slice is empty".into()));
            }
        }
        kernel.validate()?;
        Ok(Self { features, kernel })
    }

    pub fn full(kernel: KernelSpec) -> Self {
        Self {
            features: FeatureSlice::All,
            kernel,
        }
    }

    /// `count` views over disjoint contiguous blocks of `0..dim`, sizes
    /// differing by at most one.
    pub fn partition(dim: usize, count: usize, kernel: KernelSpec) -> Result<Vec<Self>> {
        if count == 0 || count > dim {
            return Err(Error::InvalidParameter(format!("cannot split {dim} features into {count} views")));
        }
        let mut start = 0;
        (0..count)
            .map(|v| {
                let len = dim / count + usize::from(v < dim % count);
                let slice = (start..start + len).collect();
                start += len;
                Self::new(FeatureSlice::Indices(slice), kernel)
            })
            .collect()
    }

    pub fn project(&self, features: &[f64]) -> Result<Vec<f64>> {
        match &self.features {
            FeatureSlice::All => Ok(features.to_vec()),
            FeatureSlice::Indices(idx) => idx
                .iter()
                .map(|&i| {
                    features.get(i).copied().ok_or(Error::DimensionMismatch {
                        expected: i + 1,
                        found: features.len(),
                    })
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiViewFitOptions {
    /// Co-regularization weight `ν`.
    pub nu: f64,
    pub max_basis: usize,
    /// Use the same dictionary index in every view at each step.
    pub shared_index: bool,
    /// Jointly re-solve all `M·p` coefficients against the full objective
    /// after every step.
    pub backfit_every_step: bool,
    pub validation: Option<ScoredDataset>,
    pub validation_metric: ValidationMetric,
    /// Steps without validation improvement before stopping.
    pub patience: usize,
    pub min_denominator: f64,
    /// Initial diagonal jitter of the joint back-fit solve.
    pub ridge_jitter: f64,
}

impl MultiViewFitOptions {
    pub fn new(nu: f64, max_basis: usize) -> Self {
        Self {
            nu,
            max_basis,
            shared_index: true,
            backfit_every_step: false,
            validation: None,
            validation_metric: ValidationMetric::Disagreement,
            patience: VALIDATION_PATIENCE,
            min_denominator: DEFAULT_MIN_DENOMINATOR,
            ridge_jitter: DEFAULT_RIDGE_JITTER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewModel {
    pub spec: ViewSpec,
    pub expansion: SparseExpansion,
}

/// One expansion per view; predictions are the average over views.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiViewModel {
    pub views: Vec<ViewModel>,
    pub nu: f64,
    pub shared_index: bool,
}

impl MultiViewModel {
    pub fn predict_average(&self, points: &[DataPoint]) -> Result<Vec<f64>> {
        let mut total = vec![0.0; points.len()];
        for view in &self.views {
            for (t, p) in total.iter_mut().zip(points) {
                *t += view.expansion.predict_one(&view.spec.project(&p.features)?)?;
            }
        }
        let m = self.views.len().max(1) as f64;
        Ok(total.into_iter().map(|t| t / m).collect())
    }

    /// Basis functions per view.
    pub fn basis_count(&self) -> usize {
        self.views.iter().map(|v| v.expansion.len()).max().unwrap_or(0)
    }

    /// Distinct training points referenced by any view's basis.
    pub fn nonzero_count(&self) -> usize {
        let mut idx: Vec<usize> = self
            .views
            .iter()
            .flat_map(|v| {
                v.expansion
                    .indices
                    .iter()
                    .zip(&v.expansion.coefficients)
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(g, _)| *g)
            })
            .collect();
        idx.sort_unstable();
        idx.dedup();
        idx.len()
    }
}

pub fn predict_average(model: &MultiViewModel, points: &[DataPoint]) -> Result<Vec<f64>> {
    model.predict_average(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSolution {
    pub coefficients: Vec<f64>,
    pub objective: f64,
}

/// Solves the per-step `M × M` co-regularized system for fixed columns and
/// evaluates `J` at the solution from the explicit vectors.
pub fn coefficient_system(
    kcols: &[&[f64]],
    kbars: &[&[f64]],
    residuals: &[&[f64]],
    graph: &PreferenceGraph,
    graph_bar: &PreferenceGraph,
    nu: f64,
    jitter: f64,
) -> Result<CoefficientSolution> {
    let m = kcols.len();
    if m == 0 {
        return Err(Error::InvalidParameter("at least one view is required".into()));
    }
    check_len(m, kbars.len())?;
    check_len(m, residuals.len())?;
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter(format!("nu must be nonnegative, got {nu}")));
    }
    let lk = kcols.iter().map(|k| graph.laplacian_apply(k)).collect::<Result<Vec<_>>>()?;
    let lkbar = kbars.iter().map(|k| graph_bar.laplacian_apply(k)).collect::<Result<Vec<_>>>()?;
    for r in residuals {
        check_len(graph.len(), r.len())?;
    }
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for v in 0..m {
        b[v] = dot(&lk[v], residuals[v]);
        a[v * m + v] = dot(kcols[v], &lk[v]) + 2.0 * nu * (m - 1) as f64 * dot(kbars[v], &lkbar[v]);
        for u in 0..m {
            if u != v {
                a[v * m + u] = -2.0 * nu * dot(kbars[v], &lkbar[u]);
            }
        }
    }
    let coefficients = solve_small_spd(&a, m, &b, jitter).ok_or(Error::SingularSystem)?;

    let mut objective = 0.0;
    for v in 0..m {
        let e: Vec<f64> = residuals[v].iter().zip(kcols[v]).map(|(r, k)| r - coefficients[v] * k).collect();
        objective += graph.quadratic_form(&e, &e)?;
    }
    for v in 0..m {
        for u in 0..m {
            if u != v {
                let d: Vec<f64> = kbars[v]
                    .iter()
                    .zip(kbars[u])
                    .map(|(x, y)| coefficients[v] * x - coefficients[u] * y)
                    .collect();
                objective += nu * graph_bar.quadratic_form(&d, &d)?;
            }
        }
    }
    Ok(CoefficientSolution { coefficients, objective })
}

#[derive(Debug, Clone)]
pub struct MultiViewFit {
    pub model: MultiViewModel,
    /// `Σ_v s'Ls` followed by the minimized `J` of every step.
    pub objective_history: Vec<f64>,
    /// `Σ_{v<u} (a^(v)k̄^(v) - a^(u)k̄^(u))' L̄ (·)` of each step's increments.
    pub increment_disagreement: Vec<f64>,
    pub validation_history: Vec<f64>,
    pub exhausted: bool,
}

/// Cached per-view columns on scored and unscored points.
struct ViewColumns {
    cols: Vec<Vec<f64>>,
    lcols: Vec<Vec<f64>>,
    curvature: Vec<f64>,
    bars: Vec<Vec<f64>>,
    lbars: Vec<Vec<f64>>,
}

/// `k̄^(v)_γv' L̄ k̄^(u)_γu`, precomputed either for equal indices only or for
/// every index pair.
enum CrossTable {
    Shared(Vec<Vec<f64>>),
    Full(Vec<Vec<f64>>),
}

struct Scan<'a> {
    views: &'a [ViewColumns],
    cross: CrossTable,
    n_candidates: usize,
    nu: f64,
    min_denominator: f64,
}

#[derive(Debug, Clone)]
struct TupleFit {
    gammas: Vec<usize>,
    coefficients: Vec<f64>,
    objective: f64,
    disagreement: f64,
}

impl Scan<'_> {
    fn m(&self) -> usize {
        self.views.len()
    }

    fn cross(&self, v: usize, gv: usize, u: usize, gu: usize) -> f64 {
        let m = self.m();
        match &self.cross {
            CrossTable::Shared(t) => {
                debug_assert_eq!(gv, gu);
                t[v * m + u][gv]
            }
            CrossTable::Full(t) => t[v * m + u][gv * self.n_candidates + gu],
        }
    }

    fn evaluate(&self, gammas: &[usize], residuals: &[Vec<f64>], energies: &[f64]) -> Option<TupleFit> {
        let m = self.m();
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for v in 0..m {
            let view = &self.views[v];
            b[v] = dot(&view.lcols[gammas[v]], &residuals[v]);
            a[v * m + v] =
                view.curvature[gammas[v]] + 2.0 * self.nu * (m - 1) as f64 * self.cross(v, gammas[v], v, gammas[v]);
            if !(a[v * m + v] >= self.min_denominator) {
                return None;
            }
            for u in 0..m {
                if u != v {
                    a[v * m + u] = -2.0 * self.nu * self.cross(v, gammas[v], u, gammas[u]);
                }
            }
        }
        // jitter is only added if the factorization fails
        let x = solve_small_spd(&a, m, &b, 0.0)?;
        let mut objective: f64 = energies.iter().sum();
        for v in 0..m {
            let ax: f64 = (0..m).map(|u| a[v * m + u] * x[u]).sum();
            objective += x[v] * ax - 2.0 * b[v] * x[v];
        }
        let mut disagreement = 0.0;
        for v in 0..m {
            for u in v + 1..m {
                disagreement += x[v] * x[v] * self.cross(v, gammas[v], v, gammas[v])
                    - 2.0 * x[v] * x[u] * self.cross(v, gammas[v], u, gammas[u])
                    + x[u] * x[u] * self.cross(u, gammas[u], u, gammas[u]);
            }
        }
        Some(TupleFit {
            gammas: gammas.to_vec(),
            coefficients: x,
            objective,
            disagreement,
        })
    }

    fn select(&self, residuals: &[Vec<f64>], energies: &[f64], excluded: &[Vec<bool>], shared: bool) -> Option<TupleFit> {
        let scale: f64 = energies.iter().sum();
        let mut best: Option<TupleFit> = None;
        let mut consider = |fit: Option<TupleFit>| {
            if let Some(fit) = fit {
                if best.as_ref().map_or(true, |b| improves(fit.objective, b.objective, scale)) {
                    best = Some(fit);
                }
            }
        };
        let m = self.m();
        if shared {
            for g in (0..self.n_candidates).filter(|&g| !excluded[0][g]) {
                consider(self.evaluate(&vec![g; m], residuals, energies));
            }
        } else {
            let allowed: Vec<Vec<usize>> = excluded
                .iter()
                .map(|ex| (0..self.n_candidates).filter(|&g| !ex[g]).collect())
                .collect();
            if allowed.iter().any(Vec::is_empty) {
                return None;
            }
            // Lexicographic odometer over per-view allowed indices.
            let mut pos = vec![0usize; m];
            loop {
                let gammas: Vec<usize> = pos.iter().zip(&allowed).map(|(&p, a)| a[p]).collect();
                consider(self.evaluate(&gammas, residuals, energies));
                let mut v = m;
                loop {
                    if v == 0 {
                        return best;
                    }
                    v -= 1;
                    pos[v] += 1;
                    if pos[v] < allowed[v].len() {
                        break;
                    }
                    pos[v] = 0;
                }
            }
        }
        best
    }
}

/// Semi-supervised ranking pursuit with co-regularization across `views`.
///
/// Dictionaries are the scored points restricted to each view's slice; the
/// same basis functions are evaluated on the unscored points.
pub fn fit_semisupervised(
    train: &ScoredDataset,
    unscored: &UnscoredDataset,
    views: &[ViewSpec],
    opts: &MultiViewFitOptions,
) -> Result<MultiViewFit> {
    let m = views.len();
    if m == 0 {
        return Err(Error::InvalidParameter("at least one view is required".into()));
    }
    if !(opts.nu >= 0.0) || !opts.nu.is_finite() {
        return Err(Error::InvalidParameter(format!("nu must be nonnegative, got {}", opts.nu)));
    }
    let n = train.len();
    if opts.max_basis > n {
        return Err(Error::InvalidParameter(format!("max_basis {} exceeds dictionary size {n}", opts.max_basis)));
    }
    if let Some(d) = unscored.dim() {
        if d != train.dim() {
            return Err(Error::DimensionMismatch {
                expected: train.dim(),
                found: d,
            });
        }
    }
    if !train.has_relevant_pair() {
        return Err(Error::NoRelevantPairs);
    }
    if !opts.shared_index {
        let evaluations = (n as u128).saturating_mul((n as u128).saturating_pow(m as u32));
        if evaluations > MAX_TUPLE_EVALUATIONS {
            return Err(Error::InvalidParameter(format!(
                "per-view index search needs {evaluations} evaluations, limit is {MAX_TUPLE_EVALUATIONS}"
            )));
        }
    }

    let graph = PreferenceGraph::from_points(train.points());
    let graph_bar = PreferenceGraph::from_points(unscored.points());
    let mut dicts = Vec::with_capacity(m);
    let mut columns = Vec::with_capacity(m);
    for view in views {
        let train_v = train.map_features(|x| view.project(x))?;
        let unscored_v = unscored.map_features(|x| view.project(x))?;
        let dict = Dictionary::from_dataset(&train_v, view.kernel, None)?;
        let cols = dict.columns(train_v.points())?;
        let lcols = cols.iter().map(|k| graph.laplacian_apply(k)).collect::<Result<Vec<_>>>()?;
        let curvature = cols.iter().zip(&lcols).map(|(k, lk)| dot(k, lk)).collect();
        let bars = dict.columns(unscored_v.points())?;
        let lbars = bars.iter().map(|k| graph_bar.laplacian_apply(k)).collect::<Result<Vec<_>>>()?;
        columns.push(ViewColumns {
            cols,
            lcols,
            curvature,
            bars,
            lbars,
        });
        dicts.push(dict);
    }

    let mut table = vec![Vec::new(); m * m];
    for v in 0..m {
        for u in 0..m {
            let (bv, lu) = (&columns[v].bars, &columns[u].lbars);
            table[v * m + u] = if opts.shared_index {
                (0..n).map(|g| dot(&bv[g], &lu[g])).collect()
            } else {
                (0..n * n).map(|i| dot(&bv[i / n], &lu[i % n])).collect()
            };
        }
    }
    let scan = Scan {
        views: &columns,
        cross: if opts.shared_index {
            CrossTable::Shared(table)
        } else {
            CrossTable::Full(table)
        },
        n_candidates: n,
        nu: opts.nu,
        min_denominator: opts.min_denominator,
    };

    let validation = match &opts.validation {
        Some(val) => {
            let g = PreferenceGraph::from_points(val.points());
            if opts.validation_metric == ValidationMetric::Disagreement && g.relevant_pair_count() == 0 {
                return Err(Error::InvalidParameter("validation set has no relevant pairs".into()));
            }
            Some((val, g, val.scores()))
        }
        None => None,
    };

    let target = train.scores();
    let mut residuals = vec![target.clone(); m];
    let mut energies = residuals
        .iter()
        .map(|r| graph.quadratic_form(r, r))
        .collect::<Result<Vec<_>>>()?;
    let mut excluded = vec![vec![false; n]; m];
    let mut selected: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut coefs: Vec<Vec<f64>> = vec![Vec::new(); m];
    let mut objective_history = vec![energies.iter().sum()];
    let mut increment_disagreement = Vec::new();
    let mut validation_history = Vec::new();
    let mut best: Option<(f64, Vec<Vec<usize>>, Vec<Vec<f64>>)> = None;
    let mut stale = 0;
    let mut exhausted = false;

    for _ in 0..opts.max_basis {
        let Some(step) = scan.select(&residuals, &energies, &excluded, opts.shared_index) else {
            exhausted = true;
            break;
        };
        for v in 0..m {
            let g = step.gammas[v];
            let a = step.coefficients[v];
            if opts.shared_index {
                excluded.iter_mut().for_each(|ex| ex[g] = true);
            } else {
                excluded[v][g] = true;
            }
            selected[v].push(g);
            coefs[v].push(a);
            for (r, k) in residuals[v].iter_mut().zip(&columns[v].cols[g]) {
                *r -= a * k;
            }
        }
        objective_history.push(step.objective);
        increment_disagreement.push(step.disagreement);

        if opts.backfit_every_step && selected[0].len() > 1 {
            let current = full_objective(&columns, &selected, &coefs, &target, &graph, &graph_bar, opts.nu)?;
            if let Some(a) = joint_backfit(&columns, &selected, &target, &graph, opts.nu, opts.ridge_jitter)? {
                let proposed = full_objective(&columns, &selected, &a, &target, &graph, &graph_bar, opts.nu)?;
                if proposed <= current + MONOTONE_SLACK * current.abs().max(1.0) {
                    coefs = a;
                    for v in 0..m {
                        residuals[v] = residual(&target, &columns[v], &selected[v], &coefs[v]);
                    }
                }
            }
        }
        for v in 0..m {
            energies[v] = graph.quadratic_form(&residuals[v], &residuals[v])?;
        }

        if let Some((val, vgraph, scores)) = &validation {
            let model = build_model(views, &dicts, &selected, &coefs, opts);
            let err = opts.validation_metric.evaluate(scores, &model.predict_average(val.points())?, vgraph)?;
            validation_history.push(err);
            if best.as_ref().map_or(true, |b| err < b.0) {
                best = Some((err, selected.clone(), coefs.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= opts.patience {
                    break;
                }
            }
        }
    }
    if let Some((_, s, c)) = best {
        selected = s;
        coefs = c;
    }

    Ok(MultiViewFit {
        model: build_model(views, &dicts, &selected, &coefs, opts),
        objective_history,
        increment_disagreement,
        validation_history,
        exhausted,
    })
}

fn build_model(
    views: &[ViewSpec],
    dicts: &[Dictionary],
    selected: &[Vec<usize>],
    coefs: &[Vec<f64>],
    opts: &MultiViewFitOptions,
) -> MultiViewModel {
    MultiViewModel {
        views: views
            .iter()
            .zip(dicts)
            .zip(selected.iter().zip(coefs))
            .map(|((spec, dict), (idx, a))| ViewModel {
                spec: spec.clone(),
                expansion: SparseExpansion {
                    kernel: spec.kernel,
                    centers: idx.iter().map(|&g| dict.centers()[g].clone()).collect(),
                    indices: idx.clone(),
                    coefficients: a.clone(),
                    beta: 0.0,
                },
            })
            .collect(),
        nu: opts.nu,
        shared_index: opts.shared_index,
    }
}

fn combine(cols: &[Vec<f64>], idx: &[usize], a: &[f64], len: usize) -> Vec<f64> {
    let mut f = vec![0.0; len];
    for (&g, &c) in idx.iter().zip(a) {
        for (fi, k) in f.iter_mut().zip(&cols[g]) {
            *fi += c * k;
        }
    }
    f
}

fn residual(target: &[f64], view: &ViewColumns, idx: &[usize], a: &[f64]) -> Vec<f64> {
    let f = combine(&view.cols, idx, a, target.len());
    target.iter().zip(f).map(|(s, f)| s - f).collect()
}

/// Supervised loss of every view plus `ν` times the disagreement of the
/// accumulated functions on the unscored points.
fn full_objective(
    views: &[ViewColumns],
    selected: &[Vec<usize>],
    coefs: &[Vec<f64>],
    target: &[f64],
    graph: &PreferenceGraph,
    graph_bar: &PreferenceGraph,
    nu: f64,
) -> Result<f64> {
    let mut total = 0.0;
    let mut fbar = Vec::with_capacity(views.len());
    for v in 0..views.len() {
        let r = residual(target, &views[v], &selected[v], &coefs[v]);
        total += graph.quadratic_form(&r, &r)?;
        fbar.push(combine(&views[v].bars, &selected[v], &coefs[v], graph_bar.len()));
    }
    for v in 0..views.len() {
        for u in 0..views.len() {
            if u != v {
                let d: Vec<f64> = fbar[v].iter().zip(&fbar[u]).map(|(x, y)| x - y).collect();
                total += nu * graph_bar.quadratic_form(&d, &d)?;
            }
        }
    }
    Ok(total)
}

/// Minimizes [`full_objective`] over all `M·p` coefficients for fixed bases.
fn joint_backfit(
    views: &[ViewColumns],
    selected: &[Vec<usize>],
    target: &[f64],
    graph: &PreferenceGraph,
    nu: f64,
    jitter: f64,
) -> Result<Option<Vec<Vec<f64>>>> {
    let m = views.len();
    let p = selected[0].len();
    let dim = m * p;
    let mut sys = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    let ls = graph.laplacian_apply(target)?;
    for v in 0..m {
        for i in 0..p {
            let gi = selected[v][i];
            rhs[v * p + i] = dot(&views[v].cols[gi], &ls);
            for u in 0..m {
                for j in 0..p {
                    let gj = selected[u][j];
                    let bar = dot(&views[v].bars[gi], &views[u].lbars[gj]);
                    sys[(v * p + i, u * p + j)] = if u == v {
                        dot(&views[v].cols[gi], &views[v].lcols[gj]) + 2.0 * nu * (m - 1) as f64 * bar
                    } else {
                        -2.0 * nu * bar
                    };
                }
            }
        }
    }
    match solve_spd(&sys, &rhs, jitter) {
        Ok(x) => Ok(Some((0..m).map(|v| x.as_slice()[v * p..(v + 1) * p].to_vec()).collect())),
        Err(Error::SingularSystem) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_example() {
        let g = PreferenceGraph::from_group_ids([0, 0]);
        let gbar = PreferenceGraph::from_group_ids([5, 5]);
        let k = [1.0, 0.0];
        let sol = coefficient_system(&[&k, &k], &[&[1.0, 0.0], &[0.0, 1.0]], &[&[1.0, 0.0], &[1.0, 0.0]], &g, &gbar, 1.0, 0.0)
            .unwrap();
        assert!((sol.coefficients[0] - 0.2).abs() < 1e-12);
        assert!((sol.coefficients[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_nu_is_diagonal() {
        let g = PreferenceGraph::from_group_ids([0, 0, 0]);
        let gbar = PreferenceGraph::from_group_ids([0, 0]);
        let k1 = [1.0, 0.5, -0.3];
        let k2 = [0.2, 0.9, 0.4];
        let r1 = [1.0, 2.0, 3.0];
        let r2 = [0.0, -1.0, 2.0];
        let sol = coefficient_system(&[&k1, &k2], &[&[1.0, 2.0], &[3.0, 1.0]], &[&r1, &r2], &g, &gbar, 0.0, 0.0).unwrap();
        for (a, (k, r)) in sol.coefficients.iter().zip([(&k1, &r1), (&k2, &r2)]) {
            let lk = g.laplacian_apply(k).unwrap();
            assert!((a - dot(&lk, r) / dot(&lk, k)).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_views() {
        let v = ViewSpec::partition(5, 2, KernelSpec::Linear).unwrap();
        assert_eq!(v[0].features, FeatureSlice::Indices(vec![0, 1, 2]));
        assert_eq!(v[1].features, FeatureSlice::Indices(vec![3, 4]));
        assert_eq!(v[1].project(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert!(v[1].project(&[0.0, 1.0]).is_err());
        assert!(ViewSpec::partition(1, 2, KernelSpec::Linear).is_err());
    }

    #[test]
    fn averaging() {
        let view = |a: f64| ViewModel {
            spec: ViewSpec::full(KernelSpec::Linear),
            expansion: SparseExpansion {
                kernel: KernelSpec::Linear,
                centers: vec![vec![1.0]],
                indices: vec![0],
                coefficients: vec![a],
                beta: 0.0,
            },
        };
        let model = MultiViewModel {
            views: vec![view(1.0), view(3.0)],
            nu: 1.0,
            shared_index: true,
        };
        let pts = [DataPoint::unscored(0, 0, vec![1.0]), DataPoint::unscored(0, 1, vec![2.0])];
        assert_eq!(model.predict_average(&pts).unwrap(), vec![2.0, 4.0]);
        let empty = MultiViewModel {
            views: vec![],
            nu: 0.0,
            shared_index: true,
        };
        assert_eq!(empty.predict_average(&pts).unwrap(), vec![0.0, 0.0]);
    }
}
