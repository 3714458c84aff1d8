//! Greedy ranking pursuit over a kernel dictionary.
//!
//! Each step appends the basis function `k_γ` and coefficient `a` that
//! minimize `J(a, γ) = (r - a k_γ)' L̃ (r - a k_γ)`, where `r` is the current
//! residual and `L̃ = βI + (1-β)L`. For fixed `γ` the minimizer is
//! `a = k'L̃r / k'L̃k`, giving `J = r'L̃r - (k'L̃r)² / k'L̃k`.
//!
//! `β = 0` is ranking pursuit, `β = 1` kernel matching pursuit, and values in
//! between give the combined ranking and regression pursuit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::{dot, DataPoint, PreferenceGraph, ScoredDataset, WeightedLaplacian};
use crate::kernels::{Dictionary, KernelSpec};
use crate::linalg::solve_spd;
use crate::metrics::ValidationMetric;

pub const DEFAULT_MIN_DENOMINATOR: f64 = 1e-12;
pub const DEFAULT_RIDGE_JITTER: f64 = 1e-10;
/// Consecutive non-improving validation steps tolerated before stopping.
pub const VALIDATION_PATIENCE: usize = 3;
/// Relative tolerance under which two objective values count as tied.
pub const TIE_TOLERANCE: f64 = 1e-12;
/// Slack allowed when checking that an update does not increase the objective.
const MONOTONE_SLACK: f64 = 1e-10;

/// A sparse kernel expansion `f(q) = Σ_p a_p k(c_p, q)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseExpansion {
    pub kernel: KernelSpec,
    /// Selected centers, in selection order.
    pub centers: Vec<Vec<f64>>,
    /// Dictionary indices `γ_1..γ_P` of the selected centers.
    pub indices: Vec<usize>,
    pub coefficients: Vec<f64>,
    /// Mixing weight of `L̃` used at fit time.
    pub beta: f64,
}

impl SparseExpansion {
    pub fn empty(kernel: KernelSpec, beta: f64) -> Self {
        Self {
            kernel,
            centers: Vec::new(),
            indices: Vec::new(),
            coefficients: Vec::new(),
            beta,
        }
    }

    /// Number of basis functions `P`.
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn nonzero_count(&self) -> usize {
        self.coefficients.iter().filter(|a| **a != 0.0).count()
    }

    pub fn predict_one(&self, features: &[f64]) -> Result<f64> {
        let mut f = 0.0;
        for (c, a) in self.centers.iter().zip(&self.coefficients) {
            if c.len() != features.len() {
                return Err(Error::DimensionMismatch {
                    expected: c.len(),
                    found: features.len(),
                });
            }
            f += a * self.kernel.eval_unchecked(c, features);
        }
        Ok(f)
    }

    /// Scores of `points`; the empty expansion predicts zero everywhere.
    pub fn predict(&self, points: &[DataPoint]) -> Result<Vec<f64>> {
        points.iter().map(|p| self.predict_one(&p.features)).collect()
    }
}

pub fn predict(model: &SparseExpansion, points: &[DataPoint]) -> Result<Vec<f64>> {
    model.predict(points)
}

/// When selected coefficients are jointly re-solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Backfit {
    /// After every greedy selection.
    #[default]
    EveryStep,
    /// Once, after the last selection.
    FinalOnly,
    /// Never: plain greedy coefficients.
    Off,
}

#[derive(Debug, Clone)]
pub struct FitOptions {
    /// Upper bound `P_max` on the number of basis functions.
    pub max_basis: usize,
    pub beta: f64,
    pub backfit: Backfit,
    /// Enables early stopping on `validation_metric`; the best prefix is
    /// returned.
    pub validation: Option<ScoredDataset>,
    pub validation_metric: ValidationMetric,
    /// Steps without validation improvement before stopping.
    pub patience: usize,
    pub min_denominator: f64,
    pub ridge_jitter: f64,
}

impl FitOptions {
    pub fn new(max_basis: usize) -> Self {
        Self {
            max_basis,
            beta: 0.0,
            backfit: Backfit::EveryStep,
            validation: None,
            validation_metric: ValidationMetric::Disagreement,
            patience: VALIDATION_PATIENCE,
            min_denominator: DEFAULT_MIN_DENOMINATOR,
            ridge_jitter: DEFAULT_RIDGE_JITTER,
        }
    }

    pub fn beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn backfit(mut self, backfit: Backfit) -> Self {
        self.backfit = backfit;
        self
    }

    pub fn validation(mut self, validation: ScoredDataset) -> Self {
        self.validation = Some(validation);
        self
    }

    pub fn patience(mut self, patience: usize) -> Self {
        self.patience = patience;
        self
    }

    fn validate(&self, dict_len: usize) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if self.max_basis > dict_len {
            return Err(Error::InvalidParameter(format!(
                "max_basis {} exceeds dictionary size {dict_len}",
                self.max_basis
            )));
        }
        if !(self.min_denominator > 0.0) || !(self.ridge_jitter >= 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateFit {
    pub coefficient: f64,
    pub objective: f64,
}

/// Optimal coefficient and objective for a single column against a residual.
pub fn evaluate_candidate(
    residual: &[f64],
    column: &[f64],
    lap: &WeightedLaplacian<'_>,
    min_denominator: f64,
) -> Result<CandidateFit> {
    check_len(lap.len(), residual.len())?;
    let lk = lap.apply(column)?;
    let energy = lap.quadratic_form(residual, residual)?;
    closed_form(dot(column, &lk), dot(&lk, residual), energy, min_denominator)
}

#[inline]
fn closed_form(curvature: f64, correlation: f64, energy: f64, min_denominator: f64) -> Result<CandidateFit> {
    if !(curvature >= min_denominator) {
        return Err(Error::DegenerateCandidate {
            curvature,
            threshold: min_denominator,
        });
    }
    Ok(CandidateFit {
        coefficient: correlation / curvature,
        objective: (energy - correlation * correlation / curvature).max(0.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub coefficient: f64,
    pub objective: f64,
}

/// True when `candidate` beats `best` by more than the tie tolerance.
#[inline]
pub(crate) fn improves(candidate: f64, best: f64, scale: f64) -> bool {
    candidate < best - TIE_TOLERANCE * scale.abs().max(1.0)
}

/// Dictionary columns on the training points with `L̃k` and `k'L̃k` cached.
#[derive(Debug, Clone)]
pub struct CandidatePool {
    columns: Vec<Vec<f64>>,
    weighted: Vec<Vec<f64>>,
    curvature: Vec<f64>,
}

impl CandidatePool {
    pub fn new(dict: &Dictionary, points: &[DataPoint], lap: &WeightedLaplacian<'_>) -> Result<Self> {
        Self::from_columns(dict.columns(points)?, lap)
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, lap: &WeightedLaplacian<'_>) -> Result<Self> {
        let weighted = columns.iter().map(|k| lap.apply(k)).collect::<Result<Vec<_>>>()?;
        let curvature = columns.iter().zip(&weighted).map(|(k, lk)| dot(k, lk)).collect();
        Ok(Self {
            columns,
            weighted,
            curvature,
        })
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, gamma: usize) -> &[f64] {
        &self.columns[gamma]
    }

    /// Candidate `γ` against a residual whose energy `r'L̃r` is given.
    pub fn evaluate(&self, gamma: usize, residual: &[f64], energy: f64, min_denominator: f64) -> Result<CandidateFit> {
        closed_form(
            self.curvature[gamma],
            dot(&self.weighted[gamma], residual),
            energy,
            min_denominator,
        )
    }

    /// Minimizes `J` over the non-excluded, non-degenerate candidates; ties
    /// within [`TIE_TOLERANCE`] go to the lowest index.
    pub fn select_best(
        &self,
        residual: &[f64],
        lap: &WeightedLaplacian<'_>,
        excluded: &[bool],
        min_denominator: f64,
    ) -> Result<Selection> {
        check_len(self.len(), excluded.len())?;
        let energy = lap.quadratic_form(residual, residual)?;
        let mut best: Option<Selection> = None;
        for gamma in (0..self.len()).filter(|&g| !excluded[g]) {
            let Ok(fit) = self.evaluate(gamma, residual, energy, min_denominator) else {
                continue;
            };
            if best.map_or(true, |b| improves(fit.objective, b.objective, energy)) {
                best = Some(Selection {
                    index: gamma,
                    coefficient: fit.coefficient,
                    objective: fit.objective,
                });
            }
        }
        best.ok_or(Error::CandidatesExhausted)
    }
}

/// One greedy selection step over a whole dictionary.
pub fn select_best(
    residual: &[f64],
    dict: &Dictionary,
    points: &[DataPoint],
    lap: &WeightedLaplacian<'_>,
    excluded: &[bool],
    min_denominator: f64,
) -> Result<Selection> {
    CandidatePool::new(dict, points, lap)?.select_best(residual, lap, excluded, min_denominator)
}

/// Jointly re-solves all coefficients: `(K'L̃K + εI) a = K'L̃s`.
pub fn backfit(columns: &[&[f64]], target: &[f64], lap: &WeightedLaplacian<'_>, jitter: f64) -> Result<Vec<f64>> {
    if columns.is_empty() {
        return Err(Error::InvalidParameter("back-fitting needs at least one column".into()));
    }
    let weighted = columns.iter().map(|k| lap.apply(k)).collect::<Result<Vec<_>>>()?;
    let p = columns.len();
    let mut gram = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..=i {
            let v = dot(columns[i], &weighted[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let rhs = DVector::from_iterator(p, weighted.iter().map(|lk| dot(lk, target)));
    Ok(solve_spd(&gram, &rhs, jitter)?.iter().copied().collect())
}

#[derive(Debug, Clone)]
pub struct PursuitFit {
    pub model: SparseExpansion,
    /// `J` before the first step followed by `J` after each accepted step.
    pub objective_history: Vec<f64>,
    /// Normalized validation disagreement after each step, when validating.
    pub validation_history: Vec<f64>,
    /// Set when the loop stopped because no usable candidate remained.
    pub exhausted: bool,
}

fn residual_of(target: &[f64], columns: &[&[f64]], coefficients: &[f64]) -> Vec<f64> {
    let mut r = target.to_vec();
    for (k, a) in columns.iter().zip(coefficients) {
        for (ri, ki) in r.iter_mut().zip(k.iter()) {
            *ri -= a * ki;
        }
    }
    r
}

/// Greedy ranking pursuit on `train` with basis functions from `dict`.
pub fn fit_pursuit(train: &ScoredDataset, dict: &Dictionary, opts: &FitOptions) -> Result<PursuitFit> {
    opts.validate(dict.len())?;
    if dict.dim() != train.dim() {
        return Err(Error::DimensionMismatch {
            expected: dict.dim(),
            found: train.dim(),
        });
    }
    if opts.beta < 1.0 && !train.has_relevant_pair() {
        return Err(Error::NoRelevantPairs);
    }
    let graph = PreferenceGraph::from_points(train.points());
    let lap = WeightedLaplacian::new(&graph, opts.beta)?;
    let pool = CandidatePool::new(dict, train.points(), &lap)?;
    let validation = match &opts.validation {
        Some(v) => {
            let g = PreferenceGraph::from_points(v.points());
            if opts.validation_metric == ValidationMetric::Disagreement && g.relevant_pair_count() == 0 {
                return Err(Error::InvalidParameter("validation set has no relevant pairs".into()));
            }
            Some((v, g, v.scores()))
        }
        None => None,
    };

    let target = train.scores();
    let mut residual = target.clone();
    let mut excluded = vec![false; pool.len()];
    let mut indices: Vec<usize> = Vec::new();
    let mut coefficients: Vec<f64> = Vec::new();
    let mut objective_history = vec![lap.quadratic_form(&residual, &residual)?];
    let mut validation_history = Vec::new();
    let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
    let mut stale = 0;
    let mut exhausted = false;

    for _ in 0..opts.max_basis {
        let sel = match pool.select_best(&residual, &lap, &excluded, opts.min_denominator) {
            Ok(sel) => sel,
            Err(Error::CandidatesExhausted) => {
                exhausted = true;
                break;
            }
            Err(e) => return Err(e),
        };
        excluded[sel.index] = true;
        indices.push(sel.index);
        coefficients.push(sel.coefficient);
        for (r, k) in residual.iter_mut().zip(pool.column(sel.index)) {
            *r -= sel.coefficient * k;
        }
        let mut objective = lap.quadratic_form(&residual, &residual)?;

        if opts.backfit == Backfit::EveryStep && indices.len() > 1 {
            if let Some((a, r, j)) = try_backfit(&pool, &indices, &target, &lap, opts.ridge_jitter, objective)? {
                coefficients = a;
                residual = r;
                objective = j;
            }
        }
        objective_history.push(objective);

        if let Some((val, graph, scores)) = &validation {
            let model = expansion(dict, &indices, &coefficients, opts.beta);
            let err = opts.validation_metric.evaluate(scores, &model.predict(val.points())?, graph)?;
            validation_history.push(err);
            if best.as_ref().map_or(true, |b| err < b.0) {
                best = Some((err, indices.clone(), coefficients.clone()));
                stale = 0;
            } else {
                stale += 1;
                if stale >= opts.patience {
                    break;
                }
            }
        }
    }

    if let Some((_, best_indices, best_coefficients)) = best {
        indices = best_indices;
        coefficients = best_coefficients;
    }
    if opts.backfit == Backfit::FinalOnly && !indices.is_empty() {
        let r = residual_of(&target, &columns_of(&pool, &indices), &coefficients);
        let current = lap.quadratic_form(&r, &r)?;
        if let Some((a, _, _)) = try_backfit(&pool, &indices, &target, &lap, opts.ridge_jitter, current)? {
            coefficients = a;
        }
    }

    Ok(PursuitFit {
        model: expansion(dict, &indices, &coefficients, opts.beta),
        objective_history,
        validation_history,
        exhausted,
    })
}

fn columns_of<'p>(pool: &'p CandidatePool, indices: &[usize]) -> Vec<&'p [f64]> {
    indices.iter().map(|&g| pool.column(g)).collect()
}

/// Back-fits and returns the new state, or `None` when the solve fails or
/// the jitter would raise the objective.
fn try_backfit(
    pool: &CandidatePool,
    indices: &[usize],
    target: &[f64],
    lap: &WeightedLaplacian<'_>,
    jitter: f64,
    current: f64,
) -> Result<Option<(Vec<f64>, Vec<f64>, f64)>> {
    let columns = columns_of(pool, indices);
    let a = match backfit(&columns, target, lap, jitter) {
        Ok(a) => a,
        Err(Error::SingularSystem) => return Ok(None),
        Err(e) => return Err(e),
    };
    let r = residual_of(target, &columns, &a);
    let j = lap.quadratic_form(&r, &r)?;
    if j <= current + MONOTONE_SLACK * current.abs().max(1.0) && j.is_finite() {
        Ok(Some((a, r, j.min(current))))
    } else {
        Ok(None)
    }
}

fn expansion(dict: &Dictionary, indices: &[usize], coefficients: &[f64], beta: f64) -> SparseExpansion {
    SparseExpansion {
        kernel: dict.kernel(),
        centers: indices.iter().map(|&g| dict.centers()[g].clone()).collect(),
        indices: indices.to_vec(),
        coefficients: coefficients.to_vec(),
        beta,
    }
}

/// Kernel matching pursuit: the `β = 1` endpoint.
pub fn fit_matching_pursuit(train: &ScoredDataset, dict: &Dictionary, opts: &FitOptions) -> Result<PursuitFit> {
    fit_pursuit(train, dict, &opts.clone().beta(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_group(features: &[f64], scores: &[f64]) -> ScoredDataset {
        ScoredDataset::new(
            features
                .iter()
                .zip(scores)
                .enumerate()
                .map(|(i, (&x, &s))| DataPoint::scored(0, i as u64, vec![x], s))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn candidate_examples() {
        let g = PreferenceGraph::from_group_ids([0, 0]);
        let id = WeightedLaplacian::new(&g, 1.0).unwrap();
        let fit = evaluate_candidate(&[2.0, 0.0], &[1.0, 0.0], &id, 1e-12).unwrap();
        assert_eq!((fit.coefficient, fit.objective), (2.0, 0.0));

        let lap = WeightedLaplacian::ranking(&g);
        let fit = evaluate_candidate(&[0.0, 1.0], &[1.0, 0.0], &lap, 1e-12).unwrap();
        assert_eq!((fit.coefficient, fit.objective), (-1.0, 0.0));

        assert!(matches!(
            evaluate_candidate(&[0.0, 1.0], &[1.0, 1.0], &lap, 1e-12),
            Err(Error::DegenerateCandidate { .. })
        ));
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let g = PreferenceGraph::from_group_ids([0, 0, 0]);
        let lap = WeightedLaplacian::ranking(&g);
        // Columns 1 and 2 yield the same J.
        let pool = CandidatePool::from_columns(
            vec![vec![1.0, 1.0, 1.0], vec![0.0, 1.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            &lap,
        )
        .unwrap();
        let sel = pool.select_best(&[0.0, 1.0, 0.0], &lap, &[false; 4], 1e-12).unwrap();
        assert_eq!(sel.index, 1);
        assert!(sel.objective.abs() < 1e-15);
        let sel = pool.select_best(&[0.0, 1.0, 0.0], &lap, &[false, true, false, false], 1e-12).unwrap();
        assert_eq!(sel.index, 2);
        assert!(matches!(
            pool.select_best(&[0.0, 1.0, 0.0], &lap, &[false, true, true, true], 1e-12),
            Err(Error::CandidatesExhausted)
        ));
    }

    #[test]
    fn backfit_hand_example() {
        let g = PreferenceGraph::from_group_ids([0, 0, 0]);
        let lap = WeightedLaplacian::ranking(&g);
        let a = backfit(&[&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.0]], &[3.0, 2.0, 1.0], &lap, 0.0).unwrap();
        assert!((a[0] + 1.0).abs() < 1e-12 && a[1].abs() < 1e-12, "{a:?}");
    }

    #[test]
    fn backfit_single_column_matches_candidate() {
        let g = PreferenceGraph::from_group_ids([0, 0, 1, 1, 1]);
        let lap = WeightedLaplacian::new(&g, 0.3).unwrap();
        let k = [0.2, 1.0, -0.5, 0.7, 0.1];
        let s = [1.0, 2.0, 0.0, -1.0, 3.0];
        let a = backfit(&[&k], &s, &lap, 0.0).unwrap();
        let fit = evaluate_candidate(&s, &k, &lap, 1e-12).unwrap();
        assert!((a[0] - fit.coefficient).abs() < 1e-12);
    }

    #[test]
    fn linear_kernel_example() {
        let train = one_group(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
        let dict = Dictionary::from_dataset(&train, KernelSpec::Linear, None).unwrap();
        let fit = fit_pursuit(&train, &dict, &FitOptions::new(1)).unwrap();
        // Every linear column is a multiple of (1,2,3); the lowest index wins.
        assert_eq!(fit.model.indices, vec![0]);
        assert!((fit.model.coefficients[0] + 1.0).abs() < 1e-12);
        assert!(fit.objective_history[1].abs() < 1e-12);
        let pred = fit.model.predict(train.points()).unwrap();
        for (p, e) in pred.iter().zip([-1.0, -2.0, -3.0]) {
            assert!((p - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_basis_is_empty_model() {
        let train = one_group(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]);
        let dict = Dictionary::from_dataset(&train, KernelSpec::Linear, None).unwrap();
        let fit = fit_pursuit(&train, &dict, &FitOptions::new(0)).unwrap();
        assert!(fit.model.is_empty());
        assert_eq!(fit.model.predict(train.points()).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn exhaustion_is_flagged_not_fatal() {
        // After the first pick every linear column is collinear with it.
        let train = one_group(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]);
        let dict = Dictionary::from_dataset(&train, KernelSpec::Linear, None).unwrap();
        let fit = fit_pursuit(&train, &dict, &FitOptions::new(3)).unwrap();
        assert!(fit.model.len() >= 1);
        assert!(fit.model.coefficients.iter().all(|a| a.is_finite()));
    }

    #[test]
    fn predict_examples() {
        let model = SparseExpansion {
            kernel: KernelSpec::gaussian(1.0).unwrap(),
            centers: vec![vec![0.5, 0.5]],
            indices: vec![0],
            coefficients: vec![2.0],
            beta: 0.0,
        };
        let pts = [DataPoint::unscored(0, 0, vec![0.5, 0.5])];
        assert_eq!(model.predict(&pts).unwrap(), vec![2.0]);
        let bad = [DataPoint::unscored(0, 0, vec![0.5])];
        assert!(matches!(model.predict(&bad), Err(Error::DimensionMismatch { .. })));
        assert_eq!(SparseExpansion::empty(KernelSpec::Linear, 0.0).predict(&pts).unwrap(), vec![0.0]);
    }

    #[test]
    fn rejects_bad_options() {
        let train = one_group(&[1.0, 2.0], &[1.0, 2.0]);
        let dict = Dictionary::from_dataset(&train, KernelSpec::Linear, None).unwrap();
        assert!(fit_pursuit(&train, &dict, &FitOptions::new(3)).is_err());
        assert!(fit_pursuit(&train, &dict, &FitOptions::new(1).beta(2.0)).is_err());
        let singles = ScoredDataset::new(vec![
            DataPoint::scored(0, 0, vec![1.0], 1.0),
            DataPoint::scored(1, 1, vec![2.0], 2.0),
        ])
        .unwrap();
        assert!(matches!(fit_pursuit(&singles, &dict, &FitOptions::new(1)), Err(Error::NoRelevantPairs)));
        assert!(fit_pursuit(&singles, &dict, &FitOptions::new(1).beta(1.0)).is_ok());
    }
}
