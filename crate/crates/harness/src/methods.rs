//! One entry point per configured method: fit with fixed hyperparameters, or
//! trace the holdout error along the basis count.

use rankpursuit::baselines::{fit_rankrls, fit_rls, fit_sparse_rankrls, BaselineConfig, DenseExpansion};
use rankpursuit::multiview::{fit_semisupervised, MultiViewFitOptions};
use rankpursuit::pursuit::{fit_matching_pursuit, fit_pursuit, Backfit};
use rankpursuit::{
    DataPoint, Dictionary, FitOptions, KernelSpec, MultiViewModel, PreferenceGraph, ScoredDataset, SparseExpansion,
    UnscoredDataset, ValidationMetric, ViewSpec,
};
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{HarnessError, Result};

/// Hyperparameters of one fit. Fields a method does not use stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub width: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub nu: Option<f64>,
    /// Basis count for pursuit methods, regressor count for sparse RankRLS.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basis: Option<usize>,
}

impl Params {
    pub fn kernel(&self) -> Result<KernelSpec> {
        Ok(KernelSpec::gaussian(self.width)?)
    }
}

/// Settings shared by every fit of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSettings {
    pub beta: f64,
    pub n_views: usize,
    pub backfit: Backfit,
}

impl MethodSettings {
    pub fn from_config(config: &crate::ExperimentConfig) -> Self {
        Self {
            beta: config.beta,
            n_views: config.n_views,
            backfit: config.backfit,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainData {
    pub scored: ScoredDataset,
    /// Present only for the semi-supervised method.
    pub unscored: Option<UnscoredDataset>,
}

impl TrainData {
    pub fn supervised(scored: ScoredDataset) -> Self {
        Self { scored, unscored: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Sparse { method: Method, model: SparseExpansion },
    Dense { method: Method, model: DenseExpansion },
    MultiView(MultiViewModel),
}

impl Model {
    pub fn method(&self) -> Method {
        match self {
            Model::Sparse { method, .. } | Model::Dense { method, .. } => *method,
            Model::MultiView(_) => Method::SsRankingPursuit,
        }
    }

    pub fn predict(&self, points: &[DataPoint]) -> Result<Vec<f64>> {
        Ok(match self {
            Model::Sparse { model, .. } => model.predict(points)?,
            Model::Dense { model, .. } => model.predict(points)?,
            Model::MultiView(model) => model.predict_average(points)?,
        })
    }

    pub fn nonzero_count(&self) -> usize {
        match self {
            Model::Sparse { model, .. } => model.nonzero_count(),
            Model::Dense { model, .. } => model.nonzero_count(),
            Model::MultiView(model) => model.nonzero_count(),
        }
    }
}

fn views(method_settings: &MethodSettings, dim: usize, kernel: KernelSpec) -> Result<Vec<ViewSpec>> {
    Ok(ViewSpec::partition(dim, method_settings.n_views.min(dim), kernel)?)
}

fn pursuit_options(method: Method, settings: &MethodSettings, max_basis: usize) -> FitOptions {
    let beta = match method {
        Method::Crrp => settings.beta,
        Method::MatchingPursuit => 1.0,
        _ => 0.0,
    };
    FitOptions::new(max_basis).beta(beta).backfit(settings.backfit)
}

fn run_pursuit(method: Method, train: &ScoredDataset, dict: &Dictionary, opts: &FitOptions) -> Result<rankpursuit::pursuit::PursuitFit> {
    Ok(match method {
        Method::MatchingPursuit => fit_matching_pursuit(train, dict, opts)?,
        _ => fit_pursuit(train, dict, opts)?,
    })
}

fn unscored_or_empty(data: &TrainData) -> UnscoredDataset {
    data.unscored.clone().unwrap_or_default()
}

/// Fits `method` with fixed `params`. `subset_seed` drives the regressor draw
/// of sparse RankRLS.
pub fn fit(method: Method, settings: &MethodSettings, data: &TrainData, params: &Params, subset_seed: u64) -> Result<Model> {
    let kernel = params.kernel()?;
    let train = &data.scored;
    let n = train.len();
    let need = |what: &str, v: Option<f64>| v.ok_or_else(|| HarnessError::Config(format!("{method} needs {what}")));
    Ok(match method {
        Method::Rls | Method::Rankrls | Method::SparseRankrls => {
            let cfg = BaselineConfig::new(need("lambda", params.lambda)?);
            let model = match method {
                Method::Rls => fit_rls(train, kernel, &cfg)?,
                Method::Rankrls => fit_rankrls(train, kernel, &cfg)?,
                _ => {
                    let r = params.basis.ok_or_else(|| HarnessError::Config("sparse_rankrls needs a subset size".into()))?;
                    fit_sparse_rankrls(train, kernel, &cfg.subset(r.clamp(1, n), subset_seed))?
                }
            };
            Model::Dense { method, model }
        }
        Method::SsRankingPursuit => {
            let nu = need("nu", params.nu)?;
            let p = params.basis.unwrap_or(n).min(n);
            let fit = fit_semisupervised(
                train,
                &unscored_or_empty(data),
                &views(settings, train.dim(), kernel)?,
                &MultiViewFitOptions::new(nu, p),
            )?;
            Model::MultiView(fit.model)
        }
        _ => {
            let dict = Dictionary::from_dataset(train, kernel, None)?;
            let p = params.basis.unwrap_or(n).min(n);
            let fit = run_pursuit(method, train, &dict, &pursuit_options(method, settings, p))?;
            Model::Sparse { method, model: fit.model }
        }
    })
}

/// Holdout error after each greedy step up to `p_max` (one value for the
/// non-greedy methods).
pub fn holdout_curve(
    method: Method,
    settings: &MethodSettings,
    data: &TrainData,
    holdout: &ScoredDataset,
    params: &Params,
    p_max: Option<usize>,
    metric: ValidationMetric,
    subset_seed: u64,
) -> Result<Vec<f64>> {
    let n = data.scored.len();
    let max_basis = p_max.unwrap_or(n).min(n);
    let kernel = params.kernel()?;
    match method {
        Method::SsRankingPursuit => {
            let mut opts = MultiViewFitOptions::new(params.nu.unwrap_or(0.0), max_basis);
            opts.validation = Some(holdout.clone());
            opts.validation_metric = metric;
            opts.patience = usize::MAX;
            let fit = fit_semisupervised(
                &data.scored,
                &unscored_or_empty(data),
                &views(settings, data.scored.dim(), kernel)?,
                &opts,
            )?;
            Ok(fit.validation_history)
        }
        m if m.is_pursuit() => {
            let dict = Dictionary::from_dataset(&data.scored, kernel, None)?;
            let mut opts = pursuit_options(method, settings, max_basis).validation(holdout.clone()).patience(usize::MAX);
            opts.validation_metric = metric;
            Ok(run_pursuit(method, &data.scored, &dict, &opts)?.validation_history)
        }
        _ => {
            let model = fit(method, settings, data, params, subset_seed)?;
            Ok(vec![evaluate(metric, holdout, &model.predict(holdout.points())?)?])
        }
    }
}

pub fn evaluate(metric: ValidationMetric, data: &ScoredDataset, predictions: &[f64]) -> Result<f64> {
    let graph = PreferenceGraph::from_points(data.points());
    Ok(metric.evaluate(&data.scores(), predictions, &graph)?)
}
