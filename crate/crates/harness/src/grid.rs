//! Exhaustive hyperparameter search on holdout tasks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Method};
use crate::error::{HarnessError, Result};
use crate::methods::{holdout_curve, MethodSettings, Params, TrainData};

/// Training data and evaluation half of one holdout user.
#[derive(Debug, Clone)]
pub struct HoldoutTask {
    pub train: TrainData,
    pub test: rankpursuit::ScoredDataset,
    pub subset_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub params: Params,
    /// Mean holdout error of the chosen point.
    pub score: f64,
    /// Grid points that fitted on every holdout task.
    pub evaluated: usize,
    pub failed: usize,
}

/// Grid points in scan order: width outermost, then λ or ν.
pub fn candidates(method: Method, config: &ExperimentConfig, fixed_basis: Option<usize>) -> Vec<Params> {
    let second: Vec<(Option<f64>, Option<f64>)> = if method.uses_lambda() {
        config.grids.lambdas.iter().map(|&l| (Some(l), None)).collect()
    } else if method == Method::SsRankingPursuit {
        config.grids.nus.iter().map(|&v| (None, Some(v))).collect()
    } else {
        vec![(None, None)]
    };
    let mut out = Vec::with_capacity(config.grids.widths.len() * second.len());
    for &width in &config.grids.widths {
        for &(lambda, nu) in &second {
            out.push(Params {
                width,
                lambda,
                nu,
                basis: fixed_basis,
            });
        }
    }
    out
}

/// Averages curves of unequal length, extending each with its last value.
pub fn mean_curve(curves: &[Vec<f64>]) -> Vec<f64> {
    let len = curves.iter().map(Vec::len).max().unwrap_or(0);
    (0..len)
        .map(|p| {
            let total: f64 = curves.iter().map(|c| c.get(p).or(c.last()).copied().unwrap_or(f64::NAN)).sum();
            total / curves.len() as f64
        })
        .collect()
}

/// First index of the minimum; NaN entries never win.
fn argmin(values: &[f64]) -> Option<(usize, f64)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, b)) if b <= v => best,
            _ => Some((i, v)),
        })
}

/// Scans the grid and returns the point with the lowest mean holdout error.
///
/// Pursuit methods pick their basis count jointly from the averaged error
/// curve. `fixed_basis` pins the basis or subset size instead (sparse
/// RankRLS). A grid point that fails on any holdout task is skipped; ties go
/// to the earlier point, and for pursuit to the smaller basis.
pub fn grid_search(
    method: Method,
    config: &ExperimentConfig,
    holdout: &[HoldoutTask],
    fixed_basis: Option<usize>,
) -> Result<GridChoice> {
    if holdout.is_empty() {
        return Err(HarnessError::Data("no holdout tasks".into()));
    }
    let settings = MethodSettings::from_config(config);
    let points = candidates(method, config, fixed_basis);
    let results: Vec<Option<Vec<f64>>> = points
        .par_iter()
        .map(|params| {
            let curves = holdout
                .iter()
                .map(|task| {
                    holdout_curve(
                        method,
                        &settings,
                        &task.train,
                        &task.test,
                        params,
                        config.p_max,
                        config.selection_metric,
                        task.subset_seed,
                    )
                })
                .collect::<Result<Vec<_>>>();
            match curves {
                Ok(c) if c.iter().all(|c| !c.is_empty()) => Some(mean_curve(&c)),
                Ok(_) => None,
                Err(e) => {
                    log::debug!("{method} at {params:?} failed: {e}");
                    None
                }
            }
        })
        .collect();

    let failed = results.iter().filter(|r| r.is_none()).count();
    let mut best: Option<(Params, f64)> = None;
    for (params, curve) in points.iter().zip(&results) {
        let Some((p, score)) = curve.as_deref().and_then(argmin) else {
            continue;
        };
        if best.as_ref().map_or(true, |b| score < b.1) {
            let mut chosen = *params;
            if method.is_pursuit() {
                chosen.basis = Some(p + 1);
            }
            best = Some((chosen, score));
        }
    }
    let (params, score) = best.ok_or(HarnessError::NoGridPoint)?;
    Ok(GridChoice {
        params,
        score,
        evaluated: points.len() - failed,
        failed,
    })
}
