//! Evaluation metrics and the Wilcoxon signed-rank test.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{check_len, Error, Result};
use crate::graph::PreferenceGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Ordered relevant pairs `Σ W_ij`.
    pub pair_count: usize,
    /// Disagreement and pair count per group, in graph group order.
    pub per_group: Vec<(f64, usize)>,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `½ Σ_ij W_ij |sign(s_i - s_j) - sign(f_i - f_j)|` over ordered pairs.
pub fn disagreement_error(scores: &[f64], predictions: &[f64], graph: &PreferenceGraph) -> Result<f64> {
    Ok(evaluate_disagreement(scores, predictions, graph)?.value)
}

/// Disagreement with per-group breakdown (unnormalized).
pub fn evaluate_disagreement(scores: &[f64], predictions: &[f64], graph: &PreferenceGraph) -> Result<EvalResult> {
    check_len(graph.len(), scores.len())?;
    check_len(graph.len(), predictions.len())?;
    let mut per_group = Vec::with_capacity(graph.group_count());
    for members in graph.groups() {
        // Each unordered pair contributes twice, once per order; the ½ cancels that.
        let mut d = 0.0;
        let mut pairs = 0;
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                if graph.is_relevant(i, j) {
                    d += (sign(scores[i] - scores[j]) - sign(predictions[i] - predictions[j])).abs();
                    pairs += 2;
                }
            }
        }
        per_group.push((d, pairs));
    }
    Ok(EvalResult {
        value: per_group.iter().map(|g| g.0).sum(),
        pair_count: per_group.iter().map(|g| g.1).sum(),
        per_group,
    })
}

/// Disagreement divided by the number of ordered relevant pairs: 0 for a
/// perfect order, 1 for a full reversal, ½ for constant predictions against
/// untied truth.
pub fn normalized_disagreement(scores: &[f64], predictions: &[f64], graph: &PreferenceGraph) -> Result<f64> {
    let r = evaluate_disagreement(scores, predictions, graph)?;
    if r.pair_count == 0 {
        return Err(Error::NoRelevantPairs);
    }
    Ok(r.value / r.pair_count as f64)
}

pub fn mean_squared_error(scores: &[f64], predictions: &[f64]) -> Result<f64> {
    check_len(scores.len(), predictions.len())?;
    if scores.is_empty() {
        return Err(Error::InvalidParameter("mean squared error of an empty set".into()));
    }
    let sse: f64 = scores.iter().zip(predictions).map(|(s, f)| (s - f) * (s - f)).sum();
    Ok(sse / scores.len() as f64)
}

/// Error measure used for early stopping and model selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMetric {
    #[default]
    Disagreement,
    Mse,
}

impl ValidationMetric {
    pub fn evaluate(&self, scores: &[f64], predictions: &[f64], graph: &PreferenceGraph) -> Result<f64> {
        match self {
            ValidationMetric::Disagreement => normalized_disagreement(scores, predictions, graph),
            ValidationMetric::Mse => mean_squared_error(scores, predictions),
        }
    }
}

/// Largest number of nonzero differences handled by exact enumeration.
pub const WILCOXON_EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonResult {
    /// `W+`, the rank sum of positive differences `a - b`.
    pub statistic: f64,
    pub p_two_sided: f64,
    /// Differences left after dropping zeros.
    pub n_nonzero: usize,
    pub exact: bool,
}

/// Paired two-sided Wilcoxon signed-rank test on `a - b`.
///
/// Zero differences are dropped and tied magnitudes get mid-ranks. Up to
/// [`WILCOXON_EXACT_LIMIT`] differences the null distribution of `W+` is
/// counted exactly over all sign assignments; beyond that a normal
/// approximation with tie-corrected variance and continuity correction is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    wilcoxon_signed_rank_with_limit(a, b, WILCOXON_EXACT_LIMIT)
}

/// [`wilcoxon_signed_rank`] with a custom largest size for the exact null
/// distribution (`0` always uses the normal approximation).
pub fn wilcoxon_signed_rank_with_limit(a: &[f64], b: &[f64], exact_limit: usize) -> Result<WilcoxonResult> {
    check_len(a.len(), b.len())?;
    let mut diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    if diffs.is_empty() {
        return Err(Error::AllDifferencesZero);
    }
    diffs.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let m = diffs.len();

    // Ranks doubled so that mid-ranks stay integral.
    let mut ranks2 = vec![0u64; m];
    let mut tie_correction = 0.0;
    let mut i = 0;
    while i < m {
        let mut j = i;
        while j + 1 < m && diffs[j + 1].abs() == diffs[i].abs() {
            j += 1;
        }
        let mid2 = (i + 1 + j + 1) as u64;
        ranks2[i..=j].iter_mut().for_each(|r| *r = mid2);
        let t = (j - i + 1) as f64;
        tie_correction += t * t * t - t;
        i = j + 1;
    }
    let w2: u64 = diffs.iter().zip(&ranks2).filter(|(d, _)| **d > 0.0).map(|(_, r)| *r).sum();
    let statistic = w2 as f64 / 2.0;

    if m <= exact_limit {
        let total: u64 = ranks2.iter().sum();
        let mut counts = vec![0.0f64; total as usize + 1];
        counts[0] = 1.0;
        let mut reach = 0usize;
        for &r in &ranks2 {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] != 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let all = 2f64.powi(m as i32);
        let lower: f64 = counts[..=w2 as usize].iter().sum::<f64>() / all;
        let upper: f64 = counts[w2 as usize..].iter().sum::<f64>() / all;
        Ok(WilcoxonResult {
            statistic,
            p_two_sided: (2.0 * lower.min(upper)).min(1.0),
            n_nonzero: m,
            exact: true,
        })
    } else {
        let mf = m as f64;
        let mean = mf * (mf + 1.0) / 4.0;
        let var = mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0 - tie_correction / 48.0;
        let z = ((statistic - mean).abs() - 0.5).max(0.0) / var.sqrt();
        Ok(WilcoxonResult {
            statistic,
            p_two_sided: erfc(z / std::f64::consts::SQRT_2).min(1.0),
            n_nonzero: m,
            exact: false,
        })
    }
}
