use std::collections::BTreeMap;

use rankpursuit::metrics::wilcoxon_signed_rank;
use serde::{Deserialize, Serialize};

use crate::config::Method;
use crate::error::{HarnessError, Result};
use crate::experiment::UserRecord;

pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub exact: bool,
    pub significant: bool,
}

/// Two-sided Wilcoxon signed-rank test on paired per-user errors.
pub fn compare_methods(a: &[f64], b: &[f64]) -> Result<Comparison> {
    if a.len() != b.len() {
        return Err(HarnessError::NotComparable(format!("{} vs {} paired values", a.len(), b.len())));
    }
    let test = match wilcoxon_signed_rank(a, b) {
        Ok(t) => t,
        Err(rankpursuit::Error::AllDifferencesZero) => {
            return Err(HarnessError::NotComparable("all paired differences are zero".into()))
        }
        Err(e) => return Err(e.into()),
    };
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(Comparison {
        n: a.len(),
        mean_a: mean(a),
        mean_b: mean(b),
        statistic: test.statistic,
        p_value: test.p_two_sided,
        exact: test.exact,
        significant: test.p_two_sided < SIGNIFICANCE,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordMetric {
    Disagreement,
    Mse,
}

/// Errors of two methods on the users both evaluated, keyed by
/// (group, repeat, user) and optionally restricted to one group.
pub fn paired_errors(
    records: &[UserRecord],
    a: Method,
    b: Method,
    group: Option<&str>,
    metric: RecordMetric,
) -> (Vec<f64>, Vec<f64>) {
    let value = |r: &UserRecord| match metric {
        RecordMetric::Disagreement => r.disagreement,
        RecordMetric::Mse => r.mse,
    };
    let keyed = |m: Method| -> BTreeMap<(String, usize, u64), f64> {
        records
            .iter()
            .filter(|r| r.method == m && group.map_or(true, |g| r.group.label() == g))
            .map(|r| ((r.group.label().to_string(), r.repeat, r.user), value(r)))
            .collect()
    };
    let (ka, kb) = (keyed(a), keyed(b));
    ka.iter().filter_map(|(k, va)| kb.get(k).map(|vb| (*va, *vb))).unzip()
}
