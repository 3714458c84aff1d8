use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rankpursuit::dataio::{TaskSpec, UserGroup};
use rankpursuit::pursuit::Backfit;
use rankpursuit::ValidationMetric;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::synthetic::SyntheticSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rls,
    MatchingPursuit,
    Rankrls,
    SparseRankrls,
    RankingPursuit,
    SsRankingPursuit,
    Crrp,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Rls,
        Method::MatchingPursuit,
        Method::Rankrls,
        Method::SparseRankrls,
        Method::RankingPursuit,
        Method::SsRankingPursuit,
        Method::Crrp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rls => "rls",
            Method::MatchingPursuit => "matching_pursuit",
            Method::Rankrls => "rankrls",
            Method::SparseRankrls => "sparse_rankrls",
            Method::RankingPursuit => "ranking_pursuit",
            Method::SsRankingPursuit => "ss_ranking_pursuit",
            Method::Crrp => "crrp",
        }
    }

    /// Greedy methods whose basis count is selected on the holdout curve.
    pub fn is_pursuit(&self) -> bool {
        matches!(
            self,
            Method::MatchingPursuit | Method::RankingPursuit | Method::SsRankingPursuit | Method::Crrp
        )
    }

    /// Methods searched over the regularization grid.
    pub fn uses_lambda(&self) -> bool {
        matches!(self, Method::Rls | Method::Rankrls | Method::SparseRankrls)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| HarnessError::Config(format!("unknown method {s:?}")))
    }
}

/// Comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
    if methods.is_empty() {
        return Err(HarnessError::Config("empty method list".into()));
    }
    Ok(methods)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Jester,
    Movielens,
    Synthetic,
}

impl FromStr for DatasetKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jester" => Ok(DatasetKind::Jester),
            "movielens" => Ok(DatasetKind::Movielens),
            "synthetic" => Ok(DatasetKind::Synthetic),
            _ => Err(HarnessError::Config(format!("unknown dataset {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    Supervised,
    /// Only part of each training half keeps its scores; the rest is unscored.
    SemiSupervised,
}

/// `2^lo, 2^(lo+step), …, 2^hi`
pub fn pow2_grid(lo: i32, hi: i32, step: usize) -> Vec<f64> {
    (lo..=hi).step_by(step).map(|e| 2f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grids {
    pub widths: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub nus: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            widths: pow2_grid(-15, 15, 1),
            lambdas: pow2_grid(-10, 10, 2),
            nus: pow2_grid(-8, 4, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub dataset: DatasetKind,
    /// Ratings file for `jester` and `movielens`.
    pub data_path: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    /// Reference count, test users, repeats and the master seed. The group is
    /// replaced by each entry of `groups`.
    pub task: TaskSpec,
    pub groups: Vec<UserGroup>,
    pub setting: Setting,
    /// Share of each training half that keeps its scores in the
    /// semi-supervised setting.
    pub scored_fraction: f64,
    pub n_views: usize,
    /// Holdout users per repeat used for model selection.
    pub n_holdout: usize,
    pub grids: Grids,
    pub beta: f64,
    /// Cap on the basis count; `None` lets pursuit run to the training size.
    pub p_max: Option<usize>,
    /// Back-fitting schedule of the single-view pursuit methods.
    pub backfit: Backfit,
    pub selection_metric: ValidationMetric,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::RankingPursuit, Method::MatchingPursuit],
            dataset: DatasetKind::Synthetic,
            data_path: None,
            synthetic: SyntheticSpec::default(),
            task: TaskSpec::desk(UserGroup::Low),
            groups: UserGroup::ALL.to_vec(),
            setting: Setting::Supervised,
            scored_fraction: 0.5,
            n_views: 2,
            n_holdout: 10,
            grids: Grids::default(),
            beta: 0.5,
            p_max: None,
            backfit: Backfit::EveryStep,
            selection_metric: ValidationMetric::Disagreement,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// 300 reference users, 300 test users, 10 repeats.
    pub fn paper_scale(mut self) -> Self {
        let seed = self.task.seed;
        self.task = TaskSpec {
            seed,
            ..TaskSpec::paper_scale(self.task.group)
        };
        self
    }

    pub fn task_for(&self, group: UserGroup) -> TaskSpec {
        TaskSpec {
            group,
            ..self.task.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.methods.is_empty() {
            return bad("no methods configured".into());
        }
        if self.groups.is_empty() {
            return bad("no user groups configured".into());
        }
        self.task.validate()?;
        let positive = |g: &[f64]| !g.is_empty() && g.iter().all(|x| *x > 0.0 && x.is_finite());
        if !positive(&self.grids.widths) {
            return bad("kernel width grid must be nonempty and positive".into());
        }
        if self.methods.iter().any(Method::uses_lambda) && !positive(&self.grids.lambdas) {
            return bad("lambda grid must be nonempty and positive".into());
        }
        if self.methods.contains(&Method::SsRankingPursuit) {
            if self.grids.nus.is_empty() || self.grids.nus.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
                return bad("nu grid must be nonempty and nonnegative".into());
            }
            if self.n_views == 0 {
                return bad("n_views must be positive".into());
            }
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0, 1], got {}", self.beta));
        }
        if !(self.scored_fraction > 0.0 && self.scored_fraction < 1.0) {
            return bad(format!("scored_fraction must lie in (0, 1), got {}", self.scored_fraction));
        }
        if self.n_holdout == 0 {
            return bad("n_holdout must be positive".into());
        }
        if self.p_max == Some(0) {
            return bad("p_max must be positive".into());
        }
        if self.dataset != DatasetKind::Synthetic && self.data_path.is_none() {
            return bad("data_path is required for jester and movielens".into());
        }
        Ok(())
    }
}
