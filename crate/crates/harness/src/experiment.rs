//! Per-user experiment protocol and aggregation into result tables.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rankpursuit::dataio::{build_user_task, load_jester_csv, load_movielens, split_for_semisupervised, RatingsMatrix, UserGroup};
use rankpursuit::metrics::mean_squared_error;
use rankpursuit::{ScoredDataset, ValidationMetric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{DatasetKind, ExperimentConfig, Method, Setting};
use crate::error::{HarnessError, Result};
use crate::grid::{grid_search, GridChoice, HoldoutTask};
use crate::methods::{evaluate, fit, MethodSettings, Params, TrainData};
use crate::seed;
use crate::synthetic;
use crate::table::{pairwise_sum, ResultTable};

/// Outcome for one test user under one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub method: Method,
    pub group: UserGroup,
    pub repeat: usize,
    pub user: u64,
    pub disagreement: f64,
    pub mse: f64,
    pub nonzero: usize,
    /// Scored training points the model saw.
    pub n_train: usize,
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub method: Method,
    pub group: UserGroup,
    pub repeat: usize,
    pub choice: GridChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureCount {
    pub method: Method,
    pub group: UserGroup,
    pub repeat: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub disagreement: ResultTable,
    pub mse: ResultTable,
    pub records: Vec<UserRecord>,
    pub selections: Vec<SelectionRecord>,
    pub failures: Vec<FailureCount>,
}

impl ExperimentOutput {
    pub fn records_for(&self, method: Method, group: Option<UserGroup>) -> impl Iterator<Item = &UserRecord> {
        self.records
            .iter()
            .filter(move |r| r.method == method && group.map_or(true, |g| r.group == g))
    }
}

pub fn load_ratings(config: &ExperimentConfig) -> Result<RatingsMatrix> {
    let path = || {
        config
            .data_path
            .as_ref()
            .ok_or_else(|| HarnessError::Config("data_path is required".into()))
    };
    Ok(match config.dataset {
        DatasetKind::Jester => load_jester_csv(path()?)?,
        DatasetKind::Movielens => load_movielens(path()?)?,
        DatasetKind::Synthetic => synthetic::generate(&config.synthetic)?,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let ratings = load_ratings(config)?;
    run_experiment_on(config, &ratings)
}

/// Test and holdout users of one repeat, disjoint and sorted.
pub fn draw_users(config: &ExperimentConfig, ratings: &RatingsMatrix, repeat: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let (lo, hi) = config.task.test_user_rating_range;
    let eligible = ratings.users_with_count(lo, hi);
    let n_test = config.task.n_test_users;
    if eligible.len() < n_test + config.n_holdout {
        return Err(HarnessError::Data(format!(
            "{} users have {lo}..={hi} ratings, need {} test and {} holdout users",
            eligible.len(),
            n_test,
            config.n_holdout
        )));
    }
    let seed = config.task.seed;
    let mut rng = seed::rng(seed, &[seed::TEST_USERS, repeat as u64]);
    let mut picked: Vec<usize> = sample(&mut rng, eligible.len(), n_test).into_vec();
    picked.sort_unstable();
    let test: Vec<usize> = picked.iter().map(|&i| eligible[i]).collect();
    let rest: Vec<usize> = eligible.iter().copied().filter(|u| !test.contains(u)).collect();
    let mut rng = seed::rng(seed, &[seed::HOLDOUT_USERS, repeat as u64]);
    let mut hold: Vec<usize> = sample(&mut rng, rest.len(), config.n_holdout).into_iter().map(|i| rest[i]).collect();
    hold.sort_unstable();
    Ok((test, hold))
}

fn group_tag(g: UserGroup) -> u64 {
    UserGroup::ALL.iter().position(|x| *x == g).unwrap_or(0) as u64
}

/// A user's task, with the scored/unscored split in the semi-supervised setting.
#[derive(Debug, Clone)]
struct PreparedTask {
    user: u64,
    full: TrainData,
    scored_only: TrainData,
    test: ScoredDataset,
    subset_seed: u64,
}

impl PreparedTask {
    fn data_for(&self, method: Method) -> &TrainData {
        if method == Method::SsRankingPursuit {
            &self.full
        } else {
            &self.scored_only
        }
    }
}

fn prepare(config: &ExperimentConfig, ratings: &RatingsMatrix, group: UserGroup, user: usize, path: &[u64]) -> Result<PreparedTask> {
    let seed = config.task.seed;
    let spec = config.task_for(group);
    let (train, test) = build_user_task(ratings, &spec, user, &mut seed::rng(seed, path))?;
    let split_path: Vec<u64> = [seed::SS_SPLIT].iter().chain(path).copied().collect();
    let subset_seed = seed::derive(seed, &[&[seed::SUBSET], path].concat());
    let (full, scored_only) = match config.setting {
        Setting::Supervised => (TrainData::supervised(train.clone()), TrainData::supervised(train)),
        Setting::SemiSupervised => {
            let (scored, unscored) = split_for_semisupervised(&train, config.scored_fraction, &mut seed::rng(seed, &split_path))?;
            (
                TrainData {
                    scored: scored.clone(),
                    unscored: Some(unscored),
                },
                TrainData::supervised(scored),
            )
        }
    };
    Ok(PreparedTask {
        user: ratings.user_id(user),
        full,
        scored_only,
        test,
        subset_seed,
    })
}

/// Order in which methods are tuned: sparse RankRLS reuses the basis count
/// chosen for ranking pursuit, so ranking pursuit goes first.
fn tuning_order(methods: &[Method]) -> Vec<Method> {
    let mut order: Vec<Method> = Vec::new();
    if methods.contains(&Method::SparseRankrls) {
        order.push(Method::RankingPursuit);
    }
    for &m in methods {
        if !order.contains(&m) {
            order.push(m);
        }
    }
    order
}

struct CellResult {
    records: Vec<UserRecord>,
    selections: Vec<SelectionRecord>,
    failures: Vec<FailureCount>,
}

fn run_cell(
    config: &ExperimentConfig,
    ratings: &RatingsMatrix,
    group: UserGroup,
    repeat: usize,
    evaluate_users: bool,
) -> Result<CellResult> {
    let (test_users, holdout_users) = draw_users(config, ratings, repeat)?;
    let g = group_tag(group);
    let r = repeat as u64;

    let holdout: Vec<PreparedTask> = holdout_users
        .iter()
        .enumerate()
        .filter_map(|(h, &u)| match prepare(config, ratings, group, u, &[seed::HOLDOUT_TASK, r, g, h as u64]) {
            Ok(t) => Some(t),
            Err(e) => {
                log::warn!("holdout user {} skipped: {e}", ratings.user_id(u));
                None
            }
        })
        .collect();
    if holdout.is_empty() {
        return Err(HarnessError::Data(format!("no usable holdout task for group {group}")));
    }
    let tasks: Vec<Result<PreparedTask>> = if !evaluate_users {
        Vec::new()
    } else {
        test_users
            .par_iter()
            .map(|&u| prepare(config, ratings, group, u, &[seed::USER_TASK, r, g, ratings.user_id(u)]))
            .collect()
    };

    let settings = MethodSettings::from_config(config);
    let mut chosen: BTreeMap<Method, Params> = BTreeMap::new();
    let mut out = CellResult {
        records: Vec::new(),
        selections: Vec::new(),
        failures: Vec::new(),
    };
    for method in tuning_order(&config.methods) {
        let hold: Vec<HoldoutTask> = holdout
            .iter()
            .map(|t| HoldoutTask {
                train: t.data_for(method).clone(),
                test: t.test.clone(),
                subset_seed: t.subset_seed,
            })
            .collect();
        let fixed = match method {
            Method::SparseRankrls => chosen.get(&Method::RankingPursuit).and_then(|p| p.basis),
            _ => None,
        };
        let choice = grid_search(method, config, &hold, fixed)?;
        log::info!("{method} {group} repeat {repeat}: {:?} (holdout {:.4})", choice.params, choice.score);
        chosen.insert(method, choice.params);
        if !config.methods.contains(&method) {
            continue;
        }
        out.selections.push(SelectionRecord {
            method,
            group,
            repeat,
            choice: choice.clone(),
        });
        if !evaluate_users {
            continue;
        }

        let results: Vec<Option<UserRecord>> = tasks
            .par_iter()
            .map(|task| {
                let task = task.as_ref().map_err(|e| e.to_string())?;
                evaluate_user(method, &settings, task, &choice.params, group, repeat).map_err(|e| e.to_string())
            })
            .map(|res: std::result::Result<UserRecord, String>| match res {
                Ok(rec) => Some(rec),
                Err(e) => {
                    log::warn!("{method} {group} repeat {repeat}: user failed: {e}");
                    None
                }
            })
            .collect();
        let failed = results.iter().filter(|r| r.is_none()).count();
        if failed > 0 {
            out.failures.push(FailureCount {
                method,
                group,
                repeat,
                count: failed,
            });
        }
        out.records.extend(results.into_iter().flatten());
    }
    Ok(out)
}

fn evaluate_user(
    method: Method,
    settings: &MethodSettings,
    task: &PreparedTask,
    params: &Params,
    group: UserGroup,
    repeat: usize,
) -> Result<UserRecord> {
    let data = task.data_for(method);
    let model = fit(method, settings, data, params, task.subset_seed)?;
    let predictions = model.predict(task.test.points())?;
    log::debug!("{method} user {}: {} of {} coefficients nonzero", task.user, model.nonzero_count(), data.scored.len());
    Ok(UserRecord {
        method,
        group,
        repeat,
        user: task.user,
        disagreement: evaluate(ValidationMetric::Disagreement, &task.test, &predictions)?,
        mse: mean_squared_error(&task.test.scores(), &predictions)?,
        nonzero: model.nonzero_count(),
        n_train: data.scored.len(),
        params: *params,
    })
}

/// Runs every (group, repeat) cell and aggregates per-repeat user means.
pub fn run_experiment_on(config: &ExperimentConfig, ratings: &RatingsMatrix) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut records = Vec::new();
    let mut selections = Vec::new();
    let mut failures = Vec::new();
    for &group in &config.groups {
        for repeat in 0..config.task.repeats {
            let cell = run_cell(config, ratings, group, repeat, true)?;
            records.extend(cell.records);
            selections.extend(cell.selections);
            failures.extend(cell.failures);
        }
    }
    let (disagreement, mse) = aggregate(config, &records);
    Ok(ExperimentOutput {
        disagreement,
        mse,
        records,
        selections,
        failures,
    })
}

/// Grid-search choices of one cell without evaluating test users.
pub fn tune_cell(config: &ExperimentConfig, ratings: &RatingsMatrix, group: UserGroup, repeat: usize) -> Result<Vec<SelectionRecord>> {
    config.validate()?;
    Ok(run_cell(config, ratings, group, repeat, false)?.selections)
}

fn aggregate(config: &ExperimentConfig, records: &[UserRecord]) -> (ResultTable, ResultTable) {
    let mut dis = ResultTable::default();
    let mut mse = ResultTable::default();
    for &method in &config.methods {
        for &group in &config.groups {
            let mut per_dis = Vec::new();
            let mut per_mse = Vec::new();
            for repeat in 0..config.task.repeats {
                let cell: Vec<&UserRecord> = records
                    .iter()
                    .filter(|r| r.method == method && r.group == group && r.repeat == repeat)
                    .collect();
                if cell.is_empty() {
                    continue;
                }
                let n = cell.len() as f64;
                per_dis.push(pairwise_sum(&cell.iter().map(|r| r.disagreement).collect::<Vec<_>>()) / n);
                per_mse.push(pairwise_sum(&cell.iter().map(|r| r.mse).collect::<Vec<_>>()) / n);
            }
            dis.push(method.name(), group.label(), &per_dis);
            mse.push(method.name(), group.label(), &per_mse);
        }
    }
    (dis, mse)
}
