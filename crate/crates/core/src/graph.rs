//! Datasets, the preference graph `W` and its Laplacian operators.
//!
//! Two points are relevant to each other iff they share a group id. Every
//! group therefore induces a complete graph, so `L = D - W` acts on a vector
//! through per-group sums: `(Lv)_i = m_g v_i - Σ_{j∈g} v_j`. The Laplacian is
//! never stored as a matrix.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub type GroupId = u64;
pub type ItemId = u64;

/// One instance-label tuple: the group (instance) it belongs to, the item
/// (label) it describes, its feature vector and an optional score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataPoint {
    pub group_id: GroupId,
    pub item_id: ItemId,
    pub features: Vec<f64>,
    pub score: Option<f64>,
}

impl DataPoint {
    pub fn scored(group_id: GroupId, item_id: ItemId, features: Vec<f64>, score: f64) -> Self {
        Self {
            group_id,
            item_id,
            features,
            score: Some(score),
        }
    }

    pub fn unscored(group_id: GroupId, item_id: ItemId, features: Vec<f64>) -> Self {
        Self {
            group_id,
            item_id,
            features,
            score: None,
        }
    }
}

fn common_dim(points: &[DataPoint]) -> Result<Option<usize>> {
    let Some(first) = points.first() else {
        return Ok(None);
    };
    let dim = first.features.len();
    for p in points {
        if p.features.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.features.len(),
            });
        }
    }
    Ok(Some(dim))
}

/// Points that all carry a score.
///
/// Fitting additionally requires at least one relevant pair, see
/// [`ScoredDataset::has_relevant_pair`]; evaluation-only sets may be smaller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDataset {
    points: Vec<DataPoint>,
    dim: usize,
}

impl ScoredDataset {
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        let dim = common_dim(&points)?
            .ok_or_else(|| Error::InvalidDataset("scored dataset is empty".into()))?;
        for (i, p) in points.iter().enumerate() {
            match p.score {
                Some(s) if s.is_finite() => {}
                Some(_) => return Err(Error::InvalidDataset(format!("point {i} has a non-finite score"))),
                None => return Err(Error::InvalidDataset(format!("point {i} has no score"))),
            }
        }
        Ok(Self { points, dim })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn into_points(self) -> Vec<DataPoint> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scores(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.score.unwrap_or_default()).collect()
    }

    /// True when at least one group contains two or more points.
    pub fn has_relevant_pair(&self) -> bool {
        let mut seen = HashMap::new();
        self.points.iter().any(|p| {
            let count = seen.entry(p.group_id).or_insert(0usize);
            *count += 1;
            *count >= 2
        })
    }

    /// Points at the given positions, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let mut points = Vec::with_capacity(indices.len());
        for &i in indices {
            let p = self.points.get(i).ok_or(Error::IndexOutOfRange {
                index: i,
                len: self.points.len(),
            })?;
            points.push(p.clone());
        }
        Self::new(points)
    }

    /// Same points with features replaced by `f(features)`.
    pub fn map_features<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(DataPoint {
                    features: f(&p.features)?,
                    ..p.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

/// Points without scores; may be empty.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UnscoredDataset {
    points: Vec<DataPoint>,
}

impl UnscoredDataset {
    /// Scores present on the input are dropped.
    pub fn new(points: Vec<DataPoint>) -> Result<Self> {
        common_dim(&points)?;
        let points = points
            .into_iter()
            .map(|p| DataPoint { score: None, ..p })
            .collect();
        Ok(Self { points })
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `None` for the empty set, which is compatible with any dimension.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.features.len())
    }

    pub fn map_features<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>>,
    {
        let points = self
            .points
            .iter()
            .map(|p| {
                Ok(DataPoint {
                    features: f(&p.features)?,
                    ..p.clone()
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(points)
    }
}

/// Binary preference graph over a point set, stored as group structure.
///
/// With tie exclusion enabled, pairs inside a group whose scores are equal are
/// removed from `W`. Tied points form cliques inside their group, so `L`
/// remains computable from per-group and per-tie-class sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceGraph {
    group_of: Vec<usize>,
    group_sizes: Vec<usize>,
    tie_class_of: Option<Vec<usize>>,
    tie_sizes: Vec<usize>,
}

/// Builds the preference graph of a point list, keeping tied pairs.
pub fn build_preference_graph(points: &[DataPoint]) -> PreferenceGraph {
    PreferenceGraph::from_points(points)
}

impl PreferenceGraph {
    pub fn from_points(points: &[DataPoint]) -> Self {
        Self::from_group_ids(points.iter().map(|p| p.group_id))
    }

    /// Graph whose edges connect points sharing a group id, in point order.
    pub fn from_group_ids<I: IntoIterator<Item = GroupId>>(ids: I) -> Self {
        let mut index = HashMap::new();
        let mut group_sizes = Vec::new();
        let group_of = ids
            .into_iter()
            .map(|id| {
                let g = *index.entry(id).or_insert_with(|| {
                    group_sizes.push(0);
                    group_sizes.len() - 1
                });
                group_sizes[g] += 1;
                g
            })
            .collect();
        Self {
            group_of,
            group_sizes,
            tie_class_of: None,
            tie_sizes: Vec::new(),
        }
    }

    /// Graph that additionally drops relevant pairs with equal scores.
    /// Unscored points never tie.
    pub fn excluding_ties(points: &[DataPoint]) -> Self {
        let mut graph = Self::from_points(points);
        let mut index = HashMap::new();
        let mut tie_sizes = Vec::new();
        let classes = points
            .iter()
            .zip(&graph.group_of)
            .enumerate()
            .map(|(i, (p, &g))| {
                // -0.0 and 0.0 must share a class.
                let key = match p.score {
                    Some(s) => (g, Some((s + 0.0).to_bits()), 0),
                    None => (g, None, i),
                };
                let c = *index.entry(key).or_insert_with(|| {
                    tie_sizes.push(0);
                    tie_sizes.len() - 1
                });
                tie_sizes[c] += 1;
                c
            })
            .collect();
        graph.tie_class_of = Some(classes);
        graph.tie_sizes = tie_sizes;
        graph
    }

    /// Number of points `n`.
    pub fn len(&self) -> usize {
        self.group_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.group_of.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.group_sizes.len()
    }

    /// Dense group index (first-appearance order) of point `i`.
    pub fn group_of(&self, i: usize) -> usize {
        self.group_of[i]
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.group_sizes[group]
    }

    /// Number of relevant partners of point `i`.
    pub fn degree(&self, i: usize) -> usize {
        let base = self.group_sizes[self.group_of[i]] - 1;
        match &self.tie_class_of {
            Some(classes) => base - (self.tie_sizes[classes[i]] - 1),
            None => base,
        }
    }

    /// `W_ij`.
    pub fn is_relevant(&self, i: usize, j: usize) -> bool {
        if i == j || self.group_of[i] != self.group_of[j] {
            return false;
        }
        match &self.tie_class_of {
            Some(classes) => classes[i] != classes[j],
            None => true,
        }
    }

    /// `Σ_ij W_ij`, the number of ordered relevant pairs.
    pub fn relevant_pair_count(&self) -> usize {
        (0..self.len()).map(|i| self.degree(i)).sum()
    }

    /// Member indices of every group, in point order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.group_count()];
        for (i, &g) in self.group_of.iter().enumerate() {
            groups[g].push(i);
        }
        groups
    }

    /// `Lv` in O(n).
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        self.laplacian_apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn laplacian_apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.len(), v.len())?;
        check_len(self.len(), out.len())?;
        let mut sums = vec![0.0; self.group_count()];
        for (&g, &x) in self.group_of.iter().zip(v) {
            sums[g] += x;
        }
        for ((o, &g), &x) in out.iter_mut().zip(&self.group_of).zip(v) {
            let m = self.group_sizes[g] as f64;
            *o = m * (x - sums[g] / m);
        }
        if let Some(classes) = &self.tie_class_of {
            let tie_means = class_means(classes, &self.tie_sizes, v);
            for ((o, &c), &x) in out.iter_mut().zip(classes).zip(v) {
                *o -= self.tie_sizes[c] as f64 * (x - tie_means[c]);
            }
        }
        Ok(())
    }

    /// `u'Lv`, accumulated from group-centered values so that `v'Lv` is a
    /// sum of squares.
    pub fn quadratic_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        check_len(self.len(), v.len())?;
        let mut total = centered_product(&self.group_of, &self.group_sizes, u, v);
        if let Some(classes) = &self.tie_class_of {
            total -= centered_product(classes, &self.tie_sizes, u, v);
        }
        Ok(total)
    }
}

/// `L̃ = βI + (1-β)L`: `β = 0` is the ranking loss, `β = 1` plain least squares.
#[derive(Debug, Clone, Copy)]
pub struct WeightedLaplacian<'a> {
    graph: &'a PreferenceGraph,
    beta: f64,
}

impl<'a> WeightedLaplacian<'a> {
    pub fn new(graph: &'a PreferenceGraph, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self { graph, beta })
    }

    /// Pure Laplacian (`β = 0`).
    pub fn ranking(graph: &'a PreferenceGraph) -> Self {
        Self { graph, beta: 0.0 }
    }

    pub fn graph(&self) -> &'a PreferenceGraph {
        self.graph
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if self.beta == 1.0 {
            check_len(self.len(), v.len())?;
            check_len(self.len(), out.len())?;
            out.copy_from_slice(v);
            return Ok(());
        }
        self.graph.laplacian_apply_into(v, out)?;
        if self.beta != 0.0 {
            let w = 1.0 - self.beta;
            for (o, &x) in out.iter_mut().zip(v) {
                *o = self.beta * x + w * *o;
            }
        }
        Ok(())
    }

    /// `u'L̃v`.
    pub fn quadratic_form(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        check_len(self.len(), v.len())?;
        let mut total = 0.0;
        if self.beta != 0.0 {
            total += self.beta * dot(u, v);
        }
        if self.beta != 1.0 {
            total += (1.0 - self.beta) * self.graph.quadratic_form(u, v)?;
        }
        Ok(total)
    }
}

fn class_means(class_of: &[usize], sizes: &[usize], v: &[f64]) -> Vec<f64> {
    let mut means = vec![0.0; sizes.len()];
    for (&c, &x) in class_of.iter().zip(v) {
        means[c] += x;
    }
    for (m, &size) in means.iter_mut().zip(sizes) {
        *m /= size as f64;
    }
    means
}

/// `Σ_c m_c Σ_{i∈c} (u_i - ū_c)(v_i - v̄_c)` over the classes of `class_of`.
fn centered_product(class_of: &[usize], sizes: &[usize], u: &[f64], v: &[f64]) -> f64 {
    let mu = class_means(class_of, sizes, u);
    let mv = class_means(class_of, sizes, v);
    class_of
        .iter()
        .zip(u.iter().zip(v))
        .map(|(&c, (x, y))| sizes[c] as f64 * (x - mu[c]) * (y - mv[c]))
        .sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
