//! Ratings loaders (Jester CSV, MovieLens `::` format) and construction of
//! per-test-user ranking tasks.
//!
//! A task for a test user has one data point per item the user rated. Its
//! features are the ratings of a set of reference users for that item, with
//! each reference user's missing ratings filled by the median of their own
//! observed ratings. The score is the test user's rating, so all pairwise
//! preferences come from rating differences within the single group.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DataPoint, ScoredDataset, UnscoredDataset};

/// Missing-rating marker in the Jester export.
pub const JESTER_MISSING: f64 = 99.0;
const JESTER_MISSING_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatingScale {
    /// Continuous ratings in `[-10, 10]`.
    Jester,
    /// Integer ratings `1..=5`.
    MovieLens,
}

impl RatingScale {
    pub fn contains(&self, value: f64) -> bool {
        match self {
            RatingScale::Jester => (-10.0..=10.0).contains(&value),
            RatingScale::MovieLens => (1.0..=5.0).contains(&value) && value.fract() == 0.0,
        }
    }
}

/// Sparse user × item ratings with dense indices and the original ids.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingsMatrix {
    scale: RatingScale,
    user_ids: Vec<u64>,
    item_ids: Vec<u64>,
    ratings: Vec<BTreeMap<usize, f64>>,
}

impl RatingsMatrix {
    /// Builds from `(user_id, item_id, rating)` triples. Ids are mapped to
    /// dense indices in ascending id order.
    pub fn from_triples<I>(scale: RatingScale, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u64, u64, f64)>,
    {
        let triples: Vec<_> = triples.into_iter().collect();
        let users: BTreeSet<u64> = triples.iter().map(|t| t.0).collect();
        let items: BTreeSet<u64> = triples.iter().map(|t| t.1).collect();
        let mut m = Self::with_ids(scale, users.into_iter().collect(), items.into_iter().collect());
        let user_index: BTreeMap<u64, usize> = m.user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        let item_index: BTreeMap<u64, usize> = m.item_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();
        for (line, (u, i, r)) in triples.into_iter().enumerate() {
            if !scale.contains(r) {
                return Err(Error::RatingOutOfRange { line: line + 1, value: r });
            }
            if m.ratings[user_index[&u]].insert(item_index[&i], r).is_some() {
                return Err(Error::DuplicateRating { line: line + 1, user: u, item: i });
            }
        }
        Ok(m)
    }

    fn with_ids(scale: RatingScale, user_ids: Vec<u64>, item_ids: Vec<u64>) -> Self {
        Self {
            scale,
            ratings: vec![BTreeMap::new(); user_ids.len()],
            user_ids,
            item_ids,
        }
    }

    pub fn scale(&self) -> RatingScale {
        self.scale
    }

    pub fn n_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn user_id(&self, user: usize) -> u64 {
        self.user_ids[user]
    }

    pub fn item_id(&self, item: usize) -> u64 {
        self.item_ids[item]
    }

    pub fn rating(&self, user: usize, item: usize) -> Option<f64> {
        self.ratings[user].get(&item).copied()
    }

    /// `(item index, rating)` pairs of a user, by item index.
    pub fn user_ratings(&self, user: usize) -> &BTreeMap<usize, f64> {
        &self.ratings[user]
    }

    pub fn count(&self, user: usize) -> usize {
        self.ratings[user].len()
    }

    pub fn total(&self) -> usize {
        self.ratings.iter().map(BTreeMap::len).sum()
    }

    /// Users whose rating count lies in `lo..=hi`.
    pub fn users_with_count(&self, lo: usize, hi: usize) -> Vec<usize> {
        (0..self.n_users()).filter(|&u| (lo..=hi).contains(&self.count(u))).collect()
    }
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("cannot parse {field:?}: {e}"),
    })
}

/// Loads a Jester CSV export: one row per user, first field the declared
/// number of rated jokes (ignored), then one field per joke with `99` for
/// missing. Jokes are numbered from 1; users by row from 1.
pub fn load_jester_csv(path: impl AsRef<Path>) -> Result<RatingsMatrix> {
    read_jester(BufReader::new(File::open(path)?))
}

pub fn read_jester<R: BufRead>(reader: R) -> Result<RatingsMatrix> {
    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    let mut width = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected || expected < 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        parse_f64(fields[0], lineno)?;
        let mut row = Vec::with_capacity(expected - 1);
        for f in &fields[1..] {
            let v = parse_f64(f, lineno)?;
            if (v - JESTER_MISSING).abs() <= JESTER_MISSING_TOLERANCE {
                row.push(None);
            } else if RatingScale::Jester.contains(v) {
                row.push(Some(v));
            } else {
                return Err(Error::RatingOutOfRange { line: lineno, value: v });
            }
        }
        rows.push(row);
    }
    let n_items = width.map_or(0, |w| w - 1);
    let mut m = RatingsMatrix::with_ids(
        RatingScale::Jester,
        (1..=rows.len() as u64).collect(),
        (1..=n_items as u64).collect(),
    );
    for (u, row) in rows.into_iter().enumerate() {
        m.ratings[u] = row.into_iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r))).collect();
    }
    Ok(m)
}

/// Writes the Jester layout back; `read_jester` of the output reproduces `m`
/// when its ids are the dense `1..` numbering.
pub fn write_jester<W: Write>(m: &RatingsMatrix, mut out: W) -> Result<()> {
    for u in 0..m.n_users() {
        let mut line = m.count(u).to_string();
        for i in 0..m.n_items() {
            line.push(',');
            match m.rating(u, i) {
                Some(r) => line.push_str(&r.to_string()),
                None => line.push_str("99"),
            }
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Loads MovieLens `UserID::MovieID::Rating::Timestamp` lines.
pub fn load_movielens(path: impl AsRef<Path>) -> Result<RatingsMatrix> {
    read_movielens(BufReader::new(File::open(path)?))
}

pub fn read_movielens<R: BufRead>(reader: R) -> Result<RatingsMatrix> {
    let mut triples = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split("::").collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 4 '::'-separated fields, found {}", fields.len()),
            });
        }
        let id = |f: &str| {
            f.parse::<u64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad id {f:?}: {e}"),
            })
        };
        let (user, item) = (id(fields[0])?, id(fields[1])?);
        let rating = parse_f64(fields[2], lineno)?;
        if !RatingScale::MovieLens.contains(rating) {
            return Err(Error::RatingOutOfRange { line: lineno, value: rating });
        }
        if !seen.insert((user, item)) {
            return Err(Error::DuplicateRating { line: lineno, user, item });
        }
        triples.push((user, item, rating));
    }
    RatingsMatrix::from_triples(RatingScale::MovieLens, triples)
}

/// Writes MovieLens lines with a zero timestamp.
pub fn write_movielens<W: Write>(m: &RatingsMatrix, mut out: W) -> Result<()> {
    for u in 0..m.n_users() {
        for (&i, &r) in m.user_ratings(u) {
            writeln!(out, "{}::{}::{}::0", m.user_id(u), m.item_id(i), r)?;
        }
    }
    Ok(())
}

/// Reference-user groups by number of rated items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserGroup {
    #[serde(rename = "20-40")]
    Low,
    #[serde(rename = "40-60")]
    Mid,
    #[serde(rename = "60-80")]
    High,
}

impl UserGroup {
    pub const ALL: [UserGroup; 3] = [UserGroup::Low, UserGroup::Mid, UserGroup::High];

    /// Inclusive count bounds.
    pub fn bounds(&self) -> (usize, usize) {
        match self {
            UserGroup::Low => (20, 40),
            UserGroup::Mid => (40, 60),
            UserGroup::High => (60, 80),
        }
    }

    /// Group of a user with `count` ratings; boundary counts go to the lower group.
    pub fn classify(count: usize) -> Option<Self> {
        Self::ALL.into_iter().find(|g| {
            let (lo, hi) = g.bounds();
            (lo..=hi).contains(&count)
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            UserGroup::Low => "20-40",
            UserGroup::Mid => "40-60",
            UserGroup::High => "60-80",
        }
    }

    pub fn members(&self, ratings: &RatingsMatrix) -> Vec<usize> {
        (0..ratings.n_users())
            .filter(|&u| UserGroup::classify(ratings.count(u)) == Some(*self))
            .collect()
    }
}

impl fmt::Display for UserGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for UserGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|g| g.label() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown user group {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaskSpec {
    /// Group the reference users are drawn from.
    pub group: UserGroup,
    pub n_reference: usize,
    pub n_test_users: usize,
    /// Inclusive rating-count range for eligible test users.
    pub test_user_rating_range: (usize, usize),
    pub seed: u64,
    pub repeats: usize,
}

impl Default for TaskSpec {
    fn default() -> Self {
        Self::desk(UserGroup::Low)
    }
}

impl TaskSpec {
    pub fn desk(group: UserGroup) -> Self {
        Self {
            group,
            n_reference: 100,
            n_test_users: 30,
            test_user_rating_range: (50, 300),
            seed: 0,
            repeats: 3,
        }
    }

    pub fn paper_scale(group: UserGroup) -> Self {
        Self {
            n_reference: 300,
            n_test_users: 300,
            repeats: 10,
            ..Self::desk(group)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.test_user_rating_range;
        if self.n_reference == 0 || self.n_test_users == 0 || self.repeats == 0 || lo > hi {
            return Err(Error::InvalidParameter(format!("inconsistent task spec {self:?}")));
        }
        Ok(())
    }
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 { (v[mid - 1] + v[mid]) / 2.0 } else { v[mid] })
}

/// Item features from the given reference users, median-imputed.
pub fn reference_features(ratings: &RatingsMatrix, references: &[usize], item: usize) -> Vec<f64> {
    references
        .iter()
        .map(|&u| {
            ratings.rating(u, item).unwrap_or_else(|| {
                let observed: Vec<f64> = ratings.user_ratings(u).values().copied().collect();
                median(&observed).unwrap_or(0.0)
            })
        })
        .collect()
}

/// Builds the `(train, test)` halves for one test user.
///
/// Reference users are drawn uniformly without replacement from the task's
/// group, never including the test user. Items are split uniformly at random;
/// an odd count puts the extra item in the training half.
pub fn build_user_task<R: Rng + ?Sized>(
    ratings: &RatingsMatrix,
    spec: &TaskSpec,
    test_user: usize,
    rng: &mut R,
) -> Result<(ScoredDataset, ScoredDataset)> {
    spec.validate()?;
    if test_user >= ratings.n_users() {
        return Err(Error::IndexOutOfRange {
            index: test_user,
            len: ratings.n_users(),
        });
    }
    let rated = ratings.user_ratings(test_user);
    if rated.len() < 2 {
        return Err(Error::InvalidDataset(format!(
            "test user {} has {} ratings, need at least 2",
            ratings.user_id(test_user),
            rated.len()
        )));
    }
    let pool: Vec<usize> = spec.group.members(ratings).into_iter().filter(|&u| u != test_user).collect();
    if pool.len() < spec.n_reference {
        return Err(Error::InvalidDataset(format!(
            "group {} has {} reference users, need {}",
            spec.group,
            pool.len(),
            spec.n_reference
        )));
    }
    let mut references: Vec<usize> = sample(rng, pool.len(), spec.n_reference).into_iter().map(|i| pool[i]).collect();
    references.sort_unstable();

    let medians: Vec<f64> = references
        .iter()
        .map(|&u| median(&ratings.user_ratings(u).values().copied().collect::<Vec<_>>()).unwrap_or(0.0))
        .collect();
    let group_id = ratings.user_id(test_user);
    let points: Vec<DataPoint> = rated
        .iter()
        .map(|(&item, &score)| {
            let features = references
                .iter()
                .zip(&medians)
                .map(|(&u, &med)| ratings.rating(u, item).unwrap_or(med))
                .collect();
            DataPoint::scored(group_id, ratings.item_id(item), features, score)
        })
        .collect();

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(rng);
    let n_train = points.len().div_ceil(2);
    let mut train_idx = order[..n_train].to_vec();
    let mut test_idx = order[n_train..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| ScoredDataset::new(idx.iter().map(|&i| points[i].clone()).collect());
    Ok((pick(&train_idx)?, pick(&test_idx)?))
}

/// Random partition of `train` into a scored part of about `fraction · n`
/// points and an unscored remainder.
pub fn split_for_semisupervised<R: Rng + ?Sized>(
    train: &ScoredDataset,
    fraction: f64,
    rng: &mut R,
) -> Result<(ScoredDataset, UnscoredDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidParameter(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    let n = train.len();
    let k = ((fraction * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut scored_idx = order[..k].to_vec();
    let mut unscored_idx = order[k..].to_vec();
    scored_idx.sort_unstable();
    unscored_idx.sort_unstable();
    if scored_idx.is_empty() {
        return Err(Error::InvalidDataset("scored split is empty".into()));
    }
    let scored = train.subset(&scored_idx)?;
    if !scored.has_relevant_pair() {
        return Err(Error::InvalidDataset("scored split has fewer than 2 points in every group".into()));
    }
    let unscored = UnscoredDataset::new(unscored_idx.iter().map(|&i| train.points()[i].clone()).collect())?;
    Ok((scored, unscored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jester_row() {
        let m = read_jester("2,99,4.5,-3.2\n".as_bytes()).unwrap();
        assert_eq!(m.n_items(), 3);
        assert_eq!(m.count(0), 2);
        assert_eq!(m.rating(0, 1), Some(4.5));
        assert_eq!(m.rating(0, 2), Some(-3.2));
        assert_eq!(m.item_id(1), 2);
    }

    #[test]
    fn jester_all_missing_kept() {
        let m = read_jester("0,99,99,99\n5,1,2,3\n".as_bytes()).unwrap();
        assert_eq!(m.n_users(), 2);
        assert_eq!(m.count(0), 0);
    }

    #[test]
    fn jester_errors() {
        assert!(matches!(read_jester("1,2,3\n1,2\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_jester("1,abc\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_jester("1,10.5\n".as_bytes()), Err(Error::RatingOutOfRange { .. })));
    }

    #[test]
    fn movielens_lines() {
        let m = read_movielens("1::1193::5::978300760\n".as_bytes()).unwrap();
        assert_eq!((m.user_id(0), m.item_id(0), m.rating(0, 0)), (1, 1193, Some(5.0)));
        assert!(matches!(read_movielens("1::2::6::0\n".as_bytes()), Err(Error::RatingOutOfRange { .. })));
        assert!(matches!(read_movielens("1::2::3.5::0\n".as_bytes()), Err(Error::RatingOutOfRange { .. })));
        assert!(matches!(
            read_movielens("1::2::3::0\n1::2::4::5\n".as_bytes()),
            Err(Error::DuplicateRating { line: 2, .. })
        ));
        assert!(matches!(read_movielens("1::2::3\n".as_bytes()), Err(Error::Parse { .. })));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[-10.0, 0.0, 4.0]), Some(0.0));
        assert_eq!(median(&[1.0, 5.0]), Some(3.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn groups() {
        assert_eq!(UserGroup::classify(20), Some(UserGroup::Low));
        assert_eq!(UserGroup::classify(40), Some(UserGroup::Low));
        assert_eq!(UserGroup::classify(41), Some(UserGroup::Mid));
        assert_eq!(UserGroup::classify(60), Some(UserGroup::Mid));
        assert_eq!(UserGroup::classify(80), Some(UserGroup::High));
        assert_eq!(UserGroup::classify(19), None);
        assert_eq!(UserGroup::classify(81), None);
        assert_eq!("40-60".parse::<UserGroup>().unwrap(), UserGroup::Mid);
    }

    #[test]
    fn semisupervised_split_cardinality() {
        let pts = (0..10).map(|i| DataPoint::scored(3, i, vec![i as f64], i as f64)).collect();
        let ds = ScoredDataset::new(pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (s, u) = split_for_semisupervised(&ds, 0.5, &mut rng).unwrap();
        assert_eq!((s.len(), u.len()), (5, 5));
        let mut items: Vec<u64> = s.points().iter().chain(u.points()).map(|p| p.item_id).collect();
        items.sort_unstable();
        assert_eq!(items, (0..10).collect::<Vec<_>>());
        assert!(u.points().iter().all(|p| p.score.is_none() && p.group_id == 3));
        assert!(split_for_semisupervised(&ds, 1.0, &mut rng).is_err());
    }
}
