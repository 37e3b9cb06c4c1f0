//! From-scratch random-forest engine.
//!
//! Trees are binary, grown best-first under a total node budget: the frontier
//! node whose best split removes the most impurity is expanded next, which is
//! what makes a `max_nodes` cap meaningful as the only size control. Forests
//! bag rows with replacement and subsample features once per tree. Everything
//! is deterministic given the hyperparameter seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{check_same_schema, Dataset, FeatureView};
use crate::error::{Error, Result};
use crate::seeding::derive_seed;

/// Numerical floor for accepting a split: guards against decreases that are
/// pure floating-point residue of an exactly-zero gain.
pub const MIN_DECREASE: f64 = 1e-12;

/// Seed-derivation tag for per-tree RNG streams ("TREE" in ASCII).
const TREE_STREAM: u64 = 0x5452_4545;

// ── Hyperparameters ──────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitCriterion {
    Gini,
    InformationGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    /// Bootstrap size as a fraction of the training rows, in (0, 1].
    pub bagging_ratio: f64,
    /// Fraction of features available to each tree, in (0, 1].
    pub feature_ratio: f64,
    /// Total node budget per tree (internal + leaf), ≥ 3.
    pub max_nodes: usize,
    pub min_leaf_samples: usize,
    pub criterion: SplitCriterion,
    pub seed: u64,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        ForestHyperparams {
            n_trees: 50,
            bagging_ratio: 1.0,
            feature_ratio: 0.3,
            max_nodes: 100,
            min_leaf_samples: 1,
            criterion: SplitCriterion::Gini,
            seed: 0,
        }
    }
}

impl ForestHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidHyperparameter("n_trees must be >= 1".into()));
        }
        if !(self.bagging_ratio > 0.0 && self.bagging_ratio <= 1.0) {
            return Err(Error::InvalidHyperparameter(
                "bagging_ratio must lie in (0, 1]".into(),
            ));
        }
        if !(self.feature_ratio > 0.0 && self.feature_ratio <= 1.0) {
            return Err(Error::InvalidHyperparameter(
                "feature_ratio must lie in (0, 1]".into(),
            ));
        }
        if self.max_nodes < 3 {
            return Err(Error::InvalidHyperparameter("max_nodes must be >= 3".into()));
        }
        if self.min_leaf_samples == 0 {
            return Err(Error::InvalidHyperparameter(
                "min_leaf_samples must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Copy with a different seed; sweeps derive per-cell seeds this way.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

// ── Impurity ─────────────────────────────────────────────────────────────

/// Impurity of a node described by its label counts. Both the split search
/// and the test oracles compute impurity through this one function, so equal
/// counts give bit-identical values.
pub fn impurity_from_counts(ones: usize, n: usize, criterion: SplitCriterion) -> f64 {
    debug_assert!(n > 0 && ones <= n);
    let q = ones as f64 / n as f64;
    match criterion {
        SplitCriterion::Gini => 1.0 - q * q - (1.0 - q) * (1.0 - q),
        SplitCriterion::InformationGain => {
            if ones == 0 || ones == n {
                0.0
            } else {
                let p = q;
                let r = 1.0 - q;
                -(p * p.ln() + r * r.ln())
            }
        }
    }
}

/// Binary Gini impurity `1 - q^2 - (1-q)^2` of a label vector.
pub fn gini_impurity(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let ones = labels.iter().map(|&y| usize::from(y)).sum();
    Ok(impurity_from_counts(ones, labels.len(), SplitCriterion::Gini))
}

/// Binary entropy of the label mean, natural log, with H(0) = H(1) = 0.
pub fn entropy(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let ones = labels.iter().map(|&y| usize::from(y)).sum();
    Ok(impurity_from_counts(ones, labels.len(), SplitCriterion::InformationGain))
}

// ── Split search ─────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub decrease: f64,
}

/// Midpoint threshold between two consecutive distinct sorted values. If the
/// midpoint rounds up to `hi` (adjacent floats), fall back to `lo` so the
/// `value <= threshold` rule still separates the two.
fn candidate_threshold(lo: f64, hi: f64) -> f64 {
    let mid = lo * 0.5 + hi * 0.5;
    if mid < hi {
        mid
    } else {
        lo
    }
}

/// Greedy search over (feature, midpoint) candidates for the split with the
/// largest weighted impurity decrease.
///
/// Ties break toward the lowest feature index, then the lowest threshold.
/// Returns `None` when no candidate is feasible (min_leaf_samples) or none
/// removes strictly positive impurity. Binary {0,1} columns are evaluated by
/// counting rather than sorting; the arithmetic is identical.
pub fn best_split(
    data: &Dataset,
    rows: &[usize],
    feature_subset: &[usize],
    criterion: SplitCriterion,
    min_leaf_samples: usize,
) -> Option<Split> {
    let n = rows.len();
    let min_leaf = min_leaf_samples.max(1);
    if n < 2 * min_leaf {
        return None;
    }
    let total_ones: usize = rows.iter().map(|&i| usize::from(data.label(i))).sum();
    let parent = impurity_from_counts(total_ones, n, criterion);
    if parent <= 0.0 {
        return None;
    }

    let mut best: Option<Split> = None;
    let mut consider = |feature: usize, threshold: f64, left_n: usize, left_ones: usize| {
        let right_n = n - left_n;
        if left_n < min_leaf || right_n < min_leaf {
            return;
        }
        let left_imp = impurity_from_counts(left_ones, left_n, criterion);
        let right_imp = impurity_from_counts(total_ones - left_ones, right_n, criterion);
        let decrease = parent
            - (left_n as f64 / n as f64) * left_imp
            - (right_n as f64 / n as f64) * right_imp;
        // Strict `>` keeps the earliest candidate on exact ties, which is the
        // lowest feature index, then lowest threshold, in scan order.
        if decrease > MIN_DECREASE && best.as_ref().is_none_or(|b| decrease > b.decrease) {
            best = Some(Split { feature, threshold, decrease });
        }
    };

    let mut pairs: Vec<(f64, u8)> = Vec::with_capacity(n);
    for &feature in feature_subset {
        pairs.clear();
        let mut is_binary = true;
        for &i in rows {
            let v = data.row(i)[feature];
            if v != 0.0 && v != 1.0 {
                is_binary = false;
            }
            pairs.push((v, data.label(i)));
        }

        if is_binary {
            let mut left_n = 0;
            let mut left_ones = 0;
            for &(v, y) in &pairs {
                if v == 0.0 {
                    left_n += 1;
                    left_ones += usize::from(y);
                }
            }
            if left_n > 0 && left_n < n {
                consider(feature, candidate_threshold(0.0, 1.0), left_n, left_ones);
            }
            continue;
        }

        pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut left_n = 0;
        let mut left_ones = 0;
        for k in 0..n - 1 {
            left_n += 1;
            left_ones += usize::from(pairs[k].1);
            if pairs[k].0 < pairs[k + 1].0 {
                consider(
                    feature,
                    candidate_threshold(pairs[k].0, pairs[k + 1].0),
                    left_n,
                    left_ones,
                );
            }
        }
    }
    best
}

// ── Trees ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        /// Training rows that reached this node; weights the importance sum.
        count: usize,
        /// Weighted impurity decrease achieved by this split.
        decrease: f64,
    },
    Leaf {
        /// Mean training label of the rows in this leaf.
        value: f64,
        count: usize,
    },
}

impl Node {
    pub fn count(&self) -> usize {
        match *self {
            Node::Internal { count, .. } | Node::Leaf { count, .. } => count,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Nodes indexed by node id; the root is node 0.
    nodes: Vec<Node>,
    /// Features this tree was allowed to split on (sorted, distinct).
    feature_subset: Vec<usize>,
}

impl DecisionTree {
    /// Hand-built trees for tests; real construction goes through `fit_tree`
    /// and deserialization through serde (validated afterwards).
    #[cfg(test)]
    pub(crate) fn from_parts(nodes: Vec<Node>, feature_subset: Vec<usize>) -> Self {
        DecisionTree { nodes, feature_subset }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn feature_subset(&self) -> &[usize] {
        &self.feature_subset
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].is_leaf()).collect()
    }

    /// Smallest feature count a routed point must have.
    pub fn min_point_width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| match *n {
                Node::Internal { feature, .. } => feature + 1,
                Node::Leaf { .. } => 0,
            })
            .max()
            .unwrap_or(0)
    }

    /// Routes a point to its leaf id. Values equal to a threshold go left.
    pub fn route(&self, point: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { .. } => return id,
                Node::Internal { feature, threshold, left, right, .. } => {
                    id = if point[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn leaf_value(&self, id: usize) -> Option<f64> {
        match self.nodes.get(id) {
            Some(&Node::Leaf { value, .. }) => Some(value),
            _ => None,
        }
    }

    pub fn predict(&self, point: &[f64]) -> f64 {
        let id = self.route(point);
        self.leaf_value(id).expect("route always ends on a leaf")
    }
}

/// Frontier entry: nodes expand in order of decreasing split quality, with
/// the lower node id first on ties.
struct FrontierEntry {
    decrease: f64,
    node_id: usize,
}

impl PartialEq for FrontierEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for FrontierEntry {}
impl PartialOrd for FrontierEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FrontierEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.decrease
            .total_cmp(&other.decrease)
            .then_with(|| other.node_id.cmp(&self.node_id))
    }
}

fn leaf_from_rows(data: &Dataset, rows: &[usize]) -> Node {
    let ones: usize = rows.iter().map(|&i| usize::from(data.label(i))).sum();
    Node::Leaf { value: ones as f64 / rows.len() as f64, count: rows.len() }
}

/// Grows one tree best-first on the given rows (typically a bootstrap).
pub fn fit_tree(
    data: &Dataset,
    rows: &[usize],
    feature_subset: &[usize],
    hp: &ForestHyperparams,
) -> Result<DecisionTree> {
    hp.validate()?;
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if feature_subset.is_empty() {
        return Err(Error::InvalidHyperparameter("empty feature subset".into()));
    }
    if let Some(&f) = feature_subset.iter().find(|&&f| f >= data.n_cols()) {
        return Err(Error::DimensionMismatch { expected: data.n_cols(), got: f + 1 });
    }

    let mut nodes = vec![leaf_from_rows(data, rows)];
    let mut frontier = BinaryHeap::new();
    // Rows held by frontier leaves, indexed by node id; cleared on expansion.
    let mut pending: Vec<Option<(Split, Vec<usize>)>> = vec![None];

    if let Some(split) =
        best_split(data, rows, feature_subset, hp.criterion, hp.min_leaf_samples)
    {
        frontier.push(FrontierEntry { decrease: split.decrease, node_id: 0 });
        pending[0] = Some((split, rows.to_vec()));
    }

    while nodes.len() + 2 <= hp.max_nodes {
        let Some(entry) = frontier.pop() else { break };
        let (split, node_rows) = pending[entry.node_id]
            .take()
            .expect("frontier entries always have pending rows");

        let mut left_rows = Vec::new();
        let mut right_rows = Vec::new();
        for &i in &node_rows {
            if data.row(i)[split.feature] <= split.threshold {
                left_rows.push(i);
            } else {
                right_rows.push(i);
            }
        }
        debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

        let left_id = nodes.len();
        let right_id = left_id + 1;
        nodes.push(leaf_from_rows(data, &left_rows));
        nodes.push(leaf_from_rows(data, &right_rows));
        pending.push(None);
        pending.push(None);
        nodes[entry.node_id] = Node::Internal {
            feature: split.feature,
            threshold: split.threshold,
            left: left_id,
            right: right_id,
            count: node_rows.len(),
            decrease: split.decrease,
        };

        for (child_id, child_rows) in [(left_id, left_rows), (right_id, right_rows)] {
            if let Some(child_split) =
                best_split(data, &child_rows, feature_subset, hp.criterion, hp.min_leaf_samples)
            {
                frontier.push(FrontierEntry { decrease: child_split.decrease, node_id: child_id });
                pending[child_id] = Some((child_split, child_rows));
            }
        }
    }

    Ok(DecisionTree { nodes, feature_subset: feature_subset.to_vec() })
}

// ── Forests ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    trees: Vec<DecisionTree>,
    n_features: usize,
    feature_names: Vec<String>,
    hyperparams: ForestHyperparams,
}

impl Forest {
    /// Hand-built forests for tests; see [`DecisionTree::from_parts`].
    #[cfg(test)]
    pub(crate) fn from_parts(
        trees: Vec<DecisionTree>,
        n_features: usize,
        feature_names: Vec<String>,
        hyperparams: ForestHyperparams,
    ) -> Self {
        Forest { trees, n_features, feature_names, hyperparams }
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn hyperparams(&self) -> &ForestHyperparams {
        &self.hyperparams
    }

    /// Mean of per-tree leaf values for one point.
    pub fn predict(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                got: point.len(),
            });
        }
        let sum: f64 = self.trees.iter().map(|t| t.predict(point)).sum();
        Ok(sum / self.trees.len() as f64)
    }

    /// Predicts every row of a feature view with the same column schema.
    pub fn predict_view(&self, view: FeatureView<'_>) -> Result<Vec<f64>> {
        check_same_schema(&self.feature_names, view.feature_names())?;
        (0..view.n_rows()).map(|i| self.predict(view.row(i))).collect()
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<f64>> {
        self.predict_view(data.feature_view())
    }
}

/// The bootstrap rows and feature subset tree `tree_index` trains on.
///
/// Public so that reproduction tooling (and tests) can re-derive exactly what
/// any tree saw from the hyperparameters alone.
pub fn tree_sampling_plan(
    n_rows: usize,
    n_cols: usize,
    hp: &ForestHyperparams,
    tree_index: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut rng =
        ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, &[TREE_STREAM, tree_index as u64]));
    let n_boot = ((hp.bagging_ratio * n_rows as f64).ceil() as usize).clamp(1, n_rows.max(1));
    let rows: Vec<usize> =
        (0..n_boot).map(|_| rand::Rng::random_range(&mut rng, 0..n_rows)).collect();
    let k = ((hp.feature_ratio * n_cols as f64).ceil() as usize).clamp(1, n_cols);
    let mut features = rand::seq::index::sample(&mut rng, n_cols, k).into_vec();
    features.sort_unstable();
    (rows, features)
}

/// Fits `hp.n_trees` bagged trees. Trees train in parallel; each draws its
/// own seeded RNG, so the result is independent of scheduling.
pub fn fit_forest(data: &Dataset, hp: &ForestHyperparams) -> Result<Forest> {
    hp.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let trees: Vec<DecisionTree> = (0..hp.n_trees)
        .into_par_iter()
        .map(|b| {
            let (rows, features) = tree_sampling_plan(data.n_rows(), data.n_cols(), hp, b);
            fit_tree(data, &rows, &features, hp)
        })
        .collect::<Result<_>>()?;
    Ok(Forest {
        trees,
        n_features: data.n_cols(),
        feature_names: data.feature_names().to_vec(),
        hyperparams: *hp,
    })
}

/// Leaf id each row of `data` routes to in `tree`.
pub fn leaf_assignments(tree: &DecisionTree, data: &Dataset) -> Result<Vec<usize>> {
    if tree.min_point_width() > data.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: tree.min_point_width(),
            got: data.n_cols(),
        });
    }
    Ok((0..data.n_rows()).map(|i| tree.route(data.row(i))).collect())
}

/// Mean-decrease-impurity importance, length `n_features`, normalized to sum
/// to 1 (all zeros when no tree ever split).
pub fn feature_importance(forest: &Forest) -> Vec<f64> {
    let mut totals = vec![0.0; forest.n_features];
    for tree in &forest.trees {
        let root_count = tree.nodes[0].count() as f64;
        for node in &tree.nodes {
            if let Node::Internal { feature, count, decrease, .. } = *node {
                totals[feature] += (count as f64 / root_count) * decrease;
            }
        }
    }
    for t in totals.iter_mut() {
        *t /= forest.trees.len() as f64;
    }
    let sum: f64 = totals.iter().sum();
    if sum > 0.0 {
        for t in totals.iter_mut() {
            *t /= sum;
        }
    }
    totals
}

// ── Tests ────────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Source;
    use rand::Rng;

    const TOL: f64 = 1e-9;

    fn dataset(names: &[&str], rows: &[&[f64]], labels: &[u8]) -> Dataset {
        let features = rows.iter().flat_map(|r| r.iter().copied()).collect();
        Dataset::new(
            names.iter().map(|s| s.to_string()).collect(),
            features,
            labels.to_vec(),
            Source::R,
        )
        .unwrap()
    }

    fn all_rows(data: &Dataset) -> Vec<usize> {
        (0..data.n_rows()).collect()
    }

    fn small_hp() -> ForestHyperparams {
        ForestHyperparams { feature_ratio: 1.0, ..ForestHyperparams::default() }
    }

    #[test]
    fn gini_matches_hand_values() {
        assert!(gini_impurity(&[]).is_err());
        assert!((gini_impurity(&[0, 0, 0, 0]).unwrap() - 0.0).abs() < TOL);
        assert!((gini_impurity(&[0, 1]).unwrap() - 0.5).abs() < TOL);
        assert!((gini_impurity(&[1, 1, 1, 0]).unwrap() - 0.375).abs() < TOL);
    }

    #[test]
    fn entropy_matches_hand_values() {
        assert!(entropy(&[]).is_err());
        assert!((entropy(&[0, 1]).unwrap() - std::f64::consts::LN_2).abs() < TOL);
        assert!((entropy(&[1, 1, 1]).unwrap() - 0.0).abs() < TOL);
        let expected = -(0.25_f64 * 0.25_f64.ln() + 0.75 * 0.75_f64.ln());
        assert!((entropy(&[1, 0, 0, 0]).unwrap() - expected).abs() < TOL);
        assert!((expected - 0.5623).abs() < 1e-4);
    }

    #[test]
    fn best_split_finds_the_separating_midpoint() {
        let d = dataset(&["x"], &[&[0.0], &[0.0], &[1.0], &[1.0]], &[0, 0, 1, 1]);
        let s = best_split(&d, &all_rows(&d), &[0], SplitCriterion::Gini, 1).unwrap();
        assert_eq!(s.feature, 0);
        assert!((s.threshold - 0.5).abs() < TOL);
        assert!((s.decrease - 0.5).abs() < TOL);
    }

    #[test]
    fn best_split_declines_constant_or_pure_nodes() {
        let constant = dataset(&["x"], &[&[3.0], &[3.0], &[3.0]], &[0, 1, 1]);
        assert!(best_split(&constant, &all_rows(&constant), &[0], SplitCriterion::Gini, 1)
            .is_none());
        let pure = dataset(&["x"], &[&[0.0], &[1.0]], &[1, 1]);
        assert!(best_split(&pure, &all_rows(&pure), &[0], SplitCriterion::Gini, 1).is_none());
    }

    #[test]
    fn best_split_respects_min_leaf() {
        let d = dataset(&["x"], &[&[0.0], &[1.0], &[2.0], &[3.0]], &[0, 0, 0, 1]);
        // The pure threshold at 2.5 leaves one row on the right; min_leaf 2
        // forces the 1.5 midpoint instead.
        let s = best_split(&d, &all_rows(&d), &[0], SplitCriterion::Gini, 2).unwrap();
        assert!((s.threshold - 1.5).abs() < TOL);
        assert!(best_split(&d, &all_rows(&d), &[0], SplitCriterion::Gini, 3).is_none());
    }

    #[test]
    fn best_split_ties_break_low_feature_then_low_threshold() {
        // Both features separate the labels identically.
        let d = dataset(
            &["a", "b"],
            &[&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0]],
            &[0, 0, 1, 1],
        );
        let s = best_split(&d, &all_rows(&d), &[0, 1], SplitCriterion::Gini, 1).unwrap();
        assert_eq!(s.feature, 0);
    }

    /// Exhaustive enumeration oracle over all (feature, midpoint) pairs.
    fn brute_force_split(
        data: &Dataset,
        rows: &[usize],
        features: &[usize],
        criterion: SplitCriterion,
        min_leaf: usize,
    ) -> Option<Split> {
        let labels: Vec<u8> = rows.iter().map(|&i| data.label(i)).collect();
        let parent = gini_like(&labels, criterion)?;
        let mut best: Option<Split> = None;
        for &f in features {
            let mut values: Vec<f64> = rows.iter().map(|&i| data.row(i)[f]).collect();
            values.sort_unstable_by(f64::total_cmp);
            values.dedup();
            for w in values.windows(2) {
                let threshold = candidate_threshold(w[0], w[1]);
                let (mut lv, mut rv) = (Vec::new(), Vec::new());
                for &i in rows {
                    if data.row(i)[f] <= threshold {
                        lv.push(data.label(i));
                    } else {
                        rv.push(data.label(i));
                    }
                }
                if lv.len() < min_leaf || rv.len() < min_leaf {
                    continue;
                }
                let n = rows.len() as f64;
                let decrease = parent
                    - (lv.len() as f64 / n) * gini_like(&lv, criterion).unwrap()
                    - (rv.len() as f64 / n) * gini_like(&rv, criterion).unwrap();
                if decrease > MIN_DECREASE && best.as_ref().is_none_or(|b| decrease > b.decrease)
                {
                    best = Some(Split { feature: f, threshold, decrease });
                }
            }
        }
        best
    }

    fn gini_like(labels: &[u8], criterion: SplitCriterion) -> Option<f64> {
        match criterion {
            SplitCriterion::Gini => gini_impurity(labels).ok(),
            SplitCriterion::InformationGain => entropy(labels).ok(),
        }
    }

    #[test]
    fn best_split_matches_brute_force_on_micro_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for case in 0..40 {
            let n = rng.random_range(2..=20);
            let p = rng.random_range(1..=3);
            let names: Vec<&str> = ["a", "b", "c"][..p].to_vec();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..p).map(|_| f64::from(rng.random_range(0..4)) / 2.0).collect())
                .collect();
            let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..2) as u8).collect();
            let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
            let d = dataset(&names, &row_refs, &labels);
            let features: Vec<usize> = (0..p).collect();
            let criterion = if case % 2 == 0 {
                SplitCriterion::Gini
            } else {
                SplitCriterion::InformationGain
            };
            let ours = best_split(&d, &all_rows(&d), &features, criterion, 1);
            let oracle = brute_force_split(&d, &all_rows(&d), &features, criterion, 1);
            match (ours, oracle) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    assert_eq!(a.feature, b.feature, "case {case}");
                    assert!((a.threshold - b.threshold).abs() <= 1e-12, "case {case}");
                    assert!((a.decrease - b.decrease).abs() <= 1e-12, "case {case}");
                }
                (a, b) => panic!("case {case}: {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn fit_tree_separates_one_feature_data() {
        let d = dataset(&["x"], &[&[0.1], &[0.2], &[0.8], &[0.9]], &[0, 0, 1, 1]);
        let tree = fit_tree(&d, &all_rows(&d), &[0], &small_hp()).unwrap();
        assert_eq!(tree.n_nodes(), 3);
        assert_eq!(tree.predict(&[0.0]), 0.0);
        assert_eq!(tree.predict(&[1.0]), 1.0);
    }

    #[test]
    fn fit_tree_on_pure_labels_is_a_single_leaf() {
        let d = dataset(&["x"], &[&[0.1], &[0.9]], &[1, 1]);
        let tree = fit_tree(&d, &all_rows(&d), &[0], &small_hp()).unwrap();
        assert_eq!(tree.n_nodes(), 1);
        assert_eq!(tree.predict(&[0.5]), 1.0);
    }

    #[test]
    fn greedy_growth_stops_on_balanced_xor() {
        // Both root candidates on 4-point XOR have exactly zero gain, so the
        // strictly-positive-decrease rule leaves a single root leaf.
        let d = dataset(
            &["a", "b"],
            &[&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]],
            &[0, 1, 1, 0],
        );
        let hp = ForestHyperparams { max_nodes: 7, ..small_hp() };
        let tree = fit_tree(&d, &all_rows(&d), &[0, 1], &hp).unwrap();
        assert_eq!(tree.n_nodes(), 1);
    }

    #[test]
    fn weighted_xor_is_separated_at_depth_two() {
        // Duplicating one corner tilts the root gain positive; the greedy
        // tree then reaches training accuracy 1.0 within a 7-node budget.
        let d = dataset(
            &["a", "b"],
            &[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]],
            &[0, 0, 1, 1, 0],
        );
        let hp = ForestHyperparams { max_nodes: 7, ..small_hp() };
        let tree = fit_tree(&d, &all_rows(&d), &[0, 1], &hp).unwrap();
        for i in 0..d.n_rows() {
            assert_eq!(tree.predict(d.row(i)), f64::from(d.label(i)), "row {i}");
        }
    }

    #[test]
    fn fit_tree_respects_max_nodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..200).map(|_| vec![rng.random::<f64>()]).collect();
        let labels: Vec<u8> = (0..200).map(|_| rng.random_range(0..2) as u8).collect();
        let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let d = dataset(&["x"], &row_refs, &labels);
        for max_nodes in [3, 5, 9, 33] {
            let hp = ForestHyperparams { max_nodes, ..small_hp() };
            let tree = fit_tree(&d, &all_rows(&d), &[0], &hp).unwrap();
            assert!(tree.n_nodes() <= max_nodes);
        }
    }

    #[test]
    fn accepted_splits_have_positive_decrease_and_consistent_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rows: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.random::<f64>(), f64::from(rng.random_range(0..2))])
            .collect();
        let labels: Vec<u8> =
            rows.iter().map(|r| u8::from(r[0] + 0.3 * r[1] > 0.6)).collect();
        let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let d = dataset(&["x", "z"], &row_refs, &labels);
        let tree = fit_tree(&d, &all_rows(&d), &[0, 1], &small_hp()).unwrap();
        for node in tree.nodes() {
            if let Node::Internal { left, right, count, decrease, .. } = *node {
                assert!(decrease > 0.0);
                assert_eq!(
                    tree.nodes()[left].count() + tree.nodes()[right].count(),
                    count,
                    "children partition the parent rows"
                );
            }
        }
    }

    #[test]
    fn unlimited_tree_reaches_zero_training_error() {
        // No two rows share features with different labels, so capacity
        // suffices for exact interpolation.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> =
            (0..64).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let labels: Vec<u8> = (0..64).map(|_| rng.random_range(0..2) as u8).collect();
        let row_refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let d = dataset(&["x", "y"], &row_refs, &labels);
        let hp = ForestHyperparams { max_nodes: usize::MAX, ..small_hp() };
        let tree = fit_tree(&d, &all_rows(&d), &[0, 1], &hp).unwrap();
        for i in 0..d.n_rows() {
            assert_eq!(tree.predict(d.row(i)), f64::from(d.label(i)));
        }
    }

    fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let names: Vec<String> = (0..p).map(|j| format!("f{j}")).collect();
        let features: Vec<f64> = (0..n * p).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<u8> = (0..n)
            .map(|i| u8::from(features[i * p] > 0.5 && rng.random::<f64>() > 0.2))
            .collect();
        Dataset::new(names, features, labels, Source::R).unwrap()
    }

    #[test]
    fn degenerate_forest_equals_its_single_tree() {
        let d = random_dataset(60, 2, 21);
        let hp = ForestHyperparams {
            n_trees: 1,
            bagging_ratio: 1.0,
            feature_ratio: 1.0,
            seed: 9,
            ..ForestHyperparams::default()
        };
        let forest = fit_forest(&d, &hp).unwrap();
        let (rows, feats) = tree_sampling_plan(d.n_rows(), d.n_cols(), &hp, 0);
        let tree = fit_tree(&d, &rows, &feats, &hp).unwrap();
        for i in 0..d.n_rows() {
            assert_eq!(forest.predict(d.row(i)).unwrap(), tree.predict(d.row(i)));
        }
    }

    #[test]
    fn forests_are_bit_identical_across_runs() {
        let d = random_dataset(80, 3, 2);
        let hp = ForestHyperparams { n_trees: 5, seed: 31, ..ForestHyperparams::default() };
        assert_eq!(fit_forest(&d, &hp).unwrap(), fit_forest(&d, &hp).unwrap());
    }

    #[test]
    fn all_zero_labels_predict_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let features: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let d = Dataset::new(vec!["x".into()], features, vec![0; 50], Source::R).unwrap();
        let hp = ForestHyperparams { n_trees: 3, ..ForestHyperparams::default() };
        let forest = fit_forest(&d, &hp).unwrap();
        assert_eq!(forest.predict(&[0.4]).unwrap(), 0.0);
    }

    #[test]
    fn predict_averages_trees_and_routes_ties_left() {
        let t1 = DecisionTree::from_parts(vec![Node::Leaf { value: 0.2, count: 1 }], vec![]);
        let t2 = DecisionTree::from_parts(
            vec![
                Node::Internal {
                    feature: 0,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    count: 2,
                    decrease: 0.5,
                },
                Node::Leaf { value: 0.6, count: 1 },
                Node::Leaf { value: 0.9, count: 1 },
            ],
            vec![0],
        );
        let forest = Forest::from_parts(
            vec![t1.clone(), t2.clone()],
            1,
            vec!["x".into()],
            ForestHyperparams::default(),
        );
        // On-threshold point routes left in t2: (0.2 + 0.6) / 2.
        assert!((forest.predict(&[0.5]).unwrap() - 0.4).abs() < TOL);
        assert!((forest.predict(&[0.51]).unwrap() - 0.55).abs() < TOL);
        assert!(forest.predict(&[0.5, 0.5]).is_err());

        let single = Forest::from_parts(
            vec![DecisionTree::from_parts(vec![Node::Leaf { value: 0.7, count: 1 }], vec![])],
            1,
            vec!["x".into()],
            ForestHyperparams::default(),
        );
        assert_eq!(single.predict(&[123.0]).unwrap(), 0.7);

        // Tree order does not change the average.
        let swapped =
            Forest::from_parts(vec![t2, t1], 1, vec!["x".into()], ForestHyperparams::default());
        assert_eq!(forest.predict(&[0.3]).unwrap(), swapped.predict(&[0.3]).unwrap());
    }

    #[test]
    fn leaf_assignments_partition_rows() {
        let d = random_dataset(40, 2, 77);
        let hp = ForestHyperparams { n_trees: 2, feature_ratio: 1.0, ..Default::default() };
        let forest = fit_forest(&d, &hp).unwrap();
        for tree in forest.trees() {
            let assign = leaf_assignments(tree, &d).unwrap();
            assert_eq!(assign.len(), d.n_rows());
            for &id in &assign {
                assert!(tree.nodes()[id].is_leaf());
            }
        }

        let single = DecisionTree::from_parts(vec![Node::Leaf { value: 0.0, count: 3 }], vec![]);
        let three = dataset(&["x"], &[&[1.0], &[2.0], &[3.0]], &[0, 0, 1]);
        assert_eq!(leaf_assignments(&single, &three).unwrap(), vec![0, 0, 0]);

        let empty = Dataset::new(vec!["x".into()], vec![], vec![], Source::R).unwrap();
        assert!(leaf_assignments(&single, &empty).unwrap().is_empty());
    }

    #[test]
    fn leaf_assignments_checks_dimensions() {
        let stump = DecisionTree::from_parts(
            vec![
                Node::Internal {
                    feature: 2,
                    threshold: 0.0,
                    left: 1,
                    right: 2,
                    count: 2,
                    decrease: 0.1,
                },
                Node::Leaf { value: 0.0, count: 1 },
                Node::Leaf { value: 1.0, count: 1 },
            ],
            vec![2],
        );
        let narrow = dataset(&["x"], &[&[1.0]], &[0]);
        assert!(matches!(
            leaf_assignments(&stump, &narrow),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn importance_of_leaf_only_forest_is_zero() {
        let d = dataset(&["x", "y"], &[&[0.0, 0.0], &[1.0, 1.0]], &[1, 1]);
        let hp = ForestHyperparams { n_trees: 3, feature_ratio: 1.0, ..Default::default() };
        let forest = fit_forest(&d, &hp).unwrap();
        assert_eq!(feature_importance(&forest), vec![0.0, 0.0]);
    }

    #[test]
    fn importance_concentrates_on_the_split_feature() {
        let stump = DecisionTree::from_parts(
            vec![
                Node::Internal {
                    feature: 2,
                    threshold: 0.5,
                    left: 1,
                    right: 2,
                    count: 4,
                    decrease: 0.5,
                },
                Node::Leaf { value: 0.0, count: 2 },
                Node::Leaf { value: 1.0, count: 2 },
            ],
            vec![2],
        );
        let forest = Forest::from_parts(
            vec![stump],
            4,
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            ForestHyperparams::default(),
        );
        assert_eq!(feature_importance(&forest), vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn importance_normalizes_to_one() {
        let d = random_dataset(150, 4, 13);
        let hp = ForestHyperparams { n_trees: 7, ..ForestHyperparams::default() };
        let forest = fit_forest(&d, &hp).unwrap();
        let imp = feature_importance(&forest);
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < TOL);
        assert!(imp.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn hyperparams_validate_ranges() {
        let bad = ForestHyperparams { n_trees: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ForestHyperparams { bagging_ratio: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ForestHyperparams { feature_ratio: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ForestHyperparams { max_nodes: 2, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ForestHyperparams { min_leaf_samples: 0, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(ForestHyperparams::default().validate().is_ok());
    }
}
