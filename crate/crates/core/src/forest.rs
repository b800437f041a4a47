//! Random forest of Gini-split decision trees, exposed to the explainer only
//! through the [`BlackBox`] trait.

use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng as _;

use crate::data::ReleaseDataset;
use crate::error::{Error, Result};
use crate::metrics::{DEFAULT_FEATURES_PER_SPLIT, FEATURE_COUNT};
use crate::seed;

/// The only view of a model that explanation code may use.
pub trait BlackBox {
    fn feature_count(&self) -> usize;

    /// Probability of class 1 (defective).
    fn predict_proba(&self, features: &[f64]) -> Result<f64>;

    fn predict(&self, features: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict_proba(features)? >= 0.5))
    }
}

impl<B: BlackBox + ?Sized> BlackBox for &B {
    fn feature_count(&self) -> usize {
        (**self).feature_count()
    }

    fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        (**self).predict_proba(features)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForestParams {
    pub tree_count: usize,
    /// `None` grows trees until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub features_per_split: usize,
    pub min_leaf: usize,
    /// Train each tree on a bootstrap resample (otherwise on all rows).
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            tree_count: 100,
            max_depth: None,
            features_per_split: DEFAULT_FEATURES_PER_SPLIT,
            min_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::param("tree_count", "must be at least 1"));
        }
        if !(1..=FEATURE_COUNT).contains(&self.features_per_split) {
            return Err(Error::param("features_per_split", "must lie in [1, 20]"));
        }
        if self.min_leaf == 0 {
            return Err(Error::param("min_leaf", "must be at least 1"));
        }
        if self.max_depth == Some(0) {
            return Err(Error::param("max_depth", "must be at least 1 when set"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
enum Node {
    Leaf {
        label: u8,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Binary classification tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn leaf(label: u8) -> Self {
        DecisionTree { nodes: alloc::vec![Node::Leaf { label }] }
    }

    pub fn stump(feature: usize, threshold: f64, left_label: u8, right_label: u8) -> Self {
        DecisionTree {
            nodes: alloc::vec![
                Node::Split { feature, threshold, left: 1, right: 2 },
                Node::Leaf { label: left_label },
                Node::Leaf { label: right_label },
            ],
        }
    }

    pub fn predict(&self, features: &[f64]) -> u8 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { label } => return label,
                Node::Split { feature, threshold, left, right } => {
                    at = if features[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// The root split, if any.
    pub fn root_split(&self) -> Option<(usize, f64)> {
        match self.nodes[0] {
            Node::Split { feature, threshold, .. } => Some((feature, threshold)),
            Node::Leaf { .. } => None,
        }
    }
}

/// Majority-vote ensemble. `predict_proba` is the fraction of trees voting 1.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Classifier {
    trees: Vec<DecisionTree>,
    feature_count: usize,
}

impl Classifier {
    pub fn from_trees(trees: Vec<DecisionTree>, feature_count: usize) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::param("trees", "an ensemble needs at least one tree"));
        }
        Ok(Classifier { trees, feature_count })
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn votes(&self, features: &[f64]) -> Result<usize> {
        if features.len() != self.feature_count {
            return Err(Error::Dimension { expected: self.feature_count, found: features.len() });
        }
        Ok(self.trees.iter().filter(|t| t.predict(features) == 1).count())
    }
}

impl BlackBox for Classifier {
    fn feature_count(&self) -> usize {
        self.feature_count
    }

    fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        let p = self.votes(features)? as f64 / self.trees.len() as f64;
        assert!((0.0..=1.0).contains(&p), "vote fraction out of range: {p}");
        Ok(p)
    }
}

/// Rows are put in a canonical order (lexicographic on features, then label)
/// before resampling, so the fitted forest depends on the row multiset and
/// the seed only.
pub fn train_forest(data: &ReleaseDataset, params: &ForestParams) -> Result<Classifier> {
    params.validate()?;
    let d = data.feature_count();
    let defective = data.defective_count();
    if defective == 0 || defective == data.len() {
        return Err(Error::SingleClass);
    }

    let mut rows: Vec<(&[f64], u8)> = data.units().iter().map(|u| (u.features.as_slice(), u.label())).collect();
    rows.sort_by(|a, b| lexicographic(a.0, b.0).then(a.1.cmp(&b.1)));
    let x: Vec<&[f64]> = rows.iter().map(|r| r.0).collect();
    let y: Vec<u8> = rows.iter().map(|r| r.1).collect();

    let tree_master = seed::derive(params.seed, seed::stream::TREE);
    let trees = (0..params.tree_count)
        .map(|t| {
            let mut rng = seed::rng(seed::derive(tree_master, t as u64));
            let n = x.len();
            let mut sample: Vec<usize> =
                if params.bootstrap { (0..n).map(|_| rng.gen_range(0..n)).collect() } else { (0..n).collect() };
            let mut builder = TreeBuilder {
                x: &x,
                y: &y,
                feature_count: d,
                features_per_split: params.features_per_split.min(d),
                min_leaf: params.min_leaf,
                max_depth: params.max_depth,
                rng: &mut rng,
                nodes: Vec::new(),
            };
            builder.grow(&mut sample, 0);
            DecisionTree { nodes: builder.nodes }
        })
        .collect();
    Ok(Classifier { trees, feature_count: d })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (p, q) in a.iter().zip(b) {
        match p.total_cmp(q) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

pub(crate) fn gini(positives: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = positives as f64 / total as f64;
    2.0 * p * (1.0 - p)
}

const MIN_GAIN: f64 = 1e-12;

struct TreeBuilder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [u8],
    feature_count: usize,
    features_per_split: usize,
    min_leaf: usize,
    max_depth: Option<usize>,
    rng: &'a mut seed::Rng,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        let n = sample.len();
        let positives = sample.iter().filter(|&&i| self.y[i] == 1).count();
        let leaf = Node::Leaf { label: u8::from(2 * positives >= n) };
        self.nodes.push(leaf.clone());

        let at_depth_limit = self.max_depth.is_some_and(|m| depth >= m);
        if positives == 0 || positives == n || at_depth_limit || n < 2 * self.min_leaf {
            return id;
        }
        let Some((feature, threshold)) = self.best_split(sample, positives) else {
            return id;
        };

        sample.sort_by(|&a, &b| {
            let (l, r) = (self.x[a][feature] <= threshold, self.x[b][feature] <= threshold);
            r.cmp(&l)
        });
        let split_at = sample.iter().take_while(|&&i| self.x[i][feature] <= threshold).count();
        let (left_rows, right_rows) = sample.split_at_mut(split_at);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split { feature, threshold, left, right };
        id
    }

    /// Best Gini split over a random feature subset. Ties keep the lowest
    /// feature index, then the lowest threshold.
    fn best_split(&mut self, sample: &[usize], positives: usize) -> Option<(usize, f64)> {
        let mut candidates: Vec<usize> = (0..self.feature_count).collect();
        for i in 0..self.features_per_split {
            let j = self.rng.gen_range(i..self.feature_count);
            candidates.swap(i, j);
        }
        let mut chosen = candidates[..self.features_per_split].to_vec();
        chosen.sort_unstable();

        let n = sample.len();
        let parent = gini(positives, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order: Vec<(f64, u8)> = Vec::with_capacity(n);
        for feature in chosen {
            order.clear();
            order.extend(sample.iter().map(|&i| (self.x[i][feature], self.y[i])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for k in 0..n - 1 {
                left_pos += usize::from(order[k].1);
                let left_n = k + 1;
                if order[k].0 == order[k + 1].0 || left_n < self.min_leaf || n - left_n < self.min_leaf {
                    continue;
                }
                let right_n = n - left_n;
                let impurity =
                    (left_n as f64 * gini(left_pos, left_n) + right_n as f64 * gini(positives - left_pos, right_n)) / n as f64;
                let gain = parent - impurity;
                if best.is_none_or(|(g, _, _)| gain > g + MIN_GAIN) {
                    best = Some((gain, feature, midpoint(order[k].0, order[k + 1].0)));
                }
            }
        }
        best.filter(|(g, _, _)| *g > MIN_GAIN).map(|(_, f, t)| (f, t))
    }
}

/// Midpoint that still separates `lo` from `hi` under `<=`.
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m >= hi {
        lo
    } else {
        m
    }
}
