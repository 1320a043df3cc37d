//! CART classification trees with Gini splits, bagged into a random forest.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::seed::derive_seed;

use super::PrivacyError;

/// Smallest impurity decrease (in sample-weighted Gini units) that counts as
/// an improvement. Guards against splits that only win by rounding.
pub const MIN_IMPURITY_DECREASE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureSubsample {
    /// `ceil(sqrt(F))` features per split.
    Sqrt,
    All,
    Count(usize),
}

impl FeatureSubsample {
    pub fn size(self, n_features: usize) -> usize {
        let m = match self {
            FeatureSubsample::Sqrt => (n_features as f64).sqrt().ceil() as usize,
            FeatureSubsample::All => n_features,
            FeatureSubsample::Count(k) => k,
        };
        m.clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small to split.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub feature_subsample: FeatureSubsample,
    /// Train each tree on a bootstrap resample of size n. Disabling it gives
    /// every tree the full training set.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            feature_subsample: FeatureSubsample::Sqrt,
            bootstrap: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        /// Training samples per class that reached this leaf.
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Class with the most samples; ties go to the lowest class index.
fn argmax(counts: &[usize]) -> usize {
    let mut best = 0;
    for c in 1..counts.len() {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    nodes: Vec<Node>,
    seed: u64,
}

impl DecisionTree {
    /// Node 0 is the root.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn leaf_counts(&self, row: &[f64]) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict(&self, row: &[f64]) -> usize {
        argmax(self.leaf_counts(row))
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

/// `n * gini(counts)`, i.e. `n - sum(c^2) / n`.
pub fn weighted_gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

/// Threshold strictly between `lo < hi` that keeps `lo` left and `hi` right.
pub fn midpoint(lo: f64, hi: f64) -> f64 {
    let m = lo + (hi - lo) / 2.0;
    if m < hi {
        m
    } else {
        lo
    }
}

struct TreeBuilder<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [usize],
    n_classes: usize,
    params: &'a ForestParams,
    n_sub: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, samples: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &s in samples {
            c[self.labels[s]] += 1;
        }
        c
    }

    fn best_split(&mut self, samples: &[usize], total: &[usize]) -> Option<BestSplit> {
        let n_features = self.rows[0].len();
        let mut features = sample(&mut self.rng, n_features, self.n_sub).into_vec();
        features.sort_unstable();
        let min_leaf = self.params.min_samples_leaf.max(1);
        let n = samples.len();
        let mut best: Option<BestSplit> = None;
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(n);
        for f in features {
            order.clear();
            order.extend(samples.iter().map(|&s| (self.rows[s][f], self.labels[s])));
            order.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0usize; self.n_classes];
            for i in 0..n - 1 {
                left[order[i].1] += 1;
                let (nl, nr) = (i + 1, n - i - 1);
                if order[i].0 == order[i + 1].0 || nl < min_leaf || nr < min_leaf {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let score = weighted_gini(&left, nl) + weighted_gini(&right, nr);
                if best.as_ref().is_none_or(|b| score < b.score) {
                    best = Some(BestSplit {
                        score,
                        feature: f,
                        threshold: midpoint(order[i].0, order[i + 1].0),
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, samples: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&samples);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_reached = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_reached || samples.len() < 2 * self.params.min_samples_leaf.max(1) {
            return id;
        }
        let parent = weighted_gini(&counts, samples.len());
        let Some(split) = self.best_split(&samples, &counts) else {
            return id;
        };
        if split.score >= parent - MIN_IMPURITY_DECREASE {
            return id;
        }
        let (l, r): (Vec<usize>, Vec<usize>) = samples
            .into_iter()
            .partition(|&s| self.rows[s][split.feature] <= split.threshold);
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub params: ForestParams,
    pub n_features: usize,
    pub n_classes: usize,
    pub seed: u64,
}

fn validate(rows: &[Vec<f64>], labels: &[usize]) -> Result<(usize, usize), PrivacyError> {
    if rows.len() != labels.len() {
        return Err(PrivacyError::LengthMismatch {
            rows: rows.len(),
            labels: labels.len(),
        });
    }
    if rows.len() < 2 {
        return Err(PrivacyError::TooFewRows(rows.len()));
    }
    let n_features = rows[0].len();
    if let Some(r) = rows.iter().find(|r| r.len() != n_features) {
        return Err(PrivacyError::DimensionMismatch {
            expected: n_features,
            found: r.len(),
        });
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut present = vec![false; n_classes];
    for &l in labels {
        present[l] = true;
    }
    if present.iter().filter(|p| **p).count() < 2 {
        return Err(PrivacyError::DegenerateLabels);
    }
    Ok((n_features, n_classes))
}

/// Trains `params.n_trees` trees; tree `i` draws all its randomness from
/// `derive_seed(seed, i)`, so the result does not depend on scheduling.
pub fn train_forest(
    rows: &[Vec<f64>],
    labels: &[usize],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel, PrivacyError> {
    let (n_features, n_classes) = validate(rows, labels)?;
    if n_features == 0 {
        return Err(PrivacyError::NoFeatures);
    }
    let n = rows.len();
    let n_sub = params.feature_subsample.size(n_features);
    let trees = (0..params.n_trees.max(1))
        .into_par_iter()
        .map(|t| {
            let tree_seed = derive_seed(seed, t as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(tree_seed);
            let samples: Vec<usize> = if params.bootstrap {
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            let mut builder = TreeBuilder {
                rows,
                labels,
                n_classes,
                params,
                n_sub,
                rng,
                nodes: Vec::new(),
            };
            builder.build(samples, 0);
            DecisionTree {
                nodes: builder.nodes,
                seed: tree_seed,
            }
        })
        .collect();
    Ok(ForestModel {
        trees,
        params: *params,
        n_features,
        n_classes,
        seed,
    })
}

/// Majority vote over the trees; ties go to class 0.
pub fn forest_predict(model: &ForestModel, row: &[f64]) -> Result<usize, PrivacyError> {
    if row.len() != model.n_features {
        return Err(PrivacyError::DimensionMismatch {
            expected: model.n_features,
            found: row.len(),
        });
    }
    let mut votes = vec![0usize; model.n_classes];
    for tree in &model.trees {
        votes[tree.predict(row)] += 1;
    }
    Ok(argmax(&votes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_tree() -> ForestParams {
        ForestParams {
            n_trees: 1,
            feature_subsample: FeatureSubsample::All,
            bootstrap: false,
            ..Default::default()
        }
    }

    #[test]
    fn threshold_label_is_learned_exactly() {
        let rows: Vec<Vec<f64>> = (-10..10).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let labels: Vec<usize> = rows.iter().map(|r| (r[0] > 0.0) as usize).collect();
        let m = train_forest(&rows, &labels, &single_tree(), 1).unwrap();
        for (r, &l) in rows.iter().zip(&labels) {
            assert_eq!(forest_predict(&m, r).unwrap(), l);
        }
        assert_eq!(
            m.trees[0].nodes()[0],
            Node::Split {
                feature: 0,
                threshold: 0.5,
                left: 1,
                right: 2
            }
        );
    }

    #[test]
    fn constant_features_give_majority_leaf() {
        let rows = vec![vec![1.0, 2.0]; 5];
        let labels = vec![1, 1, 0, 1, 0];
        let m = train_forest(&rows, &labels, &ForestParams { n_trees: 10, ..Default::default() }, 3).unwrap();
        for tree in &m.trees {
            assert_eq!(tree.nodes().len(), 1);
        }
        assert_eq!(forest_predict(&m, &[1.0, 2.0]).unwrap(), 1);
    }

    #[test]
    fn gini_arithmetic() {
        assert_eq!(weighted_gini(&[2, 2], 4) / 4.0, 0.5);
        assert_eq!(weighted_gini(&[2, 0], 2) + weighted_gini(&[0, 2], 2), 0.0);
    }

    #[test]
    fn leaf_counts_sum_to_samples() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 3) as f64]).collect();
        let labels: Vec<usize> = (0..40).map(|i| (i % 2) as usize).collect();
        let m = train_forest(&rows, &labels, &ForestParams { n_trees: 5, ..Default::default() }, 11).unwrap();
        for tree in &m.trees {
            let total: usize = tree
                .nodes()
                .iter()
                .filter_map(|n| match n {
                    Node::Leaf { counts } => Some(counts.iter().sum::<usize>()),
                    _ => None,
                })
                .sum();
            assert_eq!(total, 40);
        }
    }

    #[test]
    fn max_depth_and_min_leaf_are_respected() {
        let rows: Vec<Vec<f64>> = (0..64).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..64).map(|i| (i % 2) as usize).collect();
        let params = ForestParams {
            max_depth: Some(3),
            ..single_tree()
        };
        assert!(train_forest(&rows, &labels, &params, 0).unwrap().trees[0].depth() <= 3);
        let params = ForestParams {
            min_samples_leaf: 10,
            ..single_tree()
        };
        let m = train_forest(&rows, &labels, &params, 0).unwrap();
        for n in m.trees[0].nodes() {
            if let Node::Leaf { counts } = n {
                assert!(counts.iter().sum::<usize>() >= 10);
            }
        }
    }

    fn stub(votes: &[usize]) -> ForestModel {
        ForestModel {
            trees: votes
                .iter()
                .map(|&c| DecisionTree {
                    nodes: vec![Node::Leaf {
                        counts: if c == 0 { vec![1, 0] } else { vec![0, 1] },
                    }],
                    seed: 0,
                })
                .collect(),
            params: ForestParams::default(),
            n_features: 1,
            n_classes: 2,
            seed: 0,
        }
    }

    #[test]
    fn vote_rules() {
        assert_eq!(forest_predict(&stub(&[1, 1, 1]), &[0.0]).unwrap(), 1);
        assert_eq!(forest_predict(&stub(&[1]), &[0.0]).unwrap(), 1);
        assert_eq!(forest_predict(&stub(&[1, 0, 1, 0]), &[0.0]).unwrap(), 0);
        assert!(matches!(
            forest_predict(&stub(&[1]), &[0.0, 1.0]),
            Err(PrivacyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            train_forest(&[vec![1.0], vec![2.0]], &[1, 1], &ForestParams::default(), 0),
            Err(PrivacyError::DegenerateLabels)
        ));
        assert!(matches!(
            train_forest(&[vec![1.0]], &[1], &ForestParams::default(), 0),
            Err(PrivacyError::TooFewRows(1))
        ));
    }

    #[test]
    fn midpoint_stays_between_neighbours() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let m = midpoint(a, b);
        assert!(a <= m && m < b);
    }
}
