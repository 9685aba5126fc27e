//! Classifiers for estimating the base click probability p0: categorical
//! Naive Bayes, Gini decision trees, and bootstrap random forests.
//!
//! All features are categorical (category indices below a per-feature
//! arity); labels are binary. `estimate_p0` is the mean predicted class-1
//! probability over a sample of feature vectors.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Rows of categorical feature vectors with a binary class label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub feature_names: Vec<String>,
    pub feature_arity: Vec<usize>,
    pub rows: Vec<(Vec<usize>, u8)>,
}

impl LabeledDataset {
    pub fn validate(&self) -> Result<()> {
        if self.feature_names.len() != self.feature_arity.len() {
            return Err(Error::Input("feature name/arity length mismatch".into()));
        }
        for (features, label) in &self.rows {
            if features.len() != self.feature_arity.len() {
                return Err(Error::Input(format!(
                    "row has {} features, expected {}",
                    features.len(),
                    self.feature_arity.len()
                )));
            }
            for (j, &v) in features.iter().enumerate() {
                if v >= self.feature_arity[j] {
                    return Err(Error::Input(format!(
                        "category {v} out of range for feature {} (arity {})",
                        self.feature_names[j], self.feature_arity[j]
                    )));
                }
            }
            if *label > 1 {
                return Err(Error::Input(format!("label {label} is not binary")));
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.feature_arity.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Naive Bayes with Laplace smoothing: class priors plus per-feature
/// class-conditional category tables.
#[derive(Debug, Clone, PartialEq)]
pub struct NbcModel {
    pub priors: [f64; 2],
    /// tables[j][c][v] = P(z_j = v | y = c)
    pub tables: Vec<[Vec<f64>; 2]>,
    pub arities: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        /// Class-1 fraction of the training rows that reached this leaf.
        p1: f64,
    },
    Split {
        feature: usize,
        /// One-vs-rest test: rows with `z[feature] == category` go to
        /// `matches`, everything else to `rest`.
        category: usize,
        matches: Box<TreeNode>,
        rest: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { matches, rest, .. } => 1 + matches.depth().max(rest.depth()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtcModel {
    pub root: TreeNode,
    pub arities: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RfcModel {
    pub trees: Vec<DtcModel>,
    /// Average hard votes instead of leaf probabilities.
    pub hard_vote: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Nbc(NbcModel),
    Dtc(DtcModel),
    Rfc(RfcModel),
}

/// π̂(c) = (N_c + s)/(N + 2s), θ̂_jc(v) = (count + s)/(N_c + arity_j·s).
pub fn train_nbc(data: &LabeledDataset, smoothing: f64) -> Result<TrainedModel> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::Train("cannot train on an empty dataset".into()));
    }
    if smoothing < 0.0 {
        return Err(Error::Param("smoothing must be non-negative".into()));
    }
    let n = data.len() as f64;
    let counts = [
        data.rows.iter().filter(|(_, y)| *y == 0).count() as f64,
        data.rows.iter().filter(|(_, y)| *y == 1).count() as f64,
    ];
    let priors = [
        (counts[0] + smoothing) / (n + 2.0 * smoothing),
        (counts[1] + smoothing) / (n + 2.0 * smoothing),
    ];
    let mut tables = Vec::with_capacity(data.n_features());
    for j in 0..data.n_features() {
        let arity = data.feature_arity[j];
        let mut table = [vec![0.0; arity], vec![0.0; arity]];
        for (features, label) in &data.rows {
            table[*label as usize][features[j]] += 1.0;
        }
        for c in 0..2 {
            for v in 0..arity {
                table[c][v] = (table[c][v] + smoothing) / (counts[c] + arity as f64 * smoothing);
            }
        }
        tables.push(table);
    }
    Ok(TrainedModel::Nbc(NbcModel {
        priors,
        tables,
        arities: data.feature_arity.clone(),
    }))
}

fn gini(pos: f64, total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    let p = pos / total;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

struct TreeBuilder<'a> {
    data: &'a LabeledDataset,
    max_depth: usize,
    /// features sampled per node, `None` = use all
    features_per_node: Option<usize>,
    rng: Option<ChaCha8Rng>,
}

impl<'a> TreeBuilder<'a> {
    fn candidate_features(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match (self.features_per_node, self.rng.as_mut()) {
            (Some(m), Some(rng)) if m < d => {
                let mut picked = rand::seq::index::sample(rng, d, m).into_vec();
                picked.sort_unstable();
                picked
            }
            _ => (0..d).collect(),
        }
    }

    fn build(&mut self, indices: &[usize], depth: usize) -> TreeNode {
        let total = indices.len() as f64;
        let pos = indices
            .iter()
            .filter(|&&i| self.data.rows[i].1 == 1)
            .count() as f64;
        let leaf = TreeNode::Leaf { p1: pos / total };
        if depth >= self.max_depth || pos == 0.0 || pos == total {
            return leaf;
        }
        let parent_impurity = gini(pos, total);

        // best (feature, category) one-vs-rest split by weighted Gini;
        // ties fall to the lowest feature index then lowest category
        let mut best: Option<(f64, usize, usize)> = None;
        for j in self.candidate_features() {
            for v in 0..self.data.feature_arity[j] {
                let mut match_total = 0.0;
                let mut match_pos = 0.0;
                for &i in indices {
                    if self.data.rows[i].0[j] == v {
                        match_total += 1.0;
                        if self.data.rows[i].1 == 1 {
                            match_pos += 1.0;
                        }
                    }
                }
                let rest_total = total - match_total;
                if match_total == 0.0 || rest_total == 0.0 {
                    continue;
                }
                let rest_pos = pos - match_pos;
                let weighted = (match_total * gini(match_pos, match_total)
                    + rest_total * gini(rest_pos, rest_total))
                    / total;
                if best.map_or(true, |(b, _, _)| weighted < b) {
                    best = Some((weighted, j, v));
                }
            }
        }
        let Some((impurity, feature, category)) = best else {
            return leaf;
        };
        // Equal-impurity splits are kept: XOR-style interactions show no
        // first-level Gini gain but separate perfectly one level down.
        if impurity > parent_impurity + 1e-12 {
            return leaf;
        }
        let (matched, rest): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .copied()
            .partition(|&i| self.data.rows[i].0[feature] == category);
        TreeNode::Split {
            feature,
            category,
            matches: Box::new(self.build(&matched, depth + 1)),
            rest: Box::new(self.build(&rest, depth + 1)),
        }
    }
}

/// Greedy recursive Gini tree of depth at most `max_depth`.
pub fn train_dtc(data: &LabeledDataset, max_depth: usize) -> Result<TrainedModel> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::Train("cannot train on an empty dataset".into()));
    }
    if max_depth == 0 {
        return Err(Error::Param("max_depth must be positive".into()));
    }
    let mut builder = TreeBuilder {
        data,
        max_depth,
        features_per_node: None,
        rng: None,
    };
    let indices: Vec<usize> = (0..data.len()).collect();
    Ok(TrainedModel::Dtc(DtcModel {
        root: builder.build(&indices, 0),
        arities: data.feature_arity.clone(),
    }))
}

#[derive(Debug, Clone, Copy)]
pub struct RfcOptions {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub bootstrap: bool,
    /// ⌈√D⌉ features sampled per node when set.
    pub feature_subsampling: bool,
    pub hard_vote: bool,
}

impl RfcOptions {
    pub fn new(n_trees: usize, max_depth: usize, seed: u64) -> Self {
        RfcOptions {
            n_trees,
            max_depth,
            seed,
            bootstrap: true,
            feature_subsampling: true,
            hard_vote: false,
        }
    }
}

pub fn train_rfc_with(data: &LabeledDataset, opts: RfcOptions) -> Result<TrainedModel> {
    data.validate()?;
    if data.is_empty() {
        return Err(Error::Train("cannot train on an empty dataset".into()));
    }
    if opts.n_trees == 0 || opts.max_depth == 0 {
        return Err(Error::Param("n_trees and max_depth must be positive".into()));
    }
    let n = data.len();
    let m = (data.n_features() as f64).sqrt().ceil() as usize;
    let mut trees = Vec::with_capacity(opts.n_trees);
    for t in 0..opts.n_trees {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(t as u64));
        let indices: Vec<usize> = if opts.bootstrap {
            (0..n).map(|_| rng.gen_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut builder = TreeBuilder {
            data,
            max_depth: opts.max_depth,
            features_per_node: opts.feature_subsampling.then_some(m),
            rng: Some(rng),
        };
        trees.push(DtcModel {
            root: builder.build(&indices, 0),
            arities: data.feature_arity.clone(),
        });
    }
    Ok(TrainedModel::Rfc(RfcModel {
        trees,
        hard_vote: opts.hard_vote,
    }))
}

/// Forest of bootstrap Gini trees with ⌈√D⌉ features per node.
pub fn train_rfc(
    data: &LabeledDataset,
    n_trees: usize,
    max_depth: usize,
    seed: u64,
) -> Result<TrainedModel> {
    train_rfc_with(data, RfcOptions::new(n_trees, max_depth, seed))
}

fn check_features(arities: &[usize], features: &[usize]) -> Result<()> {
    if features.len() != arities.len() {
        return Err(Error::Input(format!(
            "feature vector has {} entries, model expects {}",
            features.len(),
            arities.len()
        )));
    }
    for (j, (&v, &a)) in features.iter().zip(arities).enumerate() {
        if v >= a {
            return Err(Error::Input(format!(
                "category {v} out of range for feature {j} (arity {a})"
            )));
        }
    }
    Ok(())
}

fn nbc_proba(model: &NbcModel, features: &[usize]) -> f64 {
    // Eq.-style product in log space
    let mut ll = [model.priors[0].ln(), model.priors[1].ln()];
    for (j, &v) in features.iter().enumerate() {
        for c in 0..2 {
            ll[c] += model.tables[j][c][v].ln();
        }
    }
    let m = ll[0].max(ll[1]);
    if m == f64::NEG_INFINITY {
        return 0.5;
    }
    let e0 = (ll[0] - m).exp();
    let e1 = (ll[1] - m).exp();
    e1 / (e0 + e1)
}

fn tree_proba(root: &TreeNode, features: &[usize]) -> f64 {
    let mut node = root;
    loop {
        match node {
            TreeNode::Leaf { p1 } => return *p1,
            TreeNode::Split { feature, category, matches, rest } => {
                node = if features[*feature] == *category {
                    matches
                } else {
                    rest
                };
            }
        }
    }
}

/// Predicted probability of class 1.
pub fn predict_proba(model: &TrainedModel, features: &[usize]) -> Result<f64> {
    match model {
        TrainedModel::Nbc(m) => {
            check_features(&m.arities, features)?;
            Ok(nbc_proba(m, features))
        }
        TrainedModel::Dtc(m) => {
            check_features(&m.arities, features)?;
            Ok(tree_proba(&m.root, features))
        }
        TrainedModel::Rfc(m) => {
            let first = m
                .trees
                .first()
                .ok_or_else(|| Error::Input("empty forest".into()))?;
            check_features(&first.arities, features)?;
            let sum: f64 = m
                .trees
                .iter()
                .map(|t| {
                    let p = tree_proba(&t.root, features);
                    if m.hard_vote {
                        if p >= 0.5 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        p
                    }
                })
                .sum();
            Ok(sum / m.trees.len() as f64)
        }
    }
}

/// Mean predicted class-1 probability over `samples`; the p0 estimate.
pub fn estimate_p0(model: &TrainedModel, samples: &[Vec<usize>]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Input("estimate_p0 requires at least one sample".into()));
    }
    let mut total = 0.0;
    for s in samples {
        total += predict_proba(model, s)?;
    }
    Ok(total / samples.len() as f64)
}
