//! Accuracy, rank-statistic AUC, seeded train/test splits and k-fold
//! cross-validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ml::{predict_proba, LabeledDataset, TrainedModel};

/// (score, true label) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPredictions {
    pub pairs: Vec<(f64, u8)>,
}

impl ScoredPredictions {
    pub fn new(pairs: Vec<(f64, u8)>) -> Self {
        ScoredPredictions { pairs }
    }
}

/// Fraction of pairs where thresholding the score reproduces the label.
pub fn accuracy(preds: &ScoredPredictions, threshold: f64) -> Result<f64> {
    if preds.pairs.is_empty() {
        return Err(Error::Metric("accuracy of an empty prediction set".into()));
    }
    let correct = preds
        .pairs
        .iter()
        .filter(|(score, label)| (*score >= threshold) == (*label == 1))
        .count();
    Ok(correct as f64 / preds.pairs.len() as f64)
}

/// Rank-statistic AUC: the fraction of (positive, negative) pairs where
/// the positive scores higher, ties counting one half. Equals the
/// trapezoidal area under the ROC curve.
pub fn auc(preds: &ScoredPredictions) -> Result<f64> {
    let n_pos = preds.pairs.iter().filter(|(_, y)| *y == 1).count();
    let n_neg = preds.pairs.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric(
            "AUC requires at least one positive and one negative".into(),
        ));
    }
    // average ranks over the pooled sample (midranks for ties)
    let mut indexed: Vec<(f64, u8)> = preds.pairs.clone();
    indexed.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let n = indexed.len();
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j < n && indexed[j].0 == indexed[i].0 {
            j += 1;
        }
        // ranks i+1 ..= j share the midrank
        let midrank = (i + 1 + j) as f64 / 2.0;
        for item in &indexed[i..j] {
            if item.1 == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Seeded shuffle then prefix split: ⌊fraction·N⌋ training rows, the rest
/// test.
pub fn train_test_split(
    data: &LabeledDataset,
    train_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::Param(format!(
            "train_fraction {train_fraction} outside (0,1)"
        )));
    }
    let n = data.len();
    let n_train = (train_fraction * n as f64).floor() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::Param(format!(
            "fraction {train_fraction} leaves an empty split for {n} rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let subset = |ids: &[usize]| LabeledDataset {
        feature_names: data.feature_names.clone(),
        feature_arity: data.feature_arity.clone(),
        rows: ids.iter().map(|&i| data.rows[i].clone()).collect(),
    };
    Ok((subset(&order[..n_train]), subset(&order[n_train..])))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldMetrics {
    pub auc: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValResult {
    pub per_fold: Vec<FoldMetrics>,
    pub mean_auc: f64,
    pub mean_accuracy: f64,
}

/// Seeded k-fold cross-validation. Fold sizes differ by at most one, with
/// the remainder rows assigned to the earliest folds.
pub fn cross_validate<F>(
    data: &LabeledDataset,
    folds: usize,
    trainer: F,
    seed: u64,
) -> Result<CrossValResult>
where
    F: Fn(&LabeledDataset) -> Result<TrainedModel>,
{
    let n = data.len();
    if folds < 2 {
        return Err(Error::Param("cross-validation needs at least 2 folds".into()));
    }
    if folds > n {
        return Err(Error::Param(format!("{folds} folds exceed {n} rows")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let base = n / folds;
    let rem = n % folds;
    let mut bounds = Vec::with_capacity(folds + 1);
    bounds.push(0usize);
    for k in 0..folds {
        bounds.push(bounds[k] + base + usize::from(k < rem));
    }

    let mut per_fold = Vec::with_capacity(folds);
    for k in 0..folds {
        let test_ids = &order[bounds[k]..bounds[k + 1]];
        let train_ids: Vec<usize> = order[..bounds[k]]
            .iter()
            .chain(&order[bounds[k + 1]..])
            .copied()
            .collect();
        let train = LabeledDataset {
            feature_names: data.feature_names.clone(),
            feature_arity: data.feature_arity.clone(),
            rows: train_ids.iter().map(|&i| data.rows[i].clone()).collect(),
        };
        let model = trainer(&train)?;
        let mut pairs = Vec::with_capacity(test_ids.len());
        for &i in test_ids {
            let (features, label) = &data.rows[i];
            pairs.push((predict_proba(&model, features)?, *label));
        }
        let preds = ScoredPredictions::new(pairs);
        per_fold.push(FoldMetrics {
            auc: auc(&preds)?,
            accuracy: accuracy(&preds, 0.5)?,
        });
    }
    let mean_auc = per_fold.iter().map(|f| f.auc).sum::<f64>() / folds as f64;
    let mean_accuracy = per_fold.iter().map(|f| f.accuracy).sum::<f64>() / folds as f64;
    Ok(CrossValResult {
        per_fold,
        mean_auc,
        mean_accuracy,
    })
}
