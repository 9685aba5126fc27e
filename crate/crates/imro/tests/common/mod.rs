//! Independent oracles used by the integration and acceptance suites.
//! These deliberately avoid the library's solver/metric code paths.
#![allow(dead_code)] // each test binary uses a different subset

use imro::bayes::{log_posterior, PriorSpec, RepostDataset};
use imro::graph::SocialGraph;
use imro::influence::{click_probability, InfluenceParams, UserStatus};

/// Exhaustive policy-tree value: maximizes over every subset at every
/// stage and recurses over every click outcome, with no memoization and
/// no final-stage shortcut.
pub fn brute_force_policy_value(
    graph: &SocialGraph,
    params: &InfluenceParams,
    stages: u32,
    budget: u32,
) -> f64 {
    let mut statuses = vec![UserStatus::Untargeted; graph.node_count()];
    brute_stage(graph, params, 1, stages, &mut statuses, budget)
}

fn brute_stage(
    graph: &SocialGraph,
    params: &InfluenceParams,
    stage: u32,
    stages: u32,
    statuses: &mut Vec<UserStatus>,
    rem: u32,
) -> f64 {
    if stage > stages {
        return 0.0;
    }
    let untargeted: Vec<usize> = (0..graph.node_count())
        .filter(|&i| statuses[i] == UserStatus::Untargeted)
        .collect();
    let probs: Vec<f64> = untargeted
        .iter()
        .map(|&i| click_probability(params, graph, statuses, i).unwrap())
        .collect();
    let mut best = f64::NEG_INFINITY;
    for mask in 0u32..(1 << untargeted.len()) {
        if mask.count_ones() > rem {
            continue;
        }
        let subset: Vec<usize> = (0..untargeted.len()).filter(|&b| mask >> b & 1 == 1).collect();
        let immediate: f64 = subset.iter().map(|&b| probs[b]).sum();
        let value = immediate
            + brute_outcomes(
                graph,
                params,
                stage,
                stages,
                statuses,
                rem - mask.count_ones(),
                &untargeted,
                &probs,
                &subset,
                0,
                1.0,
            );
        if value > best {
            best = value;
        }
    }
    best
}

#[allow(clippy::too_many_arguments)]
fn brute_outcomes(
    graph: &SocialGraph,
    params: &InfluenceParams,
    stage: u32,
    stages: u32,
    statuses: &mut Vec<UserStatus>,
    rem_after: u32,
    untargeted: &[usize],
    probs: &[f64],
    subset: &[usize],
    idx: usize,
    weight: f64,
) -> f64 {
    if idx == subset.len() {
        if weight == 0.0 {
            return 0.0;
        }
        return weight * brute_stage(graph, params, stage + 1, stages, statuses, rem_after);
    }
    let node = untargeted[subset[idx]];
    let p = probs[subset[idx]];
    let mut acc = 0.0;
    statuses[node] = UserStatus::TargetedClicked;
    acc += brute_outcomes(
        graph, params, stage, stages, statuses, rem_after, untargeted, probs, subset,
        idx + 1, weight * p,
    );
    statuses[node] = UserStatus::TargetedNotClicked;
    acc += brute_outcomes(
        graph, params, stage, stages, statuses, rem_after, untargeted, probs, subset,
        idx + 1, weight * (1.0 - p),
    );
    statuses[node] = UserStatus::Untargeted;
    acc
}

/// Trapezoidal area under the ROC curve, sweeping thresholds over the
/// distinct scores in descending order.
pub fn trapezoid_auc(pairs: &[(f64, u8)]) -> f64 {
    let n_pos = pairs.iter().filter(|(_, y)| *y == 1).count() as f64;
    let n_neg = pairs.len() as f64 - n_pos;
    assert!(n_pos > 0.0 && n_neg > 0.0);
    let mut sorted: Vec<(f64, u8)> = pairs.to_vec();
    sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut area = 0.0;
    let (mut tp, mut fp) = (0.0f64, 0.0f64);
    let (mut prev_tpr, mut prev_fpr) = (0.0f64, 0.0f64);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == sorted[i].0 {
            if sorted[j].1 == 1 {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            j += 1;
        }
        let tpr = tp / n_pos;
        let fpr = fp / n_neg;
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
        i = j;
    }
    area
}

/// Posterior mean and sd by trapezoidal quadrature on a uniform grid over
/// the prior support.
pub fn grid_posterior_mean_sd(
    data: &RepostDataset,
    prior: &PriorSpec,
    points: usize,
) -> (f64, f64) {
    assert!(points >= 3);
    let step = (prior.high - prior.low) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| prior.low + i as f64 * step).collect();
    let lps: Vec<f64> = xs.iter().map(|&a| log_posterior(a, data, prior)).collect();
    let max = lps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = lps
        .iter()
        .enumerate()
        .map(|(i, &lp)| {
            let endpoint = i == 0 || i == points - 1;
            (lp - max).exp() * if endpoint { 0.5 } else { 1.0 }
        })
        .collect();
    let total: f64 = ws.iter().sum();
    let mean: f64 = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / total;
    let var: f64 = xs
        .iter()
        .zip(&ws)
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum::<f64>()
        / total;
    (mean, var.sqrt())
}
