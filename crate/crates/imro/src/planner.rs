//! Staged impression-allocation planners: exact stochastic dynamic
//! programming (SDP), the degree heuristic (LDH), and the one-stage
//! baseline.
//!
//! The SDP state is (stage, remaining budget, per-user status). Click
//! probabilities are evaluated at the start of each stage with statuses
//! frozen, so within-stage clicks do not influence same-stage peers.
//! Targeted users click independently; the stage reward is the sum of
//! their click probabilities.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::influence::{click_probability, InfluenceParams, UserStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMethod {
    Sdp,
    Ldh,
    SingleStage,
}

impl std::fmt::Display for PlanMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlanMethod::Sdp => write!(f, "sdp"),
            PlanMethod::Ldh => write!(f, "ldh"),
            PlanMethod::SingleStage => write!(f, "single"),
        }
    }
}

/// A campaign: `budget` impressions to spend over `stages` stages.
/// Each user may be targeted at most once over the whole campaign.
#[derive(Debug, Clone, Copy)]
pub struct CampaignConfig {
    pub stages: u32,
    pub budget: u32,
    pub params: InfluenceParams,
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        if self.stages < 1 {
            return Err(Error::Param("stages must be at least 1".into()));
        }
        if self.budget < 1 {
            return Err(Error::Param("budget must be at least 1".into()));
        }
        self.params.validate()
    }
}

/// Size guard for the exact solver; exhaustive enumeration beyond this
/// is impractical.
#[derive(Debug, Clone, Copy)]
pub struct SdpLimits {
    pub max_nodes: usize,
    pub max_budget: u32,
    pub max_stages: u32,
}

impl Default for SdpLimits {
    fn default() -> Self {
        SdpLimits {
            max_nodes: 14,
            max_budget: 6,
            max_stages: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyResult {
    pub expected_clicks: f64,
    pub first_stage_allocation: Vec<usize>,
    pub method: PlanMethod,
}

fn encode(statuses: &[UserStatus]) -> Vec<u8> {
    statuses
        .iter()
        .map(|s| match s {
            UserStatus::Untargeted => 0,
            UserStatus::TargetedClicked => 1,
            UserStatus::TargetedNotClicked => 2,
        })
        .collect()
}

/// Start-of-stage click probability for every untargeted node.
fn stage_probs(
    params: &InfluenceParams,
    graph: &SocialGraph,
    statuses: &[UserStatus],
) -> Vec<Option<f64>> {
    (0..graph.node_count())
        .map(|i| {
            if statuses[i] == UserStatus::Untargeted {
                Some(click_probability(params, graph, statuses, i).expect("node is untargeted"))
            } else {
                None
            }
        })
        .collect()
}

struct SdpSolver<'a> {
    graph: &'a SocialGraph,
    params: InfluenceParams,
    stages: u32,
    memo: HashMap<(u32, Vec<u8>), f64>,
}

impl<'a> SdpSolver<'a> {
    /// V_k(s): optimal expected clicks from stage `stage` onward.
    fn value(&mut self, stage: u32, statuses: &mut Vec<UserStatus>, rem: u32) -> f64 {
        if stage > self.stages || rem == 0 {
            return 0.0;
        }
        let key = (stage, encode(statuses));
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = if stage == self.stages {
            // Final stage: no continuation value, so the optimum is the
            // `rem` largest positive click probabilities.
            let mut ps: Vec<f64> = stage_probs(&self.params, self.graph, statuses)
                .into_iter()
                .flatten()
                .filter(|&p| p > 0.0)
                .collect();
            ps.sort_by(|a, b| b.partial_cmp(a).unwrap());
            ps.iter().take(rem as usize).sum()
        } else {
            self.best_action(stage, statuses, rem).0
        };
        self.memo.insert(key, v);
        v
    }

    /// Full maximization over subsets of untargeted nodes (size ≤ rem),
    /// enumerated in lexicographic node-id order so ties resolve to the
    /// lexicographically smallest set.
    fn best_action(
        &mut self,
        stage: u32,
        statuses: &mut Vec<UserStatus>,
        rem: u32,
    ) -> (f64, Vec<usize>) {
        let untargeted: Vec<usize> = (0..self.graph.node_count())
            .filter(|&i| statuses[i] == UserStatus::Untargeted)
            .collect();
        let probs = stage_probs(&self.params, self.graph, statuses);
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut current = Vec::new();
        self.search(
            stage,
            statuses,
            rem,
            &untargeted,
            &probs,
            0,
            &mut current,
            &mut best,
        );
        best
    }

    #[allow(clippy::too_many_arguments)]
    fn search(
        &mut self,
        stage: u32,
        statuses: &mut Vec<UserStatus>,
        rem: u32,
        untargeted: &[usize],
        probs: &[Option<f64>],
        start: usize,
        current: &mut Vec<usize>,
        best: &mut (f64, Vec<usize>),
    ) {
        let q = self.action_value(stage, statuses, rem, current, probs);
        if q > best.0 {
            *best = (q, current.clone());
        }
        if (current.len() as u32) < rem {
            for idx in start..untargeted.len() {
                current.push(untargeted[idx]);
                self.search(stage, statuses, rem, untargeted, probs, idx + 1, current, best);
                current.pop();
            }
        }
    }

    /// Q_k(s, S) = Σ p_k[i] + E over click outcomes of V_{k+1}.
    fn action_value(
        &mut self,
        stage: u32,
        statuses: &mut Vec<UserStatus>,
        rem: u32,
        subset: &[usize],
        probs: &[Option<f64>],
    ) -> f64 {
        let immediate: f64 = subset.iter().map(|&i| probs[i].unwrap()).sum();
        if stage == self.stages {
            return immediate;
        }
        let rem_after = rem - subset.len() as u32;
        immediate + self.outcome_expectation(stage, statuses, rem_after, subset, probs, 0, 1.0)
    }

    #[allow(clippy::too_many_arguments)]
    fn outcome_expectation(
        &mut self,
        stage: u32,
        statuses: &mut Vec<UserStatus>,
        rem_after: u32,
        subset: &[usize],
        probs: &[Option<f64>],
        idx: usize,
        weight: f64,
    ) -> f64 {
        if weight == 0.0 {
            return 0.0;
        }
        if idx == subset.len() {
            return weight * self.value(stage + 1, statuses, rem_after);
        }
        let node = subset[idx];
        let p = probs[node].unwrap();
        let mut acc = 0.0;
        statuses[node] = UserStatus::TargetedClicked;
        acc += self.outcome_expectation(stage, statuses, rem_after, subset, probs, idx + 1, weight * p);
        statuses[node] = UserStatus::TargetedNotClicked;
        acc += self.outcome_expectation(
            stage,
            statuses,
            rem_after,
            subset,
            probs,
            idx + 1,
            weight * (1.0 - p),
        );
        statuses[node] = UserStatus::Untargeted;
        acc
    }
}

/// Exact optimal expected clicks via backward induction, with the default
/// size guard.
pub fn sdp_value(config: &CampaignConfig, graph: &SocialGraph) -> Result<PolicyResult> {
    sdp_value_with_limits(config, graph, SdpLimits::default())
}

pub fn sdp_value_with_limits(
    config: &CampaignConfig,
    graph: &SocialGraph,
    limits: SdpLimits,
) -> Result<PolicyResult> {
    config.validate()?;
    if graph.node_count() > limits.max_nodes
        || config.budget > limits.max_budget
        || config.stages > limits.max_stages
    {
        return Err(Error::TooLarge(format!(
            "instance ({} nodes, budget {}, {} stages) exceeds the exact-SDP guard \
             ({} nodes, budget {}, {} stages); use the LDH planner instead",
            graph.node_count(),
            config.budget,
            config.stages,
            limits.max_nodes,
            limits.max_budget,
            limits.max_stages
        )));
    }
    let mut solver = SdpSolver {
        graph,
        params: config.params,
        stages: config.stages,
        memo: HashMap::new(),
    };
    let mut statuses = vec![UserStatus::Untargeted; graph.node_count()];
    let (value, allocation) = solver.best_action(1, &mut statuses, config.budget);
    Ok(PolicyResult {
        expected_clicks: value,
        first_stage_allocation: allocation,
        method: PlanMethod::Sdp,
    })
}

/// Near-even split of the budget over stages; the remainder goes to the
/// earliest stages.
pub fn ldh_stage_counts(budget: u32, stages: u32) -> Vec<u32> {
    let base = budget / stages;
    let rem = budget % stages;
    (1..=stages)
        .map(|k| base + if k <= rem { 1 } else { 0 })
        .collect()
}

fn highest_degree_untargeted(
    graph: &SocialGraph,
    statuses: &[UserStatus],
    count: usize,
) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..graph.node_count())
        .filter(|&i| statuses[i] == UserStatus::Untargeted)
        .collect();
    // ties by lower node id; sort is stable over the ascending id order
    candidates.sort_by_key(|&i| std::cmp::Reverse(graph.degree(i)));
    candidates.truncate(count);
    candidates.sort_unstable();
    candidates
}

fn ldh_expect(
    graph: &SocialGraph,
    params: &InfluenceParams,
    counts: &[u32],
    stage_idx: usize,
    statuses: &mut Vec<UserStatus>,
    first_allocation: &mut Option<Vec<usize>>,
) -> f64 {
    if stage_idx == counts.len() {
        return 0.0;
    }
    let targets = highest_degree_untargeted(graph, statuses, counts[stage_idx] as usize);
    if stage_idx == 0 && first_allocation.is_none() {
        *first_allocation = Some(targets.clone());
    }
    let probs: Vec<f64> = targets
        .iter()
        .map(|&i| click_probability(params, graph, statuses, i).expect("node is untargeted"))
        .collect();
    let immediate: f64 = probs.iter().sum();

    fn outcomes(
        graph: &SocialGraph,
        params: &InfluenceParams,
        counts: &[u32],
        stage_idx: usize,
        statuses: &mut Vec<UserStatus>,
        first_allocation: &mut Option<Vec<usize>>,
        targets: &[usize],
        probs: &[f64],
        idx: usize,
        weight: f64,
    ) -> f64 {
        if weight == 0.0 {
            return 0.0;
        }
        if idx == targets.len() {
            return weight
                * ldh_expect(graph, params, counts, stage_idx + 1, statuses, first_allocation);
        }
        let node = targets[idx];
        let p = probs[idx];
        let mut acc = 0.0;
        statuses[node] = UserStatus::TargetedClicked;
        acc += outcomes(
            graph, params, counts, stage_idx, statuses, first_allocation, targets, probs,
            idx + 1, weight * p,
        );
        statuses[node] = UserStatus::TargetedNotClicked;
        acc += outcomes(
            graph, params, counts, stage_idx, statuses, first_allocation, targets, probs,
            idx + 1, weight * (1.0 - p),
        );
        statuses[node] = UserStatus::Untargeted;
        acc
    }

    immediate
        + outcomes(
            graph, params, counts, stage_idx, statuses, first_allocation, &targets, &probs, 0,
            1.0,
        )
}

/// Lawrence Degree Heuristic: near-even budget split, highest-degree
/// untargeted nodes each stage, expected clicks computed exactly over the
/// outcome tree (≤ 2^B paths).
pub fn ldh_value(config: &CampaignConfig, graph: &SocialGraph) -> Result<PolicyResult> {
    config.validate()?;
    let counts = ldh_stage_counts(config.budget, config.stages);
    let mut statuses = vec![UserStatus::Untargeted; graph.node_count()];
    let mut first = None;
    let value = ldh_expect(graph, &config.params, &counts, 0, &mut statuses, &mut first);
    Ok(PolicyResult {
        expected_clicks: value,
        first_stage_allocation: first.unwrap_or_default(),
        method: PlanMethod::Ldh,
    })
}

/// All `budget` impressions in a single stage. With start-of-stage
/// evaluation no influence accrues, so the value is min(B, n) · p0.
pub fn single_stage_value(config: &CampaignConfig, graph: &SocialGraph) -> Result<PolicyResult> {
    config.validate()?;
    let n = graph.node_count();
    let p0 = config.params.p0();
    let take = (config.budget as usize).min(n);
    let allocation = if n <= SdpLimits::default().max_nodes {
        // exact maximization; every untargeted user has probability p0, so
        // the lexicographically smallest optimum is the first `take` ids
        // (or the empty set when p0 = 0)
        if p0 > 0.0 {
            (0..take).collect()
        } else {
            Vec::new()
        }
    } else {
        highest_degree_untargeted(graph, &vec![UserStatus::Untargeted; n], take)
    };
    Ok(PolicyResult {
        expected_clicks: allocation.len() as f64 * p0,
        first_stage_allocation: allocation,
        method: PlanMethod::SingleStage,
    })
}
