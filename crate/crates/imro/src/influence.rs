//! Per-user click probabilities under the GIM and NIM influence models.
//!
//! Both models start from a base click probability `p0` and adjust it by
//! the fraction of a user's friends that were targeted and clicked (`y`)
//! or targeted and did not click (`n`), out of `f` friends total:
//!
//! GIM: clamp01( p0 + (1 − (1 − clamp01(α·y/f))^f) )
//! NIM: clamp01( p0 + α·y/f − β·n/f )
//!
//! Isolated users (f = 0) keep probability `p0`.

use crate::error::{Error, Result};
use crate::graph::SocialGraph;

pub fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// The GIM influence boost `1 − (1 − clamp01(ratio))^f`.
///
/// The inner clamp keeps the exponent base in [0,1]; `f` may be a
/// non-integer average friend count (Bayesian estimation uses this path).
pub fn gim_boost(ratio: f64, f: f64) -> f64 {
    1.0 - (1.0 - clamp01(ratio)).powf(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Gim,
    Nim,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Gim => write!(f, "gim"),
            ModelKind::Nim => write!(f, "nim"),
        }
    }
}

/// Model parameters. `beta` exists only for the NIM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfluenceParams {
    Gim { p0: f64, alpha: f64 },
    Nim { p0: f64, alpha: f64, beta: f64 },
}

impl InfluenceParams {
    pub fn validate(&self) -> Result<()> {
        let (p0, alpha, beta) = match *self {
            InfluenceParams::Gim { p0, alpha } => (p0, alpha, 0.0),
            InfluenceParams::Nim { p0, alpha, beta } => (p0, alpha, beta),
        };
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::Param(format!("p0 {p0} outside [0,1]")));
        }
        if alpha < 0.0 || !alpha.is_finite() {
            return Err(Error::Param(format!("alpha {alpha} must be non-negative")));
        }
        if beta < 0.0 || !beta.is_finite() {
            return Err(Error::Param(format!("beta {beta} must be non-negative")));
        }
        Ok(())
    }

    pub fn p0(&self) -> f64 {
        match *self {
            InfluenceParams::Gim { p0, .. } | InfluenceParams::Nim { p0, .. } => p0,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            InfluenceParams::Gim { .. } => ModelKind::Gim,
            InfluenceParams::Nim { .. } => ModelKind::Nim,
        }
    }
}

/// Targeting/click status of one user. A user is targeted at most once,
/// so the only transitions are out of `Untargeted`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserStatus {
    Untargeted,
    TargetedClicked,
    TargetedNotClicked,
}

/// Click probability of an untargeted `user` given the current campaign
/// state. `statuses` must cover every node of the graph.
pub fn click_probability(
    params: &InfluenceParams,
    graph: &SocialGraph,
    statuses: &[UserStatus],
    user: usize,
) -> Result<f64> {
    if statuses.len() != graph.node_count() {
        return Err(Error::Contract(format!(
            "statuses has {} entries for {} nodes",
            statuses.len(),
            graph.node_count()
        )));
    }
    if statuses[user] != UserStatus::Untargeted {
        return Err(Error::Contract(format!("user {user} is already targeted")));
    }
    let f = graph.degree(user);
    if f == 0 {
        return Ok(params.p0());
    }
    let mut clicked = 0usize;
    let mut not_clicked = 0usize;
    for &nb in graph.neighbors(user) {
        match statuses[nb] {
            UserStatus::TargetedClicked => clicked += 1,
            UserStatus::TargetedNotClicked => not_clicked += 1,
            UserStatus::Untargeted => {}
        }
    }
    let f64f = f as f64;
    let y = clicked as f64;
    let n = not_clicked as f64;
    let p = match *params {
        InfluenceParams::Gim { p0, alpha } => p0 + gim_boost(alpha * y / f64f, f64f),
        InfluenceParams::Nim { p0, alpha, beta } => p0 + alpha * y / f64f - beta * n / f64f,
    };
    Ok(clamp01(p))
}
