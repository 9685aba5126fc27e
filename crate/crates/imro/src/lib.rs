//! Influence-maximization campaign planning on social graphs, with
//! Bayesian and classifier-based estimation of the model parameters.
//!
//! The library covers:
//! - GIM/NIM click-probability models ([`influence`])
//! - exact SDP and degree-heuristic impression planners ([`planner`])
//! - parameter-sensitivity sweeps ([`sweep`])
//! - random-walk Metropolis estimation of the influence constant α with
//!   full chain diagnostics ([`bayes`])
//! - Naive Bayes / decision-tree / random-forest estimation of the base
//!   click probability p0 ([`ml`], [`metrics`])
//! - graph and dataset ingestion plus seeded synthetic generators
//!   ([`graph`], [`datasets`])
//!
//! The `imro` binary exposes all of it on the command line.

pub mod bayes;
pub mod datasets;
pub mod error;
pub mod graph;
pub mod influence;
pub mod metrics;
pub mod ml;
pub mod planner;
pub mod sweep;

pub use error::{Error, Result};
