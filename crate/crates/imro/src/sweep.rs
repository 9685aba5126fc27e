//! Sensitivity sweeps: vary one model parameter, run a planner, emit a
//! plot-ready table.

use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::SocialGraph;
use crate::influence::{InfluenceParams, ModelKind};
use crate::planner::{ldh_value, sdp_value, CampaignConfig, PlanMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    P0,
    Alpha,
    Beta,
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::P0 => "p0",
            SweepParam::Alpha => "alpha",
            SweepParam::Beta => "beta",
        }
    }
}

/// One parameter sweep against one planner on one graph. The non-swept
/// parameters stay fixed at `p0` / `alpha` / `beta`.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParam,
    pub values: Vec<f64>,
    pub model: ModelKind,
    pub method: PlanMethod,
    pub stages: u32,
    pub budget: u32,
    pub p0: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub expected_clicks: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::Param("sweep values must be non-empty".into()));
        }
        if !self.values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Param("sweep values must be strictly increasing".into()));
        }
        if self.parameter == SweepParam::Beta && self.model != ModelKind::Nim {
            return Err(Error::Param("beta sweep requires the NIM model".into()));
        }
        if self.method == PlanMethod::SingleStage {
            return Err(Error::Param("sweep method must be sdp or ldh".into()));
        }
        Ok(())
    }

    fn params_at(&self, value: f64) -> InfluenceParams {
        let (mut p0, mut alpha, mut beta) = (self.p0, self.alpha, self.beta);
        match self.parameter {
            SweepParam::P0 => p0 = value,
            SweepParam::Alpha => alpha = value,
            SweepParam::Beta => beta = value,
        }
        match self.model {
            ModelKind::Gim => InfluenceParams::Gim { p0, alpha },
            ModelKind::Nim => InfluenceParams::Nim { p0, alpha, beta },
        }
    }
}

/// One row per swept value, in input order. Deterministic.
pub fn run_sweep(spec: &SweepSpec, graph: &SocialGraph) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let config = CampaignConfig {
            stages: spec.stages,
            budget: spec.budget,
            params: spec.params_at(value),
        };
        let result = match spec.method {
            PlanMethod::Sdp => sdp_value(&config, graph)?,
            PlanMethod::Ldh => ldh_value(&config, graph)?,
            PlanMethod::SingleStage => unreachable!("rejected by validate"),
        };
        rows.push(SweepRow {
            value,
            expected_clicks: result.expected_clicks,
        });
    }
    Ok(rows)
}

/// CSV with header `param,value,model,method,expected_clicks`.
pub fn write_csv<W: Write>(spec: &SweepSpec, rows: &[SweepRow], mut w: W) -> Result<()> {
    writeln!(w, "param,value,model,method,expected_clicks")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            spec.parameter.as_str(),
            row.value,
            spec.model,
            spec.method,
            row.expected_clicks
        )?;
    }
    Ok(())
}
