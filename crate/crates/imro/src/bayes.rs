//! Bayesian estimation of the GIM influence constant α from repost data.
//!
//! The model is Y_i | p_i ~ Bernoulli(p_i) with
//! p_i = clamp01( p0 + (1 − (1 − clamp01(α·R_i/F))^F) )
//! and a uniform prior on α. With a single unknown there is no conditional
//! structure to exploit, so the sampler is a Gaussian random-walk
//! Metropolis chain targeting the posterior directly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::influence::{clamp01, gim_boost};

/// Likelihood guard: keeps log p and log(1−p) finite when the clamped
/// click probability hits exactly 0 or 1.
const PROB_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RepostRow {
    pub post_id: u64,
    pub reposts: u64,
    pub outcome: u8,
}

/// Repost observations plus the known constants of the hierarchical
/// model: the average friend count F and the base probability p0.
#[derive(Debug, Clone, PartialEq)]
pub struct RepostDataset {
    pub rows: Vec<RepostRow>,
    pub avg_friends: f64,
    pub p0: f64,
}

impl RepostDataset {
    pub fn validate(&self) -> Result<()> {
        if !(self.avg_friends > 0.0) {
            return Err(Error::Param(format!(
                "avg_friends {} must be positive",
                self.avg_friends
            )));
        }
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::Param(format!("p0 {} outside [0,1]", self.p0)));
        }
        for row in &self.rows {
            if row.outcome > 1 {
                return Err(Error::Param(format!(
                    "outcome {} for post {} is not binary",
                    row.outcome, row.post_id
                )));
            }
        }
        Ok(())
    }
}

/// Uniform prior on α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub low: f64,
    pub high: f64,
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.low < 0.0 {
            return Err(Error::Param("prior low must be non-negative".into()));
        }
        if !(self.low < self.high) {
            return Err(Error::Param("prior requires low < high".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.high - self.low
    }
}

/// Sampler configuration. `iterations` is the kept-phase length after
/// burn-in; every `thin`-th post-burn-in draw is stored.
#[derive(Debug, Clone, Copy)]
pub struct McmcConfig {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    /// Defaults to 0.15 × prior width when `None`.
    pub proposal_sd: Option<f64>,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 3,
            iterations: 10_000,
            burn_in: 1000,
            thin: 5,
            seed: 0,
            proposal_sd: None,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 || self.iterations == 0 || self.thin == 0 {
            return Err(Error::Param("chains, iterations and thin must be positive".into()));
        }
        if self.thin > self.iterations {
            return Err(Error::Param("thin must not exceed iterations".into()));
        }
        if let Some(sd) = self.proposal_sd {
            if !(sd > 0.0) {
                return Err(Error::Param("proposal_sd must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Kept draws and pooled summary statistics of one sampling run.
#[derive(Debug, Clone)]
pub struct PosteriorRun {
    /// Kept α draws, one vector per chain.
    pub draws: Vec<Vec<f64>>,
    pub mean: f64,
    pub sd: f64,
    pub naive_se: f64,
    pub timeseries_se: f64,
    /// 2.5 / 25 / 50 / 75 / 97.5 percent quantiles of the pooled draws.
    pub quantiles: [f64; 5],
    /// Sample autocorrelation at lags 0..=L, averaged over chains.
    pub acf: Vec<f64>,
    pub acceptance_rate: f64,
    /// Set when the kept-phase acceptance rate fell below 1%.
    pub low_acceptance: bool,
    /// Time-series SE is at most 5% of the posterior sd.
    pub mcse_ok: bool,
}

impl PosteriorRun {
    pub fn pooled(&self) -> Vec<f64> {
        self.draws.iter().flatten().copied().collect()
    }

    pub fn pooled_len(&self) -> usize {
        self.draws.iter().map(Vec::len).sum()
    }
}

/// Click probability of the likelihood link for one row.
pub fn link_probability(alpha: f64, reposts: u64, data: &RepostDataset) -> f64 {
    let f = data.avg_friends;
    clamp01(data.p0 + gim_boost(alpha * reposts as f64 / f, f))
}

/// Log posterior density of α up to the flat-prior constant. −∞ outside
/// the prior support.
pub fn log_posterior(alpha: f64, data: &RepostDataset, prior: &PriorSpec) -> f64 {
    if alpha < prior.low || alpha > prior.high || !alpha.is_finite() {
        return f64::NEG_INFINITY;
    }
    let mut total = 0.0;
    for row in &data.rows {
        let p = link_probability(alpha, row.reposts, data).clamp(PROB_GUARD, 1.0 - PROB_GUARD);
        total += if row.outcome == 1 { p.ln() } else { (1.0 - p).ln() };
    }
    total
}

/// `sd / sqrt(m)`.
pub fn naive_standard_error(sd: f64, m: usize) -> f64 {
    sd / (m as f64).sqrt()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    // linear interpolation between order statistics (type 7)
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

fn chain_acf(chain: &[f64], lag_max: usize) -> Vec<f64> {
    let n = chain.len();
    let mean = chain.iter().sum::<f64>() / n as f64;
    let var: f64 = chain.iter().map(|x| (x - mean).powi(2)).sum();
    let mut acf = Vec::with_capacity(lag_max + 1);
    if var == 0.0 {
        // degenerate chain: define acf(0)=1, the rest 0
        acf.push(1.0);
        acf.extend(std::iter::repeat(0.0).take(lag_max));
        return acf;
    }
    for k in 0..=lag_max {
        let cov: f64 = (0..n - k)
            .map(|t| (chain[t] - mean) * (chain[t + k] - mean))
            .sum();
        acf.push(cov / var);
    }
    acf
}

/// Fills `acf`, `timeseries_se` and `mcse_ok` for the given lag range.
/// The integrated autocorrelation time is 1 + 2·Σ acf(k), truncated at
/// the first negative autocorrelation.
pub fn diagnostics(mut run: PosteriorRun, lag_max: usize) -> Result<PosteriorRun> {
    let min_len = run.draws.iter().map(Vec::len).min().unwrap_or(0);
    if min_len == 0 {
        return Err(Error::Param("diagnostics require non-empty chains".into()));
    }
    if min_len < lag_max + 1 {
        return Err(Error::Param(format!(
            "lag_max {lag_max} requires at least {} draws per chain, have {min_len}",
            lag_max + 1
        )));
    }
    let mut acf = vec![0.0; lag_max + 1];
    for chain in &run.draws {
        for (k, v) in chain_acf(chain, lag_max).into_iter().enumerate() {
            acf[k] += v;
        }
    }
    for v in &mut acf {
        *v /= run.draws.len() as f64;
    }
    let mut tau = 1.0;
    for &rho in &acf[1..] {
        if rho < 0.0 {
            break;
        }
        tau += 2.0 * rho;
    }
    let m = run.pooled_len();
    run.timeseries_se = run.sd * (tau / m as f64).sqrt();
    run.mcse_ok = run.timeseries_se <= 0.05 * run.sd;
    run.acf = acf;
    Ok(run)
}

fn summarize(draws: Vec<Vec<f64>>, acceptance_rate: f64) -> PosteriorRun {
    let pooled: Vec<f64> = draws.iter().flatten().copied().collect();
    let m = pooled.len();
    let mean = pooled.iter().sum::<f64>() / m as f64;
    let sd = if m > 1 {
        (pooled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = pooled;
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let quantiles = [
        quantile(&sorted, 0.025),
        quantile(&sorted, 0.25),
        quantile(&sorted, 0.50),
        quantile(&sorted, 0.75),
        quantile(&sorted, 0.975),
    ];
    PosteriorRun {
        draws,
        mean,
        sd,
        naive_se: naive_standard_error(sd, m),
        timeseries_se: f64::NAN,
        quantiles,
        acf: Vec::new(),
        acceptance_rate,
        low_acceptance: acceptance_rate < 0.01,
        mcse_ok: false,
    }
}

/// Runs `cfg.chains` independent random-walk Metropolis chains and pools
/// the kept draws. Chain c uses the generator seeded `seed + c`.
pub fn sample_posterior(
    data: &RepostDataset,
    prior: &PriorSpec,
    cfg: &McmcConfig,
) -> Result<PosteriorRun> {
    data.validate()?;
    prior.validate()?;
    cfg.validate()?;
    let proposal_sd = cfg.proposal_sd.unwrap_or(0.15 * prior.width());
    let normal = Normal::new(0.0, proposal_sd).expect("validated sd");

    let mut draws = Vec::with_capacity(cfg.chains);
    let mut accepted = 0usize;
    let mut kept_phase_steps = 0usize;
    for chain in 0..cfg.chains {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(chain as u64));
        let mut alpha = rng.gen_range(prior.low..prior.high);
        let mut lp = log_posterior(alpha, data, prior);
        let mut kept = Vec::with_capacity(cfg.iterations / cfg.thin);
        for step in 1..=(cfg.burn_in + cfg.iterations) {
            let proposal = alpha + normal.sample(&mut rng);
            let lp_new = log_posterior(proposal, data, prior);
            let u: f64 = rng.gen();
            let accept = lp_new - lp > u.ln();
            if accept {
                alpha = proposal;
                lp = lp_new;
            }
            if step > cfg.burn_in {
                kept_phase_steps += 1;
                if accept {
                    accepted += 1;
                }
                if (step - cfg.burn_in) % cfg.thin == 0 {
                    kept.push(alpha);
                }
            }
        }
        draws.push(kept);
    }
    let acceptance_rate = accepted as f64 / kept_phase_steps as f64;
    let run = summarize(draws, acceptance_rate);
    let lag_max = run.draws.iter().map(Vec::len).min().unwrap_or(1).min(51) - 1;
    diagnostics(run, lag_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_data(p0: f64) -> RepostDataset {
        RepostDataset { rows: vec![], avg_friends: 10.0, p0 }
    }

    #[test]
    fn log_posterior_outside_support() {
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        assert_eq!(
            log_posterior(-0.1, &empty_data(0.1), &prior),
            f64::NEG_INFINITY
        );
        assert_eq!(
            log_posterior(5.1, &empty_data(0.1), &prior),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn log_posterior_empty_product() {
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        assert_eq!(log_posterior(2.0, &empty_data(0.1), &prior), 0.0);
    }

    #[test]
    fn log_posterior_single_row_matches_influence_example() {
        // R=1, Y=1, F=2, p0=0.1, alpha=0.25 -> log(0.334375)
        let data = RepostDataset {
            rows: vec![RepostRow { post_id: 0, reposts: 1, outcome: 1 }],
            avg_friends: 2.0,
            p0: 0.1,
        };
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        let got = log_posterior(0.25, &data, &prior);
        assert!((got - 0.334375f64.ln()).abs() < 1e-12, "{got}");
    }

    #[test]
    fn naive_se_identity() {
        let data = empty_data(0.1);
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        let cfg = McmcConfig { iterations: 2000, burn_in: 200, seed: 3, ..Default::default() };
        let run = sample_posterior(&data, &prior, &cfg).unwrap();
        let m = run.pooled_len() as f64;
        assert!((run.naive_se * m.sqrt() - run.sd).abs() < 1e-12);
    }

    #[test]
    fn table_rows_reproduce_naive_se() {
        let se = naive_standard_error(1.05082, 6000);
        assert!((se - 0.01357).abs() < 5e-6, "{se}");
        let se = naive_standard_error(1.044780, 60000);
        assert!((se - 0.004265).abs() < 5e-6, "{se}");
    }

    #[test]
    fn prior_recovery_narrow() {
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        let cfg = McmcConfig { seed: 11, ..Default::default() };
        let run = sample_posterior(&empty_data(0.2), &prior, &cfg).unwrap();
        assert!((run.mean - 2.5).abs() < 0.05, "mean {}", run.mean);
        assert!((run.sd - 1.443).abs() < 0.05, "sd {}", run.sd);
        assert!(!run.low_acceptance);
        for chain in &run.draws {
            assert_eq!(chain.len(), 2000);
            for &d in chain {
                assert!((0.0..=5.0).contains(&d));
            }
        }
    }

    #[test]
    fn prior_recovery_wide() {
        let prior = PriorSpec { low: 0.0, high: 15.0 };
        let cfg = McmcConfig { seed: 11, ..Default::default() };
        let run = sample_posterior(&empty_data(0.2), &prior, &cfg).unwrap();
        assert!((run.mean - 7.5).abs() < 0.15, "mean {}", run.mean);
    }

    #[test]
    fn degenerate_chain_diagnostics() {
        let run = summarize(vec![vec![2.0, 2.0, 2.0, 2.0]], 1.0);
        assert_eq!(run.sd, 0.0);
        assert!(run.quantiles.iter().all(|&q| q == 2.0));
        let run = diagnostics(run, 2).unwrap();
        assert_eq!(run.acf[0], 1.0);
    }

    #[test]
    fn iid_draws_have_flat_acf() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let chain: Vec<f64> = (0..4000).map(|_| rng.gen::<f64>()).collect();
        let m = chain.len() as f64;
        let run = summarize(vec![chain], 1.0);
        let run = diagnostics(run, 20).unwrap();
        for (k, &rho) in run.acf.iter().enumerate().skip(1) {
            assert!(rho.abs() < 3.0 / m.sqrt(), "lag {k}: {rho}");
        }
    }

    #[test]
    fn lag_error_when_too_few_draws() {
        let run = summarize(vec![vec![1.0, 2.0, 3.0]], 1.0);
        assert!(diagnostics(run, 5).is_err());
    }

    #[test]
    fn quantiles_nondecreasing() {
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        let cfg = McmcConfig { iterations: 1000, burn_in: 100, seed: 5, ..Default::default() };
        let run = sample_posterior(&empty_data(0.2), &prior, &cfg).unwrap();
        for w in run.quantiles.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let data = RepostDataset {
            rows: vec![
                RepostRow { post_id: 0, reposts: 3, outcome: 1 },
                RepostRow { post_id: 1, reposts: 0, outcome: 0 },
            ],
            avg_friends: 5.0,
            p0: 0.1,
        };
        let prior = PriorSpec { low: 0.0, high: 5.0 };
        let cfg = McmcConfig { iterations: 500, burn_in: 50, seed: 9, ..Default::default() };
        let a = sample_posterior(&data, &prior, &cfg).unwrap();
        let b = sample_posterior(&data, &prior, &cfg).unwrap();
        assert_eq!(a.draws, b.draws);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }
}
