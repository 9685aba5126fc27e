//! Command-line entry point binding the planners, sweeps, estimators and
//! generators. All randomness flows from explicit `--seed` flags, so a
//! repeated invocation reproduces its outputs byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use imro::bayes::{sample_posterior, McmcConfig, PriorSpec};
use imro::datasets::{
    generate_planted_rule, generate_repost_data, read_labeled_csv, read_repost_csv,
    read_samples_csv, write_labeled_csv, write_mapping, write_repost_csv, PlantedRuleSpec,
    RepostSpec,
};
use imro::error::{Error, Result};
use imro::graph::{
    generate_random_graph, load_edge_list, save_edge_list, synth1_standin, synth2_standin,
    synth3_standin, SocialGraph,
};
use imro::influence::{InfluenceParams, ModelKind};
use imro::metrics::cross_validate;
use imro::ml::{estimate_p0, train_dtc, train_nbc, train_rfc_with, RfcOptions, TrainedModel};
use imro::planner::{ldh_value, sdp_value, single_stage_value, CampaignConfig, PlanMethod};
use imro::sweep::{run_sweep, write_csv as write_sweep_csv, SweepParam, SweepSpec};

#[derive(Parser, Debug)]
#[command(
    name = "imro",
    about = "Staged impression-allocation planning and parameter estimation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute an impression-allocation policy on a graph.
    Plan(PlanArgs),
    /// Sweep one model parameter and tabulate expected clicks.
    Sweep(SweepArgs),
    /// Estimate the influence constant alpha by MCMC.
    EstimateAlpha(EstimateAlphaArgs),
    /// Estimate the base click probability p0 with a trained classifier.
    EstimateP0(EstimateP0Args),
    /// K-fold cross-validation of a classifier on labeled data.
    Crossval(CrossvalArgs),
    /// Generate synthetic graphs and datasets.
    Generate(GenerateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Gim,
    Nim,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Sdp,
    Ldh,
    Single,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClassifierArg {
    Nbc,
    Dtc,
    Rfc,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Graph: edge-list path or fixture name (synth1, synth2, synth3).
    #[arg(long)]
    graph: String,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    p0: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long)]
    budget: u32,
    #[arg(long)]
    stages: u32,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Optional CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Parameter to vary.
    #[arg(long, value_enum)]
    param: SweepParamArg,
    /// Swept values: comma list ("1,2,5") or range "lo:hi:step".
    #[arg(long)]
    values: String,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long)]
    graph: String,
    #[arg(long)]
    budget: u32,
    #[arg(long)]
    stages: u32,
    /// Fixed value of the non-swept parameters.
    #[arg(long, default_value_t = 0.25)]
    p0: f64,
    #[arg(long, default_value_t = 0.25)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Run the sweep this many times and require identical results.
    #[arg(long, default_value_t = 1)]
    repeats: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SweepParamArg {
    P0,
    Alpha,
    Beta,
}

#[derive(Args, Debug)]
struct EstimateAlphaArgs {
    /// Repost CSV: header post_id,reposts,outcome.
    #[arg(long)]
    data: PathBuf,
    /// Average friend count F; defaults to the mean repost count.
    #[arg(long)]
    avg_friends: Option<f64>,
    #[arg(long, default_value_t = 0.25)]
    p0: f64,
    #[arg(long, default_value_t = 0.0)]
    prior_low: f64,
    #[arg(long, default_value_t = 5.0)]
    prior_high: f64,
    #[arg(long, default_value_t = 3)]
    chains: usize,
    /// Kept-phase iterations per chain (before thinning).
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    #[arg(long, default_value_t = 1000)]
    burn_in: usize,
    #[arg(long, default_value_t = 5)]
    thin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    proposal_sd: Option<f64>,
    /// Summary CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional raw-draws CSV (chain,draw per line).
    #[arg(long)]
    draws_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateP0Args {
    /// Training CSV of categorical features and a binary label.
    #[arg(long)]
    train: PathBuf,
    /// Feature CSV to average predictions over.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, value_enum)]
    model: ClassifierArg,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    #[arg(long, default_value_t = 20)]
    trees: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Average hard votes instead of leaf probabilities (RFC only).
    #[arg(long, default_value_t = false)]
    hard_vote: bool,
    /// Optional CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional sidecar recording the category mapping.
    #[arg(long)]
    mapping_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CrossvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    model: ClassifierArg,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    smoothing: f64,
    #[arg(long, default_value_t = 5)]
    depth: usize,
    #[arg(long, default_value_t = 20)]
    trees: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
}

#[derive(Subcommand, Debug)]
enum GenerateKind {
    /// Erdős–Rényi G(n,p) edge list.
    Graph {
        #[arg(long)]
        nodes: usize,
        #[arg(long)]
        edge_prob: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Repost dataset at a known alpha.
    Repost {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.05)]
        p0: f64,
        #[arg(long)]
        avg_friends: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Planted-rule classification dataset.
    Planted {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 10)]
        features: usize,
        #[arg(long, default_value_t = 3)]
        informative: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_graph(spec: &str) -> Result<SocialGraph> {
    match spec {
        "synth1" => Ok(synth1_standin()),
        "synth2" => Ok(synth2_standin()),
        "synth3" => Ok(synth3_standin()),
        path => load_edge_list(path),
    }
}

fn build_params(model: ModelArg, p0: f64, alpha: f64, beta: f64) -> Result<InfluenceParams> {
    let params = match model {
        ModelArg::Gim => InfluenceParams::Gim { p0, alpha },
        ModelArg::Nim => InfluenceParams::Nim { p0, alpha, beta },
    };
    params.validate()?;
    Ok(params)
}

/// "lo:hi:step" (inclusive endpoints within 1e-9) or a comma list.
fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::Param(format!("invalid number {s:?} in value list")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() == 3 {
        let (lo, hi, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step <= 0.0 {
            return Err(Error::Param("range step must be positive".into()));
        }
        let mut values = Vec::new();
        let mut k = 0u32;
        loop {
            let v = lo + k as f64 * step;
            if v > hi + 1e-9 {
                break;
            }
            values.push(v);
            k += 1;
        }
        return Ok(values);
    }
    spec.split(',').map(parse).collect()
}

fn format_float(v: f64) -> String {
    format!("{v}")
}

fn run_plan(args: &PlanArgs) -> Result<()> {
    let graph = resolve_graph(&args.graph)?;
    let params = build_params(args.model, args.p0, args.alpha, args.beta)?;
    let config = CampaignConfig {
        stages: args.stages,
        budget: args.budget,
        params,
    };
    let result = match args.method {
        MethodArg::Sdp => sdp_value(&config, &graph)?,
        MethodArg::Ldh => ldh_value(&config, &graph)?,
        MethodArg::Single => single_stage_value(&config, &graph)?,
    };
    let allocation: Vec<String> = result
        .first_stage_allocation
        .iter()
        .map(|n| n.to_string())
        .collect();
    println!("expected_clicks={}", format_float(result.expected_clicks));
    println!("first_stage_allocation={}", allocation.join(" "));
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        writeln!(w, "method,expected_clicks,first_stage_allocation")?;
        writeln!(
            w,
            "{},{},{}",
            result.method,
            format_float(result.expected_clicks),
            allocation.join(" ")
        )?;
    }
    Ok(())
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let graph = resolve_graph(&args.graph)?;
    let spec = SweepSpec {
        parameter: match args.param {
            SweepParamArg::P0 => SweepParam::P0,
            SweepParamArg::Alpha => SweepParam::Alpha,
            SweepParamArg::Beta => SweepParam::Beta,
        },
        values: parse_values(&args.values)?,
        model: match args.model {
            ModelArg::Gim => ModelKind::Gim,
            ModelArg::Nim => ModelKind::Nim,
        },
        method: match args.method {
            MethodArg::Sdp => PlanMethod::Sdp,
            MethodArg::Ldh => PlanMethod::Ldh,
            MethodArg::Single => {
                return Err(Error::Param("sweep method must be sdp or ldh".into()))
            }
        },
        stages: args.stages,
        budget: args.budget,
        p0: args.p0,
        alpha: args.alpha,
        beta: args.beta,
    };
    if args.repeats == 0 {
        return Err(Error::Param("repeats must be at least 1".into()));
    }
    let rows = run_sweep(&spec, &graph)?;
    for _ in 1..args.repeats {
        let again = run_sweep(&spec, &graph)?;
        if again != rows {
            return Err(Error::Contract(
                "sweep results differed between repeats".into(),
            ));
        }
    }
    let w = BufWriter::new(File::create(&args.out)?);
    write_sweep_csv(&spec, &rows, w)?;
    println!("rows={}", rows.len());
    Ok(())
}

fn run_estimate_alpha(args: &EstimateAlphaArgs) -> Result<()> {
    let data = read_repost_csv(&args.data, args.p0, args.avg_friends)?;
    let prior = PriorSpec {
        low: args.prior_low,
        high: args.prior_high,
    };
    let cfg = McmcConfig {
        chains: args.chains,
        iterations: args.iters,
        burn_in: args.burn_in,
        thin: args.thin,
        seed: args.seed,
        proposal_sd: args.proposal_sd,
    };
    let run = sample_posterior(&data, &prior, &cfg)?;
    if run.low_acceptance {
        eprintln!(
            "warning: acceptance rate {:.4} below 1%; consider a smaller --proposal-sd",
            run.acceptance_rate
        );
    }
    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(
        w,
        "mean,sd,naive_se,timeseries_se,q2.5,q25,q50,q75,q97.5,acceptance_rate,mcse_ok"
    )?;
    writeln!(
        w,
        "{},{},{},{},{},{},{},{},{},{},{}",
        format_float(run.mean),
        format_float(run.sd),
        format_float(run.naive_se),
        format_float(run.timeseries_se),
        format_float(run.quantiles[0]),
        format_float(run.quantiles[1]),
        format_float(run.quantiles[2]),
        format_float(run.quantiles[3]),
        format_float(run.quantiles[4]),
        format_float(run.acceptance_rate),
        run.mcse_ok
    )?;
    drop(w);
    if let Some(path) = &args.draws_out {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "chain,draw")?;
        for (c, chain) in run.draws.iter().enumerate() {
            for d in chain {
                writeln!(w, "{},{}", c, format_float(*d))?;
            }
        }
    }
    println!(
        "mean={} sd={} naive_se={} timeseries_se={}",
        format_float(run.mean),
        format_float(run.sd),
        format_float(run.naive_se),
        format_float(run.timeseries_se)
    );
    Ok(())
}

fn train_classifier(
    model: ClassifierArg,
    data: &imro::ml::LabeledDataset,
    smoothing: f64,
    depth: usize,
    trees: usize,
    seed: u64,
    hard_vote: bool,
) -> Result<TrainedModel> {
    match model {
        ClassifierArg::Nbc => train_nbc(data, smoothing),
        ClassifierArg::Dtc => train_dtc(data, depth),
        ClassifierArg::Rfc => train_rfc_with(
            data,
            RfcOptions {
                hard_vote,
                ..RfcOptions::new(trees, depth, seed)
            },
        ),
    }
}

fn run_estimate_p0(args: &EstimateP0Args) -> Result<()> {
    let (train, mapping) = read_labeled_csv(&args.train, args.label_column.as_deref())?;
    if let Some(path) = &args.mapping_out {
        write_mapping(&mapping, path)?;
    }
    let model = train_classifier(
        args.model,
        &train,
        args.smoothing,
        args.depth,
        args.trees,
        args.seed,
        args.hard_vote,
    )?;
    let samples = read_samples_csv(&args.samples, &mapping)?;
    let estimate = estimate_p0(&model, &samples)?;
    println!("p0_estimate={}", format_float(estimate));
    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        writeln!(w, "model,samples,p0_estimate")?;
        writeln!(
            w,
            "{:?},{},{}",
            args.model,
            samples.len(),
            format_float(estimate)
        )?;
    }
    Ok(())
}

fn run_crossval(args: &CrossvalArgs) -> Result<()> {
    let (data, _) = read_labeled_csv(&args.data, args.label_column.as_deref())?;
    let result = cross_validate(
        &data,
        args.folds,
        |train| {
            train_classifier(
                args.model,
                train,
                args.smoothing,
                args.depth,
                args.trees,
                args.seed,
                false,
            )
        },
        args.seed,
    )?;
    let mut w = BufWriter::new(File::create(&args.out)?);
    writeln!(w, "fold,auc,accuracy")?;
    for (k, fold) in result.per_fold.iter().enumerate() {
        writeln!(
            w,
            "{},{},{}",
            k + 1,
            format_float(fold.auc),
            format_float(fold.accuracy)
        )?;
    }
    writeln!(
        w,
        "mean,{},{}",
        format_float(result.mean_auc),
        format_float(result.mean_accuracy)
    )?;
    println!(
        "mean_auc={} mean_accuracy={}",
        format_float(result.mean_auc),
        format_float(result.mean_accuracy)
    );
    Ok(())
}

fn run_generate(args: &GenerateArgs) -> Result<()> {
    match &args.kind {
        GenerateKind::Graph {
            nodes,
            edge_prob,
            seed,
            out,
        } => {
            let graph = generate_random_graph(*nodes, *edge_prob, *seed)?;
            save_edge_list(&graph, out)?;
            println!("nodes={} edges={}", graph.node_count(), graph.edge_count());
        }
        GenerateKind::Repost {
            size,
            alpha,
            p0,
            avg_friends,
            seed,
            out,
        } => {
            let data = generate_repost_data(&RepostSpec {
                size: *size,
                seed: *seed,
                true_alpha: *alpha,
                p0: *p0,
                avg_friends: *avg_friends,
            })?;
            write_repost_csv(&data, out)?;
            println!("rows={}", data.rows.len());
        }
        GenerateKind::Planted {
            size,
            features,
            informative,
            noise,
            seed,
            out,
        } => {
            let data = generate_planted_rule(&PlantedRuleSpec {
                size: *size,
                seed: *seed,
                n_features: *features,
                n_informative: *informative,
                noise: *noise,
            })?;
            write_labeled_csv(&data, out)?;
            println!("rows={}", data.rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // resolved configuration, defaults included, for reproducibility
    println!("# config: {:?}", cli.command);
    let result = match &cli.command {
        Command::Plan(args) => run_plan(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::EstimateAlpha(args) => run_estimate_alpha(args),
        Command::EstimateP0(args) => run_estimate_p0(args),
        Command::Crossval(args) => run_crossval(args),
        Command::Generate(args) => run_generate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Param(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
