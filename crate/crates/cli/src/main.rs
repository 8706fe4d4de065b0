//! Command-line driver for the knnclust library.

mod report;

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use knnclust::adabox::{adabox_cluster, AdaBoxConfig};
use knnclust::bench::{
    aggregate, cvi_selection_experiment, generate_scenario, kmeans, scaling_experiment, scenario, write_scaling_csv,
    write_table1_csv, Scenario, SelectionParams, SCENARIOS,
};
use knnclust::data::{load_csv, load_labels, save_csv, save_labels};
use knnclust::knn::{build_knn_graph, mutual_graph, symmetrize, UndirectedGraph};
use knnclust::slcd::{slcd_run, Objective, SampleSpec, SearchSpace, SlcdParams};
use knnclust::{Dataset, Error};
use serde::Serialize;

use report::{evaluate, Method, Metrics, Timer};

#[derive(Parser)]
#[command(name = "knnclust", version, about = "Clustering and cluster validation on kNN graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    Gen(GenArgs),
    /// Build an exact kNN graph and write its edges.
    Knn(KnnArgs),
    /// Cluster a dataset.
    #[command(subcommand)]
    Cluster(ClusterCommand),
    /// Score an existing labeling.
    Eval(EvalArgs),
    /// Run a benchmark experiment.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Args)]
struct GenArgs {
    /// Scenario name; `--list` prints the registry.
    #[arg(long, required_unless_present = "list")]
    scenario: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the scenario's point count.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, required_unless_present = "list")]
    out: Option<PathBuf>,
    #[arg(long)]
    list: bool,
}

#[derive(Args, Clone)]
struct Input {
    /// Input CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// The input has no header row.
    #[arg(long)]
    no_header: bool,
    /// Header name of the truth-label column; never used as a feature.
    #[arg(long, default_value = "label")]
    label_column: String,
}

impl Input {
    /// Loads the matrix; a label column, when present, is split off as truth.
    fn load(&self) -> Result<Dataset> {
        let path = &self.input;
        let ctx = || format!("reading {}", path.display());
        if self.no_header {
            return load_csv(path, false, None).with_context(ctx);
        }
        match load_csv(path, true, Some(&self.label_column)) {
            Err(Error::MissingLabelColumn(_)) => load_csv(path, true, None).with_context(ctx),
            other => other.with_context(ctx),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum GraphView {
    Directed,
    Union,
    Mutual,
}

#[derive(Args)]
struct KnnArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value_t = GraphView::Directed)]
    view: GraphView,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Label file to write.
    #[arg(long)]
    out: PathBuf,
    /// JSON report to write.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Evaluate against the input's label column.
    #[arg(long)]
    truth: bool,
    /// Neighbor count of the evaluation graph.
    #[arg(long, default_value_t = 15)]
    graph_k: usize,
    /// Skip Silhouette, Davies-Bouldin and Calinski-Harabasz.
    #[arg(long)]
    no_classical: bool,
    /// Add wall-clock stage timings to the report.
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum ClusterCommand {
    /// Spectral box-grid clustering.
    Adabox(AdaboxArgs),
    /// Lloyd's K-Means with k-means++ seeding.
    Kmeans(KmeansArgs),
    /// Sample, search AdaBox settings on the sample, deploy to all points.
    Slcd(SlcdArgs),
}

/// Rescue threshold: `none` or a fraction in [0.5, 1].
#[derive(Copy, Clone, Debug)]
struct Theta(Option<f64>);

fn parse_theta(s: &str) -> std::result::Result<Theta, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Theta(None));
    }
    s.parse::<f64>().map(|t| Theta(Some(t))).map_err(|e| format!("{s:?}: {e}"))
}

#[derive(Args)]
struct AdaboxArgs {
    #[command(flatten)]
    input: Input,
    /// AdaBox configuration JSON (for example a trial record's `config`);
    /// replaces the individual flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k_graph: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 8)]
    r: usize,
    #[arg(long, default_value_t = 0.5)]
    tau_q: f64,
    #[arg(long, default_value_t = 3)]
    tau_abs: usize,
    #[arg(long, default_value_t = 2)]
    e_min: usize,
    #[arg(long, default_value = "0.67", value_parser = parse_theta)]
    theta: Theta,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Args)]
struct KmeansArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Copy, Clone, ValueEnum)]
enum ObjectiveArg {
    /// Graph-SCOPE, no labels needed.
    Gs,
    /// Supervised SCOPE on the sample's truth labels.
    Scope,
}

#[derive(Args)]
struct SlcdArgs {
    #[command(flatten)]
    input: Input,
    /// Sample size n_s.
    #[arg(long = "sample", default_value_t = 1000)]
    n_s: usize,
    /// Density bins.
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// Minimum draws per nonempty bin.
    #[arg(long, default_value_t = 1)]
    floor: usize,
    #[arg(long, default_value_t = 300)]
    trials: usize,
    /// Prototype votes per deployed point.
    #[arg(long, default_value_t = 5)]
    k_dep: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Gs)]
    objective: ObjectiveArg,
    /// Search space JSON; defaults to the built-in ranges.
    #[arg(long)]
    space: Option<PathBuf>,
    /// Also write the search result JSON here.
    #[arg(long)]
    search_out: Option<PathBuf>,
    #[command(flatten)]
    out: ReportArgs,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: Input,
    /// Label file, one integer per line.
    #[arg(long)]
    labels: PathBuf,
    /// Evaluate against the input's label column.
    #[arg(long)]
    truth: bool,
    /// Comma-separated subset of gs, supervised, classical.
    #[arg(long, value_delimiter = ',', default_value = "gs,supervised,classical")]
    metrics: Vec<MetricArg>,
    #[arg(long, default_value_t = 15)]
    graph_k: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    timings: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Gs,
    Supervised,
    Classical,
}

#[derive(Subcommand)]
enum BenchCommand {
    /// CVI-guided choice of k for K-Means over the scenario registry.
    Table1(Table1Args),
    /// Rank agreement of each CVI with SCOPE and ARI across dimensions.
    Scaling(ScalingArgs),
}

#[derive(Args)]
struct Table1Args {
    #[arg(long, default_value_t = 300)]
    trials: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 25)]
    k_max: usize,
    #[arg(long, default_value_t = 15)]
    graph_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated scenario names; all by default.
    #[arg(long, value_delimiter = ',')]
    scenarios: Vec<String>,
    /// Override the point count of every scenario.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScalingArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,10,50,100,250,500,1000,2000")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    #[arg(long, default_value_t = 8)]
    k_true: usize,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long, default_value_t = 25)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn truth_of(data: &Dataset, wanted: bool) -> Result<Option<&knnclust::Labeling>> {
    match (wanted, data.truth()) {
        (false, _) => Ok(None),
        (true, Some(t)) => Ok(Some(t)),
        (true, None) => bail!("--truth given but the input has no label column"),
    }
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    if a.list {
        for s in &SCENARIOS {
            println!("{:20} n={} d={} k={}", s.name, s.n, s.d, s.k_true());
        }
        return Ok(());
    }
    let name = a.scenario.as_deref().expect("clap enforces --scenario");
    let out = a.out.as_deref().expect("clap enforces --out");
    let data = match a.n {
        Some(n) => Scenario { n, ..*scenario(name)? }.generate(a.seed)?,
        None => generate_scenario(name, a.seed)?,
    };
    save_csv(&data, out, true)?;
    Ok(())
}

fn write_graph(g: &UndirectedGraph, path: &Path) -> Result<()> {
    let mut text = String::from("src,dst\n");
    for (i, j) in g.edges() {
        text.push_str(&format!("{i},{j}\n"));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_knn(a: &KnnArgs) -> Result<()> {
    let data = a.input.load()?;
    let g = build_knn_graph(&data, a.k)?;
    match a.view {
        GraphView::Directed => g.write_csv(&a.out)?,
        GraphView::Union => write_graph(&symmetrize(&g), &a.out)?,
        GraphView::Mutual => write_graph(&mutual_graph(&g), &a.out)?,
    }
    Ok(())
}

fn finish(
    data: &Dataset,
    labels: &knnclust::Labeling,
    method: Method,
    out: &ReportArgs,
    mut timer: Timer,
    search: Option<knnclust::slcd::SearchResult>,
) -> Result<()> {
    save_labels(labels, &out.out)?;
    if let Some(path) = &out.report {
        let metrics = Metrics {
            supervised: out.truth,
            classical: !out.no_classical,
        };
        let truth = truth_of(data, out.truth)?;
        let mut rep = evaluate(data, labels, truth, method, out.graph_k, metrics, &mut timer)?;
        rep.search = search;
        rep.timings = timer.finish();
        write_json(&rep, path)?;
    }
    Ok(())
}

fn cmd_adabox(a: &AdaboxArgs) -> Result<()> {
    let mut timer = Timer::new(a.out.timings);
    let data = a.input.load()?;
    timer.lap("load");
    let cfg = match &a.config {
        Some(p) => read_json::<AdaBoxConfig>(p)?,
        None => AdaBoxConfig {
            k_graph: a.k_graph,
            m: a.m,
            r: a.r,
            tau_q: a.tau_q,
            tau_abs: a.tau_abs,
            e_min: a.e_min,
            theta: a.theta.0,
        },
    };
    let (labels, _) = adabox_cluster(&data, &cfg)?;
    timer.lap("cluster");
    let method = Method {
        name: "adabox".into(),
        config: serde_json::to_value(cfg)?,
    };
    finish(&data, &labels, method, &a.out, timer, None)
}

fn cmd_kmeans(a: &KmeansArgs) -> Result<()> {
    let mut timer = Timer::new(a.out.timings);
    let data = a.input.load()?;
    timer.lap("load");
    let fit = kmeans(&data, a.k, a.seed)?;
    timer.lap("cluster");
    let method = Method {
        name: "kmeans".into(),
        config: serde_json::json!({
            "k": a.k,
            "seed": a.seed,
            "inertia": fit.inertia,
            "iterations": fit.iterations,
        }),
    };
    finish(&data, &fit.labels, method, &a.out, timer, None)
}

fn cmd_slcd(a: &SlcdArgs) -> Result<()> {
    let mut timer = Timer::new(a.out.timings);
    let data = a.input.load()?;
    timer.lap("load");
    let space = match &a.space {
        Some(p) => read_json::<SearchSpace>(p)?,
        None => SearchSpace::default(),
    };
    let objective = match a.objective {
        ObjectiveArg::Gs => Objective::GraphScope,
        ObjectiveArg::Scope => Objective::Scope,
    };
    let params = SlcdParams {
        spec: SampleSpec {
            n_s: a.n_s,
            bins: a.bins,
            floor: a.floor,
        },
        space: space.clone(),
        trials: a.trials,
        k_dep: a.k_dep,
        seed: a.seed,
        objective,
        weights: Default::default(),
    };
    let out = slcd_run(&data, &params)?;
    timer.lap("cluster");
    if let Some(p) = &a.search_out {
        write_json(&out.search, p)?;
    }
    let method = Method {
        name: "slcd".into(),
        config: serde_json::json!({
            "sample": params.spec,
            "space": space,
            "trials": a.trials,
            "k_dep": a.k_dep,
            "seed": a.seed,
            "objective": objective,
            "best": out.search.best.config,
        }),
    };
    finish(&data, &out.labels, method, &a.out, timer, Some(out.search))
}

fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let mut timer = Timer::new(a.timings);
    let data = a.input.load()?;
    let labels = load_labels(&a.labels)?;
    if labels.len() != data.n() {
        return Err(Error::LengthMismatch {
            left: data.n(),
            right: labels.len(),
        }
        .into());
    }
    timer.lap("load");
    let supervised = a.metrics.contains(&MetricArg::Supervised) && a.truth;
    let truth = truth_of(&data, a.truth)?;
    let metrics = Metrics {
        supervised,
        classical: a.metrics.contains(&MetricArg::Classical),
    };
    let method = Method {
        name: "external".into(),
        config: serde_json::json!({ "labels": a.labels.display().to_string() }),
    };
    let mut rep = evaluate(&data, &labels, truth, method, a.graph_k, metrics, &mut timer)?;
    rep.timings = timer.finish();
    write_json(&rep, &a.out)
}

fn cmd_table1(a: &Table1Args) -> Result<()> {
    let mut chosen: Vec<Scenario> = if a.scenarios.is_empty() {
        SCENARIOS.to_vec()
    } else {
        a.scenarios.iter().map(|s| scenario(s).copied()).collect::<knnclust::Result<_>>()?
    };
    if let Some(n) = a.n {
        chosen.iter_mut().for_each(|s| s.n = n);
    }
    let params = SelectionParams {
        trials: a.trials,
        k_range: (a.k_min, a.k_max),
        seed: a.seed,
        graph_k: a.graph_k,
    };
    let rows = cvi_selection_experiment(&chosen, &params)?;
    write_table1_csv(&rows, &a.out)?;
    println!("{:18} {:>10} {:>9} {:>5} {:>5}", "cvi", "mean_scope", "mean_ari", "wins", "tied");
    for agg in aggregate(&rows) {
        println!(
            "{:18} {:>10.4} {:>9.4} {:>5} {:>5}",
            agg.cvi, agg.mean_scope, agg.mean_ari, agg.wins, agg.tied_wins
        );
    }
    Ok(())
}

fn cmd_scaling(a: &ScalingArgs) -> Result<()> {
    let rows = scaling_experiment(&a.dims, a.n, a.k_true, (a.k_min, a.k_max), a.seed)?;
    write_scaling_csv(&rows, &a.out)?;
    println!("{:>6} {:18} {:>12} {:>10}", "d", "cvi", "tau_vs_scope", "tau_vs_ari");
    for r in &rows {
        println!("{:>6} {:18} {:>12.4} {:>10.4}", r.d, r.cvi, r.tau_vs_scope, r.tau_vs_ari);
    }
    Ok(())
}

/// `THREADS` sets the worker count; unset, empty, `0` or `max` use every core.
fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("THREADS") else {
        return Ok(());
    };
    let raw = raw.trim();
    if raw.is_empty() || raw.eq_ignore_ascii_case("max") {
        return Ok(());
    }
    let n: usize = raw.parse().with_context(|| format!("THREADS={raw:?} is not a count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Knn(a) => cmd_knn(a),
        Command::Cluster(ClusterCommand::Adabox(a)) => cmd_adabox(a),
        Command::Cluster(ClusterCommand::Kmeans(a)) => cmd_kmeans(a),
        Command::Cluster(ClusterCommand::Slcd(a)) => cmd_slcd(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(BenchCommand::Table1(a)) => cmd_table1(a),
        Command::Bench(BenchCommand::Scaling(a)) => cmd_scaling(a),
    }
}
