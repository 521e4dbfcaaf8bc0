//! The `nodelab` command line.
//!
//! Exit status is 0 on success, 1 for usage errors (bad flags, bad
//! configuration, empty datasets) and 2 for failures while running.

use crate::bench::bench_runtime;
use crate::config::{Algorithm, DatasetSource, ExperimentConfig};
use crate::error::{EvalError, Result};
use crate::evaluate::{evaluate, EvaluationReport};
use crate::output::{bench_csv, to_json, write_file, write_report, Format};
use clap::{Args, Parser, Subcommand};
use nodelab_core::io::{read_graph, write_graph, GraphFormat};
use nodelab_core::oracles::{exact_optimum, OracleBudget};
use nodelab_core::labeling::LabelingRecord;
use nodelab_core::{verify_and_cost, DatasetSpec, Family, Graph, Problem};
use nodelab_policy::{
    greedy_rollout, sample_rollout, train_with, DecodeMode, Hyper, Instance, ModelParameters, TrainConfig,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "nodelab", version, about = "Node-labeling heuristics, learned policies and exact oracles")]
pub struct Cli {
    /// Base random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory (or file, for `solve`) receiving machine-readable output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated dataset to disk.
    Generate(GenerateArgs),
    /// Train a policy; `--config` takes a training configuration.
    Train(TrainArgs),
    /// Solve one instance with one algorithm.
    Solve(SolveArgs),
    /// Run an experiment; `--config` takes an experiment configuration.
    Evaluate,
    /// Exact optimum of one instance.
    Oracle(OracleArgs),
    /// Runtime and operation-count scaling of greedy decoding.
    Bench(BenchArgs),
}

fn family(s: &str) -> std::result::Result<Family, String> {
    match s.to_ascii_lowercase().as_str() {
        "ba" => Ok(Family::ba()),
        "er" => Ok(Family::er()),
        "ser" => Ok(Family::ser()),
        "ws" => Ok(Family::ws()),
        _ => Err(format!("unknown family `{s}` (ba, er, ser, ws)")),
    }
}

fn problem(s: &str) -> std::result::Result<Problem, String> {
    s.parse().map_err(|e: nodelab_core::Error| e.to_string())
}

fn decode_mode(s: &str) -> std::result::Result<DecodeMode, String> {
    s.parse().map_err(|e: nodelab_policy::PolicyError| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Col,
    Edgelist,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long = "family", value_parser = family, default_value = "ser")]
    pub families: Vec<Family>,
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub nodes: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, value_enum, default_value = "col")]
    pub graph_format: FileFormat,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, value_parser = problem)]
    pub problem: Option<Problem>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Embedding dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub dataset_size: Option<usize>,
    /// Graphs per node count in a batch.
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub nodes: Option<Vec<usize>>,
    #[arg(long = "family", value_parser = family)]
    pub families: Vec<Family>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long, value_parser = decode_mode)]
    pub decode_mode: Option<DecodeMode>,
    /// Context size K.
    #[arg(long)]
    pub context: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long, value_parser = problem, default_value = "gc")]
    pub problem: Problem,
    /// Heuristic name, `greedy` or `sample`.
    #[arg(long)]
    pub algorithm: String,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Sampled episodes for `sample`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = decode_mode)]
    pub decode_mode: Option<DecodeMode>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_parser = problem, default_value = "gc")]
    pub problem: Problem,
    #[arg(long)]
    pub input: PathBuf,
    /// Search-tree nodes before giving up.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Largest accepted graph.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = problem, default_value = "gc")]
    pub problem: Problem,
    /// Model to time; a fresh one of dimension `--dim` otherwise.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub dim: usize,
    #[arg(long, value_delimiter = ',', default_value = "320,640,1280,2560,5120")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = decode_mode, default_value = "local,global")]
    pub modes: Vec<DecodeMode>,
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| EvalError::Json {
        path: path.display().to_string(),
        source,
    })
}

fn output_dir(cli: &Cli, default: &str) -> PathBuf {
    cli.output.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn generate(cli: &Cli, args: &GenerateArgs, out: &mut dyn Write) -> Result<()> {
    let spec: DatasetSpec = match &cli.config {
        Some(p) => read_json(p)?,
        None => DatasetSpec::new(args.families.clone(), args.nodes.clone(), args.count),
    };
    let seed = cli.seed.unwrap_or(0);
    let graphs = DatasetSource::Generate(spec.clone()).load(seed)?;
    let dir = output_dir(cli, "dataset");
    let format = match args.graph_format {
        FileFormat::Col => GraphFormat::DimacsCol,
        FileFormat::Edgelist => GraphFormat::EdgeList,
    };
    for g in &graphs {
        write_file(&dir.join(format!("{}.{}", g.id, format.extension())), &write_graph(&g.graph, format))?;
    }
    #[derive(Serialize)]
    struct Manifest<'a> {
        seed: u64,
        dataset: &'a DatasetSpec,
        instances: Vec<&'a str>,
    }
    let manifest = Manifest {
        seed,
        dataset: &spec,
        instances: graphs.iter().map(|g| g.id.as_str()).collect(),
    };
    write_file(&dir.join("manifest.json"), &to_json(&manifest))?;
    let _ = writeln!(out, "wrote {} graphs to {}", graphs.len(), dir.display());
    Ok(())
}

fn train(cli: &Cli, args: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg: TrainConfig = match &cli.config {
        Some(p) => read_json(p)?,
        None => TrainConfig::default(),
    };
    if let Some(p) = args.problem {
        cfg.problem = p;
    }
    if let Some(e) = args.epochs {
        cfg.epochs = e;
    }
    if let Some(d) = args.dim {
        cfg.hyper.d = d;
    }
    if let Some(s) = args.dataset_size {
        cfg.dataset_size = s;
    }
    if let Some(b) = args.batch_size {
        cfg.batch_size = b;
    }
    if let Some(n) = &args.nodes {
        cfg.node_counts = n.clone();
    }
    if !args.families.is_empty() {
        cfg.families = args.families.clone();
    }
    if let Some(lr) = args.learning_rate {
        cfg.learning_rate = lr;
    }
    if let Some(m) = args.decode_mode {
        cfg.hyper.decode_mode = m;
    }
    if let Some(k) = args.context {
        cfg.hyper.context_size = k;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let dir = output_dir(cli, "run");
    std::fs::create_dir_all(&dir).map_err(|e| EvalError::io(&dir, e))?;
    write_file(&dir.join("config.json"), &to_json(&cfg))?;
    let log_path = dir.join("train_log.jsonl");
    let mut log = std::fs::File::create(&log_path).map_err(|e| EvalError::io(&log_path, e))?;
    let mut write_err = None;
    let outcome = train_with(&cfg, |r| {
        let line = serde_json::to_string(r).expect("serializable");
        if let Err(e) = writeln!(log, "{line}") {
            write_err.get_or_insert(e);
        }
        let _ = writeln!(
            out,
            "epoch {:>4}  train {:.4}  challenge {:.4}  baseline {:.4}  p {:.4}{}",
            r.epoch,
            r.train_cost,
            r.challenge_cost,
            r.baseline_cost,
            r.p_value,
            if r.swapped { "  baseline updated" } else { "" }
        );
    })?;
    if let Some(e) = write_err {
        return Err(EvalError::io(&log_path, e));
    }
    outcome.params.save(&dir.join("model.json"))?;
    let _ = writeln!(out, "saved model to {}", dir.join("model.json").display());
    Ok(())
}

fn load_model(path: Option<&Path>, mode: Option<DecodeMode>) -> Result<ModelParameters> {
    let path = path.ok_or_else(|| EvalError::Usage("learned algorithms need --checkpoint".into()))?;
    let mut p = ModelParameters::load(path)?;
    if let Some(m) = mode {
        p.hyper.decode_mode = m;
    }
    Ok(p)
}

fn solve(cli: &Cli, args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let algorithm: Algorithm = args.algorithm.parse()?;
    let g = read_graph(&args.input)?;
    let labels = match &algorithm {
        Algorithm::Heuristic(h) => h.run(args.problem, &g)?.labels,
        Algorithm::Greedy(_) | Algorithm::Sample(_) => {
            let model = load_model(args.checkpoint.as_deref(), args.decode_mode)?;
            let inst = Instance::new(g.clone(), model.hyper.d_in, false)?;
            let t = match algorithm {
                Algorithm::Greedy(_) => greedy_rollout(&args.problem, &inst, &model)?,
                _ => {
                    let mut cfg = ExperimentConfig::new(args.problem, DatasetSource::Files(vec![]), vec![]);
                    cfg.samples = args.samples;
                    sample_rollout(&args.problem, &inst, &model, cfg.sample_count(), cli.seed.unwrap_or(0))?
                }
            };
            t.labels
        }
    };
    let (_, cost) = verify_and_cost(&args.problem, &g, &labels)?;
    let record = LabelingRecord {
        problem: args.problem.to_string(),
        labels,
        cost,
    };
    let text = serde_json::to_string(&record).expect("serializable");
    if let Some(path) = &cli.output {
        write_file(path, &format!("{text}\n"))?;
    }
    let _ = writeln!(out, "{text}");
    Ok(())
}

fn oracle(cli: &Cli, args: &OracleArgs, out: &mut dyn Write) -> Result<()> {
    let g: Graph = read_graph(&args.input)?;
    let mut budget = OracleBudget::default();
    if let Some(b) = args.budget {
        budget.max_search_nodes = b;
    }
    if let Some(l) = args.limit {
        budget.max_nodes = l;
    }
    let (cost, r) = exact_optimum(args.problem, &g, &budget)?;
    #[derive(Serialize)]
    struct OracleOutput {
        problem: String,
        optimum: usize,
        cost: f64,
        witness: Vec<usize>,
        explored: u64,
    }
    let text = serde_json::to_string(&OracleOutput {
        problem: args.problem.to_string(),
        optimum: r.optimum,
        cost,
        witness: r.witness,
        explored: r.explored,
    })
    .expect("serializable");
    if let Some(path) = &cli.output {
        write_file(path, &format!("{text}\n"))?;
    }
    let _ = writeln!(out, "{text}");
    Ok(())
}

fn print_summary(report: &EvaluationReport, out: &mut dyn Write) {
    let _ = writeln!(
        out,
        "{:<24} {:>9} {:>10} {:>10} {:>8} {:>8}",
        "algorithm", "feasible", "mean cost", "ratio", "wins %", "opt %"
    );
    let f = |x: Option<f64>, p: usize| x.map_or("n/a".to_string(), |v| format!("{v:.p$}"));
    for s in &report.summary {
        let _ = writeln!(
            out,
            "{:<24} {:>4}/{:<4} {:>10} {:>10} {:>8.1} {:>8}",
            s.algorithm,
            s.feasible,
            s.instances,
            f(s.mean_cost, 3),
            f(s.mean_ratio, 4),
            s.wins,
            f(s.optimal, 1)
        );
    }
}

fn run_evaluate(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| EvalError::Usage("evaluate needs --config <experiment.json>".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let report = evaluate(&cfg)?;
    let dir = output_dir(cli, "report");
    let files = write_report(&report, &dir, cli.format)?;
    print_summary(&report, out);
    for f in files {
        let _ = writeln!(out, "wrote {}", f.display());
    }
    Ok(())
}

fn bench(cli: &Cli, args: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let params = match &args.checkpoint {
        Some(p) => ModelParameters::load(p)?,
        None => ModelParameters::init(Hyper::with_dim(args.dim), seed)?,
    };
    let table = bench_runtime(args.problem, &params, &args.sizes, &args.modes, args.repeats, seed)?;
    let dir = output_dir(cli, "bench");
    let (name, text) = match cli.format {
        Format::Json => ("bench.json", to_json(&table)),
        Format::Csv => ("bench.csv", bench_csv(&table)),
    };
    write_file(&dir.join(name), &text)?;
    let _ = writeln!(out, "{:<8} {:>7} {:>8} {:>12} {:>16}", "mode", "nodes", "edges", "seconds", "arithmetic");
    for r in &table.rows {
        let _ = writeln!(
            out,
            "{:<8} {:>7} {:>8} {:>12.4} {:>16}",
            r.mode.to_string(),
            r.nodes,
            r.edges,
            r.mean_seconds,
            r.arithmetic
        );
    }
    let slopes: BTreeMap<String, f64> = table.slopes.iter().map(|s| (s.mode.to_string(), s.slope)).collect();
    for (m, s) in slopes {
        let _ = writeln!(out, "{m} log-log slope {s:.3}");
    }
    let _ = writeln!(out, "wrote {}", dir.join(name).display());
    Ok(())
}

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Generate(a) => generate(cli, a, out),
        Command::Train(a) => train(cli, a, out),
        Command::Solve(a) => solve(cli, a, out),
        Command::Evaluate => run_evaluate(cli, out),
        Command::Oracle(a) => oracle(cli, a, out),
        Command::Bench(a) => bench(cli, a, out),
    }
}

/// Parses `argv`, runs the command and returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                1
            } else {
                2
            }
        }
    }
}

