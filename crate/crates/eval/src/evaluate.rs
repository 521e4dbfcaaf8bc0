use crate::config::{Algorithm, ExperimentConfig, NamedGraph};
use crate::error::{EvalError, Result};
use nodelab_core::heuristics::HeuristicResult;
use nodelab_core::oracles::exact_optimum;
use nodelab_core::{par, verify_and_cost, Cost, Label, Problem};
use nodelab_policy::{greedy_rollout, sample_rollout, Instance, ModelParameters};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::time::Instant;

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceKind {
    Oracle,
    /// Best cost among the compared algorithms; the oracle was out of reach.
    BestKnown,
}

impl std::fmt::Display for ReferenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ReferenceKind::Oracle => "oracle",
            ReferenceKind::BestKnown => "best-known",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub instance: String,
    pub nodes: usize,
    pub edges: usize,
    pub algorithm: String,
    pub labels: Vec<Label>,
    pub cost: Cost,
    pub feasible: bool,
    pub reference: Option<f64>,
    pub reference_kind: Option<ReferenceKind>,
    pub ratio: Option<f64>,
    /// Matches the oracle optimum; absent without an oracle.
    pub optimal: Option<bool>,
    /// Ties or beats every compared algorithm.
    pub win: bool,
    pub error: Option<String>,
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    pub instances: usize,
    pub feasible: usize,
    pub failures: usize,
    pub mean_cost: Option<f64>,
    pub mean_ratio: Option<f64>,
    /// Percent of instances won, ties included.
    pub wins: f64,
    /// Percent of oracle-solved instances matched.
    pub optimal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub format_version: u32,
    pub problem: Problem,
    pub seed: u64,
    pub records: Vec<InstanceRecord>,
    pub summary: Vec<AlgorithmSummary>,
}

impl EvaluationReport {
    /// Copy with every wall time zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for rec in &mut r.records {
            rec.wall_time = 0.0;
        }
        r
    }

    pub fn summary_for(&self, algorithm: &str) -> Option<&AlgorithmSummary> {
        self.summary.iter().find(|s| s.algorithm == algorithm)
    }
}

/// Solution cost over the reference, oriented so that 1 is optimal and
/// larger is worse for both signs of cost.
pub fn approximation_ratio(cost: f64, reference: f64) -> Option<f64> {
    if cost == reference {
        Some(1.0)
    } else if reference > 0.0 {
        Some(cost / reference)
    } else if reference < 0.0 && cost < 0.0 {
        Some(reference / cost)
    } else {
        None
    }
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    models: &'a BTreeMap<String, ModelParameters>,
}

impl Runner<'_> {
    fn model(&self, name: Option<&str>) -> &ModelParameters {
        match name {
            Some(n) => &self.models[n],
            None => self.models.values().next().expect("validated"),
        }
    }

    fn labels(&self, alg: &Algorithm, g: &NamedGraph, index: usize) -> Result<Vec<Label>> {
        let problem = self.cfg.problem;
        match alg {
            Algorithm::Heuristic(h) => Ok(h.run(problem, &g.graph).map(|r: HeuristicResult| r.labels)?),
            Algorithm::Greedy(m) | Algorithm::Sample(m) => {
                let model = self.model(m.as_deref());
                let inst = Instance::new(g.graph.clone(), model.hyper.d_in, g.dense)?;
                let t = match alg {
                    Algorithm::Greedy(_) => greedy_rollout(&problem, &inst, model)?,
                    _ => {
                        let seed = nodelab_core::rng::derive_seed(self.cfg.seed, &[index as u64]);
                        sample_rollout(&problem, &inst, model, self.cfg.sample_count(), seed)?
                    }
                };
                Ok(t.labels)
            }
        }
    }

    fn instance(&self, index: usize, g: &NamedGraph) -> Vec<InstanceRecord> {
        let problem = self.cfg.problem;
        let oracle = (g.graph.node_count() <= self.cfg.oracle_limit)
            .then(|| exact_optimum(problem, &g.graph, &self.cfg.oracle()).ok())
            .flatten()
            .map(|(opt, _)| opt);
        let mut records: Vec<InstanceRecord> = self
            .cfg
            .algorithms
            .iter()
            .map(|alg| {
                let start = Instant::now();
                let outcome = self
                    .labels(alg, g, index)
                    .and_then(|labels| Ok((verify_and_cost(&problem, &g.graph, &labels)?, labels)));
                let wall_time = start.elapsed().as_secs_f64();
                let (cost, feasible, labels, error) = match outcome {
                    Ok(((feasible, cost), labels)) => (cost, feasible, labels, None),
                    Err(e) => (Cost::Infeasible, false, Vec::new(), Some(e.to_string())),
                };
                InstanceRecord {
                    instance: g.id.clone(),
                    nodes: g.graph.node_count(),
                    edges: g.graph.edge_count(),
                    algorithm: alg.to_string(),
                    labels,
                    cost,
                    feasible,
                    reference: None,
                    reference_kind: None,
                    ratio: None,
                    optimal: None,
                    win: false,
                    error,
                    wall_time,
                }
            })
            .collect();
        let best = records.iter().filter_map(|r| r.cost.finite()).min_by(f64::total_cmp);
        let (reference, kind) = match (oracle, best) {
            (Some(o), _) => (Some(o), Some(ReferenceKind::Oracle)),
            (None, Some(b)) => (Some(b), Some(ReferenceKind::BestKnown)),
            (None, None) => (None, None),
        };
        for r in &mut records {
            r.reference = reference;
            r.reference_kind = kind;
            if let Some(c) = r.cost.finite() {
                r.win = Some(c) == best;
                r.ratio = reference.and_then(|re| approximation_ratio(c, re));
            }
            r.optimal = oracle.map(|o| r.cost.finite() == Some(o));
        }
        records
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

fn percent(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * hits as f64 / total as f64
    }
}

pub fn summarize(algorithms: &[Algorithm], records: &[InstanceRecord]) -> Vec<AlgorithmSummary> {
    algorithms
        .iter()
        .map(|a| {
            let name = a.to_string();
            let rs: Vec<&InstanceRecord> = records.iter().filter(|r| r.algorithm == name).collect();
            let with_oracle: Vec<&&InstanceRecord> = rs.iter().filter(|r| r.optimal.is_some()).collect();
            AlgorithmSummary {
                instances: rs.len(),
                feasible: rs.iter().filter(|r| r.feasible).count(),
                failures: rs.iter().filter(|r| r.error.is_some()).count(),
                mean_cost: mean(rs.iter().filter_map(|r| r.cost.finite())),
                mean_ratio: mean(rs.iter().filter_map(|r| r.ratio)),
                wins: percent(rs.iter().filter(|r| r.win).count(), rs.len()),
                optimal: (!with_oracle.is_empty()).then(|| {
                    percent(with_oracle.iter().filter(|r| r.optimal == Some(true)).count(), with_oracle.len())
                }),
                algorithm: name,
            }
        })
        .collect()
}

/// Runs every algorithm on every instance. Instances are processed in
/// parallel; records come out in instance order.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<EvaluationReport> {
    cfg.validate()?;
    let models = cfg.load_models()?;
    let graphs = cfg.dataset.load(cfg.seed)?;
    if graphs.is_empty() {
        return Err(EvalError::Usage("the dataset holds no instances".into()));
    }
    evaluate_graphs(cfg, &models, &graphs)
}

/// [`evaluate`] on instances and models that are already loaded.
pub fn evaluate_graphs(
    cfg: &ExperimentConfig,
    models: &BTreeMap<String, ModelParameters>,
    graphs: &[NamedGraph],
) -> Result<EvaluationReport> {
    cfg.validate()?;
    let runner = Runner { cfg, models };
    let records: Vec<InstanceRecord> = par::map_range(graphs.len(), |i| runner.instance(i, &graphs[i]))
        .into_iter()
        .flatten()
        .collect();
    Ok(EvaluationReport {
        format_version: REPORT_VERSION,
        problem: cfg.problem,
        seed: cfg.seed,
        summary: summarize(&cfg.algorithms, &records),
        records,
    })
}
