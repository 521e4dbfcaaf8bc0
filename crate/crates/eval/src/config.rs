use crate::error::{EvalError, Result};
use nodelab_core::heuristics::Heuristic;
use nodelab_core::io::read_graph;
use nodelab_core::oracles::{DEFAULT_SEARCH_BUDGET, OracleBudget};
use nodelab_core::{DatasetSpec, Graph, Problem};
use nodelab_policy::rollout::{GC_SAMPLES, MVC_SAMPLES};
use nodelab_policy::ModelParameters;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// An algorithm in an experiment. Learned policies refer to a checkpoint by
/// name; the name may be left out when the experiment has one checkpoint.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Heuristic(Heuristic),
    Greedy(Option<String>),
    Sample(Option<String>),
}

impl Algorithm {
    pub fn checkpoint(&self) -> Option<&str> {
        match self {
            Algorithm::Greedy(m) | Algorithm::Sample(m) => m.as_deref(),
            Algorithm::Heuristic(_) => None,
        }
    }

    pub fn is_learned(&self) -> bool {
        !matches!(self, Algorithm::Heuristic(_))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Heuristic(h) => f.write_str(h.name()),
            Algorithm::Greedy(None) => f.write_str("greedy"),
            Algorithm::Sample(None) => f.write_str("sample"),
            Algorithm::Greedy(Some(m)) => write!(f, "greedy:{m}"),
            Algorithm::Sample(Some(m)) => write!(f, "sample:{m}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, model) = match s.split_once(':') {
            Some((k, m)) if !m.is_empty() => (k, Some(m.to_string())),
            Some(_) => return Err(EvalError::Usage(format!("algorithm `{s}` names no checkpoint"))),
            None => (s, None),
        };
        match kind {
            "greedy" => Ok(Algorithm::Greedy(model)),
            "sample" => Ok(Algorithm::Sample(model)),
            _ if model.is_none() => Ok(Algorithm::Heuristic(kind.parse()?)),
            _ => Err(EvalError::Usage(format!("unknown algorithm `{s}`"))),
        }
    }
}

impl Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Where the instances of an experiment come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Generate(DatasetSpec),
    /// Glob over DIMACS `.col` or edge-list files, sorted by path.
    Glob(String),
    Files(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedGraph {
    pub id: String,
    pub graph: Graph,
    /// Whether degree features are mean-centred for this graph.
    pub dense: bool,
}

impl DatasetSource {
    pub fn load(&self, seed: u64) -> Result<Vec<NamedGraph>> {
        let paths = match self {
            DatasetSource::Generate(spec) => {
                return Ok(spec
                    .generate(seed)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, g)| NamedGraph {
                        id: format!("{}-n{}-{i:05}", g.spec.family.short_name(), g.spec.n),
                        dense: g.spec.family.dense(),
                        graph: g.graph,
                    })
                    .collect())
            }
            DatasetSource::Glob(pattern) => {
                let mut paths = glob::glob(pattern)
                    .map_err(|e| EvalError::Usage(format!("bad glob `{pattern}`: {e}")))?
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| {
                        let path = e.path().to_path_buf();
                        EvalError::io(path, e.into())
                    })?;
                paths.sort();
                paths
            }
            DatasetSource::Files(paths) => paths.clone(),
        };
        paths
            .iter()
            .map(|p| {
                Ok(NamedGraph {
                    id: file_id(p),
                    graph: read_graph(p)?,
                    dense: false,
                })
            })
            .collect()
    }
}

fn file_id(p: &Path) -> String {
    p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn default_problem() -> Problem {
    Problem::Coloring
}
fn default_oracle_limit() -> usize {
    40
}
fn default_oracle_budget() -> u64 {
    DEFAULT_SEARCH_BUDGET / 10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_problem")]
    pub problem: Problem,
    pub dataset: DatasetSource,
    pub algorithms: Vec<Algorithm>,
    /// Checkpoint paths by name.
    #[serde(default)]
    pub checkpoints: BTreeMap<String, PathBuf>,
    /// Sampled episodes per instance for `sample`; defaults by problem.
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Instances above this many nodes get no exact reference.
    #[serde(default = "default_oracle_limit")]
    pub oracle_limit: usize,
    #[serde(default = "default_oracle_budget")]
    pub oracle_budget: u64,
}

impl ExperimentConfig {
    pub fn new(problem: Problem, dataset: DatasetSource, algorithms: Vec<Algorithm>) -> Self {
        ExperimentConfig {
            problem,
            dataset,
            algorithms,
            checkpoints: BTreeMap::new(),
            samples: None,
            seed: 0,
            oracle_limit: default_oracle_limit(),
            oracle_budget: default_oracle_budget(),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| EvalError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| EvalError::Json {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.samples.unwrap_or(match self.problem {
            Problem::Coloring => GC_SAMPLES,
            _ => MVC_SAMPLES,
        })
    }

    pub fn oracle(&self) -> OracleBudget {
        OracleBudget {
            max_nodes: self.oracle_limit,
            max_search_nodes: self.oracle_budget,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithms.is_empty() {
            return Err(EvalError::Config("no algorithms to evaluate".into()));
        }
        for a in &self.algorithms {
            match a {
                Algorithm::Heuristic(h) if h.problem() != self.problem => {
                    return Err(EvalError::Config(format!("{h} does not solve {}", self.problem)))
                }
                Algorithm::Greedy(None) | Algorithm::Sample(None) if self.checkpoints.len() != 1 => {
                    return Err(EvalError::Config(format!(
                        "`{a}` needs exactly one checkpoint, {} given",
                        self.checkpoints.len()
                    )))
                }
                Algorithm::Greedy(Some(m)) | Algorithm::Sample(Some(m)) if !self.checkpoints.contains_key(m) => {
                    return Err(EvalError::Config(format!("unknown checkpoint `{m}`")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Loads every checkpoint, so a bad file fails before any evaluation.
    pub fn load_models(&self) -> Result<BTreeMap<String, ModelParameters>> {
        self.checkpoints
            .iter()
            .map(|(name, path)| Ok((name.clone(), ModelParameters::load(path)?)))
            .collect()
    }
}
