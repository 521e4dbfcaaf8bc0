use super::{Label, MdpState, PartialLabeling};
use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A combinatorial node labeling problem.
///
/// Implementations assume the partial labeling already satisfies the
/// problem's condition on the labeled subgraph, which holds for every state
/// reached through legal actions; extensibility then only inspects the
/// edges between `v` and labeled nodes.
pub trait LabelingProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Labels worth testing for an extension of `labeling`.
    fn candidate_labels(&self, labeling: &PartialLabeling) -> Vec<Label>;

    /// Whether labeling `v` with `label` keeps the partial labeling extensible.
    fn extensible(
        &self,
        g: &Graph,
        labeling: &PartialLabeling,
        v: usize,
        label: Label,
    ) -> Result<bool>;

    /// Label chosen for `v` in `state`. It always passes [`Self::extensible`].
    fn label_rule(&self, state: &MdpState<'_>, v: usize) -> Label;

    fn is_feasible(&self, g: &Graph, labels: &[Label]) -> bool;

    /// Cost of a feasible complete labeling.
    fn cost(&self, g: &Graph, labels: &[Label]) -> f64;

    /// Label given to every remaining node once the outcome is settled.
    fn completion_label(&self, _state: &MdpState<'_>) -> Option<Label> {
        None
    }
}

/// The problems shipped with the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    /// Graph coloring; cost is the number of colours.
    #[serde(rename = "gc")]
    Coloring,
    /// Minimum vertex cover; cost is the cover size.
    #[serde(rename = "mvc")]
    VertexCover,
    /// Maximum independent set; cost is minus the set size.
    #[serde(rename = "mis")]
    IndependentSet,
}

impl Problem {
    pub fn short_name(&self) -> &'static str {
        match self {
            Problem::Coloring => "gc",
            Problem::VertexCover => "mvc",
            Problem::IndependentSet => "mis",
        }
    }

    pub fn is_binary(&self) -> bool {
        !matches!(self, Problem::Coloring)
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gc" | "coloring" | "colouring" => Ok(Problem::Coloring),
            "mvc" | "vertex-cover" => Ok(Problem::VertexCover),
            "mis" | "independent-set" => Ok(Problem::IndependentSet),
            other => Err(Error::Usage(format!("unknown problem `{other}`"))),
        }
    }
}

fn check_unlabeled(labeling: &PartialLabeling, v: usize) -> Result<()> {
    if v >= labeling.node_count() {
        return Err(Error::Usage(format!("node {v} out of range")));
    }
    if labeling.is_labeled(v) {
        return Err(Error::Usage(format!("node {v} is already labeled")));
    }
    Ok(())
}

impl LabelingProblem for Problem {
    fn name(&self) -> &str {
        self.short_name()
    }

    fn candidate_labels(&self, labeling: &PartialLabeling) -> Vec<Label> {
        match self {
            Problem::Coloring => (1..=labeling.distinct_label_count() + 1).collect(),
            _ => vec![0, 1],
        }
    }

    fn extensible(
        &self,
        g: &Graph,
        labeling: &PartialLabeling,
        v: usize,
        label: Label,
    ) -> Result<bool> {
        check_unlabeled(labeling, v)?;
        let neighbour_has = |l: Label| g.neighbors(v).iter().any(|&u| labeling.label(u) == Some(l));
        Ok(match self {
            Problem::Coloring => {
                label >= 1 && label <= labeling.distinct_label_count() + 1 && !neighbour_has(label)
            }
            Problem::VertexCover => match label {
                1 => true,
                0 => g
                    .neighbors(v)
                    .iter()
                    .all(|&u| labeling.label(u).is_none_or(|l| l == 1)),
                _ => false,
            },
            Problem::IndependentSet => match label {
                0 => true,
                1 => !neighbour_has(1),
                _ => false,
            },
        })
    }

    fn label_rule(&self, state: &MdpState<'_>, v: usize) -> Label {
        let g = state.graph();
        let labeling = state.labeling();
        match self {
            Problem::Coloring => {
                let deg = g.degree(v);
                let mut used = vec![false; deg + 2];
                for &u in g.neighbors(v) {
                    if let Some(c) = labeling.label(u) {
                        if c <= deg + 1 {
                            used[c] = true;
                        }
                    }
                }
                (1..=deg + 1).find(|&c| !used[c]).expect("deg + 1 colours suffice")
            }
            Problem::VertexCover => {
                if state.covered_edges() < g.edge_count() {
                    1
                } else {
                    0
                }
            }
            Problem::IndependentSet => {
                if g.neighbors(v).iter().any(|&u| labeling.label(u) == Some(1)) {
                    0
                } else {
                    1
                }
            }
        }
    }

    fn is_feasible(&self, g: &Graph, labels: &[Label]) -> bool {
        if labels.len() != g.node_count() {
            return false;
        }
        match self {
            Problem::Coloring => {
                labels.iter().all(|&l| l >= 1) && g.edges().all(|(u, v)| labels[u] != labels[v])
            }
            Problem::VertexCover => {
                labels.iter().all(|&l| l <= 1)
                    && g.edges().all(|(u, v)| labels[u] == 1 || labels[v] == 1)
            }
            Problem::IndependentSet => {
                labels.iter().all(|&l| l <= 1)
                    && g.edges().all(|(u, v)| !(labels[u] == 1 && labels[v] == 1))
            }
        }
    }

    fn cost(&self, _g: &Graph, labels: &[Label]) -> f64 {
        match self {
            Problem::Coloring => {
                let mut seen: Vec<Label> = labels.to_vec();
                seen.sort_unstable();
                seen.dedup();
                seen.len() as f64
            }
            Problem::VertexCover => labels.iter().filter(|&&l| l == 1).count() as f64,
            Problem::IndependentSet => -(labels.iter().filter(|&&l| l == 1).count() as f64),
        }
    }

    fn completion_label(&self, state: &MdpState<'_>) -> Option<Label> {
        match self {
            Problem::VertexCover if state.covered_edges() == state.graph().edge_count() => Some(0),
            _ => None,
        }
    }
}
