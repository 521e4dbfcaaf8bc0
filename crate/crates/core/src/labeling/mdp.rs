use super::{Label, LabelingProblem, PartialLabeling};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// State of the labeling decision process: a partial labeling plus the
/// actions that produced it.
#[derive(Debug, Clone)]
pub struct MdpState<'g> {
    graph: &'g Graph,
    labeling: PartialLabeling,
    history: Vec<(usize, Label)>,
    /// Edges with at least one endpoint labeled `1`.
    covered_edges: usize,
}

impl<'g> MdpState<'g> {
    pub fn new(graph: &'g Graph) -> Self {
        MdpState {
            graph,
            labeling: PartialLabeling::new(graph.node_count()),
            history: Vec::new(),
            covered_edges: 0,
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn labeling(&self) -> &PartialLabeling {
        &self.labeling
    }

    pub fn step(&self) -> usize {
        self.history.len()
    }

    pub fn last_action(&self) -> Option<(usize, Label)> {
        self.history.last().copied()
    }

    /// Actions in the order they were taken.
    pub fn history(&self) -> &[(usize, Label)] {
        &self.history
    }

    pub fn covered_edges(&self) -> usize {
        self.covered_edges
    }

    pub fn is_terminal(&self) -> bool {
        self.labeling.is_complete()
    }

    /// Labels `v` with `label` in place. The bookkeeping costs `O(deg(v))`.
    pub fn apply<P: LabelingProblem + ?Sized>(
        &mut self,
        problem: &P,
        v: usize,
        label: Label,
    ) -> Result<()> {
        if !problem.extensible(self.graph, &self.labeling, v, label)? {
            return Err(Error::IllegalAction { node: v, label });
        }
        if label == 1 {
            self.covered_edges += self
                .graph
                .neighbors(v)
                .iter()
                .filter(|&&u| self.labeling.label(u) != Some(1))
                .count();
        }
        self.labeling.assign(v, label)?;
        self.history.push((v, label));
        Ok(())
    }

    /// Successor state `S ∪ {(v, label)}`.
    pub fn apply_action<P: LabelingProblem + ?Sized>(
        &self,
        problem: &P,
        v: usize,
        label: Label,
    ) -> Result<MdpState<'g>> {
        let mut next = self.clone();
        next.apply(problem, v, label)?;
        Ok(next)
    }

    /// All legal `(node, label)` pairs.
    pub fn legal_actions<P: LabelingProblem + ?Sized>(&self, problem: &P) -> Vec<(usize, Label)> {
        let labels = problem.candidate_labels(&self.labeling);
        self.labeling
            .unlabeled_nodes()
            .flat_map(|v| labels.iter().map(move |&l| (v, l)))
            .filter(|&(v, l)| {
                problem
                    .extensible(self.graph, &self.labeling, v, l)
                    .unwrap_or(false)
            })
            .collect()
    }
}
