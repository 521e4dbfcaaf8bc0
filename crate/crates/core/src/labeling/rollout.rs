use super::{verify_and_cost, Label, LabelingProblem, MdpState};
use crate::error::{Error, Result};
use crate::graph::{is_permutation, Graph};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub node: usize,
    pub label: Label,
    pub log_probability: f64,
}

/// One finished episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Index of the first step of a bulk completion, if one happened. Bulk
    /// steps are forced and carry log-probability zero.
    pub bulk_start: Option<usize>,
    pub labels: Vec<Label>,
    pub terminal_cost: f64,
    pub episode_return: f64,
}

impl Trajectory {
    pub fn order(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.node).collect()
    }

    /// Sum of log-probabilities of the chosen (non-forced) actions.
    pub fn log_probability(&self) -> f64 {
        self.steps.iter().map(|s| s.log_probability).sum()
    }

    /// Number of steps a policy actually decided.
    pub fn decided_steps(&self) -> usize {
        self.bulk_start.unwrap_or(self.steps.len())
    }
}

/// Drives the label rule along a node order chosen step by step.
pub struct Episode<'g, 'p, P: LabelingProblem + ?Sized> {
    problem: &'p P,
    state: MdpState<'g>,
    steps: Vec<Step>,
    bulk_start: Option<usize>,
}

impl<'g, 'p, P: LabelingProblem + ?Sized> Episode<'g, 'p, P> {
    pub fn new(problem: &'p P, graph: &'g Graph) -> Self {
        let mut ep = Episode {
            problem,
            state: MdpState::new(graph),
            steps: Vec::with_capacity(graph.node_count()),
            bulk_start: None,
        };
        ep.complete_if_settled()
            .expect("completion labels are legal by construction");
        ep
    }

    pub fn state(&self) -> &MdpState<'g> {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.is_terminal()
    }

    /// Labels `v` with the label rule and records the action.
    pub fn label_node(&mut self, v: usize, log_probability: f64) -> Result<Label> {
        if v >= self.state.graph().node_count() {
            return Err(Error::Usage(format!("node {v} out of range")));
        }
        let label = self.problem.label_rule(&self.state, v);
        self.state.apply(self.problem, v, label)?;
        self.steps.push(Step {
            node: v,
            label,
            log_probability,
        });
        self.complete_if_settled()?;
        Ok(label)
    }

    fn complete_if_settled(&mut self) -> Result<()> {
        if self.state.is_terminal() {
            return Ok(());
        }
        if let Some(label) = self.problem.completion_label(&self.state) {
            self.bulk_start = Some(self.steps.len());
            let rest: Vec<usize> = self.state.labeling().unlabeled_nodes().collect();
            for v in rest {
                self.state.apply(self.problem, v, label)?;
                self.steps.push(Step {
                    node: v,
                    label,
                    log_probability: 0.0,
                });
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<Trajectory> {
        let labels = self
            .state
            .labeling()
            .to_complete()
            .ok_or_else(|| Error::Usage("episode finished before every node was labeled".into()))?;
        let (feasible, cost) = verify_and_cost(self.problem, self.state.graph(), &labels)?;
        let cost = match (feasible, cost.finite()) {
            (true, Some(c)) => c,
            _ => {
                return Err(Error::InvalidGraph(
                    "terminal labeling failed verification".into(),
                ))
            }
        };
        Ok(Trajectory {
            steps: self.steps,
            bulk_start: self.bulk_start,
            labels,
            terminal_cost: cost,
            episode_return: -cost,
        })
    }
}

/// Applies the label rule along `order`. For vertex cover, nodes left once
/// the cover is complete are labeled `0` in one bulk step.
pub fn rollout_with_ordering<P: LabelingProblem + ?Sized>(
    problem: &P,
    g: &Graph,
    order: &[usize],
) -> Result<Trajectory> {
    if order.len() != g.node_count() || !is_permutation(order) {
        return Err(Error::Usage("ordering must be a permutation of 0..n".into()));
    }
    let mut ep = Episode::new(problem, g);
    for &v in order {
        if ep.is_done() {
            break;
        }
        if ep.state().labeling().is_labeled(v) {
            continue;
        }
        ep.label_node(v, 0.0)?;
    }
    ep.finish()
}
