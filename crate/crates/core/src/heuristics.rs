//! Classic greedy baselines: Largest-First, Smallest-Last and DSATUR for
//! colouring, MVCApprox and its degree-greedy variant for vertex cover.
//!
//! All tie-breaks are fixed, so every heuristic is a deterministic function
//! of the input graph.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::labeling::{rollout_with_ordering, Episode, Label, Problem};
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub labels: Vec<Label>,
    pub cost: f64,
    /// Node order the heuristic labeled in.
    pub order: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    LargestFirst,
    SmallestLast,
    Dsatur,
    MvcApprox,
    MvcApproxGreedy,
}

impl Heuristic {
    pub const ALL: [Heuristic; 5] = [
        Heuristic::LargestFirst,
        Heuristic::SmallestLast,
        Heuristic::Dsatur,
        Heuristic::MvcApprox,
        Heuristic::MvcApproxGreedy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Heuristic::LargestFirst => "largest-first",
            Heuristic::SmallestLast => "smallest-last",
            Heuristic::Dsatur => "dsatur",
            Heuristic::MvcApprox => "mvc-approx",
            Heuristic::MvcApproxGreedy => "mvc-approx-greedy",
        }
    }

    pub fn problem(&self) -> Problem {
        match self {
            Heuristic::MvcApprox | Heuristic::MvcApproxGreedy => Problem::VertexCover,
            _ => Problem::Coloring,
        }
    }

    pub fn run(&self, problem: Problem, g: &Graph) -> Result<HeuristicResult> {
        if problem != self.problem() {
            return Err(Error::Usage(format!(
                "{} does not solve {problem}",
                self.name()
            )));
        }
        Ok(match self {
            Heuristic::LargestFirst => largest_first(g),
            Heuristic::SmallestLast => smallest_last(g),
            Heuristic::Dsatur => dsatur(g),
            Heuristic::MvcApprox => mvc_approx(g, false),
            Heuristic::MvcApproxGreedy => mvc_approx(g, true),
        })
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Heuristic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Heuristic::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown heuristic `{s}`")))
    }
}

fn colour_in_order(g: &Graph, order: Vec<usize>) -> HeuristicResult {
    let t = rollout_with_ordering(&Problem::Coloring, g, &order)
        .expect("heuristic orders are permutations");
    HeuristicResult {
        labels: t.labels,
        cost: t.terminal_cost,
        order,
    }
}

/// Colours nodes by decreasing degree (ties: lower id first).
pub fn largest_first(g: &Graph) -> HeuristicResult {
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    colour_in_order(g, order)
}

/// Minimum-degree removal order and the degeneracy it certifies.
pub fn degeneracy_order(g: &Graph) -> (Vec<usize>, usize) {
    let n = g.node_count();
    let mut degree: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|v| (degree[v], v)).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut degeneracy = 0;
    while let Some((d, v)) = queue.pop_first() {
        degeneracy = degeneracy.max(d);
        removed[v] = true;
        order.push(v);
        for &u in g.neighbors(v) {
            if !removed[u] {
                queue.remove(&(degree[u], u));
                degree[u] -= 1;
                queue.insert((degree[u], u));
            }
        }
    }
    (order, degeneracy)
}

/// Colours nodes in reverse degeneracy order.
pub fn smallest_last(g: &Graph) -> HeuristicResult {
    let (mut order, _) = degeneracy_order(g);
    order.reverse();
    colour_in_order(g, order)
}

/// Colours the node with the most distinct neighbour colours next (ties:
/// higher degree, then lower id).
pub fn dsatur(g: &Graph) -> HeuristicResult {
    let n = g.node_count();
    let problem = Problem::Coloring;
    let mut ep = Episode::new(&problem, g);
    let mut neighbour_colours: Vec<BTreeSet<Label>> = vec![BTreeSet::new(); n];
    let key = |sat: usize, v: usize| (sat, g.degree(v), Reverse(v));
    let mut queue: BTreeSet<(usize, usize, Reverse<usize>)> = (0..n).map(|v| key(0, v)).collect();
    let mut order = Vec::with_capacity(n);
    while let Some((_, _, Reverse(v))) = queue.pop_last() {
        let c = ep.label_node(v, 0.0).expect("rule colours are legal");
        order.push(v);
        for &u in g.neighbors(v) {
            if ep.state().labeling().is_labeled(u) {
                continue;
            }
            let before = neighbour_colours[u].len();
            if neighbour_colours[u].insert(c) {
                queue.remove(&key(before, u));
                queue.insert(key(before + 1, u));
            }
        }
    }
    let t = ep.finish().expect("dsatur labels every node");
    HeuristicResult {
        labels: t.labels,
        cost: t.terminal_cost,
        order,
    }
}

/// Matching-based 2-approximation: repeatedly take an uncovered edge and put
/// both endpoints in the cover. `greedy` scans edges by decreasing degree sum
/// in the original graph instead of lexicographically.
pub fn mvc_approx(g: &Graph, greedy: bool) -> HeuristicResult {
    let n = g.node_count();
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    if greedy {
        edges.sort_by_key(|&(u, v)| (Reverse(g.degree(u) + g.degree(v)), u, v));
    }
    let mut labels = vec![0; n];
    let mut order = Vec::with_capacity(n);
    for (u, v) in edges {
        if labels[u] == 0 && labels[v] == 0 {
            labels[u] = 1;
            labels[v] = 1;
            order.extend([u, v]);
        }
    }
    order.extend((0..n).filter(|&v| labels[v] == 0));
    let cost = labels.iter().filter(|&&l| l == 1).count() as f64;
    HeuristicResult {
        labels,
        cost,
        order,
    }
}
