//! Exact solvers for small instances.
//!
//! Both searches count visited search-tree nodes against a fixed budget so
//! that running out of time is deterministic.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::heuristics::{dsatur, mvc_approx};
use crate::labeling::{rollout_with_ordering, Label, LabelingProblem, Problem};
use crate::rng::seeded;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub const DEFAULT_NODE_LIMIT: usize = 64;
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;
pub const EXHAUSTIVE_LIMIT: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    /// Largest graph the oracles accept.
    pub max_nodes: usize,
    /// Search-tree nodes before giving up.
    pub max_search_nodes: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: DEFAULT_NODE_LIMIT,
            max_search_nodes: DEFAULT_SEARCH_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub optimum: usize,
    pub witness: Vec<Label>,
    pub explored: u64,
}

fn check_size(g: &Graph, budget: &OracleBudget) -> Result<()> {
    if g.node_count() > budget.max_nodes {
        return Err(Error::Parameter(format!(
            "graph has {} nodes, oracle limit is {}",
            g.node_count(),
            budget.max_nodes
        )));
    }
    Ok(())
}

/// A clique found greedily from every start node; the largest is returned.
pub fn greedy_clique(g: &Graph) -> Vec<usize> {
    let n = g.node_count();
    let mut best: Vec<usize> = Vec::new();
    for start in 0..n {
        let mut clique = vec![start];
        let mut candidates: Vec<usize> = g.neighbors(start).to_vec();
        while !candidates.is_empty() {
            let &pick = candidates
                .iter()
                .max_by_key(|&&v| (g.degree(v), std::cmp::Reverse(v)))
                .expect("non-empty");
            clique.push(pick);
            candidates.retain(|&u| u != pick && g.has_edge(u, pick));
        }
        if clique.len() > best.len() {
            best = clique;
        }
    }
    best
}

struct ColourSearch<'a> {
    g: &'a Graph,
    colours: Vec<usize>,
    // neighbour_count[v][c]: coloured neighbours of v with colour c
    neighbour_count: Vec<Vec<u32>>,
    saturation: Vec<usize>,
    best: usize,
    best_colours: Vec<usize>,
    lower: usize,
    explored: u64,
    budget: u64,
}

impl ColourSearch<'_> {
    fn assign(&mut self, v: usize, c: usize) {
        self.colours[v] = c;
        for &u in self.g.neighbors(v) {
            let slot = &mut self.neighbour_count[u][c];
            if *slot == 0 {
                self.saturation[u] += 1;
            }
            *slot += 1;
        }
    }

    fn unassign(&mut self, v: usize) {
        let c = self.colours[v];
        self.colours[v] = 0;
        for &u in self.g.neighbors(v) {
            let slot = &mut self.neighbour_count[u][c];
            *slot -= 1;
            if *slot == 0 {
                self.saturation[u] -= 1;
            }
        }
    }

    fn pick(&self) -> Option<usize> {
        (0..self.g.node_count())
            .filter(|&v| self.colours[v] == 0)
            .max_by_key(|&v| (self.saturation[v], self.g.degree(v), std::cmp::Reverse(v)))
    }

    /// Returns `Ok(true)` once the lower bound is met.
    fn search(&mut self, used: usize) -> Result<bool> {
        self.explored += 1;
        if self.explored > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
                lower: self.lower,
                upper: self.best,
            });
        }
        let Some(v) = self.pick() else {
            if used < self.best {
                self.best = used;
                self.best_colours = self.colours.clone();
            }
            return Ok(self.best <= self.lower);
        };
        let top = (used + 1).min(self.best - 1);
        for c in 1..=top {
            if self.neighbour_count[v][c] == 0 {
                self.assign(v, c);
                let done = self.search(used.max(c))?;
                self.unassign(v);
                if done {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Chromatic number by DSATUR-ordered branch and bound, seeded with the
/// DSATUR colouring and a greedy clique bound.
pub fn exact_chromatic(g: &Graph, budget: &OracleBudget) -> Result<OracleResult> {
    check_size(g, budget)?;
    let n = g.node_count();
    if n == 0 {
        return Ok(OracleResult {
            optimum: 0,
            witness: vec![],
            explored: 0,
        });
    }
    let upper = dsatur(g);
    let clique = greedy_clique(g);
    let ub = upper.cost as usize;
    if clique.len() == ub {
        return Ok(OracleResult {
            optimum: ub,
            witness: upper.labels,
            explored: 0,
        });
    }
    let mut s = ColourSearch {
        g,
        colours: vec![0; n],
        neighbour_count: vec![vec![0; ub + 2]; n],
        saturation: vec![0; n],
        best: ub,
        best_colours: upper.labels.clone(),
        lower: clique.len(),
        explored: 0,
        budget: budget.max_search_nodes,
    };
    // a maximum clique can always take colours 1..=|clique|
    for (i, &v) in clique.iter().enumerate() {
        s.assign(v, i + 1);
    }
    s.search(clique.len())?;
    Ok(OracleResult {
        optimum: s.best,
        witness: s.best_colours,
        explored: s.explored,
    })
}

struct CoverSearch<'a> {
    g: &'a Graph,
    alive: Vec<bool>,
    degree: Vec<usize>,
    alive_edges: usize,
    in_cover: Vec<bool>,
    cover_size: usize,
    // (vertex, taken into cover)
    log: Vec<(usize, bool)>,
    best: usize,
    best_cover: Vec<bool>,
    explored: u64,
    budget: u64,
    lower: usize,
}

impl CoverSearch<'_> {
    fn remove(&mut self, v: usize, take: bool) {
        self.alive[v] = false;
        for &u in self.g.neighbors(v) {
            if self.alive[u] {
                self.degree[u] -= 1;
                self.alive_edges -= 1;
            }
        }
        if take {
            self.in_cover[v] = true;
            self.cover_size += 1;
        }
        self.log.push((v, take));
    }

    fn undo_to(&mut self, mark: usize) {
        while self.log.len() > mark {
            let (v, take) = self.log.pop().expect("log above mark");
            for &u in self.g.neighbors(v) {
                if self.alive[u] {
                    self.degree[u] += 1;
                    self.alive_edges += 1;
                }
            }
            self.alive[v] = true;
            if take {
                self.in_cover[v] = false;
                self.cover_size -= 1;
            }
        }
    }

    fn reduce(&mut self) {
        loop {
            let mut changed = false;
            for v in 0..self.g.node_count() {
                if !self.alive[v] {
                    continue;
                }
                match self.degree[v] {
                    0 => {
                        self.remove(v, false);
                        changed = true;
                    }
                    1 => {
                        let u = *self
                            .g
                            .neighbors(v)
                            .iter()
                            .find(|&&u| self.alive[u])
                            .expect("degree one");
                        self.remove(u, true);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn matching_bound(&self) -> usize {
        let mut matched = vec![false; self.g.node_count()];
        let mut size = 0;
        for (u, v) in self.g.edges() {
            if self.alive[u] && self.alive[v] && !matched[u] && !matched[v] {
                matched[u] = true;
                matched[v] = true;
                size += 1;
            }
        }
        size
    }

    fn search(&mut self) -> Result<()> {
        self.explored += 1;
        if self.explored > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
                lower: self.lower,
                upper: self.best,
            });
        }
        let mark = self.log.len();
        self.reduce();
        if self.alive_edges == 0 {
            if self.cover_size < self.best {
                self.best = self.cover_size;
                self.best_cover = self.in_cover.clone();
            }
            self.undo_to(mark);
            return Ok(());
        }
        if self.cover_size + self.matching_bound() >= self.best {
            self.undo_to(mark);
            return Ok(());
        }
        let v = (0..self.g.node_count())
            .filter(|&v| self.alive[v])
            .max_by_key(|&v| (self.degree[v], std::cmp::Reverse(v)))
            .expect("an edge is alive");
        let branch = self.log.len();
        self.remove(v, true);
        let r = self.search();
        self.undo_to(branch);
        r?;
        if self.best > self.lower {
            let neighbours: Vec<usize> = self
                .g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| self.alive[u])
                .collect();
            for u in neighbours {
                self.remove(u, true);
            }
            self.remove(v, false);
            let r = self.search();
            self.undo_to(branch);
            r?;
        }
        self.undo_to(mark);
        Ok(())
    }
}

/// Minimum vertex cover by branch and bound: a maximum-degree node is either
/// in the cover or all of its neighbours are.
pub fn exact_mvc(g: &Graph, budget: &OracleBudget) -> Result<OracleResult> {
    check_size(g, budget)?;
    let n = g.node_count();
    let seed = mvc_approx(g, true);
    let mut s = CoverSearch {
        g,
        alive: vec![true; n],
        degree: (0..n).map(|v| g.degree(v)).collect(),
        alive_edges: g.edge_count(),
        in_cover: vec![false; n],
        cover_size: 0,
        log: Vec::new(),
        best: seed.cost as usize,
        best_cover: seed.labels.iter().map(|&l| l == 1).collect(),
        explored: 0,
        budget: budget.max_search_nodes,
        lower: 0,
    };
    s.lower = s.matching_bound();
    s.search()?;
    Ok(OracleResult {
        optimum: s.best,
        witness: s.best_cover.iter().map(|&b| b as Label).collect(),
        explored: s.explored,
    })
}

/// Exact optimum cost and witness for any shipped problem. Independent sets
/// are complements of vertex covers.
pub fn exact_optimum(problem: Problem, g: &Graph, budget: &OracleBudget) -> Result<(f64, OracleResult)> {
    match problem {
        Problem::Coloring => {
            let r = exact_chromatic(g, budget)?;
            Ok((r.optimum as f64, r))
        }
        Problem::VertexCover => {
            let r = exact_mvc(g, budget)?;
            Ok((r.optimum as f64, r))
        }
        Problem::IndependentSet => {
            let mut r = exact_mvc(g, budget)?;
            r.optimum = g.node_count() - r.optimum;
            for l in &mut r.witness {
                *l = 1 - *l;
            }
            Ok((-(r.optimum as f64), r))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingMode {
    /// Every permutation of the nodes.
    Exhaustive,
    /// `samples` uniformly random permutations.
    Sampled { samples: usize, seed: u64 },
}

/// Lowest cost the label rule reaches over node orderings.
pub fn best_ordering_cost<P: LabelingProblem + ?Sized>(
    problem: &P,
    g: &Graph,
    mode: OrderingMode,
) -> Result<f64> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    match mode {
        OrderingMode::Exhaustive => {
            if n > EXHAUSTIVE_LIMIT {
                return Err(Error::Parameter(format!(
                    "exhaustive ordering search needs n <= {EXHAUSTIVE_LIMIT}, got {n}"
                )));
            }
            // Heap's algorithm, iterative
            let mut c = vec![0usize; n];
            best = best.min(rollout_with_ordering(problem, g, &order)?.terminal_cost);
            let mut i = 0;
            while i < n {
                if c[i] < i {
                    if i % 2 == 0 {
                        order.swap(0, i);
                    } else {
                        order.swap(c[i], i);
                    }
                    best = best.min(rollout_with_ordering(problem, g, &order)?.terminal_cost);
                    c[i] += 1;
                    i = 0;
                } else {
                    c[i] = 0;
                    i += 1;
                }
            }
        }
        OrderingMode::Sampled { samples, seed } => {
            let mut rng = seeded(seed);
            for _ in 0..samples {
                order.shuffle(&mut rng);
                best = best.min(rollout_with_ordering(problem, g, &order)?.terminal_cost);
            }
        }
    }
    Ok(best)
}
