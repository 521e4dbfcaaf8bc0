//! Undirected simple graphs.

pub mod enumerate;

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// An undirected, unweighted, simple graph on nodes `0..n`.
///
/// Adjacency lists are sorted and free of duplicates and self-loops. A
/// `Graph` is immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list, dropping duplicate edges.
    ///
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop on node {u}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            adjacency,
            edge_count: edge_count / 2,
        })
    }

    /// Builds a graph from adjacency lists, checking every invariant.
    pub fn from_adjacency(adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        let g = Graph {
            adjacency,
            edge_count,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
        Graph::from_edges(n, edges).expect("complete graph is simple")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least three nodes");
        Graph::from_edges(n, (0..n).map(|u| (u, (u + 1) % n))).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        Graph::from_edges(n, (1..n).map(|u| (u - 1, u))).expect("path is simple")
    }

    /// Star with centre `0` and `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        Graph::from_edges(10, outer.chain(spokes).chain(inner)).expect("petersen is simple")
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn mean_degree(&self) -> f64 {
        if self.node_count() == 0 {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.node_count() as f64
        }
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Checks symmetry, simplicity, id range and the handshake identity.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        let mut degree_sum = 0;
        for (u, list) in self.adjacency.iter().enumerate() {
            for w in list.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidGraph(format!(
                        "adjacency of {u} not strictly sorted"
                    )));
                }
            }
            for &v in list {
                if v >= n {
                    return Err(Error::InvalidGraph(format!("neighbour {v} of {u} out of range")));
                }
                if v == u {
                    return Err(Error::InvalidGraph(format!("self-loop on {u}")));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(Error::InvalidGraph(format!("edge {u}->{v} not mirrored")));
                }
            }
            degree_sum += list.len();
        }
        if degree_sum != 2 * self.edge_count {
            return Err(Error::InvalidGraph(format!(
                "degree sum {degree_sum} != 2 * {}",
                self.edge_count
            )));
        }
        Ok(())
    }

    /// Component id per node; components numbered in order of their smallest node.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.node_count();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if comp[v] == usize::MAX {
                        comp[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() <= 1 || self.components().0 == 1
    }

    /// Subgraph induced by `nodes`, relabelled `0..k` in the given order.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (i, &v) in nodes.iter().enumerate() {
            index[v] = i;
        }
        let adjacency = nodes
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adjacency[v]
                    .iter()
                    .filter_map(|&u| (index[u] != usize::MAX).then_some(index[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect::<Vec<_>>();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Graph {
            adjacency,
            edge_count,
        }
    }

    /// Restricts to the largest connected component (ties: the component
    /// holding the smallest node id), keeping relative node order.
    pub fn largest_component(&self) -> Graph {
        let (count, comp) = self.components();
        if count <= 1 {
            return self.clone();
        }
        let mut sizes = vec![0usize; count];
        for &c in &comp {
            sizes[c] += 1;
        }
        let best = (0..count)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        let nodes: Vec<usize> = (0..self.node_count()).filter(|&v| comp[v] == best).collect();
        self.induced_subgraph(&nodes)
    }

    /// Relabels node `v` as `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.node_count();
        if perm.len() != n || !is_permutation(perm) {
            return Err(Error::Usage("relabel needs a permutation of 0..n".into()));
        }
        Graph::from_edges(n, self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Disjoint union; the nodes of `graphs[i]` are offset by the sizes of the
    /// graphs before it.
    pub fn disjoint_union(graphs: &[&Graph]) -> Graph {
        let mut adjacency = Vec::with_capacity(graphs.iter().map(|g| g.node_count()).sum());
        let mut edge_count = 0;
        let mut offset = 0;
        for g in graphs {
            adjacency.extend(
                g.adjacency
                    .iter()
                    .map(|list| list.iter().map(|&v| v + offset).collect::<Vec<_>>()),
            );
            offset += g.node_count();
            edge_count += g.edge_count;
        }
        Graph {
            adjacency,
            edge_count,
        }
    }

    /// Degeneracy: the largest minimum degree met while repeatedly deleting a
    /// minimum-degree node.
    pub fn degeneracy(&self) -> usize {
        crate::heuristics::degeneracy_order(self).1
    }

    /// Two-colouring if the graph is bipartite.
    pub fn bipartition(&self) -> Option<Vec<u8>> {
        let n = self.node_count();
        let mut side = vec![u8::MAX; n];
        let mut stack = Vec::new();
        for s in 0..n {
            if side[s] != u8::MAX {
                continue;
            }
            side[s] = 0;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if side[v] == u8::MAX {
                        side[v] = 1 - side[u];
                        stack.push(v);
                    } else if side[v] == side[u] {
                        return None;
                    }
                }
            }
        }
        Some(side)
    }
}

pub(crate) fn is_permutation(order: &[usize]) -> bool {
    let mut seen = vec![false; order.len()];
    for &v in order {
        if v >= order.len() || seen[v] {
            return false;
        }
        seen[v] = true;
    }
    true
}
