//! Seeded random graph families: Barabási–Albert, Erdős–Rényi, sparse
//! Erdős–Rényi and Watts–Strogatz.
//!
//! Every sample is restricted to its largest connected component and
//! relabelled `0..n'`, so the output is always connected.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::{derive_seed, seeded, Rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const DEFAULT_BA_DELTA: usize = 4;
pub const DEFAULT_ER_P: f64 = 0.15;
pub const DEFAULT_WS_K: usize = 5;
pub const DEFAULT_WS_Q: f64 = 0.1;
pub const DEFAULT_SER_AVG_DEGREE: f64 = 7.5;
pub const DEFAULT_SER_EPSILON: f64 = 0.2;

fn default_delta() -> usize {
    DEFAULT_BA_DELTA
}
fn default_p() -> f64 {
    DEFAULT_ER_P
}
fn default_k() -> usize {
    DEFAULT_WS_K
}
fn default_q() -> f64 {
    DEFAULT_WS_Q
}
fn default_avg_degree() -> f64 {
    DEFAULT_SER_AVG_DEGREE
}
fn default_epsilon() -> f64 {
    DEFAULT_SER_EPSILON
}

/// Random graph family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum Family {
    /// Preferential attachment, `delta` edges per arriving node.
    #[serde(rename = "BA")]
    BarabasiAlbert {
        #[serde(default = "default_delta")]
        delta: usize,
    },
    /// Each pair connected independently with probability `p`.
    #[serde(rename = "ER")]
    ErdosRenyi {
        #[serde(default = "default_p")]
        p: f64,
    },
    /// ER with `p` from [`sparse_er_probability`].
    #[serde(rename = "SER")]
    SparseErdosRenyi {
        #[serde(default = "default_avg_degree")]
        avg_degree: f64,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
    },
    /// Ring lattice with `k / 2` neighbours per side, rewired with probability `q`.
    #[serde(rename = "WS")]
    WattsStrogatz {
        #[serde(default = "default_k")]
        k: usize,
        #[serde(default = "default_q")]
        q: f64,
    },
}

impl Family {
    pub fn ba() -> Self {
        Family::BarabasiAlbert {
            delta: DEFAULT_BA_DELTA,
        }
    }
    pub fn er() -> Self {
        Family::ErdosRenyi { p: DEFAULT_ER_P }
    }
    pub fn ser() -> Self {
        Family::SparseErdosRenyi {
            avg_degree: DEFAULT_SER_AVG_DEGREE,
            epsilon: DEFAULT_SER_EPSILON,
        }
    }
    pub fn ws() -> Self {
        Family::WattsStrogatz {
            k: DEFAULT_WS_K,
            q: DEFAULT_WS_Q,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Family::BarabasiAlbert { .. } => "BA",
            Family::ErdosRenyi { .. } => "ER",
            Family::SparseErdosRenyi { .. } => "SER",
            Family::WattsStrogatz { .. } => "WS",
        }
    }

    /// Whether degree features should be mean-centred for this family
    /// (dense ER only).
    pub fn dense(&self) -> bool {
        matches!(self, Family::ErdosRenyi { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(family: Family, n: usize, seed: u64) -> Self {
        GeneratorSpec { family, n, seed }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Parameter("n must be positive".into()));
        }
        match self.family {
            Family::BarabasiAlbert { delta } => {
                if delta < 1 {
                    return Err(Error::Parameter("BA needs delta >= 1".into()));
                }
                if n <= delta {
                    return Err(Error::Parameter(format!("BA needs n > delta ({n} <= {delta})")));
                }
            }
            Family::ErdosRenyi { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Parameter(format!("ER needs 0 <= p <= 1, got {p}")));
                }
            }
            Family::SparseErdosRenyi {
                avg_degree,
                epsilon,
            } => {
                if n < 2 {
                    return Err(Error::Parameter("S-ER needs n >= 2".into()));
                }
                if !(avg_degree > 0.0) || !(epsilon >= 0.0) {
                    return Err(Error::Parameter(
                        "S-ER needs avg_degree > 0 and epsilon >= 0".into(),
                    ));
                }
            }
            Family::WattsStrogatz { k, q } => {
                if k < 2 {
                    return Err(Error::Parameter("WS needs k >= 2".into()));
                }
                if !(0.0..=1.0).contains(&q) {
                    return Err(Error::Parameter(format!("WS needs 0 <= q <= 1, got {q}")));
                }
                if n <= k {
                    return Err(Error::Parameter(format!("WS needs n > k ({n} <= {k})")));
                }
            }
        }
        Ok(())
    }
}

/// A dataset drawn from a mix of families and node counts in equal parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub families: Vec<Family>,
    pub node_counts: Vec<usize>,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedGraph {
    pub spec: GeneratorSpec,
    pub graph: Graph,
}

impl DatasetSpec {
    pub fn new(families: Vec<Family>, node_counts: Vec<usize>, size: usize) -> Self {
        DatasetSpec {
            families,
            node_counts,
            size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.node_counts.is_empty() {
            return Err(Error::Parameter("dataset needs at least one family and one node count".into()));
        }
        for &family in &self.families {
            for &n in &self.node_counts {
                GeneratorSpec::new(family, n, 0).validate()?;
            }
        }
        Ok(())
    }

    /// Spec of item `index`: node counts cycle fastest, then families.
    pub fn item(&self, index: usize, seed: u64) -> GeneratorSpec {
        let nc = self.node_counts.len();
        let family = self.families[(index / nc) % self.families.len()];
        GeneratorSpec::new(family, self.node_counts[index % nc], derive_seed(seed, &[index as u64]))
    }

    pub fn generate(&self, seed: u64) -> Result<Vec<GeneratedGraph>> {
        self.validate()?;
        crate::par::map_range(self.size, |i| {
            let spec = self.item(i, seed);
            generate_graph(&spec).map(|graph| GeneratedGraph { spec, graph })
        })
        .into_iter()
        .collect()
    }
}

/// Edge probability targeting average degree `avg_degree` on small graphs
/// while staying above the ER connectivity threshold on large ones:
/// `min(1, max(avg_degree / n, (1 + epsilon) ln(n) / n))`.
pub fn sparse_er_probability(n: usize, avg_degree: f64, epsilon: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Parameter(format!("sparse ER needs n >= 2, got {n}")));
    }
    if !(avg_degree > 0.0) || !(epsilon >= 0.0) {
        return Err(Error::Parameter(
            "sparse ER needs avg_degree > 0 and epsilon >= 0".into(),
        ));
    }
    let nf = n as f64;
    let p = (avg_degree / nf).max((1.0 + epsilon) * nf.ln() / nf);
    Ok(p.min(1.0))
}

/// Draws a graph from `spec`, restricted to its largest connected component.
pub fn generate_graph(spec: &GeneratorSpec) -> Result<Graph> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let g = match spec.family {
        Family::BarabasiAlbert { delta } => barabasi_albert(spec.n, delta, &mut rng),
        Family::ErdosRenyi { p } => erdos_renyi(spec.n, p, &mut rng),
        Family::SparseErdosRenyi {
            avg_degree,
            epsilon,
        } => {
            let p = sparse_er_probability(spec.n, avg_degree, epsilon)?;
            erdos_renyi(spec.n, p, &mut rng)
        }
        Family::WattsStrogatz { k, q } => watts_strogatz(spec.n, k, q, &mut rng),
    };
    Ok(g.largest_component())
}

fn erdos_renyi(n: usize, p: f64, rng: &mut Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).expect("ER edges are simple")
}

fn barabasi_albert(n: usize, delta: usize, rng: &mut Rng) -> Graph {
    let mut edges = Vec::with_capacity((n - delta) * delta);
    let mut targets: Vec<usize> = (0..delta).collect();
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * (n - delta) * delta);
    for source in delta..n {
        for &t in &targets {
            edges.push((source, t));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat_n(source, delta));
        // delta distinct targets drawn proportionally to degree
        let mut next: Vec<usize> = Vec::with_capacity(delta);
        while next.len() < delta {
            let x = repeated[rng.gen_range(0..repeated.len())];
            if !next.contains(&x) {
                next.push(x);
            }
        }
        targets = next;
    }
    Graph::from_edges(n, edges).expect("BA edges are simple")
}

fn watts_strogatz(n: usize, k: usize, q: f64, rng: &mut Rng) -> Graph {
    let half = k / 2;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.gen::<f64>() < q {
                if !adj[u].contains(&v) || adj[u].len() >= n - 1 {
                    continue;
                }
                let mut w = rng.gen_range(0..n);
                while w == u || adj[u].contains(&w) {
                    w = rng.gen_range(0..n);
                }
                adj[u].remove(&v);
                adj[v].remove(&u);
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    let adjacency = adj.into_iter().map(|s| s.into_iter().collect()).collect();
    Graph::from_adjacency(adjacency).expect("WS lattice is simple")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_with_p_one_is_complete() {
        let g = generate_graph(&GeneratorSpec::new(Family::ErdosRenyi { p: 1.0 }, 4, 99)).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!((0..4).all(|v| g.degree(v) == 3));
    }

    #[test]
    fn er_with_p_zero_collapses_to_one_node() {
        let g = generate_graph(&GeneratorSpec::new(Family::ErdosRenyi { p: 0.0 }, 10, 3)).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn ws_without_rewiring_is_a_ring_lattice() {
        let g = generate_graph(&GeneratorSpec::new(Family::WattsStrogatz { k: 4, q: 0.0 }, 10, 5))
            .unwrap();
        assert_eq!(g.edge_count(), 20);
        assert!((0..10).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn ws_odd_k_uses_floor_half() {
        let g = generate_graph(&GeneratorSpec::new(Family::WattsStrogatz { k: 5, q: 0.0 }, 12, 5))
            .unwrap();
        assert!((0..12).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn ba_edge_count() {
        let g = generate_graph(&GeneratorSpec::new(Family::BarabasiAlbert { delta: 4 }, 100, 7))
            .unwrap();
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.edge_count(), (100 - 4) * 4);
        g.validate().unwrap();
    }

    #[test]
    fn sparse_er_probability_values() {
        let p = sparse_er_probability(100, 7.5, 0.2).unwrap();
        assert!((p - 0.075).abs() < 1e-15);
        let p = sparse_er_probability(10_000, 7.5, 0.2).unwrap();
        let expected = 1.2 * (10_000f64).ln() / 10_000.0;
        assert!((p - expected).abs() < 1e-15);
        assert!((p - 0.001_105_24).abs() < 1e-8);
        assert_eq!(sparse_er_probability(2, 7.5, 0.2).unwrap(), 1.0);
        assert!(sparse_er_probability(1, 7.5, 0.2).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let bad = [
            GeneratorSpec::new(Family::BarabasiAlbert { delta: 4 }, 4, 0),
            GeneratorSpec::new(Family::BarabasiAlbert { delta: 0 }, 10, 0),
            GeneratorSpec::new(Family::ErdosRenyi { p: 1.5 }, 10, 0),
            GeneratorSpec::new(Family::WattsStrogatz { k: 5, q: 0.1 }, 5, 0),
            GeneratorSpec::new(Family::WattsStrogatz { k: 1, q: 0.1 }, 10, 0),
            GeneratorSpec::new(Family::WattsStrogatz { k: 4, q: -0.1 }, 10, 0),
        ];
        for spec in bad {
            assert!(matches!(generate_graph(&spec), Err(Error::Parameter(_))), "{spec:?}");
        }
    }

    #[test]
    fn spec_json_uses_table_defaults() {
        let spec: GeneratorSpec = serde_json::from_str(r#"{"family":"WS","n":20}"#).unwrap();
        assert_eq!(spec.family, Family::ws());
        let spec: GeneratorSpec =
            serde_json::from_str(r#"{"family":"BA","n":30,"seed":4}"#).unwrap();
        assert_eq!(spec.family, Family::ba());
        assert_eq!(spec.seed, 4);
    }
}
