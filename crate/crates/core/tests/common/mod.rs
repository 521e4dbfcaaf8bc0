#![allow(dead_code)]

use nodelab_core::generators::{generate_graph, Family, GeneratorSpec};
use nodelab_core::rng::{derive_seed, seeded};
use nodelab_core::Graph;
use rand::Rng;

/// One graph from a family chosen by `index`, mixing all four generators.
pub fn mixed_graph(index: u64, n: usize, seed: u64) -> Graph {
    let family = match index % 4 {
        0 if n > 4 => Family::ba(),
        2 => Family::ser(),
        3 if n > 5 => Family::ws(),
        _ => Family::er(),
    };
    generate_graph(&GeneratorSpec::new(family, n, derive_seed(seed, &[index]))).unwrap()
}

/// Connected bipartite graph with at least one edge.
pub fn random_bipartite(seed: u64) -> Graph {
    let mut rng = seeded(seed);
    loop {
        let a = rng.gen_range(1..12);
        let b = rng.gen_range(1..12);
        let p = rng.gen_range(0.15..0.8);
        let mut edges = Vec::new();
        for u in 0..a {
            for v in a..a + b {
                if rng.gen::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let g = Graph::from_edges(a + b, edges).unwrap().largest_component();
        if g.edge_count() > 0 {
            return g;
        }
    }
}
