#![allow(dead_code)]

use nodelab_core::rng::seeded;
use nodelab_core::{generate_graph, Family, GeneratorSpec, Graph};
use nodelab_policy::{Hyper, Instance, ModelParameters};
use rand::Rng;

pub fn small_hyper(d: usize) -> Hyper {
    Hyper { d, d_in: 8, ..Hyper::default() }
}

pub fn params(d: usize, seed: u64) -> ModelParameters {
    ModelParameters::init(small_hyper(d), seed).unwrap()
}

/// Connected graph from one of the four families, chosen by `index`.
pub fn graph(index: usize, n: usize, seed: u64) -> Graph {
    let family = match index % 4 {
        0 if n > 4 => Family::ba(),
        1 => Family::ser(),
        2 if n > 5 => Family::ws(),
        _ => Family::ErdosRenyi { p: 0.4 },
    };
    generate_graph(&GeneratorSpec::new(family, n, seed)).unwrap()
}

pub fn instance(g: Graph, d_in: usize) -> Instance {
    Instance::new(g, d_in, false).unwrap()
}

pub fn random_permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = seeded(seed);
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.gen_range(0..=i));
    }
    p
}

/// Nodes a..e of the five-node example as 0..4.
pub fn five_node_example() -> Graph {
    // c-b, c-e, b-a, e-a, a-d
    Graph::from_edges(5, [(2, 1), (2, 4), (1, 0), (4, 0), (0, 3)]).unwrap()
}

pub fn context_example() -> Graph {
    // e-c, c-b, a-b, a-d, d-e
    Graph::from_edges(5, [(4, 2), (2, 1), (0, 1), (0, 3), (3, 4)]).unwrap()
}
