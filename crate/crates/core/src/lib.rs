//! Core data structures for combinatorial node labeling on graphs.
//!
//! The crate covers everything that does not need a learned model:
//!
//! - [`graph`]: undirected simple graphs, validation and small-graph enumeration
//! - [`generators`]: seeded BA / ER / S-ER / WS random graphs
//! - [`io`]: DIMACS `.col` and edge-list readers and writers
//! - [`features`]: sinusoidal degree features
//! - [`labeling`]: partial labelings, problem definitions and the labeling MDP
//! - [`heuristics`]: Largest-First, Smallest-Last, DSATUR, MVCApprox
//! - [`oracles`]: exact branch-and-bound solvers and exhaustive-ordering search
//! - [`par`]: data-parallel helpers (rayon behind the `parallel` feature)

pub mod error;
pub mod features;
pub mod generators;
pub mod graph;
pub mod heuristics;
pub mod io;
pub mod labeling;
pub mod oracles;
pub mod par;
pub mod rng;

pub use error::{Error, Result};
pub use features::{degree_features, FeatureMatrix};
pub use generators::{generate_graph, sparse_er_probability, DatasetSpec, Family, GeneratorSpec};
pub use graph::Graph;
pub use labeling::{
    verify_and_cost, Cost, Label, LabelingProblem, MdpState, PartialLabeling, Problem, Trajectory,
};
