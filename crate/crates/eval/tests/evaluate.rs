use nodelab_core::heuristics::Heuristic;
use nodelab_core::{Cost, Graph, Problem};
use nodelab_eval::{evaluate_graphs, Algorithm, DatasetSource, ExperimentConfig, NamedGraph, ReferenceKind};
use std::collections::BTreeMap;

fn named(id: &str, graph: Graph) -> NamedGraph {
    NamedGraph { id: id.into(), graph, dense: false }
}

fn heuristics(names: &[&str]) -> Vec<Algorithm> {
    names.iter().map(|n| Algorithm::Heuristic(n.parse::<Heuristic>().unwrap())).collect()
}

#[test]
fn ties_count_as_wins_for_everyone() {
    let cfg = ExperimentConfig::new(
        Problem::Coloring,
        DatasetSource::Files(vec![]),
        heuristics(&["dsatur", "largest-first"]),
    );
    let graphs = vec![named("k5", Graph::complete(5)), named("c6", Graph::cycle(6))];
    let report = evaluate_graphs(&cfg, &BTreeMap::new(), &graphs).unwrap();
    for s in &report.summary {
        assert_eq!(s.wins, 100.0, "{}", s.algorithm);
        assert_eq!(s.feasible, 2);
    }
}

#[test]
fn oracle_matches_give_unit_ratio() {
    let cfg = ExperimentConfig::new(Problem::Coloring, DatasetSource::Files(vec![]), heuristics(&["dsatur"]));
    let graphs = vec![named("petersen", Graph::petersen()), named("k4", Graph::complete(4))];
    let report = evaluate_graphs(&cfg, &BTreeMap::new(), &graphs).unwrap();
    for r in &report.records {
        assert_eq!(r.reference_kind, Some(ReferenceKind::Oracle));
        assert_eq!(r.ratio, Some(1.0));
        assert_eq!(r.optimal, Some(true));
    }
    assert_eq!(report.records[0].cost, Cost::Finite(3.0));
    let s = report.summary_for("dsatur").unwrap();
    assert_eq!(s.optimal, Some(100.0));
    assert_eq!(s.mean_ratio, Some(1.0));
}

#[test]
fn large_instances_fall_back_to_best_known() {
    let mut cfg = ExperimentConfig::new(
        Problem::VertexCover,
        DatasetSource::Files(vec![]),
        heuristics(&["mvc-approx", "mvc-approx-greedy"]),
    );
    cfg.oracle_limit = 3;
    let report = evaluate_graphs(&cfg, &BTreeMap::new(), &[named("star", Graph::star(8))]).unwrap();
    for r in &report.records {
        assert_eq!(r.reference_kind, Some(ReferenceKind::BestKnown));
        assert_eq!(r.optimal, None);
    }
}
