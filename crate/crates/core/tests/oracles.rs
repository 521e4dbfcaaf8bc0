mod common;

use nodelab_core::graph::enumerate::connected_graphs;
use nodelab_core::oracles::{
    best_ordering_cost, exact_chromatic, exact_mvc, exact_optimum, greedy_clique, OrderingMode,
    OracleBudget,
};
use nodelab_core::rng::seeded;
use nodelab_core::{verify_and_cost, Graph, Problem};
use rand::seq::SliceRandom;
use rand::Rng;

fn brute_chromatic(g: &Graph) -> usize {
    let n = g.node_count();
    (1..=n)
        .find(|&k| {
            let mut c = vec![0usize; n];
            loop {
                if g.edges().all(|(u, v)| c[u] != c[v]) {
                    return true;
                }
                let mut i = 0;
                while i < n && c[i] == k - 1 {
                    c[i] = 0;
                    i += 1;
                }
                if i == n {
                    return false;
                }
                c[i] += 1;
            }
        })
        .unwrap_or(0)
}

fn brute_cover(g: &Graph) -> usize {
    let n = g.node_count();
    (0u32..1 << n)
        .filter(|mask| g.edges().all(|(u, v)| mask >> u & 1 == 1 || mask >> v & 1 == 1))
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap()
}

fn maximum_matching(g: &Graph) -> usize {
    fn rec(used: &mut [bool], edges: &[(usize, usize)], i: usize) -> usize {
        if i == edges.len() {
            return 0;
        }
        let skip = rec(used, edges, i + 1);
        let (u, v) = edges[i];
        if used[u] || used[v] {
            return skip;
        }
        used[u] = true;
        used[v] = true;
        let take = 1 + rec(used, edges, i + 1);
        used[u] = false;
        used[v] = false;
        skip.max(take)
    }
    let edges: Vec<_> = g.edges().collect();
    rec(&mut vec![false; g.node_count()], &edges, 0)
}

#[test]
fn petersen_and_cycle_against_brute_force() {
    let budget = OracleBudget::default();
    assert_eq!(brute_chromatic(&Graph::petersen()), 3);
    assert_eq!(exact_chromatic(&Graph::petersen(), &budget).unwrap().optimum, 3);
    assert_eq!(brute_cover(&Graph::cycle(5)), 3);
    assert_eq!(exact_mvc(&Graph::cycle(5), &budget).unwrap().optimum, 3);
}

#[test]
fn oracles_agree_with_brute_force_on_random_graphs() {
    let budget = OracleBudget::default();
    let mut rng = seeded(31);
    for i in 0..150u64 {
        let g = common::mixed_graph(i, rng.gen_range(2..=9), 8);
        let chi = exact_chromatic(&g, &budget).unwrap();
        assert_eq!(chi.optimum, brute_chromatic(&g), "graph {i}");
        let tau = exact_mvc(&g, &budget).unwrap();
        assert_eq!(tau.optimum, brute_cover(&g), "graph {i}");
        assert!(chi.optimum >= greedy_clique(&g).len());
        assert!(tau.optimum >= maximum_matching(&g));
        for problem in [Problem::Coloring, Problem::VertexCover, Problem::IndependentSet] {
            let (cost, r) = exact_optimum(problem, &g, &budget).unwrap();
            let (ok, c) = verify_and_cost(&problem, &g, &r.witness).unwrap();
            assert!(ok);
            assert_eq!(c.finite(), Some(cost));
        }
    }
}

#[test]
fn oracles_ignore_node_ids() {
    let budget = OracleBudget::default();
    let mut rng = seeded(8);
    for i in 0..100u64 {
        let g = common::mixed_graph(i, rng.gen_range(5..=30), 6);
        let mut perm: Vec<usize> = (0..g.node_count()).collect();
        perm.shuffle(&mut rng);
        let h = g.relabel(&perm).unwrap();
        assert_eq!(
            exact_chromatic(&g, &budget).unwrap().optimum,
            exact_chromatic(&h, &budget).unwrap().optimum
        );
        assert_eq!(exact_mvc(&g, &budget).unwrap().optimum, exact_mvc(&h, &budget).unwrap().optimum);
    }
}

#[test]
fn some_ordering_reaches_the_optimum_on_small_graphs() {
    let budget = OracleBudget::default();
    for n in 1..=6 {
        for g in connected_graphs(n) {
            let gc = best_ordering_cost(&Problem::Coloring, &g, OrderingMode::Exhaustive).unwrap();
            assert_eq!(gc, exact_chromatic(&g, &budget).unwrap().optimum as f64);
            let vc = best_ordering_cost(&Problem::VertexCover, &g, OrderingMode::Exhaustive).unwrap();
            assert_eq!(vc, exact_mvc(&g, &budget).unwrap().optimum as f64);
        }
    }
}
