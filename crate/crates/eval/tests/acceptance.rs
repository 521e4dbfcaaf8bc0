//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The process exits 0 after reporting, so a criterion that cannot be met
//! here (missing benchmark files, say) shows up as FAIL without breaking
//! `cargo test`. Set `NODELAB_ACCEPTANCE_STRICT=1` to exit 1 on any failure.

use nodelab_autodiff::catalog::op_gradient_errors;
use nodelab_autodiff::{gradient_check, Backend, Eval, Tape, Tensor};
use nodelab_core::graph::enumerate::connected_graphs;
use nodelab_core::heuristics::{dsatur, largest_first, mvc_approx, smallest_last};
use nodelab_core::io::read_graph;
use nodelab_core::labeling::Episode;
use nodelab_core::oracles::{best_ordering_cost, exact_mvc, exact_optimum, OracleBudget, OrderingMode};
use nodelab_core::rng::{derive_seed, seeded};
use nodelab_core::{generate_graph, verify_and_cost, Family, GeneratorSpec, Graph, Problem};
use nodelab_eval::{bench_runtime, evaluate, Algorithm, DatasetSource, ExperimentConfig};
use nodelab_policy::rollout::{embed, total_log_probability};
use nodelab_policy::train::greedy_costs;
use nodelab_policy::ttest::paired_t_test;
use nodelab_policy::{
    encode, train, BnMode, DecodeMode, Hyper, Instance, ModelParameters, PolicyEpisode, Selection, TrainConfig,
};
use nodelab_core::{par, DatasetSpec};
use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::path::{Path, PathBuf};
use std::time::Instant;

type Outcome = (bool, String);

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Connected graph from a family chosen by `index`, with ER for sizes the
/// other families do not support.
fn mixed_graph(index: usize, n: usize, seed: u64) -> Graph {
    let family = match index % 4 {
        0 if n > 4 => Family::ba(),
        1 => Family::ser(),
        2 if n > 5 => Family::ws(),
        _ => Family::ErdosRenyi { p: 0.35 },
    };
    generate_graph(&GeneratorSpec::new(family, n, seed)).expect("valid spec")
}

fn random_connected(n: usize, seed: u64) -> Graph {
    let mut rng = seeded(seed);
    loop {
        let p = rng.gen_range(0.25..0.75);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|_| rng.gen::<f64>() < p)
            .collect();
        let g = Graph::from_edges(n, edges).expect("simple");
        if g.is_connected() {
            return g;
        }
    }
}

fn random_bipartite(seed: u64) -> Graph {
    let mut rng = seeded(seed);
    loop {
        let (a, b) = (rng.gen_range(1..14), rng.gen_range(1..14));
        let p = rng.gen_range(0.15..0.8);
        let edges: Vec<(usize, usize)> = (0..a)
            .flat_map(|u| (a..a + b).map(move |v| (u, v)))
            .filter(|_| rng.gen::<f64>() < p)
            .collect();
        let g = Graph::from_edges(a + b, edges).expect("simple").largest_component();
        if g.edge_count() > 0 {
            return g;
        }
    }
}

fn orderings_reach_optimum() -> Outcome {
    let mut graphs = Vec::new();
    let mut six = 0;
    for n in 1..=6 {
        let gs = connected_graphs(n);
        if n == 6 {
            six = gs.len();
        }
        graphs.extend(gs);
    }
    let enumerated = graphs.len();
    graphs.extend((0..100).map(|i| random_connected(7, derive_seed(7, &[i]))));
    let mismatches: usize = par::map(&graphs, |g| {
        [Problem::Coloring, Problem::VertexCover]
            .iter()
            .filter(|p| {
                let best = best_ordering_cost(*p, g, OrderingMode::Exhaustive).expect("n <= 7");
                let (opt, _) = exact_optimum(**p, g, &OracleBudget::default()).expect("small graph");
                best != opt
            })
            .count()
    })
    .into_iter()
    .sum();
    (
        mismatches == 0 && six == 112,
        format!("{enumerated} enumerated graphs ({six} on 6 nodes) + 100 random on 7, {mismatches} mismatches"),
    )
}

fn random_episodes_are_feasible() -> Outcome {
    let problems = [Problem::Coloring, Problem::VertexCover, Problem::IndependentSet];
    let bad: usize = par::map_range(1000, |i| {
        let mut rng = seeded(derive_seed(2, &[i as u64]));
        let n = rng.gen_range(2..=30);
        let g = mixed_graph(i, n, rng.gen());
        let problem = problems[i % 3];
        let mut ep = Episode::new(&problem, &g);
        while !ep.is_done() {
            let open: Vec<usize> = ep.state().labeling().unlabeled_nodes().collect();
            let v = open[rng.gen_range(0..open.len())];
            ep.label_node(v, -(open.len() as f64).ln()).expect("label rule is legal");
        }
        let t = ep.finish().expect("complete");
        let (feasible, cost) = verify_and_cost(&problem, &g, &t.labels).expect("sized");
        usize::from(!(feasible && cost.finite() == Some(t.terminal_cost) && t.episode_return == -t.terminal_cost))
    })
    .into_iter()
    .sum();
    (bad == 0, format!("1000 episodes over 4 families and 3 problems, {bad} violations"))
}

fn classic_rows_on_color02() -> Outcome {
    let list = workspace_root().join("data/color02/instances.txt");
    let names: Vec<String> = match std::fs::read_to_string(&list) {
        Ok(t) => t.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
        Err(e) => return (false, format!("{}: {e}", list.display())),
    };
    let dir = std::env::var_os("NODELAB_COLOR02_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| workspace_root().join("data/color02"));
    let missing: Vec<&str> = names
        .iter()
        .filter(|n| !dir.join(format!("{n}.col")).is_file())
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return (
            false,
            format!(
                "{} of {} instances missing from {} (run data/color02/fetch.sh)",
                missing.len(),
                names.len(),
                dir.display()
            ),
        );
    }
    let graphs: Vec<Graph> = match names.iter().map(|n| read_graph(&dir.join(format!("{n}.col")))).collect() {
        Ok(g) => g,
        Err(e) => return (false, e.to_string()),
    };
    let mean = |f: fn(&Graph) -> f64| graphs.iter().map(f).sum::<f64>() / graphs.len() as f64;
    let rows = [
        ("dsatur", mean(|g| dsatur(g).cost), 9.85),
        ("largest-first", mean(|g| largest_first(g).cost), 10.65),
        ("smallest-last", mean(|g| smallest_last(g).cost), 10.8),
    ];
    let ok = rows.iter().all(|(_, m, r)| (m - r).abs() <= 0.5);
    let detail = rows.iter().map(|(n, m, r)| format!("{n} {m:.2} (ref {r})")).collect::<Vec<_>>().join(", ");
    (ok, detail)
}

fn approximation_guarantees() -> Outcome {
    let violations: usize = par::map_range(500, |i| {
        let mut rng = seeded(derive_seed(4, &[i as u64]));
        let n = rng.gen_range(2..=16);
        let g = if i % 2 == 0 { random_connected(n, rng.gen()) } else { mixed_graph(i / 2, n, rng.gen()) };
        let opt = exact_mvc(&g, &OracleBudget::default()).expect("n <= 16").optimum as f64;
        usize::from(mvc_approx(&g, false).cost > 2.0 * opt) + usize::from(mvc_approx(&g, true).cost > 2.0 * opt)
    })
    .into_iter()
    .sum();
    let not_two = (0..200u64).filter(|&i| dsatur(&random_bipartite(derive_seed(44, &[i]))).cost != 2.0).count();
    (
        violations == 0 && not_two == 0,
        format!("{violations} ratio violations on 500 graphs, {not_two} of 200 bipartite graphs not 2-coloured"),
    )
}

fn surrogate_error(problem: Problem, seed: u64) -> f64 {
    let p = ModelParameters::init(Hyper { d: 8, d_in: 8, ..Hyper::default() }, seed).expect("valid");
    let inst = Instance::new(random_connected(6, seed), 8, false).expect("valid");
    let mut order: Vec<usize> = (0..6).collect();
    order.rotate_left(seed as usize % 6);
    let tensors: Vec<Tensor> = p.trainable().iter().map(|(_, t)| Tensor::clone(t)).collect();
    gradient_check(&tensors, 1e-5, 0, |tape: &mut Tape, ids| {
        let bound = ModelParameters::bind_leaves(tape, ids.to_vec());
        let enc = encode(tape, &p, &bound, &inst.features, inst.graph.adjacency(), BnMode::Train).expect("shapes");
        let mut ep = PolicyEpisode::new(tape, p.hyper, &bound, &problem, &inst.graph, enc.embeddings, true)
            .expect("shapes");
        for &v in &order {
            if ep.is_done() {
                break;
            }
            if !ep.labeling().is_labeled(v) {
                ep.step(tape, Selection::Forced(v)).expect("legal");
            }
        }
        let (_, lps) = ep.finish().expect("complete");
        let total = total_log_probability(tape, &lps).expect("shapes").expect("actions taken");
        Ok(tape.scale(&total, 1.3))
    })
    .expect("finite")
}

fn gradient_fidelity() -> Outcome {
    let mut worst_op = ("", 0.0f64);
    for seed in 1..=3 {
        for (name, err) in op_gradient_errors(seed).expect("catalog runs") {
            if err > worst_op.1 {
                worst_op = (name, err);
            }
        }
    }
    let surrogate = [(Problem::Coloring, 1), (Problem::VertexCover, 2), (Problem::Coloring, 3)]
        .iter()
        .map(|&(p, s)| surrogate_error(p, s))
        .fold(0.0f64, f64::max);
    (
        worst_op.1 < 1e-4 && surrogate < 1e-4,
        format!(
            "surrogate max rel err {surrogate:.2e}; ops worst {} {:.2e}",
            worst_op.0, worst_op.1
        ),
    )
}

fn spatial_locality() -> Outcome {
    let mut steps = 0;
    let mut violations = 0;
    let mut t0_mismatch = 0;
    let mut seed = 0u64;
    while steps < 1000 {
        seed += 1;
        let base = ModelParameters::init(Hyper { d: 16, d_in: 8, ..Hyper::default() }, seed).expect("valid");
        let inst = Instance::new(mixed_graph(seed as usize, 12 + seed as usize % 20, seed), 8, false).expect("valid");
        let (h, _) = embed(&base, &inst).expect("encodes");
        let states: Vec<_> = DecodeMode::ALL
            .iter()
            .map(|&m| {
                let mut p = base.clone();
                p.hyper.decode_mode = m;
                let mut b = Eval::new();
                let bound = p.bind(&mut b);
                let mut ep =
                    PolicyEpisode::new(&mut b, p.hyper, &bound, &Problem::Coloring, &inst.graph, h.clone(), false)
                        .expect("shapes");
                ep.decoder_state(&mut b).expect("not terminal")
            })
            .collect();
        t0_mismatch += usize::from(states[0] != states[1] || states[0] != states[2]);

        let mut b = Eval::new();
        let bound = base.bind(&mut b);
        let mut ep = PolicyEpisode::new(&mut b, base.hyper, &bound, &Problem::Coloring, &inst.graph, h, false)
            .expect("shapes");
        let mut rng = seeded(seed);
        let mut before = ep.decoder_state(&mut b).expect("not terminal");
        while !ep.is_done() {
            let (v, _) = ep.step(&mut b, Selection::Sample(&mut rng)).expect("legal");
            steps += 1;
            if ep.is_done() {
                break;
            }
            let after = ep.decoder_state(&mut b).expect("not terminal");
            for u in (0..after.mask.len()).filter(|&u| !after.mask[u] && !inst.graph.has_edge(u, v)) {
                violations += usize::from(after.weights[u].to_bits() != before.weights[u].to_bits());
            }
            before = after;
        }
    }
    (
        violations == 0 && t0_mismatch == 0,
        format!("{steps} steps on {seed} graphs, {violations} changed non-neighbour weights, {t0_mismatch} t=0 mode mismatches"),
    )
}

fn operation_scaling() -> Outcome {
    let params = ModelParameters::init(Hyper::with_dim(32), 0).expect("valid");
    let table = match bench_runtime(
        Problem::Coloring,
        &params,
        &[320, 640, 1280, 2560, 5120],
        &[DecodeMode::Local, DecodeMode::Global],
        1,
        0,
    ) {
        Ok(t) => t,
        Err(e) => return (false, e.to_string()),
    };
    let slope = |m| table.slopes.iter().find(|s| s.mode == m).map_or(f64::NAN, |s| s.slope);
    let (local, global) = (slope(DecodeMode::Local), slope(DecodeMode::Global));
    (
        (local - 1.0).abs() <= 0.15 && global >= 1.7,
        format!("local slope {local:.3}, global slope {global:.3} (d=32, S-ER n=320..5120)"),
    )
}

fn learning_signal() -> Outcome {
    let validation: Vec<Instance> = DatasetSpec::new(vec![Family::ws()], vec![15, 20, 25], 300)
        .generate(9_999)
        .expect("valid")
        .into_iter()
        .map(|g| Instance::new(g.graph, 32, false).expect("valid"))
        .collect();
    let seeds = [0u64, 1, 2];
    let results = par::map(&seeds, |&seed| {
        let cfg = TrainConfig {
            problem: Problem::Coloring,
            epochs: 20,
            batch_size: 16,
            node_counts: vec![15, 20, 25],
            families: vec![Family::ws()],
            dataset_size: 2000,
            learning_rate: 1e-3,
            hyper: Hyper::with_dim(32),
            seed,
            ..TrainConfig::default()
        };
        let start = Instant::now();
        let out = train(&cfg).expect("training runs");
        let secs = start.elapsed().as_secs_f64();
        let before = greedy_costs(cfg.problem, &cfg.initial_parameters().expect("valid"), &validation).expect("rolls out");
        let after = greedy_costs(cfg.problem, &out.params, &validation).expect("rolls out");
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let four = after.iter().filter(|&&c| c <= 4.0).count() as f64 / after.len() as f64;
        (mean(&before), mean(&after), four, secs)
    });
    let improved = results.iter().all(|r| r.1 < r.0);
    let reaching = results.iter().filter(|r| r.2 >= 0.6).count();
    let detail = results
        .iter()
        .zip(seeds)
        .map(|(r, s)| format!("seed {s}: {:.3} -> {:.3}, <=4 colours {:.0}% ({:.0}s)", r.0, r.1, 100.0 * r.2, r.3))
        .collect::<Vec<_>>()
        .join("; ");
    (improved && reaching >= 2, detail)
}

fn sampling_and_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let ckpt = dir.path().join("model.json");
    ModelParameters::init(Hyper { d: 16, d_in: 16, ..Hyper::default() }, 5)
        .expect("valid")
        .save(&ckpt)
        .expect("writable");
    let mut violations = 0;
    let mut reports_differ = 0;
    let mut instances = 0;
    for (problem, heuristic) in [(Problem::Coloring, "dsatur"), (Problem::VertexCover, "mvc-approx-greedy")] {
        let mut cfg = ExperimentConfig::new(
            problem,
            DatasetSource::Generate(DatasetSpec::new(
                vec![Family::ba(), Family::ser(), Family::ws(), Family::er()],
                vec![12, 20, 30],
                24,
            )),
            ["greedy", "sample", heuristic].iter().map(|a| a.parse::<Algorithm>().expect("known")).collect(),
        );
        cfg.checkpoints.insert("model".into(), ckpt.clone());
        cfg.seed = 3;
        let a = evaluate(&cfg).expect("evaluates");
        let b = evaluate(&cfg).expect("evaluates");
        reports_differ += usize::from(
            serde_json::to_string(&a.without_timing()).expect("json")
                != serde_json::to_string(&b.without_timing()).expect("json"),
        );
        for pair in a.records.chunks(3) {
            instances += 1;
            violations += usize::from(pair[1].cost > pair[0].cost);
        }
    }
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 4,
        node_counts: vec![10, 14],
        families: vec![Family::ws()],
        dataset_size: 24,
        challenge_size: 16,
        hyper: Hyper { d: 8, d_in: 8, ..Hyper::default() },
        seed: 21,
        ..TrainConfig::default()
    };
    let (x, y) = (train(&cfg).expect("trains"), train(&cfg).expect("trains"));
    let log = |o: &nodelab_policy::TrainOutcome| {
        o.log.iter().map(|r| serde_json::to_string(r).expect("json")).collect::<Vec<_>>().join("\n")
    };
    let logs_same = log(&x) == log(&y) && x.params.to_checkpoint() == y.params.to_checkpoint();
    (
        violations == 0 && reports_differ == 0 && logs_same,
        format!(
            "sample > greedy on {violations} of {instances} instances; {reports_differ} report mismatches; training logs {}",
            if logs_same { "identical" } else { "differ" }
        ),
    )
}

fn t_test_quantile() -> Outcome {
    let spread = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 1.5, -1.5, 0.25, -0.25];
    let n = spread.len() as f64;
    let sd = (spread.iter().map(|x| x * x).sum::<f64>() / (n - 1.0)).sqrt();
    let shift = -1.833 * sd / n.sqrt();
    let baseline: Vec<f64> = (0..10).map(|i| 3.0 + i as f64).collect();
    let candidate: Vec<f64> = baseline.iter().zip(spread).map(|(b, s)| b + s + shift).collect();
    let p = paired_t_test(&candidate, &baseline).expect("valid samples");
    let reference = StudentsT::new(0.0, 1.0, 9.0).expect("valid").cdf(-1.833);
    (
        (p - 0.05).abs() < 1e-3 && (p - reference).abs() < 1e-9,
        format!("p = {p:.6}, independent CDF {reference:.6}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("orderings reach the exact optimum", orderings_reach_optimum),
        ("random-policy episodes are feasible", random_episodes_are_feasible),
        ("classic heuristics on the COLOR02 subset", classic_rows_on_color02),
        ("2-approximation and bipartite DSATUR", approximation_guarantees),
        ("gradient fidelity", gradient_fidelity),
        ("spatial locality of the decoder", spatial_locality),
        ("operation-count scaling", operation_scaling),
        ("desk-scale learning signal", learning_signal),
        ("sampling dominance and determinism", sampling_and_determinism),
        ("t-test quantile", t_test_quantile),
    ];
    let only: Option<Vec<usize>> = std::env::var("NODELAB_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failed += usize::from(!ok);
        println!(
            "criterion {id:>2} {}  {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 && std::env::var_os("NODELAB_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
