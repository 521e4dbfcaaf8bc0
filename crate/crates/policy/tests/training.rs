mod common;

use common::*;
use nodelab_core::{Family, Graph, Problem};
use nodelab_policy::train::{clip_gradients, gradient_norm};
use nodelab_policy::ttest::student_t_cdf;
use nodelab_policy::{paired_t_test, reinforce_batch_update, train, train_with, Adam, Hyper, Instance, TrainConfig};
use nodelab_autodiff::Tensor;
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

fn tiny(seed: u64) -> TrainConfig {
    TrainConfig {
        problem: Problem::Coloring,
        epochs: 2,
        batch_size: 4,
        node_counts: vec![8, 10],
        families: vec![Family::ws()],
        dataset_size: 16,
        learning_rate: 1e-3,
        challenge_size: 8,
        hyper: Hyper { d: 8, d_in: 8, ..Hyper::default() },
        seed,
        ..TrainConfig::default()
    }
}

/// Differences with mean `-1.833 * sd / sqrt(n)`, so the statistic is -1.833.
fn samples_with_t(t: f64) -> (Vec<f64>, Vec<f64>) {
    let spread = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5, 1.5, -1.5, 0.25, -0.25];
    let n = spread.len() as f64;
    let mean_sq = spread.iter().map(|x| x * x).sum::<f64>() / (n - 1.0);
    let shift = t * mean_sq.sqrt() / n.sqrt();
    let baseline: Vec<f64> = (0..10).map(|i| 5.0 + i as f64).collect();
    let candidate = baseline.iter().zip(spread).map(|(b, s)| b + s + shift).collect();
    (candidate, baseline)
}

#[test]
fn t_test_matches_the_tabulated_critical_value() {
    let (c, b) = samples_with_t(-1.833);
    let p = paired_t_test(&c, &b).unwrap();
    assert!((p - 0.05).abs() < 1e-3, "{p}");
    let reference = StudentsT::new(0.0, 1.0, 9.0).unwrap().cdf(-1.833);
    assert!((p - reference).abs() < 1e-10, "{p} vs {reference}");
}

proptest! {
    #[test]
    fn t_cdf_agrees_with_statrs(t in -30.0f64..30.0, dof in 1usize..400) {
        let ours = student_t_cdf(t, dof as f64);
        let theirs = StudentsT::new(0.0, 1.0, dof as f64).unwrap().cdf(t);
        prop_assert!((ours - theirs).abs() < 1e-10, "t={} dof={}: {} vs {}", t, dof, ours, theirs);
    }
}

#[test]
fn clipping_rescales_a_norm_of_five() {
    let mut g = vec![Tensor::new(1, 2, vec![3.0, 0.0]).unwrap(), Tensor::new(2, 1, vec![0.0, 4.0]).unwrap()];
    assert_eq!(clip_gradients(&mut g, 1.0), 5.0);
    assert!((gradient_norm(&g) - 1.0).abs() < 1e-15);
    assert!((g[0].data()[0] - 0.6).abs() < 1e-15 && (g[1].data()[1] - 0.8).abs() < 1e-15);
}

#[test]
fn zero_advantage_keeps_the_weights() {
    // every order colours a clique with the same number of colours
    let mut p = params(8, 3);
    let baseline = p.clone();
    let insts: Vec<Instance> = (3..7).map(|n| instance(Graph::complete(n), 8)).collect();
    let groups: Vec<Vec<&Instance>> = insts.iter().map(|i| vec![i]).collect();
    let mut opt = Adam::new(&p, 1e-2);
    let stats = reinforce_batch_update(&mut p, &baseline, Problem::Coloring, &groups, &mut opt, 1.0, 9).unwrap();
    assert_eq!(stats.grad_norm, 0.0);
    assert_eq!(stats.mean_cost, stats.mean_baseline_cost);
    assert_eq!(p.trainable(), baseline.trainable());
    // batch statistics still move the running averages
    assert_ne!(p, baseline);
}

#[test]
fn one_update_changes_weights_and_stays_finite() {
    let mut p = params(8, 4);
    let baseline = p.clone();
    let insts: Vec<Instance> = (0..6).map(|i| instance(graph(i, 10, i as u64), 8)).collect();
    let groups: Vec<Vec<&Instance>> = insts.chunks(3).map(|c| c.iter().collect()).collect();
    let mut opt = Adam::new(&p, 1e-3);
    let stats = reinforce_batch_update(&mut p, &baseline, Problem::Coloring, &groups, &mut opt, 1.0, 5).unwrap();
    assert!(stats.grad_norm > 0.0 && stats.loss.is_finite());
    assert_ne!(p.trainable(), baseline.trainable());
    assert!(p.trainable().iter().all(|(_, t)| t.is_finite()));
    assert!(reinforce_batch_update(&mut p, &baseline, Problem::Coloring, &[vec![]], &mut opt, 1.0, 5).is_err());
}

#[test]
fn zero_epochs_return_the_initial_model() {
    let cfg = TrainConfig { epochs: 0, ..tiny(7) };
    let out = train(&cfg).unwrap();
    assert!(out.log.is_empty());
    assert_eq!(out.params, cfg.initial_parameters().unwrap());
}

#[test]
fn training_is_reproducible() {
    let cfg = tiny(11);
    let mut streamed = Vec::new();
    let a = train_with(&cfg, |r| streamed.push(serde_json::to_string(r).unwrap())).unwrap();
    let b = train(&cfg).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.params.to_checkpoint(), b.params.to_checkpoint());
    assert_eq!(streamed.len(), 2);
    let line: serde_json::Value = serde_json::from_str(&streamed[0]).unwrap();
    for key in ["epoch", "train_cost", "challenge_cost", "baseline_cost", "p_value", "swapped"] {
        assert!(line.get(key).is_some(), "{key}");
    }
    for r in &a.log {
        assert!((0.0..=1.0).contains(&r.p_value));
        assert!(!r.swapped || r.challenge_cost < r.baseline_cost);
    }
    let c = train(&tiny(12)).unwrap();
    assert_ne!(a.params.to_checkpoint(), c.params.to_checkpoint());
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        TrainConfig { batch_size: 0, ..tiny(0) },
        TrainConfig { learning_rate: 0.0, ..tiny(0) },
        TrainConfig { t_test_alpha: 1.5, ..tiny(0) },
        TrainConfig { challenge_size: 1, ..tiny(0) },
        TrainConfig { hyper: Hyper { d: 6, ..Hyper::default() }, ..tiny(0) },
    ] {
        assert!(train(&cfg).is_err());
    }
}

#[test]
fn config_round_trips_through_json() {
    let cfg = TrainConfig::mvc(vec![Family::er(), Family::ba()]);
    let text = serde_json::to_string(&cfg).unwrap();
    assert_eq!(serde_json::from_str::<TrainConfig>(&text).unwrap(), cfg);
    let partial: TrainConfig = serde_json::from_str(r#"{"epochs": 3}"#).unwrap();
    assert_eq!(partial.epochs, 3);
    assert_eq!(partial.batch_size, TrainConfig::default().batch_size);
}
