use crate::decoder::PolicyEpisode;
use crate::encoder::{encode, BnMode};
use crate::error::{PolicyError, Result};
use crate::hyper::Hyper;
use crate::instance::Instance;
use crate::params::ModelParameters;
use crate::rollout::{greedy_rollout, total_log_probability};
use crate::ttest::paired_t_test;
use nodelab_autodiff::{Backend, Tape, Tensor};
use nodelab_core::generators::{DatasetSpec, Family};
use nodelab_core::rng::{derive_seed, seeded};
use nodelab_core::{par, Problem};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const BN_MOMENTUM: f64 = 0.1;

const INIT_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const CHALLENGE_STREAM: u64 = 3;
const SHUFFLE_STREAM: u64 = 4;
const SAMPLE_STREAM: u64 = 5;

fn default_epochs() -> usize {
    200
}
fn default_batch() -> usize {
    64
}
fn default_node_counts() -> Vec<usize> {
    vec![20, 40, 50, 70, 100]
}
fn default_families() -> Vec<Family> {
    vec![Family::ser(), Family::ws(), Family::ba()]
}
fn default_size() -> usize {
    20_000
}
fn default_lr() -> f64 {
    1e-4
}
fn default_clip() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    0.05
}
fn default_challenge() -> usize {
    256
}
fn default_problem() -> Problem {
    Problem::Coloring
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_problem")]
    pub problem: Problem,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Graphs per node count in one batch.
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_node_counts")]
    pub node_counts: Vec<usize>,
    #[serde(default = "default_families")]
    pub families: Vec<Family>,
    /// Training graphs, fixed for the run.
    #[serde(default = "default_size")]
    pub dataset_size: usize,
    #[serde(default = "default_lr")]
    pub learning_rate: f64,
    #[serde(default = "default_clip")]
    pub grad_clip: f64,
    #[serde(default = "default_alpha")]
    pub t_test_alpha: f64,
    #[serde(default = "default_challenge")]
    pub challenge_size: usize,
    #[serde(default)]
    pub hyper: Hyper,
    #[serde(default)]
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl TrainConfig {
    /// Vertex cover on ER graphs, BA graphs, or both.
    pub fn mvc(families: Vec<Family>) -> Self {
        TrainConfig {
            problem: Problem::VertexCover,
            families,
            ..TrainConfig::default()
        }
    }

    pub fn effective_batch(&self) -> usize {
        self.batch_size * self.node_counts.len()
    }

    pub fn dataset(&self) -> DatasetSpec {
        DatasetSpec::new(self.families.clone(), self.node_counts.clone(), self.dataset_size)
    }

    pub fn validate(&self) -> Result<()> {
        self.hyper.validate()?;
        self.dataset().validate()?;
        let bad = |m: &str| Err(PolicyError::Config(m.into()));
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if self.dataset_size < self.node_counts.len() {
            return bad("dataset_size must cover every node count");
        }
        if self.challenge_size < 2 {
            return bad("challenge_size must be at least 2");
        }
        if !(self.learning_rate > 0.0) || !(self.grad_clip > 0.0) {
            return bad("learning_rate and grad_clip must be positive");
        }
        if !(self.t_test_alpha > 0.0 && self.t_test_alpha < 1.0) {
            return bad("t_test_alpha must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn initial_parameters(&self) -> Result<ModelParameters> {
        ModelParameters::init(self.hyper, derive_seed(self.seed, &[INIT_STREAM]))
    }

    fn instances(&self, seed: u64, size: usize) -> Result<Vec<(usize, Instance)>> {
        let spec = DatasetSpec { size, ..self.dataset() };
        let d_in = self.hyper.d_in;
        spec.generate(seed)?
            .into_iter()
            .map(|g| Ok((g.spec.n, Instance::new(g.graph, d_in, g.spec.family.dense())?)))
            .collect()
    }

    /// The fixed training set, tagged with nominal node counts.
    pub fn training_set(&self) -> Result<Vec<(usize, Instance)>> {
        self.instances(derive_seed(self.seed, &[TRAIN_STREAM]), self.dataset_size)
    }

    fn challenge_set(&self, round: u64) -> Result<Vec<Instance>> {
        Ok(self
            .instances(derive_seed(self.seed, &[CHALLENGE_STREAM, round]), self.challenge_size)?
            .into_iter()
            .map(|(_, i)| i)
            .collect())
    }
}

/// Adam with per-tensor moments in [`ModelParameters::trainable`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    pub first: Vec<Tensor>,
    pub second: Vec<Tensor>,
}

impl Adam {
    pub fn new(params: &ModelParameters, learning_rate: f64) -> Self {
        let zeros: Vec<Tensor> = params
            .trainable()
            .iter()
            .map(|(_, t)| Tensor::zeros(t.rows(), t.cols()))
            .collect();
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            first: zeros.clone(),
            second: zeros,
        }
    }

    pub fn update(&mut self, params: &mut ModelParameters, grads: &[Tensor]) {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for (i, p) in params.trainable_mut().into_iter().enumerate() {
            let p = Arc::make_mut(p);
            let (m, v, g) = (&mut self.first[i], &mut self.second[i], &grads[i]);
            for j in 0..g.len() {
                let gj = g.data()[j];
                let mj = self.beta1 * m.data()[j] + (1.0 - self.beta1) * gj;
                let vj = self.beta2 * v.data()[j] + (1.0 - self.beta2) * gj * gj;
                m.data_mut()[j] = mj;
                v.data_mut()[j] = vj;
                p.data_mut()[j] -= self.learning_rate * (mj / c1) / ((vj / c2).sqrt() + self.epsilon);
            }
        }
    }
}

/// Global L2 norm of all gradients.
pub fn gradient_norm(grads: &[Tensor]) -> f64 {
    grads.iter().map(Tensor::squared_norm).sum::<f64>().sqrt()
}

/// Rescales `grads` so their global norm is at most `max_norm`; returns the
/// norm before clipping.
pub fn clip_gradients(grads: &mut [Tensor], max_norm: f64) -> f64 {
    let norm = gradient_norm(grads);
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            for x in g.data_mut() {
                *x *= s;
            }
        }
    }
    norm
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchStats {
    pub mean_cost: f64,
    pub mean_baseline_cost: f64,
    pub loss: f64,
    pub grad_norm: f64,
}

struct GroupOutcome {
    grads: Vec<Tensor>,
    costs: Vec<f64>,
    loss: f64,
    batch_stats: Vec<(Vec<f64>, Vec<f64>)>,
    rows: usize,
}

/// Sampled rollouts for one group of equal node count on a shared tape and
/// the gradient of `sum_j advantage_j * log p_j / total`.
fn group_gradient(
    params: &ModelParameters,
    problem: Problem,
    group: &[&Instance],
    baseline_costs: &[f64],
    total: usize,
    seed: u64,
) -> Result<GroupOutcome> {
    let mut tape = Tape::new();
    let bound = params.bind(&mut tape);
    let (features, adjacency, offsets) = Instance::union(group)?;
    let enc = encode(&mut tape, params, &bound, &features, &adjacency, BnMode::Train)?;
    let mut costs = Vec::with_capacity(group.len());
    let mut terms = Vec::new();
    let mut weights = Vec::new();
    for (j, inst) in group.iter().enumerate() {
        let rows: Vec<usize> = (offsets[j]..offsets[j] + inst.node_count()).collect();
        let emb = tape.gather_rows(&enc.embeddings, &rows)?;
        let mut ep = PolicyEpisode::new(&mut tape, params.hyper, &bound, &problem, &inst.graph, emb, true)?;
        let mut rng = seeded(derive_seed(seed, &[j as u64]));
        ep.run(&mut tape, Some(&mut rng))?;
        let (trajectory, log_probs) = ep.finish()?;
        costs.push(trajectory.terminal_cost);
        if let Some(lp) = total_log_probability(&mut tape, &log_probs)? {
            terms.push(lp);
            weights.push((trajectory.terminal_cost - baseline_costs[j]) / total as f64);
        }
    }
    let mut grads: Vec<Tensor> = params
        .trainable()
        .iter()
        .map(|(_, t)| Tensor::zeros(t.rows(), t.cols()))
        .collect();
    let mut loss = 0.0;
    if !terms.is_empty() {
        let row = tape.concat(&terms)?;
        let w = tape.constant(Tensor::row_vector(weights));
        let prod = tape.mul(&row, &w)?;
        let l = tape.sum(&prod);
        loss = tape.value(&l).item()?;
        let g = tape.backward(l)?;
        grads = bound.leaves.iter().map(|&id| g.wrt(id)).collect();
    }
    Ok(GroupOutcome {
        grads,
        costs,
        loss,
        batch_stats: enc.batch_stats,
        rows: features.rows(),
    })
}

fn update_running_stats(params: &mut ModelParameters, stats: &[(Vec<f64>, Vec<f64>)], rows: usize) {
    let correction = if rows > 1 { rows as f64 / (rows - 1) as f64 } else { 1.0 };
    for (layer, (mean, var)) in params.layers.iter_mut().zip(stats) {
        let rm = Arc::make_mut(&mut layer.running_mean);
        for (r, m) in rm.data_mut().iter_mut().zip(mean) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * m;
        }
        let rv = Arc::make_mut(&mut layer.running_var);
        for (r, v) in rv.data_mut().iter_mut().zip(var) {
            *r = (1.0 - BN_MOMENTUM) * *r + BN_MOMENTUM * v * correction;
        }
    }
}

/// One REINFORCE step with the greedy rollout of `baseline` as baseline.
/// `groups` holds one slice of instances per node count.
pub fn reinforce_batch_update(
    params: &mut ModelParameters,
    baseline: &ModelParameters,
    problem: Problem,
    groups: &[Vec<&Instance>],
    opt: &mut Adam,
    grad_clip: f64,
    seed: u64,
) -> Result<BatchStats> {
    if groups.iter().any(Vec::is_empty) {
        return Err(PolicyError::Usage("every group needs at least one graph".into()));
    }
    let total: usize = groups.iter().map(Vec::len).sum();
    if total == 0 {
        return Err(PolicyError::Usage("empty batch".into()));
    }
    let flat: Vec<&Instance> = groups.iter().flatten().copied().collect();
    let baseline_costs: Vec<f64> = par::map(&flat, |inst| greedy_rollout(&problem, inst, baseline).map(|t| t.terminal_cost))
        .into_iter()
        .collect::<Result<_>>()?;
    let mut starts = Vec::with_capacity(groups.len());
    let mut s = 0;
    for g in groups {
        starts.push(s);
        s += g.len();
    }
    let snapshot: &ModelParameters = params;
    let outcomes: Vec<GroupOutcome> = par::map_range(groups.len(), |gi| {
        let group = &groups[gi];
        let bl = &baseline_costs[starts[gi]..starts[gi] + group.len()];
        group_gradient(snapshot, problem, group, bl, total, derive_seed(seed, &[gi as u64]))
    })
    .into_iter()
    .collect::<Result<_>>()?;

    let mut grads = outcomes[0].grads.clone();
    for o in &outcomes[1..] {
        for (acc, g) in grads.iter_mut().zip(&o.grads) {
            for (a, b) in acc.data_mut().iter_mut().zip(g.data()) {
                *a += b;
            }
        }
    }
    let loss: f64 = outcomes.iter().map(|o| o.loss).sum();
    if !loss.is_finite() || grads.iter().any(|g| !g.is_finite()) {
        return Err(PolicyError::Numeric {
            epoch: 0,
            batch: 0,
            message: format!("non-finite loss {loss} or gradient"),
        });
    }
    let grad_norm = clip_gradients(&mut grads, grad_clip);
    opt.update(params, &grads);
    for o in &outcomes {
        update_running_stats(params, &o.batch_stats, o.rows);
    }
    let costs: Vec<f64> = outcomes.iter().flat_map(|o| o.costs.iter().copied()).collect();
    Ok(BatchStats {
        mean_cost: mean(&costs),
        mean_baseline_cost: mean(&baseline_costs),
        loss,
        grad_norm,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len().max(1) as f64
}

/// One line of the training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_cost: f64,
    pub challenge_cost: f64,
    pub baseline_cost: f64,
    pub p_value: f64,
    pub swapped: bool,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParameters,
    pub baseline: ModelParameters,
    pub log: Vec<EpochRecord>,
}

/// Greedy costs of `params` on `instances`, in order.
pub fn greedy_costs(problem: Problem, params: &ModelParameters, instances: &[Instance]) -> Result<Vec<f64>> {
    par::map(instances, |inst| greedy_rollout(&problem, inst, params).map(|t| t.terminal_cost))
        .into_iter()
        .collect()
}

pub fn train(cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with(cfg, |_| {})
}

/// Trains from scratch, calling `on_epoch` after each epoch.
pub fn train_with(cfg: &TrainConfig, mut on_epoch: impl FnMut(&EpochRecord)) -> Result<TrainOutcome> {
    cfg.validate()?;
    let mut params = cfg.initial_parameters()?;
    let mut baseline = params.clone();
    let mut log = Vec::new();
    if cfg.epochs == 0 {
        return Ok(TrainOutcome { params, baseline, log });
    }
    let data = cfg.training_set()?;
    let mut by_n: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (n, _)) in data.iter().enumerate() {
        by_n.entry(*n).or_default().push(i);
    }
    let per_group = by_n.values().map(Vec::len).min().unwrap_or(0);
    let batches = per_group.div_ceil(cfg.batch_size).max(1);
    let mut opt = Adam::new(&params, cfg.learning_rate);
    let mut round = 0u64;
    let mut challenge = cfg.challenge_set(round)?;
    for epoch in 0..cfg.epochs {
        let mut order = by_n.clone();
        for (n, idx) in order.iter_mut() {
            idx.shuffle(&mut seeded(derive_seed(cfg.seed, &[SHUFFLE_STREAM, epoch as u64, *n as u64])));
        }
        let mut train_costs = Vec::new();
        for batch in 0..batches {
            let groups: Vec<Vec<&Instance>> = order
                .values()
                .map(|idx| {
                    let lo = (batch * cfg.batch_size).min(idx.len());
                    let hi = ((batch + 1) * cfg.batch_size).min(idx.len());
                    idx[lo..hi].iter().map(|&i| &data[i].1).collect::<Vec<_>>()
                })
                .filter(|g| !g.is_empty())
                .collect();
            let seed = derive_seed(cfg.seed, &[SAMPLE_STREAM, epoch as u64, batch as u64]);
            let stats = reinforce_batch_update(&mut params, &baseline, cfg.problem, &groups, &mut opt, cfg.grad_clip, seed)
                .map_err(|e| match e {
                    PolicyError::Numeric { message, .. } => PolicyError::Numeric { epoch, batch, message },
                    other => other,
                })?;
            train_costs.push(stats.mean_cost);
        }
        let candidate = greedy_costs(cfg.problem, &params, &challenge)?;
        let reference = greedy_costs(cfg.problem, &baseline, &challenge)?;
        let p_value = paired_t_test(&candidate, &reference)?;
        let (cm, bm) = (mean(&candidate), mean(&reference));
        let swapped = p_value < cfg.t_test_alpha && cm < bm;
        if swapped {
            baseline = params.clone();
            round += 1;
            challenge = cfg.challenge_set(round)?;
        }
        let record = EpochRecord {
            epoch,
            train_cost: mean(&train_costs),
            challenge_cost: cm,
            baseline_cost: bm,
            p_value,
            swapped,
        };
        on_epoch(&record);
        log.push(record);
    }
    Ok(TrainOutcome { params, baseline, log })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_hits_the_target_norm() {
        let mut g = vec![Tensor::row_vector(vec![3.0]), Tensor::row_vector(vec![4.0])];
        let before = clip_gradients(&mut g, 1.0);
        assert_eq!(before, 5.0);
        assert!((gradient_norm(&g) - 1.0).abs() < 1e-15);
        let mut small = vec![Tensor::row_vector(vec![0.1, 0.2])];
        clip_gradients(&mut small, 1.0);
        assert_eq!(small[0].data(), &[0.1, 0.2]);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = ModelParameters::init(Hyper::with_dim(8), 1).unwrap();
        let before = p.clone();
        let mut opt = Adam::new(&p, 1e-3);
        let zeros: Vec<Tensor> = p.trainable().iter().map(|(_, t)| Tensor::zeros(t.rows(), t.cols())).collect();
        opt.update(&mut p, &zeros);
        assert_eq!(p, before);
    }

    #[test]
    fn defaults_match_the_reference_setup() {
        let c = TrainConfig::default();
        assert_eq!(c.effective_batch(), 320);
        assert_eq!(c.learning_rate, 1e-4);
        assert_eq!(c.challenge_size, 256);
        assert!(c.validate().is_ok());
    }
}
