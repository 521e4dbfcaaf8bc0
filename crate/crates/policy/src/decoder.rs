use crate::error::{PolicyError, Result};
use crate::hyper::{DecodeMode, Hyper};
use crate::params::BoundParams;
use nodelab_autodiff::{kernels, Backend, Tensor};
use nodelab_core::labeling::Episode;
use nodelab_core::rng::Rng;
use nodelab_core::{Graph, Label, LabelingProblem, Trajectory};
use rand::Rng as _;
use std::collections::BTreeMap;

/// How the next node is picked.
pub enum Selection<'r> {
    /// Highest attention weight, ties to the lowest id.
    Greedy,
    /// Drawn from the softmax over unlabeled nodes.
    Sample(&'r mut Rng),
    /// A fixed node, for replaying an action sequence.
    Forced(usize),
}

/// Snapshot of the decoder before an action.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderState {
    /// Attention weight per node; stale for labeled nodes.
    pub weights: Vec<f64>,
    /// `true` for labeled nodes.
    pub mask: Vec<bool>,
    /// Exactly 0 on labeled nodes.
    pub probabilities: Vec<f64>,
}

/// One labeling episode driven by the attention decoder.
pub struct PolicyEpisode<'a, B: Backend, P: LabelingProblem + ?Sized> {
    hyper: Hyper,
    bound: &'a BoundParams<B::Var>,
    graph: &'a Graph,
    embeddings: B::Var,
    graph_embedding: B::Var,
    episode: Episode<'a, 'a, P>,
    label_embeddings: BTreeMap<Label, B::Var>,
    recent: Vec<usize>,
    weights: Option<B::Var>,
    pending: bool,
    track: bool,
    log_probs: Vec<B::Var>,
}

impl<'a, B: Backend, P: LabelingProblem + ?Sized> PolicyEpisode<'a, B, P> {
    /// `embeddings` are the `n × d` encoder outputs for `graph`. With `track`
    /// set, the log-probability of every sampled or forced action is kept as a
    /// backend variable.
    pub fn new(
        b: &mut B,
        hyper: Hyper,
        bound: &'a BoundParams<B::Var>,
        problem: &'a P,
        graph: &'a Graph,
        embeddings: B::Var,
        track: bool,
    ) -> Result<Self> {
        let shape = b.value(&embeddings).shape();
        if shape != [graph.node_count(), hyper.d] {
            return Err(PolicyError::Usage(format!(
                "embeddings of shape {shape:?} for a graph with {} nodes and d = {}",
                graph.node_count(),
                hyper.d
            )));
        }
        let graph_embedding = if graph.node_count() > 0 {
            b.max_pool_rows(&embeddings)?
        } else {
            b.constant(Tensor::zeros(1, hyper.d))
        };
        Ok(PolicyEpisode {
            hyper,
            bound,
            graph,
            embeddings,
            graph_embedding,
            episode: Episode::new(problem, graph),
            label_embeddings: BTreeMap::new(),
            recent: Vec::new(),
            weights: None,
            pending: true,
            track,
            log_probs: Vec::new(),
        })
    }

    pub fn is_done(&self) -> bool {
        self.episode.is_done()
    }

    /// Number of actions taken by the decoder so far.
    pub fn step_index(&self) -> usize {
        self.recent.len()
    }

    pub fn last_node(&self) -> Option<usize> {
        self.recent.last().copied()
    }

    pub fn labeling(&self) -> &nodelab_core::PartialLabeling {
        self.episode.state().labeling()
    }

    /// Context embedding `g_t`.
    pub fn context(&self, b: &mut B) -> Result<B::Var> {
        let d = self.hyper.d;
        let mut parts = vec![self.graph_embedding.clone()];
        for i in 0..self.hyper.context_size {
            if i < self.recent.len() {
                let v = self.recent[self.recent.len() - 1 - i];
                let label = self.labeling().label(v).expect("recent nodes are labeled");
                parts.push(b.gather_rows(&self.embeddings, &[v])?);
                parts.push(self.label_embeddings[&label].clone());
            } else {
                parts.push(b.slice_cols(&self.bound.h0, 2 * d * i, 2 * d)?);
            }
        }
        Ok(b.concat(&parts)?)
    }

    /// Nodes whose weight is recomputed before the next action.
    pub fn recompute_set(&self) -> Vec<usize> {
        let n = self.graph.node_count();
        let labeling = self.labeling();
        if self.weights.is_none() {
            return (0..n).collect();
        }
        match self.hyper.decode_mode {
            DecodeMode::Static => Vec::new(),
            DecodeMode::Global => labeling.unlabeled_nodes().collect(),
            DecodeMode::Local => match self.recent.last() {
                Some(&v) => self
                    .graph
                    .neighbors(v)
                    .iter()
                    .copied()
                    .filter(|&u| !labeling.is_labeled(u))
                    .collect(),
                None => Vec::new(),
            },
        }
    }

    fn refresh(&mut self, b: &mut B) -> Result<()> {
        if self.is_done() {
            return Err(PolicyError::Usage("decoder called on a terminal state".into()));
        }
        if !self.pending {
            return Ok(());
        }
        self.pending = false;
        let set = self.recompute_set();
        if set.is_empty() {
            return Ok(());
        }
        let g = self.context(b)?;
        let q = b.matmul(&g, &self.bound.theta1_t)?;
        let qt = b.transpose(&q);
        let hs = b.gather_rows(&self.embeddings, &set)?;
        let keys = b.matmul(&hs, &self.bound.theta2_t)?;
        let s = b.matmul(&keys, &qt)?;
        let s = b.scale(&s, 1.0 / (self.hyper.d as f64).sqrt());
        let s = b.tanh(&s);
        let s = b.scale(&s, self.hyper.clip);
        self.weights = Some(match &self.weights {
            None => s,
            Some(w) => b.overwrite_rows(w, &set, &s)?,
        });
        Ok(())
    }

    fn mask(&self) -> Vec<bool> {
        let labeling = self.labeling();
        (0..self.graph.node_count()).map(|v| labeling.is_labeled(v)).collect()
    }

    /// Weights and probabilities for the next action; the probabilities are
    /// computed outside the backend and do not count as decoder work.
    pub fn decoder_state(&mut self, b: &mut B) -> Result<DecoderState> {
        self.refresh(b)?;
        let mask = self.mask();
        let w = b.value(self.weights.as_ref().expect("refreshed")).clone();
        let probabilities = kernels::masked_softmax(&w, &mask)?.into_data();
        Ok(DecoderState {
            weights: w.into_data(),
            mask,
            probabilities,
        })
    }

    /// Picks a node, labels it with the label rule and updates the context.
    pub fn step(&mut self, b: &mut B, selection: Selection<'_>) -> Result<(usize, Label)> {
        self.refresh(b)?;
        let weights = self.weights.clone().expect("refreshed");
        let (v, log_probability) = match selection {
            Selection::Greedy => {
                let values = b.value(&weights).data();
                let labeling = self.labeling();
                let mut best: Option<usize> = None;
                let mut compared = 0u64;
                for u in labeling.unlabeled_nodes() {
                    compared += 1;
                    if best.is_none_or(|c| values[u] > values[c]) {
                        best = Some(u);
                    }
                }
                b.count_comparisons(compared);
                // the greedy policy is deterministic
                (best.expect("non-terminal"), 0.0)
            }
            Selection::Sample(rng) => {
                let mask = self.mask();
                let p = b.masked_softmax(&weights, &mask)?;
                let probs = b.value(&p).data();
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut pick = None;
                for (i, &pi) in probs.iter().enumerate() {
                    if mask[i] {
                        continue;
                    }
                    acc += pi;
                    pick = Some(i);
                    if u < acc {
                        break;
                    }
                }
                let v = pick.expect("non-terminal");
                (v, self.log_probability(b, &p, v)?)
            }
            Selection::Forced(v) => {
                if v >= self.graph.node_count() || self.labeling().is_labeled(v) {
                    return Err(PolicyError::Usage(format!("node {v} cannot be selected")));
                }
                let p = b.masked_softmax(&weights, &self.mask())?;
                (v, self.log_probability(b, &p, v)?)
            }
        };
        let label = self.episode.label_node(v, log_probability)?;
        let hv = b.gather_rows(&self.embeddings, &[v])?;
        let updated = match self.label_embeddings.get(&label) {
            Some(h) => b.maximum(h, &hv)?,
            None => hv,
        };
        self.label_embeddings.insert(label, updated);
        self.recent.push(v);
        self.pending = true;
        Ok((v, label))
    }

    fn log_probability(&mut self, b: &mut B, p: &B::Var, v: usize) -> Result<f64> {
        let value = b.value(p).data()[v].ln();
        if self.track {
            let pv = b.gather_rows(p, &[v])?;
            self.log_probs.push(b.ln(&pv)?);
        }
        Ok(value)
    }

    /// Runs to the end with the same selection rule.
    pub fn run(&mut self, b: &mut B, mut rng: Option<&mut Rng>) -> Result<()> {
        while !self.is_done() {
            match rng.as_deref_mut() {
                Some(r) => self.step(b, Selection::Sample(r))?,
                None => self.step(b, Selection::Greedy)?,
            };
        }
        Ok(())
    }

    /// The trajectory and the tracked log-probabilities, in action order.
    pub fn finish(self) -> Result<(Trajectory, Vec<B::Var>)> {
        Ok((self.episode.finish()?, self.log_probs))
    }
}
