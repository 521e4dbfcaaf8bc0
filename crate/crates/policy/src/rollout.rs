use crate::decoder::{PolicyEpisode, Selection};
use crate::encoder::{encode, BnMode};
use crate::error::Result;
use crate::instance::Instance;
use crate::params::ModelParameters;
use nodelab_autodiff::{Backend, Eval, OpCount, Tensor};
use nodelab_core::rng::{derive_seed, seeded};
use nodelab_core::{par, LabelingProblem, Trajectory};
use std::sync::Arc;

pub const GC_SAMPLES: usize = 100;
pub const MVC_SAMPLES: usize = 10;

/// Eval-mode node embeddings of `inst`, with the work it took.
pub fn embed(params: &ModelParameters, inst: &Instance) -> Result<(Arc<Tensor>, OpCount)> {
    let mut b = Eval::new();
    let bound = params.bind(&mut b);
    let enc = encode(&mut b, params, &bound, &inst.features, inst.graph.adjacency(), BnMode::Eval)?;
    Ok((enc.embeddings, b.count))
}

fn decode<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
    embeddings: Arc<Tensor>,
    seed: Option<u64>,
) -> Result<(Trajectory, OpCount)> {
    let mut b = Eval::new();
    let bound = params.bind(&mut b);
    let mut ep = PolicyEpisode::new(&mut b, params.hyper, &bound, problem, &inst.graph, embeddings, false)?;
    let mut rng = seed.map(seeded);
    ep.run(&mut b, rng.as_mut())?;
    let (t, _) = ep.finish()?;
    Ok((t, b.count))
}

/// Deterministic rollout picking the highest-weight node at every step.
pub fn greedy_rollout<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
) -> Result<Trajectory> {
    Ok(greedy_rollout_counted(problem, inst, params)?.0)
}

/// [`greedy_rollout`] with the arithmetic of encoder and decoder tallied.
pub fn greedy_rollout_counted<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
) -> Result<(Trajectory, OpCount)> {
    let (h, enc) = embed(params, inst)?;
    let (t, dec) = decode(problem, inst, params, h, None)?;
    Ok((
        t,
        OpCount {
            arithmetic: enc.arithmetic + dec.arithmetic,
            comparisons: enc.comparisons + dec.comparisons,
        },
    ))
}

/// One episode sampling each node from the policy distribution.
pub fn sampled_episode<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
    seed: u64,
) -> Result<Trajectory> {
    let (h, _) = embed(params, inst)?;
    Ok(decode(problem, inst, params, h, Some(seed))?.0)
}

/// Best of the greedy rollout and `k` sampled episodes; ties keep the
/// earliest, with the greedy rollout first.
pub fn sample_rollout<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
    k: usize,
    seed: u64,
) -> Result<Trajectory> {
    let (h, _) = embed(params, inst)?;
    let candidates = par::map_range(k + 1, |i| {
        let s = (i > 0).then(|| derive_seed(seed, &[i as u64 - 1]));
        decode(problem, inst, params, h.clone(), s).map(|(t, _)| t)
    });
    let mut best: Option<Trajectory> = None;
    for c in candidates {
        let c = c?;
        if best.as_ref().is_none_or(|b| c.terminal_cost < b.terminal_cost) {
            best = Some(c);
        }
    }
    Ok(best.expect("at least the greedy rollout"))
}

/// Replays a fixed node order through the decoder, keeping probabilities.
pub fn forced_rollout<P: LabelingProblem + ?Sized>(
    problem: &P,
    inst: &Instance,
    params: &ModelParameters,
    order: &[usize],
) -> Result<Trajectory> {
    let (h, _) = embed(params, inst)?;
    let mut b = Eval::new();
    let bound = params.bind(&mut b);
    let mut ep = PolicyEpisode::new(&mut b, params.hyper, &bound, problem, &inst.graph, h, false)?;
    for &v in order {
        if ep.is_done() {
            break;
        }
        ep.step(&mut b, Selection::Forced(v))?;
    }
    Ok(ep.finish()?.0)
}

/// Sum of tracked log-probabilities, or `None` when no action was sampled.
pub fn total_log_probability<B: Backend>(b: &mut B, log_probs: &[B::Var]) -> Result<Option<B::Var>> {
    if log_probs.is_empty() {
        return Ok(None);
    }
    let row = b.concat(log_probs)?;
    Ok(Some(b.sum(&row)))
}
