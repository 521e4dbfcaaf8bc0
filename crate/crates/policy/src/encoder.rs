use crate::error::Result;
use crate::hyper::LAYERS;
use crate::params::{BoundParams, ModelParameters};
use nodelab_autodiff::kernels::{BN_EPSILON, LEAKY_SLOPE};
use nodelab_autodiff::{Backend, Tensor};

/// Batch-norm behaviour of the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BnMode {
    /// Statistics of the current rows.
    Train,
    /// Running statistics stored in the parameters.
    Eval,
}

pub struct Encoded<V> {
    /// `n × d`, row `v` is the embedding of node `v`.
    pub embeddings: V,
    /// Per layer (mean, biased variance) of the batch; empty in eval mode.
    pub batch_stats: Vec<(Vec<f64>, Vec<f64>)>,
}

/// Input projection followed by three attention layers, each
/// `BN(h + GAT(h))`, with leaky ReLU between layers.
pub fn encode<B: Backend>(
    b: &mut B,
    params: &ModelParameters,
    bound: &BoundParams<B::Var>,
    features: &Tensor,
    neighbors: &[Vec<usize>],
    mode: BnMode,
) -> Result<Encoded<B::Var>> {
    let n = features.rows();
    let x = b.constant(features.clone());
    let ones = b.constant(Tensor::filled(n, 1, 1.0));
    let xw = b.matmul(&x, &bound.input_weight)?;
    let bias = b.matmul(&ones, &bound.input_bias)?;
    let mut h = b.add(&xw, &bias)?;
    let mut batch_stats = Vec::new();
    for (l, (layer, stored)) in bound.layers.iter().zip(&params.layers).enumerate() {
        let z = b.matmul(&h, &layer.weight)?;
        let att = b.neighborhood_attention(&z, &layer.attention, neighbors, LEAKY_SLOPE)?;
        let skip = b.add(&h, &att)?;
        h = match mode {
            BnMode::Train => {
                let (y, mean, var) = b.batch_norm_train(&skip, &layer.gamma, &layer.beta, BN_EPSILON)?;
                batch_stats.push((mean, var));
                y
            }
            BnMode::Eval => b.batch_norm_eval(
                &skip,
                &layer.gamma,
                &layer.beta,
                stored.running_mean.data(),
                stored.running_var.data(),
                BN_EPSILON,
            )?,
        };
        if l + 1 < LAYERS {
            h = b.leaky_relu(&h, LEAKY_SLOPE);
        }
    }
    Ok(Encoded {
        embeddings: h,
        batch_stats,
    })
}
