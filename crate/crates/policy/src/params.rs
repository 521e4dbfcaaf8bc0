use crate::error::{PolicyError, Result};
use crate::hyper::{Hyper, HEADS, LAYERS};
use nodelab_autodiff::{Backend, Tensor};
use nodelab_core::rng::seeded;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct GatLayer {
    /// `d × d`; head `h` owns columns `h*d/4..(h+1)*d/4`.
    pub weight: Arc<Tensor>,
    /// `heads × 2(d/4)`, source half first.
    pub attention: Arc<Tensor>,
    pub gamma: Arc<Tensor>,
    pub beta: Arc<Tensor>,
    pub running_mean: Arc<Tensor>,
    pub running_var: Arc<Tensor>,
}

/// Every learned tensor of the policy plus batch-norm running statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub hyper: Hyper,
    pub input_weight: Arc<Tensor>,
    pub input_bias: Arc<Tensor>,
    pub layers: Vec<GatLayer>,
    /// `d × (2K+1)d`, applied to the context.
    pub theta1: Arc<Tensor>,
    /// `d × d`, applied to node embeddings.
    pub theta2: Arc<Tensor>,
    /// Fills the `2Kd` history slots that do not exist yet.
    pub h0: Arc<Tensor>,
}

#[derive(Debug, Clone)]
pub struct BoundLayer<V> {
    pub weight: V,
    pub attention: V,
    pub gamma: V,
    pub beta: V,
}

/// Parameters registered on a backend. `leaves` follows
/// [`ModelParameters::trainable`] order.
#[derive(Debug, Clone)]
pub struct BoundParams<V> {
    pub leaves: Vec<V>,
    pub input_weight: V,
    pub input_bias: V,
    pub layers: Vec<BoundLayer<V>>,
    pub theta1_t: V,
    pub theta2_t: V,
    pub h0: V,
}

fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, fan_in: usize) -> Arc<Tensor> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let data = (0..rows * cols).map(|_| rng.gen_range(-bound..=bound)).collect();
    Arc::new(Tensor::new(rows, cols, data).expect("sized"))
}

impl ModelParameters {
    pub fn init(hyper: Hyper, seed: u64) -> Result<Self> {
        hyper.validate()?;
        let mut rng = seeded(seed);
        let d = hyper.d;
        let dh = d / HEADS;
        let input_weight = uniform(&mut rng, hyper.d_in, d, hyper.d_in);
        let input_bias = uniform(&mut rng, 1, d, hyper.d_in);
        let layers = (0..LAYERS)
            .map(|_| GatLayer {
                weight: uniform(&mut rng, d, d, d),
                attention: uniform(&mut rng, HEADS, 2 * dh, 2 * dh),
                gamma: Arc::new(Tensor::filled(1, d, 1.0)),
                beta: Arc::new(Tensor::zeros(1, d)),
                running_mean: Arc::new(Tensor::zeros(1, d)),
                running_var: Arc::new(Tensor::filled(1, d, 1.0)),
            })
            .collect();
        let width = hyper.context_width();
        let theta1 = uniform(&mut rng, d, width, width);
        let theta2 = uniform(&mut rng, d, d, d);
        let h0 = uniform(&mut rng, 1, 2 * hyper.context_size * d, 2 * hyper.context_size * d);
        Ok(ModelParameters {
            hyper,
            input_weight,
            input_bias,
            layers,
            theta1,
            theta2,
            h0,
        })
    }

    /// Learned tensors in a fixed order.
    pub fn trainable(&self) -> Vec<(String, &Arc<Tensor>)> {
        let mut out = vec![
            ("input.weight".to_string(), &self.input_weight),
            ("input.bias".to_string(), &self.input_bias),
        ];
        for (l, layer) in self.layers.iter().enumerate() {
            out.push((format!("gat{l}.weight"), &layer.weight));
            out.push((format!("gat{l}.attention"), &layer.attention));
            out.push((format!("gat{l}.gamma"), &layer.gamma));
            out.push((format!("gat{l}.beta"), &layer.beta));
        }
        out.push(("decoder.theta1".to_string(), &self.theta1));
        out.push(("decoder.theta2".to_string(), &self.theta2));
        out.push(("decoder.h0".to_string(), &self.h0));
        out
    }

    /// Mutable handles in [`Self::trainable`] order.
    pub fn trainable_mut(&mut self) -> Vec<&mut Arc<Tensor>> {
        let mut out = vec![&mut self.input_weight, &mut self.input_bias];
        for layer in &mut self.layers {
            out.push(&mut layer.weight);
            out.push(&mut layer.attention);
            out.push(&mut layer.gamma);
            out.push(&mut layer.beta);
        }
        out.push(&mut self.theta1);
        out.push(&mut self.theta2);
        out.push(&mut self.h0);
        out
    }

    fn all_named(&self) -> Vec<(String, &Arc<Tensor>)> {
        let mut out = self.trainable();
        for (l, layer) in self.layers.iter().enumerate() {
            out.push((format!("gat{l}.running_mean"), &layer.running_mean));
            out.push((format!("gat{l}.running_var"), &layer.running_var));
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.trainable().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn bind<B: Backend>(&self, b: &mut B) -> BoundParams<B::Var> {
        let leaves: Vec<B::Var> = self.trainable().into_iter().map(|(_, t)| b.param(t)).collect();
        Self::bind_leaves(b, leaves)
    }

    /// Arranges variables already on `b`, in [`Self::trainable`] order.
    pub fn bind_leaves<B: Backend>(b: &mut B, leaves: Vec<B::Var>) -> BoundParams<B::Var> {
        assert_eq!(leaves.len(), 5 + 4 * LAYERS, "one leaf per trainable tensor");
        let layers = (0..LAYERS)
            .map(|l| BoundLayer {
                weight: leaves[2 + 4 * l].clone(),
                attention: leaves[3 + 4 * l].clone(),
                gamma: leaves[4 + 4 * l].clone(),
                beta: leaves[5 + 4 * l].clone(),
            })
            .collect();
        let base = 2 + 4 * LAYERS;
        let theta1_t = b.transpose(&leaves[base]);
        let theta2_t = b.transpose(&leaves[base + 1]);
        BoundParams {
            input_weight: leaves[0].clone(),
            input_bias: leaves[1].clone(),
            layers,
            theta1_t,
            theta2_t,
            h0: leaves[base + 2].clone(),
            leaves,
        }
    }

    pub fn to_checkpoint(&self) -> String {
        let tensors = self
            .all_named()
            .into_iter()
            .map(|(name, t)| {
                let shape = if t.rows() == 1 { vec![t.cols()] } else { vec![t.rows(), t.cols()] };
                (
                    name,
                    TensorRecord {
                        shape,
                        data: t.data().to_vec(),
                    },
                )
            })
            .collect();
        let doc = CheckpointDoc {
            format_version: FORMAT_VERSION,
            hyper: self.hyper,
            tensors,
        };
        let mut s = serde_json::to_string(&doc).expect("finite values serialise");
        s.push('\n');
        s
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let doc: CheckpointDoc =
            serde_json::from_str(text).map_err(|e| PolicyError::Checkpoint(e.to_string()))?;
        if doc.format_version != FORMAT_VERSION {
            return Err(PolicyError::Checkpoint(format!(
                "format version {} is not supported (expected {FORMAT_VERSION})",
                doc.format_version
            )));
        }
        let mut params = ModelParameters::init(doc.hyper, 0)?;
        let mut tensors = doc.tensors;
        let names: Vec<(String, [usize; 2])> =
            params.all_named().into_iter().map(|(n, t)| (n, t.shape())).collect();
        let mut loaded = BTreeMap::new();
        for (name, expected) in names {
            let record = tensors.remove(&name).ok_or_else(|| PolicyError::CheckpointTensor {
                tensor: name.clone(),
                message: "missing".into(),
            })?;
            let t = Tensor::from_shape(&record.shape, record.data).map_err(|e| PolicyError::CheckpointTensor {
                tensor: name.clone(),
                message: e.to_string(),
            })?;
            if t.shape() != expected {
                return Err(PolicyError::CheckpointTensor {
                    tensor: name,
                    message: format!("shape {:?} does not match expected {:?}", record.shape, expected),
                });
            }
            loaded.insert(name, Arc::new(t));
        }
        if let Some(extra) = tensors.keys().next() {
            return Err(PolicyError::CheckpointTensor {
                tensor: extra.clone(),
                message: "not part of the model".into(),
            });
        }
        let mut take = |name: &str| loaded.remove(name).expect("validated above");
        params.input_weight = take("input.weight");
        params.input_bias = take("input.bias");
        for (l, layer) in params.layers.iter_mut().enumerate() {
            layer.weight = take(&format!("gat{l}.weight"));
            layer.attention = take(&format!("gat{l}.attention"));
            layer.gamma = take(&format!("gat{l}.gamma"));
            layer.beta = take(&format!("gat{l}.beta"));
            layer.running_mean = take(&format!("gat{l}.running_mean"));
            layer.running_var = take(&format!("gat{l}.running_var"));
        }
        params.theta1 = take("decoder.theta1");
        params.theta2 = take("decoder.theta2");
        params.h0 = take("decoder.h0");
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_checkpoint())
            .map_err(|e| PolicyError::Checkpoint(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PolicyError::Checkpoint(format!("{}: {e}", path.display())))?;
        ModelParameters::from_checkpoint(&text)
    }
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointDoc {
    format_version: u32,
    hyper: Hyper,
    tensors: BTreeMap<String, TensorRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_follow_hyper() {
        let p = ModelParameters::init(Hyper::with_dim(8), 1).unwrap();
        assert_eq!(p.theta1.shape(), [8, 24]);
        assert_eq!(p.theta2.shape(), [8, 8]);
        assert_eq!(p.h0.shape(), [1, 16]);
        assert_eq!(p.layers[0].attention.shape(), [4, 4]);
        assert_eq!(p.input_weight.shape(), [32, 8]);
        assert!(ModelParameters::init(Hyper::with_dim(6), 1).is_err());
    }

    #[test]
    fn init_is_bounded_and_seeded() {
        let p = ModelParameters::init(Hyper::with_dim(16), 5).unwrap();
        let bound = 1.0 / 16f64.sqrt();
        assert!(p.theta2.data().iter().all(|x| x.abs() <= bound));
        assert_eq!(p, ModelParameters::init(Hyper::with_dim(16), 5).unwrap());
        assert_ne!(p, ModelParameters::init(Hyper::with_dim(16), 6).unwrap());
    }

    #[test]
    fn checkpoint_round_trip_is_byte_identical() {
        let p = ModelParameters::init(Hyper::with_dim(8), 3).unwrap();
        let a = p.to_checkpoint();
        let q = ModelParameters::from_checkpoint(&a).unwrap();
        assert_eq!(q, p);
        assert_eq!(q.to_checkpoint(), a);
    }

    #[test]
    fn tampered_shape_names_the_tensor() {
        let p = ModelParameters::init(Hyper::with_dim(8), 3).unwrap();
        let mut doc: serde_json::Value = serde_json::from_str(&p.to_checkpoint()).unwrap();
        doc["tensors"]["decoder.theta2"]["shape"] = serde_json::json!([4, 16]);
        let err = ModelParameters::from_checkpoint(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("decoder.theta2"), "{err}");
        doc["format_version"] = serde_json::json!(2);
        assert!(ModelParameters::from_checkpoint(&doc.to_string()).is_err());
    }
}
