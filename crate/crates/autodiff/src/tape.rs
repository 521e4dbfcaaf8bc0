use crate::backend::Backend;
use crate::error::{Result, TensorError};
use crate::kernels::{self, AttentionSaved, BatchNormSaved};
use crate::tensor::Tensor;
use std::sync::Arc;

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Constant,
    Param,
    MatMul(VarId, VarId),
    Add(VarId, VarId),
    Sub(VarId, VarId),
    Mul(VarId, VarId),
    Maximum(VarId, VarId),
    Scale(VarId, f64),
    LeakyRelu(VarId, f64),
    Tanh(VarId),
    Ln(VarId),
    Sum(VarId),
    Transpose(VarId),
    Concat(Vec<VarId>),
    SliceCols(VarId, usize),
    GatherRows(VarId, Vec<usize>),
    OverwriteRows(VarId, Vec<usize>, VarId),
    MaskedSoftmax(VarId, Vec<bool>),
    MaxPoolRows(VarId, Vec<usize>),
    BatchNormTrain {
        x: VarId,
        gamma: VarId,
        beta: VarId,
        saved: BatchNormSaved,
    },
    BatchNormEval {
        x: VarId,
        gamma: VarId,
        beta: VarId,
        saved: BatchNormSaved,
    },
    Attention {
        z: VarId,
        a: VarId,
        slope: f64,
        saved: AttentionSaved,
    },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records operations in evaluation order for reverse-mode differentiation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients from one [`Tape::backward`] pass, indexed by [`VarId`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<[usize; 2]>,
}

impl Gradients {
    pub fn get(&self, v: VarId) -> Option<&Tensor> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Gradient of `v`, zero when the loss does not depend on it.
    pub fn wrt(&self, v: VarId) -> Tensor {
        match self.get(v) {
            Some(g) => g.clone(),
            None => {
                let [r, c] = self.shapes[v.0];
                Tensor::zeros(r, c)
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A differentiable input.
    pub fn leaf(&mut self, t: Tensor) -> VarId {
        self.nodes.push(Node {
            value: t,
            op: Op::Param,
            needs_grad: true,
        });
        VarId(self.nodes.len() - 1)
    }

    fn push(&mut self, value: Tensor, op: Op) -> VarId {
        let needs_grad = self.parents(&op).iter().any(|p| self.nodes[p.0].needs_grad);
        self.nodes.push(Node { value, op, needs_grad });
        VarId(self.nodes.len() - 1)
    }

    fn parents(&self, op: &Op) -> Vec<VarId> {
        match op {
            Op::Constant | Op::Param => vec![],
            Op::MatMul(a, b) | Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) | Op::Maximum(a, b) => {
                vec![*a, *b]
            }
            Op::OverwriteRows(a, _, b) => vec![*a, *b],
            Op::Scale(a, _)
            | Op::LeakyRelu(a, _)
            | Op::Tanh(a)
            | Op::Ln(a)
            | Op::Sum(a)
            | Op::Transpose(a)
            | Op::SliceCols(a, _)
            | Op::GatherRows(a, _)
            | Op::MaskedSoftmax(a, _)
            | Op::MaxPoolRows(a, _) => vec![*a],
            Op::Concat(parts) => parts.clone(),
            Op::BatchNormTrain { x, gamma, beta, .. } | Op::BatchNormEval { x, gamma, beta, .. } => {
                vec![*x, *gamma, *beta]
            }
            Op::Attention { z, a, .. } => vec![*z, *a],
        }
    }

    fn v(&self, id: VarId) -> &Tensor {
        &self.nodes[id.0].value
    }

    /// Reverse pass from a scalar `loss`.
    pub fn backward(&self, loss: VarId) -> Result<Gradients> {
        let shape = self.v(loss).shape();
        if shape != [1, 1] {
            return Err(TensorError::Usage(format!("loss must be scalar, got shape {shape:?}")));
        }
        let mut grads: Vec<Option<Tensor>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(Tensor::scalar(1.0));
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if node.needs_grad {
                self.propagate(node, &g, &mut grads);
            }
            grads[i] = Some(g);
        }
        let shapes = self.nodes.iter().map(|n| n.value.shape()).collect();
        grads.resize(self.nodes.len(), None);
        Ok(Gradients { grads, shapes })
    }

    fn propagate(&self, node: &Node, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let mut send = |id: VarId, t: Tensor| {
            if !self.nodes[id.0].needs_grad {
                return;
            }
            match &mut grads[id.0] {
                Some(acc) => acc.add_assign(&t),
                slot => *slot = Some(t),
            }
        };
        match &node.op {
            Op::Constant | Op::Param => {}
            Op::MatMul(a, b) => {
                let (av, bv) = (self.v(*a), self.v(*b));
                send(*a, kernels::matmul(g, &kernels::transpose(bv)).expect("shapes checked"));
                send(*b, kernels::matmul(&kernels::transpose(av), g).expect("shapes checked"));
            }
            Op::Add(a, b) => {
                send(*a, g.clone());
                send(*b, g.clone());
            }
            Op::Sub(a, b) => {
                send(*a, g.clone());
                send(*b, kernels::scale(g, -1.0));
            }
            Op::Mul(a, b) => {
                send(*a, kernels::mul(g, self.v(*b)).expect("same shape"));
                send(*b, kernels::mul(g, self.v(*a)).expect("same shape"));
            }
            Op::Maximum(a, b) => {
                let (av, bv) = (self.v(*a), self.v(*b));
                let mut ga = Tensor::zeros(g.rows(), g.cols());
                let mut gb = Tensor::zeros(g.rows(), g.cols());
                for i in 0..g.len() {
                    if bv.data()[i] > av.data()[i] {
                        gb.data_mut()[i] = g.data()[i];
                    } else {
                        ga.data_mut()[i] = g.data()[i];
                    }
                }
                send(*a, ga);
                send(*b, gb);
            }
            Op::Scale(a, s) => send(*a, kernels::scale(g, *s)),
            Op::LeakyRelu(a, slope) => {
                let x = self.v(*a);
                let mut out = g.clone();
                for (o, &xi) in out.data_mut().iter_mut().zip(x.data()) {
                    if xi <= 0.0 {
                        *o *= slope;
                    }
                }
                send(*a, out);
            }
            Op::Tanh(a) => {
                let mut out = g.clone();
                for (o, &y) in out.data_mut().iter_mut().zip(node.value.data()) {
                    *o *= 1.0 - y * y;
                }
                send(*a, out);
            }
            Op::Ln(a) => {
                let mut out = g.clone();
                for (o, &x) in out.data_mut().iter_mut().zip(self.v(*a).data()) {
                    *o /= x;
                }
                send(*a, out);
            }
            Op::Sum(a) => {
                let [r, c] = self.v(*a).shape();
                send(*a, Tensor::filled(r, c, g.data()[0]));
            }
            Op::Transpose(a) => send(*a, kernels::transpose(g)),
            Op::Concat(parts) => {
                let mut start = 0;
                for p in parts {
                    let w = self.v(*p).cols();
                    send(*p, kernels::slice_cols(g, start, w).expect("in range"));
                    start += w;
                }
            }
            Op::SliceCols(a, start) => {
                let x = self.v(*a);
                let mut out = Tensor::zeros(x.rows(), x.cols());
                for r in 0..x.rows() {
                    out.row_mut(r)[*start..*start + g.cols()].copy_from_slice(g.row(r));
                }
                send(*a, out);
            }
            Op::GatherRows(a, idx) => {
                let x = self.v(*a);
                let mut out = Tensor::zeros(x.rows(), x.cols());
                for (i, &r) in idx.iter().enumerate() {
                    for (o, v) in out.row_mut(r).iter_mut().zip(g.row(i)) {
                        *o += v;
                    }
                }
                send(*a, out);
            }
            Op::OverwriteRows(base, idx, rows) => {
                let mut gb = g.clone();
                let mut gr = Tensor::zeros(idx.len(), g.cols());
                let mut seen = vec![false; g.rows()];
                // a repeated index keeps its last write
                for (i, &r) in idx.iter().enumerate().rev() {
                    if !seen[r] {
                        gr.row_mut(i).copy_from_slice(g.row(r));
                        seen[r] = true;
                    }
                }
                for &r in idx {
                    gb.row_mut(r).fill(0.0);
                }
                send(*base, gb);
                send(*rows, gr);
            }
            Op::MaskedSoftmax(a, mask) => {
                let p = &node.value;
                let dot: f64 = p.data().iter().zip(g.data()).map(|(p, g)| p * g).sum();
                let mut out = Tensor::zeros(p.rows(), p.cols());
                for i in 0..p.len() {
                    if !mask[i] {
                        out.data_mut()[i] = p.data()[i] * (g.data()[i] - dot);
                    }
                }
                send(*a, out);
            }
            Op::MaxPoolRows(a, arg) => {
                let x = self.v(*a);
                let mut out = Tensor::zeros(x.rows(), x.cols());
                for (j, &r) in arg.iter().enumerate() {
                    out.data_mut()[r * x.cols() + j] = g.data()[j];
                }
                send(*a, out);
            }
            Op::BatchNormTrain { x, gamma, beta, saved } => {
                let (gx, gg, gbeta) = batch_norm_train_backward(self.v(*gamma), saved, g);
                send(*x, gx);
                send(*gamma, gg);
                send(*beta, gbeta);
            }
            Op::BatchNormEval { x, gamma, beta, saved } => {
                let gm = self.v(*gamma);
                let (rows, cols) = (g.rows(), g.cols());
                let mut gx = Tensor::zeros(rows, cols);
                let mut gg = Tensor::zeros(1, cols);
                let mut gbeta = Tensor::zeros(1, cols);
                for r in 0..rows {
                    for j in 0..cols {
                        let gi = g.at(r, j);
                        gx.data_mut()[r * cols + j] = gi * gm.data()[j] * saved.inv_std[j];
                        gg.data_mut()[j] += gi * saved.normalized.at(r, j);
                        gbeta.data_mut()[j] += gi;
                    }
                }
                send(*x, gx);
                send(*gamma, gg);
                send(*beta, gbeta);
            }
            Op::Attention { z, a, slope, saved } => {
                let (dz, da) =
                    kernels::neighborhood_attention_backward(self.v(*z), self.v(*a), saved, *slope, g);
                send(*z, dz);
                send(*a, da);
            }
        }
    }
}

fn batch_norm_train_backward(gamma: &Tensor, saved: &BatchNormSaved, g: &Tensor) -> (Tensor, Tensor, Tensor) {
    let (rows, cols) = (g.rows(), g.cols());
    let n = rows as f64;
    let xhat = &saved.normalized;
    let mut gg = Tensor::zeros(1, cols);
    let mut gbeta = Tensor::zeros(1, cols);
    let mut sum_dxhat = vec![0.0; cols];
    let mut sum_dxhat_xhat = vec![0.0; cols];
    for r in 0..rows {
        for j in 0..cols {
            let gi = g.at(r, j);
            let dxhat = gi * gamma.data()[j];
            gg.data_mut()[j] += gi * xhat.at(r, j);
            gbeta.data_mut()[j] += gi;
            sum_dxhat[j] += dxhat;
            sum_dxhat_xhat[j] += dxhat * xhat.at(r, j);
        }
    }
    let mut gx = Tensor::zeros(rows, cols);
    for r in 0..rows {
        for j in 0..cols {
            let dxhat = g.at(r, j) * gamma.data()[j];
            gx.data_mut()[r * cols + j] = saved.inv_std[j] / n
                * (n * dxhat - sum_dxhat[j] - xhat.at(r, j) * sum_dxhat_xhat[j]);
        }
    }
    (gx, gg, gbeta)
}

impl Backend for Tape {
    type Var = VarId;

    fn constant(&mut self, t: Tensor) -> VarId {
        self.push(t, Op::Constant)
    }

    fn param(&mut self, t: &Arc<Tensor>) -> VarId {
        self.leaf((**t).clone())
    }

    fn value<'a>(&'a self, v: &'a VarId) -> &'a Tensor {
        self.v(*v)
    }

    fn matmul(&mut self, a: &VarId, b: &VarId) -> Result<VarId> {
        let out = kernels::matmul(self.v(*a), self.v(*b))?;
        Ok(self.push(out, Op::MatMul(*a, *b)))
    }

    fn add(&mut self, a: &VarId, b: &VarId) -> Result<VarId> {
        let out = kernels::add(self.v(*a), self.v(*b))?;
        Ok(self.push(out, Op::Add(*a, *b)))
    }

    fn sub(&mut self, a: &VarId, b: &VarId) -> Result<VarId> {
        let out = kernels::sub(self.v(*a), self.v(*b))?;
        Ok(self.push(out, Op::Sub(*a, *b)))
    }

    fn mul(&mut self, a: &VarId, b: &VarId) -> Result<VarId> {
        let out = kernels::mul(self.v(*a), self.v(*b))?;
        Ok(self.push(out, Op::Mul(*a, *b)))
    }

    fn maximum(&mut self, a: &VarId, b: &VarId) -> Result<VarId> {
        let out = kernels::maximum(self.v(*a), self.v(*b))?;
        Ok(self.push(out, Op::Maximum(*a, *b)))
    }

    fn scale(&mut self, a: &VarId, s: f64) -> VarId {
        let out = kernels::scale(self.v(*a), s);
        self.push(out, Op::Scale(*a, s))
    }

    fn leaky_relu(&mut self, a: &VarId, slope: f64) -> VarId {
        let out = kernels::leaky_relu(self.v(*a), slope);
        self.push(out, Op::LeakyRelu(*a, slope))
    }

    fn tanh(&mut self, a: &VarId) -> VarId {
        let out = kernels::tanh(self.v(*a));
        self.push(out, Op::Tanh(*a))
    }

    fn ln(&mut self, a: &VarId) -> Result<VarId> {
        let out = kernels::ln(self.v(*a))?;
        Ok(self.push(out, Op::Ln(*a)))
    }

    fn sum(&mut self, a: &VarId) -> VarId {
        let out = kernels::sum(self.v(*a));
        self.push(out, Op::Sum(*a))
    }

    fn transpose(&mut self, a: &VarId) -> VarId {
        let out = kernels::transpose(self.v(*a));
        self.push(out, Op::Transpose(*a))
    }

    fn concat(&mut self, parts: &[VarId]) -> Result<VarId> {
        let refs: Vec<&Tensor> = parts.iter().map(|p| self.v(*p)).collect();
        let out = kernels::concat(&refs)?;
        Ok(self.push(out, Op::Concat(parts.to_vec())))
    }

    fn slice_cols(&mut self, a: &VarId, start: usize, len: usize) -> Result<VarId> {
        let out = kernels::slice_cols(self.v(*a), start, len)?;
        Ok(self.push(out, Op::SliceCols(*a, start)))
    }

    fn gather_rows(&mut self, a: &VarId, idx: &[usize]) -> Result<VarId> {
        let out = kernels::gather_rows(self.v(*a), idx)?;
        Ok(self.push(out, Op::GatherRows(*a, idx.to_vec())))
    }

    fn overwrite_rows(&mut self, base: &VarId, idx: &[usize], rows: &VarId) -> Result<VarId> {
        let out = kernels::overwrite_rows(self.v(*base), idx, self.v(*rows))?;
        Ok(self.push(out, Op::OverwriteRows(*base, idx.to_vec(), *rows)))
    }

    fn masked_softmax(&mut self, a: &VarId, mask: &[bool]) -> Result<VarId> {
        let out = kernels::masked_softmax(self.v(*a), mask)?;
        Ok(self.push(out, Op::MaskedSoftmax(*a, mask.to_vec())))
    }

    fn max_pool_rows(&mut self, a: &VarId) -> Result<VarId> {
        let (out, arg) = kernels::max_pool_rows(self.v(*a))?;
        Ok(self.push(out, Op::MaxPoolRows(*a, arg)))
    }

    fn batch_norm_train(
        &mut self,
        x: &VarId,
        gamma: &VarId,
        beta: &VarId,
        eps: f64,
    ) -> Result<(VarId, Vec<f64>, Vec<f64>)> {
        let (out, saved, mean, var) = kernels::batch_norm_train(self.v(*x), self.v(*gamma), self.v(*beta), eps)?;
        let id = self.push(
            out,
            Op::BatchNormTrain {
                x: *x,
                gamma: *gamma,
                beta: *beta,
                saved,
            },
        );
        Ok((id, mean, var))
    }

    fn batch_norm_eval(
        &mut self,
        x: &VarId,
        gamma: &VarId,
        beta: &VarId,
        mean: &[f64],
        var: &[f64],
        eps: f64,
    ) -> Result<VarId> {
        let (out, saved) = kernels::batch_norm_eval(self.v(*x), self.v(*gamma), self.v(*beta), mean, var, eps)?;
        Ok(self.push(
            out,
            Op::BatchNormEval {
                x: *x,
                gamma: *gamma,
                beta: *beta,
                saved,
            },
        ))
    }

    fn neighborhood_attention(&mut self, z: &VarId, a: &VarId, neighbors: &[Vec<usize>], slope: f64) -> Result<VarId> {
        let (out, saved) = kernels::neighborhood_attention(self.v(*z), self.v(*a), neighbors, slope)?;
        Ok(self.push(
            out,
            Op::Attention {
                z: *z,
                a: *a,
                slope,
                saved,
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_gives_ones() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::row_vector(vec![1.0, -2.0, 3.0]));
        let s = t.sum(&p);
        let g = t.backward(s).unwrap();
        assert_eq!(g.wrt(p).data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn linear_gradient_is_coefficients() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::column_vector(vec![0.5, 0.25]));
        let c = t.constant(Tensor::row_vector(vec![3.0, -4.0]));
        let y = t.matmul(&c, &p).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(p).data(), &[3.0, -4.0]);
    }

    #[test]
    fn unreachable_params_get_zero() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::scalar(2.0));
        let q = t.leaf(Tensor::row_vector(vec![1.0, 1.0]));
        let y = t.tanh(&p);
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(q).data(), &[0.0, 0.0]);
        assert_eq!(g.wrt(p).data()[0], 1.0 - 2.0f64.tanh().powi(2));
    }

    #[test]
    fn tanh_at_zero() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::scalar(0.0));
        let y = t.tanh(&p);
        assert_eq!(t.value(&y).data(), &[0.0]);
        assert_eq!(t.backward(y).unwrap().wrt(p).data(), &[1.0]);
    }

    #[test]
    fn non_scalar_loss_rejected() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::row_vector(vec![1.0, 2.0]));
        assert!(matches!(t.backward(p), Err(TensorError::Usage(_))));
    }

    #[test]
    fn max_pool_routes_to_argmax() {
        let mut t = Tape::new();
        let p = t.leaf(Tensor::new(3, 2, vec![1.0, 9.0, 4.0, 2.0, 0.0, 3.0]).unwrap());
        let m = t.max_pool_rows(&p).unwrap();
        let w = t.constant(Tensor::column_vector(vec![2.0, 5.0]));
        let y = t.matmul(&m, &w).unwrap();
        let g = t.backward(y).unwrap();
        assert_eq!(g.wrt(p).data(), &[0.0, 5.0, 2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn concat_backward_splits_exactly() {
        let mut t = Tape::new();
        let a = t.leaf(Tensor::new(2, 1, vec![0.3, 0.7]).unwrap());
        let b = t.leaf(Tensor::new(2, 2, vec![1.1, -0.2, 0.9, 0.4]).unwrap());
        let c = t.concat(&[a, b]).unwrap();
        let w = t.constant(Tensor::new(2, 3, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap());
        let m = t.mul(&c, &w).unwrap();
        let s = t.sum(&m);
        let g = t.backward(s).unwrap();
        let joined = kernels::concat(&[&g.wrt(a), &g.wrt(b)]).unwrap();
        assert_eq!(joined, g.wrt(c));
    }
}
