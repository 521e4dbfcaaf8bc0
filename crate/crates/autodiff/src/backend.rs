use crate::error::Result;
use crate::kernels;
use crate::tensor::Tensor;
use std::sync::Arc;

/// Operations a model is written against. [`crate::Tape`] records them for
/// differentiation; [`Eval`] only computes values and counts work.
pub trait Backend {
    type Var: Clone;

    fn constant(&mut self, t: Tensor) -> Self::Var;
    /// A trainable tensor. On a tape its gradient is tracked.
    fn param(&mut self, t: &Arc<Tensor>) -> Self::Var;
    fn value<'a>(&'a self, v: &'a Self::Var) -> &'a Tensor;

    fn matmul(&mut self, a: &Self::Var, b: &Self::Var) -> Result<Self::Var>;
    fn add(&mut self, a: &Self::Var, b: &Self::Var) -> Result<Self::Var>;
    fn sub(&mut self, a: &Self::Var, b: &Self::Var) -> Result<Self::Var>;
    fn mul(&mut self, a: &Self::Var, b: &Self::Var) -> Result<Self::Var>;
    fn maximum(&mut self, a: &Self::Var, b: &Self::Var) -> Result<Self::Var>;
    fn scale(&mut self, a: &Self::Var, s: f64) -> Self::Var;
    fn leaky_relu(&mut self, a: &Self::Var, slope: f64) -> Self::Var;
    fn tanh(&mut self, a: &Self::Var) -> Self::Var;
    fn ln(&mut self, a: &Self::Var) -> Result<Self::Var>;
    fn sum(&mut self, a: &Self::Var) -> Self::Var;
    fn transpose(&mut self, a: &Self::Var) -> Self::Var;
    fn concat(&mut self, parts: &[Self::Var]) -> Result<Self::Var>;
    fn slice_cols(&mut self, a: &Self::Var, start: usize, len: usize) -> Result<Self::Var>;
    fn gather_rows(&mut self, a: &Self::Var, idx: &[usize]) -> Result<Self::Var>;
    fn overwrite_rows(&mut self, base: &Self::Var, idx: &[usize], rows: &Self::Var) -> Result<Self::Var>;
    fn masked_softmax(&mut self, a: &Self::Var, mask: &[bool]) -> Result<Self::Var>;
    fn max_pool_rows(&mut self, a: &Self::Var) -> Result<Self::Var>;
    /// Returns the output with the batch mean and biased variance.
    fn batch_norm_train(
        &mut self,
        x: &Self::Var,
        gamma: &Self::Var,
        beta: &Self::Var,
        eps: f64,
    ) -> Result<(Self::Var, Vec<f64>, Vec<f64>)>;
    fn batch_norm_eval(
        &mut self,
        x: &Self::Var,
        gamma: &Self::Var,
        beta: &Self::Var,
        mean: &[f64],
        var: &[f64],
        eps: f64,
    ) -> Result<Self::Var>;
    fn neighborhood_attention(
        &mut self,
        z: &Self::Var,
        a: &Self::Var,
        neighbors: &[Vec<usize>],
        slope: f64,
    ) -> Result<Self::Var>;

    /// Records comparisons made outside the tensor ops.
    fn count_comparisons(&mut self, _n: u64) {}
}

/// Operation tally of an [`Eval`] run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub arithmetic: u64,
    pub comparisons: u64,
}

/// Forward-only backend with an arithmetic counter.
#[derive(Debug, Default)]
pub struct Eval {
    pub count: OpCount,
}

impl Eval {
    pub fn new() -> Self {
        Eval::default()
    }

    fn arith(&mut self, n: usize) {
        self.count.arithmetic += n as u64;
    }

    fn cmp(&mut self, n: usize) {
        self.count.comparisons += n as u64;
    }
}

type V = Arc<Tensor>;

impl Backend for Eval {
    type Var = V;

    fn constant(&mut self, t: Tensor) -> V {
        Arc::new(t)
    }

    fn param(&mut self, t: &Arc<Tensor>) -> V {
        t.clone()
    }

    fn value<'a>(&'a self, v: &'a V) -> &'a Tensor {
        v
    }

    fn matmul(&mut self, a: &V, b: &V) -> Result<V> {
        let out = kernels::matmul(a, b)?;
        self.arith(2 * a.rows() * a.cols() * b.cols());
        Ok(Arc::new(out))
    }

    fn add(&mut self, a: &V, b: &V) -> Result<V> {
        let out = kernels::add(a, b)?;
        self.arith(out.len());
        Ok(Arc::new(out))
    }

    fn sub(&mut self, a: &V, b: &V) -> Result<V> {
        let out = kernels::sub(a, b)?;
        self.arith(out.len());
        Ok(Arc::new(out))
    }

    fn mul(&mut self, a: &V, b: &V) -> Result<V> {
        let out = kernels::mul(a, b)?;
        self.arith(out.len());
        Ok(Arc::new(out))
    }

    fn maximum(&mut self, a: &V, b: &V) -> Result<V> {
        let out = kernels::maximum(a, b)?;
        self.cmp(out.len());
        Ok(Arc::new(out))
    }

    fn scale(&mut self, a: &V, s: f64) -> V {
        self.arith(a.len());
        Arc::new(kernels::scale(a, s))
    }

    fn leaky_relu(&mut self, a: &V, slope: f64) -> V {
        self.arith(a.len());
        Arc::new(kernels::leaky_relu(a, slope))
    }

    fn tanh(&mut self, a: &V) -> V {
        self.arith(a.len());
        Arc::new(kernels::tanh(a))
    }

    fn ln(&mut self, a: &V) -> Result<V> {
        let out = kernels::ln(a)?;
        self.arith(a.len());
        Ok(Arc::new(out))
    }

    fn sum(&mut self, a: &V) -> V {
        self.arith(a.len());
        Arc::new(kernels::sum(a))
    }

    fn transpose(&mut self, a: &V) -> V {
        Arc::new(kernels::transpose(a))
    }

    fn concat(&mut self, parts: &[V]) -> Result<V> {
        let refs: Vec<&Tensor> = parts.iter().map(|p| &**p).collect();
        Ok(Arc::new(kernels::concat(&refs)?))
    }

    fn slice_cols(&mut self, a: &V, start: usize, len: usize) -> Result<V> {
        Ok(Arc::new(kernels::slice_cols(a, start, len)?))
    }

    fn gather_rows(&mut self, a: &V, idx: &[usize]) -> Result<V> {
        Ok(Arc::new(kernels::gather_rows(a, idx)?))
    }

    fn overwrite_rows(&mut self, base: &V, idx: &[usize], rows: &V) -> Result<V> {
        Ok(Arc::new(kernels::overwrite_rows(base, idx, rows)?))
    }

    fn masked_softmax(&mut self, a: &V, mask: &[bool]) -> Result<V> {
        let out = kernels::masked_softmax(a, mask)?;
        let live = mask.iter().filter(|m| !**m).count();
        self.arith(4 * live);
        self.cmp(live);
        Ok(Arc::new(out))
    }

    fn max_pool_rows(&mut self, a: &V) -> Result<V> {
        let (out, _) = kernels::max_pool_rows(a)?;
        self.cmp(a.len());
        Ok(Arc::new(out))
    }

    fn batch_norm_train(&mut self, x: &V, gamma: &V, beta: &V, eps: f64) -> Result<(V, Vec<f64>, Vec<f64>)> {
        let (out, _, mean, var) = kernels::batch_norm_train(x, gamma, beta, eps)?;
        self.arith(7 * x.len());
        Ok((Arc::new(out), mean, var))
    }

    fn batch_norm_eval(&mut self, x: &V, gamma: &V, beta: &V, mean: &[f64], var: &[f64], eps: f64) -> Result<V> {
        let (out, _) = kernels::batch_norm_eval(x, gamma, beta, mean, var, eps)?;
        self.arith(4 * x.len() + 2 * x.cols());
        Ok(Arc::new(out))
    }

    fn neighborhood_attention(&mut self, z: &V, a: &V, neighbors: &[Vec<usize>], slope: f64) -> Result<V> {
        let (out, saved) = kernels::neighborhood_attention(z, a, neighbors, slope)?;
        let dh = z.cols() / a.rows().max(1);
        // projections, then per (edge, head): logit, exp, normalise, weighted sum
        self.arith(4 * z.len() + saved.alpha.len() * (6 + 2 * dh));
        self.cmp(saved.alpha.len());
        Ok(Arc::new(out))
    }

    fn count_comparisons(&mut self, n: u64) {
        self.count.comparisons += n;
    }
}
