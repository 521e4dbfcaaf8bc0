//! Forward kernels shared by every backend, so values agree bitwise.

use crate::error::{Result, TensorError};
use crate::tensor::Tensor;
use std::cmp::Ordering;

pub const LEAKY_SLOPE: f64 = 0.2;
pub const BN_EPSILON: f64 = 1e-5;

fn same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(TensorError::Shape {
            op,
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(())
}

pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    if a.cols() != b.rows() {
        return Err(TensorError::Shape {
            op: "matmul",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (m, k, n) = (a.rows(), a.cols(), b.cols());
    let mut out = Tensor::zeros(m, n);
    for i in 0..m {
        let ai = a.row(i);
        let oi = out.row_mut(i);
        for (p, &x) in ai.iter().enumerate().take(k) {
            let bp = b.row(p);
            for j in 0..n {
                oi[j] += x * bp[j];
            }
        }
    }
    Ok(out)
}

fn zip_with(op: &'static str, a: &Tensor, b: &Tensor, f: impl Fn(f64, f64) -> f64) -> Result<Tensor> {
    same_shape(op, a, b)?;
    let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
    Tensor::new(a.rows(), a.cols(), data)
}

fn map(a: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::new(a.rows(), a.cols(), a.data().iter().map(|&x| f(x)).collect()).expect("same size")
}

pub fn add(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("add", a, b, |x, y| x + y)
}

pub fn sub(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("sub", a, b, |x, y| x - y)
}

pub fn mul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("mul", a, b, |x, y| x * y)
}

/// Elementwise maximum; ties keep `a`.
pub fn maximum(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    zip_with("maximum", a, b, |x, y| if y > x { y } else { x })
}

pub fn scale(a: &Tensor, s: f64) -> Tensor {
    map(a, |x| x * s)
}

pub fn leaky_relu(a: &Tensor, slope: f64) -> Tensor {
    map(a, |x| if x > 0.0 { x } else { slope * x })
}

pub fn tanh(a: &Tensor) -> Tensor {
    map(a, f64::tanh)
}

pub fn ln(a: &Tensor) -> Result<Tensor> {
    if let Some(x) = a.data().iter().find(|&&x| !(x > 0.0)) {
        return Err(TensorError::Domain {
            op: "ln",
            message: format!("non-positive argument {x}"),
        });
    }
    Ok(map(a, f64::ln))
}

pub fn sum(a: &Tensor) -> Tensor {
    Tensor::scalar(a.data().iter().sum())
}

pub fn transpose(a: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(a.cols(), a.rows());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.data_mut()[j * a.rows() + i] = a.at(i, j);
        }
    }
    out
}

/// Concatenation along columns.
pub fn concat(parts: &[&Tensor]) -> Result<Tensor> {
    let first = parts
        .first()
        .ok_or_else(|| TensorError::Usage("concat of nothing".into()))?;
    let rows = first.rows();
    for p in parts {
        if p.rows() != rows {
            return Err(TensorError::Shape {
                op: "concat",
                left: first.shape(),
                right: p.shape(),
            });
        }
    }
    let cols: usize = parts.iter().map(|p| p.cols()).sum();
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for p in parts {
            data.extend_from_slice(p.row(r));
        }
    }
    Tensor::new(rows, cols, data)
}

pub fn slice_cols(a: &Tensor, start: usize, len: usize) -> Result<Tensor> {
    if start + len > a.cols() {
        return Err(TensorError::Usage(format!(
            "columns {start}..{} out of range for shape {:?}",
            start + len,
            a.shape()
        )));
    }
    let mut data = Vec::with_capacity(a.rows() * len);
    for r in 0..a.rows() {
        data.extend_from_slice(&a.row(r)[start..start + len]);
    }
    Tensor::new(a.rows(), len, data)
}

pub fn gather_rows(a: &Tensor, idx: &[usize]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(idx.len() * a.cols());
    for &i in idx {
        if i >= a.rows() {
            return Err(TensorError::Usage(format!("row {i} out of range for shape {:?}", a.shape())));
        }
        data.extend_from_slice(a.row(i));
    }
    Tensor::new(idx.len(), a.cols(), data)
}

/// Copy of `base` with row `idx[i]` replaced by row `i` of `rows`.
pub fn overwrite_rows(base: &Tensor, idx: &[usize], rows: &Tensor) -> Result<Tensor> {
    if rows.rows() != idx.len() || rows.cols() != base.cols() {
        return Err(TensorError::Shape {
            op: "overwrite_rows",
            left: base.shape(),
            right: rows.shape(),
        });
    }
    let mut out = base.clone();
    for (i, &r) in idx.iter().enumerate() {
        if r >= base.rows() {
            return Err(TensorError::Usage(format!("row {r} out of range for shape {:?}", base.shape())));
        }
        out.row_mut(r).copy_from_slice(rows.row(i));
    }
    Ok(out)
}

/// Softmax over all entries; `mask[i] = true` excludes entry `i`, which gets
/// probability exactly 0.
pub fn masked_softmax(a: &Tensor, mask: &[bool]) -> Result<Tensor> {
    if mask.len() != a.len() {
        return Err(TensorError::Usage(format!(
            "mask of length {} for {} entries",
            mask.len(),
            a.len()
        )));
    }
    let max = a
        .data()
        .iter()
        .zip(mask)
        .filter(|(_, &m)| !m)
        .map(|(&x, _)| x)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(TensorError::Usage("softmax with every entry masked".into()));
    }
    let mut out = Tensor::zeros(a.rows(), a.cols());
    let mut total = 0.0;
    for (i, (&x, &m)) in a.data().iter().zip(mask).enumerate() {
        if !m {
            let e = (x - max).exp();
            out.data_mut()[i] = e;
            total += e;
        }
    }
    for (o, &m) in out.data_mut().iter_mut().zip(mask) {
        if !m {
            *o /= total;
        }
    }
    Ok(out)
}

/// Column-wise maximum over rows; ties pick the lowest row.
pub fn max_pool_rows(a: &Tensor) -> Result<(Tensor, Vec<usize>)> {
    if a.rows() == 0 {
        return Err(TensorError::Usage("max-pool over zero rows".into()));
    }
    let mut best = a.row(0).to_vec();
    let mut arg = vec![0; a.cols()];
    for r in 1..a.rows() {
        for (j, &x) in a.row(r).iter().enumerate() {
            if x > best[j] {
                best[j] = x;
                arg[j] = r;
            }
        }
    }
    Ok((Tensor::row_vector(best), arg))
}

/// Normalized input and inverse standard deviations saved for the backward pass.
#[derive(Debug, Clone)]
pub struct BatchNormSaved {
    pub normalized: Tensor,
    pub inv_std: Vec<f64>,
}

fn affine_check(x: &Tensor, gamma: &Tensor, beta: &Tensor) -> Result<()> {
    for p in [gamma, beta] {
        if p.shape() != [1, x.cols()] {
            return Err(TensorError::Shape {
                op: "batch_norm",
                left: x.shape(),
                right: p.shape(),
            });
        }
    }
    Ok(())
}

fn normalize(x: &Tensor, gamma: &Tensor, beta: &Tensor, mean: &[f64], inv_std: Vec<f64>) -> (Tensor, BatchNormSaved) {
    let mut normalized = Tensor::zeros(x.rows(), x.cols());
    let mut y = Tensor::zeros(x.rows(), x.cols());
    for r in 0..x.rows() {
        for j in 0..x.cols() {
            let h = (x.at(r, j) - mean[j]) * inv_std[j];
            normalized.data_mut()[r * x.cols() + j] = h;
            y.data_mut()[r * x.cols() + j] = gamma.data()[j] * h + beta.data()[j];
        }
    }
    (y, BatchNormSaved { normalized, inv_std })
}

/// Batch statistics of the rows: per-column mean and biased variance.
pub fn column_moments(x: &Tensor) -> (Vec<f64>, Vec<f64>) {
    let n = x.rows() as f64;
    let mut mean = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for (m, v) in mean.iter_mut().zip(x.row(r)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut var = vec![0.0; x.cols()];
    for r in 0..x.rows() {
        for ((s, v), m) in var.iter_mut().zip(x.row(r)).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    for s in &mut var {
        *s /= n;
    }
    (mean, var)
}

/// Train-mode batch norm. Also returns the batch mean and biased variance.
pub fn batch_norm_train(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    eps: f64,
) -> Result<(Tensor, BatchNormSaved, Vec<f64>, Vec<f64>)> {
    affine_check(x, gamma, beta)?;
    if x.rows() == 0 {
        return Err(TensorError::Usage("batch norm over zero rows".into()));
    }
    let (mean, var) = column_moments(x);
    let inv_std = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    let (y, saved) = normalize(x, gamma, beta, &mean, inv_std);
    Ok((y, saved, mean, var))
}

pub fn batch_norm_eval(
    x: &Tensor,
    gamma: &Tensor,
    beta: &Tensor,
    mean: &[f64],
    var: &[f64],
    eps: f64,
) -> Result<(Tensor, BatchNormSaved)> {
    affine_check(x, gamma, beta)?;
    if mean.len() != x.cols() || var.len() != x.cols() {
        return Err(TensorError::Usage("running statistics do not match the channels".into()));
    }
    let inv_std = var.iter().map(|v| 1.0 / (v + eps).sqrt()).collect();
    Ok(normalize(x, gamma, beta, mean, inv_std))
}

/// Per (node, head): neighbourhood order and attention coefficients.
#[derive(Debug, Clone)]
pub struct AttentionSaved {
    pub heads: usize,
    /// `offsets[v*heads + h]..offsets[v*heads + h + 1]` indexes `members`, `alpha`, `pre`.
    pub offsets: Vec<usize>,
    pub members: Vec<usize>,
    pub alpha: Vec<f64>,
    pub pre: Vec<f64>,
}

/// Multi-head additive graph attention over `N(v) ∪ {v}`.
///
/// `z` is `n × d` with head `h` in columns `h*dh..(h+1)*dh`; `a` is
/// `heads × 2dh`, source half first. Each neighbourhood is summed in order
/// of (logit, message) so the result does not depend on node ids.
pub fn neighborhood_attention(
    z: &Tensor,
    a: &Tensor,
    neighbors: &[Vec<usize>],
    slope: f64,
) -> Result<(Tensor, AttentionSaved)> {
    let (n, d) = (z.rows(), z.cols());
    let heads = a.rows();
    if heads == 0 || d % heads != 0 || a.cols() != 2 * (d / heads) {
        return Err(TensorError::Shape {
            op: "neighborhood_attention",
            left: z.shape(),
            right: a.shape(),
        });
    }
    if neighbors.len() != n {
        return Err(TensorError::Usage(format!(
            "{} adjacency lists for {n} rows",
            neighbors.len()
        )));
    }
    let dh = d / heads;
    let mut src = vec![0.0; n * heads];
    let mut dst = vec![0.0; n * heads];
    for v in 0..n {
        let zv = z.row(v);
        for h in 0..heads {
            let ah = a.row(h);
            let mut s = 0.0;
            let mut t = 0.0;
            for k in 0..dh {
                s += zv[h * dh + k] * ah[k];
                t += zv[h * dh + k] * ah[dh + k];
            }
            src[v * heads + h] = s;
            dst[v * heads + h] = t;
        }
    }
    let mut out = Tensor::zeros(n, d);
    let mut saved = AttentionSaved {
        heads,
        offsets: vec![0],
        members: Vec::new(),
        alpha: Vec::new(),
        pre: Vec::new(),
    };
    let mut hood: Vec<(f64, f64, usize)> = Vec::new();
    for v in 0..n {
        for h in 0..heads {
            hood.clear();
            for &u in neighbors[v].iter().chain(std::iter::once(&v)) {
                if u >= n {
                    return Err(TensorError::Usage(format!("neighbour {u} out of range")));
                }
                let pre = src[v * heads + h] + dst[u * heads + h];
                let e = if pre > 0.0 { pre } else { slope * pre };
                hood.push((e, pre, u));
            }
            let block = |u: usize| &z.row(u)[h * dh..(h + 1) * dh];
            hood.sort_by(|x, y| {
                x.0.total_cmp(&y.0).then_with(|| {
                    block(x.2)
                        .iter()
                        .zip(block(y.2))
                        .map(|(p, q)| p.total_cmp(q))
                        .find(|o| *o != Ordering::Equal)
                        .unwrap_or(Ordering::Equal)
                })
            });
            let max = hood.last().expect("self loop").0;
            let start = saved.alpha.len();
            let mut total = 0.0;
            for &(e, pre, u) in &hood {
                let w = (e - max).exp();
                total += w;
                saved.alpha.push(w);
                saved.pre.push(pre);
                saved.members.push(u);
            }
            for w in &mut saved.alpha[start..] {
                *w /= total;
            }
            let ov = &mut out.row_mut(v)[h * dh..(h + 1) * dh];
            for (i, &u) in saved.members[start..].iter().enumerate() {
                let al = saved.alpha[start + i];
                for (o, &x) in ov.iter_mut().zip(&z.row(u)[h * dh..(h + 1) * dh]) {
                    *o += al * x;
                }
            }
            saved.offsets.push(saved.alpha.len());
        }
    }
    Ok((out, saved))
}

/// Gradients of [`neighborhood_attention`] with respect to `z` and `a`.
pub fn neighborhood_attention_backward(
    z: &Tensor,
    a: &Tensor,
    saved: &AttentionSaved,
    slope: f64,
    grad: &Tensor,
) -> (Tensor, Tensor) {
    let (n, d) = (z.rows(), z.cols());
    let heads = saved.heads;
    let dh = d / heads;
    let mut dz = Tensor::zeros(n, d);
    let mut da = Tensor::zeros(a.rows(), a.cols());
    let mut dsrc = vec![0.0; n * heads];
    let mut ddst = vec![0.0; n * heads];
    let mut dalpha = Vec::new();
    for v in 0..n {
        let gv = grad.row(v);
        for h in 0..heads {
            let key = v * heads + h;
            let range = saved.offsets[key]..saved.offsets[key + 1];
            let gblock = &gv[h * dh..(h + 1) * dh];
            dalpha.clear();
            let mut weighted = 0.0;
            for i in range.clone() {
                let u = saved.members[i];
                let zu = &z.row(u)[h * dh..(h + 1) * dh];
                let da_i: f64 = gblock.iter().zip(zu).map(|(g, x)| g * x).sum();
                dalpha.push(da_i);
                weighted += saved.alpha[i] * da_i;
                let al = saved.alpha[i];
                for (o, g) in dz.row_mut(u)[h * dh..(h + 1) * dh].iter_mut().zip(gblock) {
                    *o += al * g;
                }
            }
            for (j, i) in range.enumerate() {
                let de = saved.alpha[i] * (dalpha[j] - weighted);
                let dpre = if saved.pre[i] > 0.0 { de } else { slope * de };
                dsrc[key] += dpre;
                ddst[saved.members[i] * heads + h] += dpre;
            }
        }
    }
    for v in 0..n {
        for h in 0..heads {
            let (s, t) = (dsrc[v * heads + h], ddst[v * heads + h]);
            for k in 0..dh {
                let c = h * dh + k;
                let zv = z.at(v, c);
                dz.data_mut()[v * d + c] += s * a.at(h, k) + t * a.at(h, dh + k);
                da.data_mut()[h * 2 * dh + k] += s * zv;
                da.data_mut()[h * 2 * dh + dh + k] += t * zv;
            }
        }
    }
    (dz, da)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small() {
        let a = Tensor::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert_eq!(matmul(&a, &b).unwrap().data(), &[3.0, 7.0]);
        assert!(matches!(matmul(&b, &b), Err(TensorError::Shape { .. })));
    }

    #[test]
    fn softmax_single_unmasked() {
        let a = Tensor::row_vector(vec![3.0, -1.0, 7.0]);
        let p = masked_softmax(&a, &[true, false, true]).unwrap();
        assert_eq!(p.data(), &[0.0, 1.0, 0.0]);
        assert!(masked_softmax(&a, &[true, true, true]).is_err());
    }

    #[test]
    fn ln_domain() {
        assert!(matches!(ln(&Tensor::scalar(0.0)), Err(TensorError::Domain { .. })));
    }

    #[test]
    fn max_pool_ties_pick_first_row() {
        let a = Tensor::new(3, 2, vec![1.0, 5.0, 1.0, 2.0, 0.0, 5.0]).unwrap();
        let (m, arg) = max_pool_rows(&a).unwrap();
        assert_eq!(m.data(), &[1.0, 5.0]);
        assert_eq!(arg, vec![0, 0]);
    }

    #[test]
    fn attention_on_isolated_node_is_identity() {
        let z = Tensor::new(1, 4, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let a = Tensor::filled(2, 4, 0.3);
        let (out, _) = neighborhood_attention(&z, &a, &[vec![]], LEAKY_SLOPE).unwrap();
        assert_eq!(out, z);
    }
}
