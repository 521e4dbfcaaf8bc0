//! Randomized gradient checks over every differentiable op.

use crate::backend::Backend;
use crate::check::gradient_check;
use crate::error::Result;
use crate::kernels::{BN_EPSILON, LEAKY_SLOPE};
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-5;

/// Random shapes tried per op and seed.
pub const SHAPES_PER_OP: usize = 10;

fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> Tensor {
    Tensor::new(rows, cols, (0..rows * cols).map(|_| rng.gen_range(lo..hi)).collect()).expect("sized")
}

fn shapes(rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    (0..SHAPES_PER_OP).map(|_| (rng.gen_range(1..6), rng.gen_range(1..6))).collect()
}

/// Projects an output onto fixed random weights so every entry matters.
fn project(t: &mut Tape, y: VarId, w: &Tensor) -> Result<VarId> {
    let c = t.constant(w.clone());
    let m = t.mul(&y, &c)?;
    Ok(t.sum(&m))
}

fn output_shape(inputs: &[Tensor], op: &dyn Fn(&mut Tape, &[VarId]) -> Result<VarId>) -> Result<[usize; 2]> {
    let mut t = Tape::new();
    let ids: Vec<VarId> = inputs.iter().map(|x| t.leaf(x.clone())).collect();
    let y = op(&mut t, &ids)?;
    Ok(t.value(&y).shape())
}

/// Worst error of `op` over random inputs drawn by `draw` for each shape.
fn worst<D>(seed: u64, mut draw: D, op: &dyn Fn(&mut Tape, &[VarId]) -> Result<VarId>) -> Result<f64>
where
    D: FnMut(&mut ChaCha8Rng, usize, usize) -> Vec<Tensor>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (r, c) in shapes(&mut rng) {
        let inputs = draw(&mut rng, r, c);
        let [or, oc] = output_shape(&inputs, op)?;
        let w = random(&mut rng, or, oc, -1.0, 1.0);
        let err = gradient_check(&inputs, STEP, 0, |t, p| {
            let y = op(t, p)?;
            project(t, y, &w)
        })?;
        worst = worst.max(err);
    }
    Ok(worst)
}

fn unary(lo: f64, hi: f64) -> impl FnMut(&mut ChaCha8Rng, usize, usize) -> Vec<Tensor> {
    move |rng, r, c| vec![random(rng, r, c, lo, hi)]
}

fn binary(shape: fn(usize, usize) -> (usize, usize)) -> impl FnMut(&mut ChaCha8Rng, usize, usize) -> Vec<Tensor> {
    move |rng, r, c| {
        let (br, bc) = shape(r, c);
        vec![random(rng, r, c, -1.5, 1.5), random(rng, br, bc, -1.5, 1.5)]
    }
}

fn neighbors(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < 0.4 {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    adj
}

fn attention(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..SHAPES_PER_OP {
        let n = rng.gen_range(1..7);
        let heads = rng.gen_range(1..4);
        let dh = rng.gen_range(1..4);
        let z = random(&mut rng, n, heads * dh, -1.0, 1.0);
        let a = random(&mut rng, heads, 2 * dh, -1.0, 1.0);
        let adj = neighbors(&mut rng, n);
        let w = random(&mut rng, n, heads * dh, -1.0, 1.0);
        let err = gradient_check(&[z, a], STEP, 0, |t, p| {
            let y = t.neighborhood_attention(&p[0], &p[1], &adj, LEAKY_SLOPE)?;
            project(t, y, &w)
        })?;
        worst = worst.max(err);
    }
    Ok(worst)
}

fn batch_norm(seed: u64, train: bool) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for (r, c) in shapes(&mut rng) {
        let r = r + 1;
        let params = [
            random(&mut rng, r, c, -2.0, 2.0),
            random(&mut rng, 1, c, 0.5, 1.5),
            random(&mut rng, 1, c, -0.5, 0.5),
        ];
        let w = random(&mut rng, r, c, -1.0, 1.0);
        let mean: Vec<f64> = (0..c).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let var: Vec<f64> = (0..c).map(|_| rng.gen_range(0.5..2.0)).collect();
        let err = gradient_check(&params, STEP, 0, |t, p| {
            let y = if train {
                t.batch_norm_train(&p[0], &p[1], &p[2], BN_EPSILON)?.0
            } else {
                t.batch_norm_eval(&p[0], &p[1], &p[2], &mean, &var, BN_EPSILON)?
            };
            let y = t.tanh(&y);
            project(t, y, &w)
        })?;
        worst = worst.max(err);
    }
    Ok(worst)
}

/// Worst relative gradient error of every differentiable op over
/// [`SHAPES_PER_OP`] random shapes drawn from `seed`.
pub fn op_gradient_errors(seed: u64) -> Result<Vec<(&'static str, f64)>> {
    type Op = Box<dyn Fn(&mut Tape, &[VarId]) -> Result<VarId>>;
    let u = |f: fn(&mut Tape, VarId) -> Result<VarId>| -> Op { Box::new(move |t, p| f(t, p[0])) };
    let b = |f: fn(&mut Tape, VarId, VarId) -> Result<VarId>| -> Op { Box::new(move |t, p| f(t, p[0], p[1])) };
    let same = |r, c| (r, c);

    let mut out = Vec::new();
    let binaries: [(&'static str, fn(usize, usize) -> (usize, usize), Op); 7] = [
        ("add", same, b(|t, a, b| t.add(&a, &b))),
        ("sub", same, b(|t, a, b| t.sub(&a, &b))),
        ("mul", same, b(|t, a, b| t.mul(&a, &b))),
        ("maximum", same, b(|t, a, b| t.maximum(&a, &b))),
        ("matmul", |_, c| (c, 3), b(|t, a, b| t.matmul(&a, &b))),
        ("concat", |r, _| (r, 2), b(|t, a, b| t.concat(&[a, b, a]))),
        (
            "overwrite_rows",
            |_, c| (1, c),
            b(|t, a, b| {
                let n = t.value(&a).rows();
                t.overwrite_rows(&a, &[n - 1], &b)
            }),
        ),
    ];
    for (name, shape, op) in binaries {
        out.push((name, worst(seed, binary(shape), &*op)?));
    }
    let unaries: [(&'static str, f64, f64, Op); 10] = [
        ("scale", -2.0, 2.0, u(|t, x| Ok(t.scale(&x, -1.7)))),
        ("leaky_relu", -2.0, 2.0, u(|t, x| Ok(t.leaky_relu(&x, LEAKY_SLOPE)))),
        ("tanh", -2.0, 2.0, u(|t, x| Ok(t.tanh(&x)))),
        ("ln", 0.3, 3.0, u(|t, x| t.ln(&x))),
        ("sum", -2.0, 2.0, u(|t, x| Ok(t.sum(&x)))),
        ("transpose", -2.0, 2.0, u(|t, x| Ok(t.transpose(&x)))),
        ("max_pool_rows", -2.0, 2.0, u(|t, x| t.max_pool_rows(&x))),
        (
            "gather_rows",
            -2.0,
            2.0,
            u(|t, x| {
                let n = t.value(&x).rows();
                let idx: Vec<usize> = (0..2 * n).map(|i| (i * 7 + 1) % n).collect();
                t.gather_rows(&x, &idx)
            }),
        ),
        (
            "slice_cols",
            -2.0,
            2.0,
            u(|t, x| {
                let c = t.value(&x).cols();
                t.slice_cols(&x, c / 2, c - c / 2)
            }),
        ),
        (
            "masked_softmax",
            -2.0,
            2.0,
            u(|t, x| {
                let len = t.value(&x).len();
                let mask: Vec<bool> = (0..len).map(|i| len > 1 && i % 3 == 1).collect();
                t.masked_softmax(&x, &mask)
            }),
        ),
    ];
    for (name, lo, hi, op) in unaries {
        out.push((name, worst(seed, unary(lo, hi), &*op)?));
    }
    out.push(("batch_norm_train", batch_norm(seed, true)?));
    out.push(("batch_norm_eval", batch_norm(seed, false)?));
    out.push(("neighborhood_attention", attention(seed)?));
    Ok(out)
}
