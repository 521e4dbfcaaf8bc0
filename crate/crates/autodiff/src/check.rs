use crate::error::{Result, TensorError};
use crate::tape::{Tape, VarId};
use crate::tensor::Tensor;

/// Differences below this are rounding noise of the central difference, so
/// gradients that are exactly zero do not register as relative errors.
pub const ABSOLUTE_AGREEMENT: f64 = 1e-9;

/// Multiple of the central difference's rounding error `eps * |f| / step`
/// that still counts as agreement.
const NOISE_FACTOR: f64 = 100.0;

/// Maximum relative error between tape gradients and central differences.
///
/// `f` builds a scalar on a fresh tape from leaves holding `params`. When the
/// parameters hold more than `max_coords` values, an evenly strided subset of
/// coordinates (at least `max_coords`) is checked.
pub fn gradient_check<F>(params: &[Tensor], step: f64, max_coords: usize, f: F) -> Result<f64>
where
    F: Fn(&mut Tape, &[VarId]) -> Result<VarId>,
{
    let run = |values: &[Tensor]| -> Result<(Tape, Vec<VarId>, VarId)> {
        let mut tape = Tape::new();
        let ids: Vec<VarId> = values.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = f(&mut tape, &ids)?;
        Ok((tape, ids, out))
    };
    let (tape, ids, out) = run(params)?;
    let grads = tape.backward(out)?;
    let analytic: Vec<Tensor> = ids.iter().map(|&i| grads.wrt(i)).collect();
    let f0 = scalar_of(&(tape, ids, out))?;
    let floor = ABSOLUTE_AGREEMENT.max(NOISE_FACTOR * f64::EPSILON * f0.abs().max(1.0) / step);

    let total: usize = params.iter().map(Tensor::len).sum();
    let stride = if max_coords == 0 || total <= max_coords {
        1
    } else {
        total / max_coords
    };
    let mut worst: f64 = 0.0;
    let mut values = params.to_vec();
    let mut flat = 0;
    for p in 0..params.len() {
        for i in 0..params[p].len() {
            if flat % stride == 0 {
                let orig = values[p].data()[i];
                values[p].data_mut()[i] = orig + step;
                let plus = scalar_of(&run(&values)?)?;
                values[p].data_mut()[i] = orig - step;
                let minus = scalar_of(&run(&values)?)?;
                values[p].data_mut()[i] = orig;
                let numeric = (plus - minus) / (2.0 * step);
                let a = analytic[p].data()[i];
                if !numeric.is_finite() || !a.is_finite() {
                    return Err(TensorError::Domain {
                        op: "gradient_check",
                        message: format!("non-finite gradient at parameter {p}, coordinate {i}"),
                    });
                }
                let diff = (a - numeric).abs();
                let err = if diff <= floor {
                    0.0
                } else {
                    diff / a.abs().max(numeric.abs()).max(1e-8)
                };
                worst = worst.max(err);
            }
            flat += 1;
        }
    }
    Ok(worst)
}

fn scalar_of((tape, _, out): &(Tape, Vec<VarId>, VarId)) -> Result<f64> {
    use crate::backend::Backend;
    let v = tape.value(out).item()?;
    if !v.is_finite() {
        return Err(TensorError::Domain {
            op: "gradient_check",
            message: "non-finite function value".into(),
        });
    }
    Ok(v)
}
