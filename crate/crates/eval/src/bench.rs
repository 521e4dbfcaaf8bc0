use crate::error::{EvalError, Result};
use nodelab_core::rng::derive_seed;
use nodelab_core::{generate_graph, Family, GeneratorSpec, Problem};
use nodelab_policy::{greedy_rollout_counted, DecodeMode, Instance, ModelParameters};
use serde::{Deserialize, Serialize};
use std::time::Instant;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub mode: DecodeMode,
    /// Nodes of the generated graph, after restriction to its largest
    /// component.
    pub nodes: usize,
    pub edges: usize,
    pub repeats: usize,
    pub mean_seconds: f64,
    pub arithmetic: u64,
    pub comparisons: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSlope {
    pub mode: DecodeMode,
    /// Least-squares slope of log(arithmetic) against log(nodes).
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTable {
    pub problem: Problem,
    pub d: usize,
    pub rows: Vec<BenchRow>,
    pub slopes: Vec<ModeSlope>,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Greedy rollouts on sparse ER graphs of growing size, timed and with the
/// arithmetic of encoder and decoder counted.
pub fn bench_runtime(
    problem: Problem,
    params: &ModelParameters,
    sizes: &[usize],
    modes: &[DecodeMode],
    repeats: usize,
    seed: u64,
) -> Result<BenchTable> {
    if sizes.is_empty() || sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(EvalError::Usage("bench sizes must be strictly ascending".into()));
    }
    if repeats == 0 || modes.is_empty() {
        return Err(EvalError::Usage("bench needs at least one mode and one repeat".into()));
    }
    let graphs = sizes
        .iter()
        .map(|&n| {
            let g = generate_graph(&GeneratorSpec::new(Family::ser(), n, derive_seed(seed, &[n as u64])))?;
            Ok(Instance::new(g, params.hyper.d_in, false)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &mode in modes {
        let mut p = params.clone();
        p.hyper.decode_mode = mode;
        let mut points = Vec::new();
        for inst in &graphs {
            let mut count = None;
            let start = Instant::now();
            for _ in 0..repeats {
                let (_, c) = greedy_rollout_counted(&problem, inst, &p)?;
                count = Some(c);
            }
            let mean_seconds = start.elapsed().as_secs_f64() / repeats as f64;
            let c = count.expect("repeats > 0");
            points.push((inst.node_count() as f64, c.arithmetic as f64));
            rows.push(BenchRow {
                mode,
                nodes: inst.node_count(),
                edges: inst.graph.edge_count(),
                repeats,
                mean_seconds,
                arithmetic: c.arithmetic,
                comparisons: c.comparisons,
            });
        }
        if let Some(slope) = log_log_slope(&points) {
            slopes.push(ModeSlope { mode, slope });
        }
    }
    Ok(BenchTable {
        problem,
        d: params.hyper.d,
        rows,
        slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_laws() {
        let lin: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&x| (x, 3.0 * x)).collect();
        assert!((log_log_slope(&lin).unwrap() - 1.0).abs() < 1e-12);
        let quad: Vec<(f64, f64)> = [10.0, 20.0, 40.0].iter().map(|&x| (x, x * x)).collect();
        assert!((log_log_slope(&quad).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(log_log_slope(&[(1.0, 1.0)]), None);
    }
}
