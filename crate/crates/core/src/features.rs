//! Sinusoidal node-degree features.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Frequency base of the sinusoidal encoding.
pub const FREQUENCY_BASE: f64 = 10_000.0;
pub const DEFAULT_FEATURE_DIM: usize = 32;

/// Row-major `n x d_in` matrix of node input features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn row(&self, v: usize) -> &[f64] {
        &self.values[v * self.cols..(v + 1) * self.cols]
    }
}

/// Row `v` interleaves `sin(deg'/w_i)` and `cos(deg'/w_i)` for
/// `w_i = 10000^(2i/d_in)`, where `deg'` is the degree of `v`, optionally
/// minus the mean degree of the graph.
pub fn degree_features(g: &Graph, d_in: usize, subtract_mean: bool) -> Result<FeatureMatrix> {
    if d_in < 2 || d_in % 2 != 0 {
        return Err(Error::Parameter(format!(
            "feature dimension must be even and >= 2, got {d_in}"
        )));
    }
    let shift = if subtract_mean { g.mean_degree() } else { 0.0 };
    let inv_freq: Vec<f64> = (0..d_in / 2)
        .map(|i| FREQUENCY_BASE.powf(-(2.0 * i as f64) / d_in as f64))
        .collect();
    let n = g.node_count();
    let mut values = Vec::with_capacity(n * d_in);
    for v in 0..n {
        let x = g.degree(v) as f64 - shift;
        for &f in &inv_freq {
            let (s, c) = (x * f).sin_cos();
            values.push(s);
            values.push(c);
        }
    }
    Ok(FeatureMatrix {
        rows: n,
        cols: d_in,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isolated_node_alternates_zero_one() {
        let f = degree_features(&Graph::empty(1), 8, false).unwrap();
        assert_eq!(f.row(0), &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn equal_degrees_give_equal_rows() {
        let g = Graph::star(4);
        for centred in [false, true] {
            let f = degree_features(&g, 16, centred).unwrap();
            for v in 2..5 {
                assert_eq!(f.row(1), f.row(v));
            }
            assert!(f.values.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn odd_dimension_is_rejected() {
        assert!(degree_features(&Graph::path(3), 7, false).is_err());
        assert!(degree_features(&Graph::path(3), 0, false).is_err());
    }
}
