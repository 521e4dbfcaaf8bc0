use crate::error::Result;
use nodelab_autodiff::Tensor;
use nodelab_core::{degree_features, Graph};

/// A graph with its input features.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub graph: Graph,
    pub features: Tensor,
}

impl Instance {
    pub fn new(graph: Graph, d_in: usize, subtract_mean: bool) -> Result<Self> {
        let f = degree_features(&graph, d_in, subtract_mean)?;
        let features = Tensor::new(f.rows, f.cols, f.values)?;
        Ok(Instance { graph, features })
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Disjoint union of `items`: stacked features, shifted adjacency and
    /// the first row of each part.
    pub fn union(items: &[&Instance]) -> Result<(Tensor, Vec<Vec<usize>>, Vec<usize>)> {
        let graphs: Vec<&Graph> = items.iter().map(|i| &i.graph).collect();
        let joint = Graph::disjoint_union(&graphs);
        let cols = items.first().map_or(0, |i| i.features.cols());
        let mut data = Vec::new();
        let mut offsets = Vec::with_capacity(items.len());
        let mut offset = 0;
        for item in items {
            offsets.push(offset);
            offset += item.node_count();
            data.extend_from_slice(item.features.data());
        }
        let features = Tensor::new(offset, cols, data)?;
        Ok((features, joint.adjacency().to_vec(), offsets))
    }
}
