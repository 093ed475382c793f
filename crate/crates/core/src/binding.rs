//! Vertex-to-node binding: which deformation-graph nodes move each vertex,
//! and with what weight.

use crate::error::{Error, Result};
use crate::hierarchy::MeshHierarchy;
use crate::spatial::KdTree;
use crate::Point3;

/// Farthest control distance is inflated by this factor before weighting,
/// so the farthest node keeps a small positive weight.
pub const RADIUS_INFLATION: f64 = 1.05;

/// Per-vertex control nodes and normalized weights, aligned index for index.
#[derive(Debug, Clone, PartialEq)]
pub struct BindingTable {
    pub controls: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
}

impl BindingTable {
    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    /// Checks the table against a graph with `node_count` nodes.
    pub fn validate(&self, node_count: usize) -> Result<()> {
        if self.controls.len() != self.weights.len() {
            return Err(Error::Argument("controls and weights differ in length".into()));
        }
        for (v, (c, w)) in self.controls.iter().zip(&self.weights).enumerate() {
            if c.is_empty() || c.len() != w.len() {
                return Err(Error::Argument(format!("vertex {v} has a malformed control set")));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= node_count) {
                return Err(Error::Argument(format!(
                    "vertex {v} references node {bad} of {node_count}"
                )));
            }
            let sum: f64 = w.iter().sum();
            if w.iter().any(|&x| !(x >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Argument(format!("vertex {v} weights are not a partition of unity")));
            }
        }
        Ok(())
    }

    /// Rows of this table selected by `rows`, e.g. to bind arbitrary points
    /// through their nearest mesh vertex.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            controls: rows.iter().map(|&r| self.controls[r].clone()).collect(),
            weights: rows.iter().map(|&r| self.weights[r].clone()).collect(),
        }
    }
}

/// `(1 − d_i/d_max)²` normalized to sum to one, with `d_max = 1.05 · max d_i`.
/// Falls back to uniform weights when every distance is zero.
pub fn compute_weights(vertex: &Point3, control_positions: &[Point3]) -> Vec<f64> {
    let dists: Vec<f64> = control_positions.iter().map(|g| (vertex - g).norm()).collect();
    let far = dists.iter().copied().fold(0.0, f64::max);
    let n = dists.len() as f64;
    if far == 0.0 {
        return vec![1.0 / n; dists.len()];
    }
    let d_max = RADIUS_INFLATION * far;
    let raw: Vec<f64> = dists.iter().map(|d| (1.0 - d / d_max).powi(2)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|r| r / total).collect()
}

/// Trace-and-propagate binding.
///
/// A vertex traced into coarsest node `g_i` is controlled by `g_i` followed by
/// `g_i`'s neighbors in `graph_edges` (ascending). No spatial search is done.
pub fn bind_trace_propagate(hierarchy: &MeshHierarchy, graph_edges: &[[usize; 2]]) -> BindingTable {
    let nodes = &hierarchy.coarsest().positions;
    let mut neighbors = vec![Vec::new(); nodes.len()];
    for &[a, b] in graph_edges {
        if a != b {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    let fine = &hierarchy.finest().positions;
    let owner = hierarchy.composed_assignment();
    let mut controls = Vec::with_capacity(fine.len());
    let mut weights = Vec::with_capacity(fine.len());
    for (v, &g) in fine.iter().zip(&owner) {
        let mut set = Vec::with_capacity(1 + neighbors[g].len());
        set.push(g);
        set.extend_from_slice(&neighbors[g]);
        let pos: Vec<Point3> = set.iter().map(|&i| nodes[i]).collect();
        weights.push(compute_weights(v, &pos));
        controls.push(set);
    }
    BindingTable { controls, weights }
}

/// Euclidean k-nearest-node binding; ties go to the lower node index.
pub fn bind_knn(vertices: &[Point3], graph_nodes: &[Point3], k: usize) -> Result<BindingTable> {
    if k == 0 || k > graph_nodes.len() {
        return Err(Error::Argument(format!(
            "k = {k} must lie in 1..={}",
            graph_nodes.len()
        )));
    }
    let tree = KdTree::new(graph_nodes);
    let mut controls = Vec::with_capacity(vertices.len());
    let mut weights = Vec::with_capacity(vertices.len());
    for v in vertices {
        let set: Vec<usize> = tree.k_nearest(v, k).into_iter().map(|(i, _)| i).collect();
        let pos: Vec<Point3> = set.iter().map(|&i| graph_nodes[i]).collect();
        weights.push(compute_weights(v, &pos));
        controls.push(set);
    }
    Ok(BindingTable { controls, weights })
}
