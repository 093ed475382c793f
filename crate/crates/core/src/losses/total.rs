use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{arap, bounded_mmd, chamfer_with_tree, cycle_loss, edge_loss, laplacian_loss};
use super::{FeatureSet, KernelConfig, LossWeights};
use crate::deform::{DeformGraph, EdJacobian};
use crate::error::Result;
use crate::mesh::TriMesh;
use crate::spatial::KdTree;
use crate::Point3;

/// Everything one evaluation of the combined objective looks at.
pub struct LossInputs<'a> {
    /// Undeformed source mesh; supplies rest lengths and Laplacian coordinates.
    pub source: &'a TriMesh,
    pub deformed: &'a [Point3],
    pub target: &'a [Point3],
    /// Optional prebuilt tree over `target`.
    pub target_tree: Option<&'a KdTree>,
    pub graph: &'a DeformGraph,
    /// Round-trip images of the source vertices, when the cycle term applies.
    pub cycled: Option<&'a [Point3]>,
    /// Target features and synthesized features.
    pub features: Option<(&'a FeatureSet, &'a FeatureSet)>,
    pub kernel: &'a KernelConfig,
}

/// Unweighted value of every term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerms {
    pub cycle: f64,
    pub chamfer: f64,
    pub edge: f64,
    pub laplacian: f64,
    pub arap: f64,
    pub feature: f64,
}

impl LossTerms {
    pub fn weighted_sum(&self, w: &LossWeights) -> f64 {
        let cycle = if w.use_cycle { self.cycle } else { 0.0 };
        (cycle + self.chamfer)
            + (w.lambda_edge * self.edge + w.lambda_lap * self.laplacian + w.lambda_arap * self.arap)
            + w.lambda_f * self.feature
    }
}

/// Weighted objective and its gradients.
#[derive(Debug, Clone)]
pub struct TotalLoss {
    pub total: f64,
    pub terms: LossTerms,
    /// With respect to the deformed positions.
    pub grad_deformed: Vec<Point3>,
    /// With respect to the cycled positions; zero-length when no cycle term.
    pub grad_cycled: Vec<Point3>,
    /// Direct dependence on the graph parameters (the ARAP term).
    pub grad_params: Vec<f64>,
    /// With respect to the synthesized features.
    pub grad_features: Option<DMatrix<f64>>,
    pub skipped_edges: usize,
}

impl TotalLoss {
    /// Full parameter gradient given the Jacobian of the deformed positions.
    pub fn param_gradient(&self, jac: &EdJacobian) -> Vec<f64> {
        let mut g = jac.transpose_mul(&self.grad_deformed);
        for (a, b) in g.iter_mut().zip(&self.grad_params) {
            *a += b;
        }
        g
    }
}

/// `(Cyc·[use_cycle] + Ch) + (λe Edge + λl Lap + λa ARAP) + λf Feat`.
pub fn total_loss(inputs: &LossInputs<'_>, w: &LossWeights) -> Result<TotalLoss> {
    w.validate()?;
    let built;
    let tree = match inputs.target_tree {
        Some(t) => t,
        None => {
            built = KdTree::new(inputs.target);
            &built
        }
    };
    let ch = chamfer_with_tree(inputs.deformed, inputs.target, tree)?;
    let edge = edge_loss(inputs.source, inputs.deformed)?;
    let lap = laplacian_loss(inputs.source, inputs.deformed)?;
    let (arap_value, arap_grad) = arap(inputs.graph)?;

    let mut terms = LossTerms {
        chamfer: ch.value,
        edge: edge.loss.value,
        laplacian: lap.value,
        arap: arap_value,
        ..LossTerms::default()
    };
    let grad_deformed = ch
        .grad
        .iter()
        .zip(&edge.loss.grad)
        .zip(&lap.grad)
        .map(|((c, e), l)| c + e * w.lambda_edge + l * w.lambda_lap)
        .collect();
    let grad_params = arap_grad.iter().map(|g| g * w.lambda_arap).collect();

    let mut grad_cycled = Vec::new();
    if let (true, Some(cycled)) = (w.use_cycle, inputs.cycled) {
        let cyc = cycle_loss(inputs.source.vertices(), cycled)?;
        terms.cycle = cyc.value;
        grad_cycled = cyc.grad;
    }
    let mut grad_features = None;
    if let Some((x, y)) = inputs.features {
        let (v, g) = bounded_mmd(x, y, inputs.kernel, w.beta)?;
        terms.feature = v;
        grad_features = Some(g * w.lambda_f);
    }
    Ok(TotalLoss {
        total: terms.weighted_sum(w),
        terms,
        grad_deformed,
        grad_cycled,
        grad_params,
        grad_features,
        skipped_edges: edge.skipped,
    })
}
