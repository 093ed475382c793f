//! Alignment objectives with analytic gradients.
//!
//! Point losses return their gradient with respect to the deformed positions;
//! compose with [`crate::deform::EdJacobian::transpose_mul`] to reach node
//! parameters.

mod chamfer;
mod mmd;
mod regularizers;
mod total;

pub use chamfer::{chamfer, chamfer_brute_force, chamfer_with_tree, nearest_indices};
pub use mmd::{bounded_mmd, mmd, FeatureSet, KernelConfig};
pub use regularizers::{
    arap, arap_with, cycle_loss, edge_loss, laplacian_loss, EdgeLoss, ResidualNorm,
};
pub use total::{total_loss, LossInputs, LossTerms, TotalLoss};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Point3;

/// Scalar loss with a gradient per point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointLoss {
    pub value: f64,
    pub grad: Vec<Point3>,
}

/// Relative weights of the loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub lambda_edge: f64,
    pub lambda_lap: f64,
    pub lambda_arap: f64,
    pub lambda_f: f64,
    pub beta: f64,
    pub use_cycle: bool,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_edge: 0.005,
            lambda_lap: 0.005,
            lambda_arap: 0.005,
            lambda_f: 0.008,
            beta: 0.01,
            use_cycle: true,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("lambda_edge", self.lambda_edge),
            ("lambda_lap", self.lambda_lap),
            ("lambda_arap", self.lambda_arap),
            ("lambda_f", self.lambda_f),
            ("beta", self.beta),
        ];
        for (name, v) in all {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Argument(format!("{name} must be a finite value >= 0, got {v}")));
            }
        }
        Ok(())
    }
}
