//! Non-rigid mesh alignment with embedded deformation graphs.
//!
//! The crate covers the whole pipeline: OBJ input and output, quadric
//! simplification, graph coarsening into a node hierarchy, binding vertices to
//! deformation nodes, the deformation kernel itself, alignment losses with
//! analytic gradients, an Adam-driven registration loop, and a small
//! dense-network autoencoder for canonical feature spaces.

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod binding;
pub mod deform;
pub mod eiae;
pub mod error;
pub mod hierarchy;
pub mod losses;
pub mod mesh;
pub mod optim;
pub mod registration;
pub mod rotation;
pub mod shapes;
pub mod simplify;
pub mod spatial;

/// 3D point or vector in double precision.
pub type Point3 = nalgebra::Vector3<f64>;

pub use binding::{bind_knn, bind_trace_propagate, compute_weights, BindingTable};
pub use deform::{apply_ed, ed_jacobian, DeformGraph, NodeTransform};
pub use error::{Error, Result};
pub use hierarchy::{build_hierarchy, MeshHierarchy};
pub use mesh::{parse_obj, write_obj, TriMesh};
pub use rotation::rot6d_to_matrix;
pub use simplify::qem_decimate;
