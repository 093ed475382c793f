//! Embedded deformation: per-node rigid transforms blended over bound vertices.
//!
//! A vertex `v` bound to nodes `g_i` with weights `w_i` moves to
//!
//! ```text
//! v' = Σ_i w_i (R_i (v − g_i) + g_i + t_i)
//! ```
//!
//! Rotations use the 6D parameterization, so every node carries nine numbers
//! `(r0..r5, tx, ty, tz)`.

use std::fmt::Write as _;

use nalgebra::{Matrix3, SMatrix, Vector3};
use rayon::prelude::*;

use crate::binding::BindingTable;
use crate::error::{Error, Result};
use crate::rotation::{rot6d_to_matrix, rot6d_with_jacobian, rotate_jacobian, RowJacobian, IDENTITY_6D};
use crate::Point3;

/// Parameters per node.
pub const PARAMS_PER_NODE: usize = 9;

/// Local transform of one node: 6D rotation and translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeTransform {
    pub rot6: [f64; 6],
    pub translation: Vector3<f64>,
}

impl NodeTransform {
    pub const IDENTITY: Self = Self {
        rot6: IDENTITY_6D,
        translation: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn to_array(&self) -> [f64; PARAMS_PER_NODE] {
        let r = &self.rot6;
        let t = &self.translation;
        [r[0], r[1], r[2], r[3], r[4], r[5], t.x, t.y, t.z]
    }

    pub fn from_slice(p: &[f64]) -> Self {
        Self {
            rot6: [p[0], p[1], p[2], p[3], p[4], p[5]],
            translation: Vector3::new(p[6], p[7], p[8]),
        }
    }
}

impl Default for NodeTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

/// Deformation graph: node positions, node edges and per-node transforms.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformGraph {
    pub nodes: Vec<Point3>,
    pub edges: Vec<[usize; 2]>,
    pub params: Vec<NodeTransform>,
}

impl DeformGraph {
    /// Graph with identity transforms. Edges are normalized to unique `[lo, hi]` pairs.
    pub fn new(nodes: Vec<Point3>, edges: &[[usize; 2]]) -> Result<Self> {
        let k = nodes.len();
        let mut norm: Vec<[usize; 2]> = Vec::with_capacity(edges.len());
        for &[a, b] in edges {
            if a >= k || b >= k || a == b {
                return Err(Error::Argument(format!("invalid graph edge ({a}, {b}) for {k} nodes")));
            }
            norm.push([a.min(b), a.max(b)]);
        }
        norm.sort_unstable();
        norm.dedup();
        Ok(Self {
            params: vec![NodeTransform::IDENTITY; k],
            nodes,
            edges: norm,
        })
    }

    pub fn from_hierarchy(h: &crate::hierarchy::MeshHierarchy) -> Self {
        let c = h.coarsest();
        Self::new(c.positions.clone(), &c.edges).expect("coarsened edges are valid")
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// All parameters, node-major.
    pub fn flat_params(&self) -> Vec<f64> {
        self.params.iter().flat_map(NodeTransform::to_array).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != PARAMS_PER_NODE * self.nodes.len() {
            return Err(Error::Argument(format!(
                "expected {} parameters, got {}",
                PARAMS_PER_NODE * self.nodes.len(),
                flat.len()
            )));
        }
        for (p, chunk) in self.params.iter_mut().zip(flat.chunks_exact(PARAMS_PER_NODE)) {
            *p = NodeTransform::from_slice(chunk);
        }
        Ok(())
    }

    pub fn rotations(&self) -> Result<Vec<Matrix3<f64>>> {
        self.params.iter().map(|p| rot6d_to_matrix(&p.rot6)).collect()
    }

    /// Sets every node to the same rigid motion `x ↦ R x + t`.
    pub fn set_global_rigid(&mut self, rotation: &Matrix3<f64>, translation: &Vector3<f64>) {
        let rot6 = crate::rotation::matrix_to_rot6d(rotation);
        for (p, g) in self.params.iter_mut().zip(&self.nodes) {
            *p = NodeTransform {
                rot6,
                translation: rotation * g + translation - g,
            };
        }
    }
}

fn check_binding(points: usize, graph: &DeformGraph, binding: &BindingTable) -> Result<()> {
    if binding.len() != points {
        return Err(Error::Argument(format!(
            "binding covers {} points but {} given",
            binding.len(),
            points
        )));
    }
    binding.validate(graph.node_count())
}

/// Deforms `points` through `graph`.
///
/// Evaluated as `v + Σ w_i ((R_i − I)(v − g_i) + t_i)`, which equals the
/// blended form whenever the weights sum to one and returns `v` bit-exactly
/// for identity transforms.
pub fn apply_ed(points: &[Point3], graph: &DeformGraph, binding: &BindingTable) -> Result<Vec<Point3>> {
    check_binding(points.len(), graph, binding)?;
    let rots = graph.rotations()?;
    let eye = Matrix3::identity();
    let deltas: Vec<Matrix3<f64>> = rots.iter().map(|r| r - eye).collect();
    Ok(points
        .par_iter()
        .zip(binding.controls.par_iter().zip(binding.weights.par_iter()))
        .map(|(v, (ctrl, w))| {
            let mut disp = Vector3::zeros();
            for (&i, &wi) in ctrl.iter().zip(w) {
                disp += (deltas[i] * (v - graph.nodes[i]) + graph.params[i].translation) * wi;
            }
            v + disp
        })
        .collect())
}

/// Block of the Jacobian of one deformed point with respect to one node's
/// nine parameters.
pub type JacobianBlock = SMatrix<f64, 3, PARAMS_PER_NODE>;

/// Sparse Jacobian of deformed points with respect to all node parameters.
/// Row `j` holds `(node, ∂v'_j/∂p_node)` for each control of point `j`.
#[derive(Debug, Clone)]
pub struct EdJacobian {
    pub rows: Vec<Vec<(usize, JacobianBlock)>>,
    node_count: usize,
}

impl EdJacobian {
    /// `Jᵀ g` for per-point gradients `g`, giving a gradient over all parameters.
    pub fn transpose_mul(&self, grad_points: &[Vector3<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; PARAMS_PER_NODE * self.node_count];
        for (row, g) in self.rows.iter().zip(grad_points) {
            for (node, block) in row {
                let contrib = block.transpose() * g;
                let base = node * PARAMS_PER_NODE;
                for (o, c) in out[base..base + PARAMS_PER_NODE].iter_mut().zip(contrib.iter()) {
                    *o += c;
                }
            }
        }
        out
    }

    /// Dense `3N × 9K` copy, for tests and small problems.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(3 * self.rows.len(), PARAMS_PER_NODE * self.node_count);
        for (j, row) in self.rows.iter().enumerate() {
            for (node, block) in row {
                for r in 0..3 {
                    for c in 0..PARAMS_PER_NODE {
                        m[(3 * j + r, node * PARAMS_PER_NODE + c)] += block[(r, c)];
                    }
                }
            }
        }
        m
    }
}

/// Analytic Jacobian of [`apply_ed`] through the 6D rotation map.
pub fn ed_jacobian(points: &[Point3], graph: &DeformGraph, binding: &BindingTable) -> Result<EdJacobian> {
    check_binding(points.len(), graph, binding)?;
    let row_jacs: Vec<[RowJacobian; 3]> = graph
        .params
        .iter()
        .map(|p| rot6d_with_jacobian(&p.rot6).map(|(_, j)| j))
        .collect::<Result<_>>()?;
    let rows = points
        .par_iter()
        .zip(binding.controls.par_iter().zip(binding.weights.par_iter()))
        .map(|(v, (ctrl, w))| {
            ctrl.iter()
                .zip(w)
                .map(|(&i, &wi)| {
                    let u = v - graph.nodes[i];
                    let mut block = JacobianBlock::zeros();
                    block
                        .fixed_view_mut::<3, 6>(0, 0)
                        .copy_from(&(rotate_jacobian(&row_jacs[i], &u) * wi));
                    block
                        .fixed_view_mut::<3, 3>(0, 6)
                        .copy_from(&(Matrix3::identity() * wi));
                    (i, block)
                })
                .collect()
        })
        .collect();
    Ok(EdJacobian {
        rows,
        node_count: graph.node_count(),
    })
}

/// `∂v'/∂v = Σ w_i R_i` for each point, holding the binding fixed.
pub fn ed_point_jacobians(graph: &DeformGraph, binding: &BindingTable) -> Result<Vec<Matrix3<f64>>> {
    binding.validate(graph.node_count())?;
    let rots = graph.rotations()?;
    Ok(binding
        .controls
        .iter()
        .zip(&binding.weights)
        .map(|(ctrl, w)| {
            ctrl.iter()
                .zip(w)
                .fold(Matrix3::zeros(), |acc, (&i, &wi)| acc + rots[i] * wi)
        })
        .collect())
}

/// Writes one line per node: index followed by nine parameters.
pub fn write_transforms(params: &[NodeTransform]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes {}", params.len());
    let _ = writeln!(out, "# node r0 r1 r2 r3 r4 r5 tx ty tz");
    for (i, p) in params.iter().enumerate() {
        let _ = write!(out, "{i}");
        for x in p.to_array() {
            let _ = write!(out, " {x:?}");
        }
        out.push('\n');
    }
    out
}

/// Parses the format produced by [`write_transforms`]. Records must appear in
/// node order starting at 0.
pub fn parse_transforms(text: &str) -> Result<Vec<NodeTransform>> {
    let mut out = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse { line: ln + 1, message };
        let mut tokens = line.split_whitespace();
        let idx: usize = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing node index".into()))?;
        if idx != out.len() {
            return Err(bad(format!("expected node {}, found {idx}", out.len())));
        }
        let vals: Vec<f64> = tokens
            .map(|t| t.parse::<f64>().map_err(|_| bad(format!("malformed number {t:?}"))))
            .collect::<Result<_>>()?;
        if vals.len() != PARAMS_PER_NODE {
            return Err(bad(format!("expected 9 numbers, found {}", vals.len())));
        }
        out.push(NodeTransform::from_slice(&vals));
    }
    Ok(out)
}
