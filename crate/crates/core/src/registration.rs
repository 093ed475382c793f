//! Direct optimization of deformation-graph parameters that align a source
//! mesh with a target.
//!
//! While the cycle term is active a second graph deforms the target back
//! toward the source. Forward-deformed source points are pulled through that
//! backward deformation using the binding row of their nearest target vertex,
//! and the round trip is penalized for leaving its starting point.

use std::time::Instant;

use serde::Serialize;

use crate::binding::{bind_knn, bind_trace_propagate, BindingTable};
use crate::deform::{apply_ed, ed_jacobian, ed_point_jacobians, DeformGraph, PARAMS_PER_NODE};
use crate::error::{Error, Result};
use crate::hierarchy::{build_hierarchy, MeshHierarchy};
use crate::losses::{chamfer, nearest_indices, total_loss, KernelConfig, LossInputs, LossTerms, LossWeights};
use crate::mesh::TriMesh;
use crate::optim::Adam;
use crate::spatial::KdTree;
use crate::Point3;

/// Rule for choosing each vertex's control nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BindingMethod {
    Trace,
    Knn { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegistrationConfig {
    pub weights: LossWeights,
    pub max_iters: usize,
    pub learning_rate: f64,
    /// Iterations at the start during which the cycle term and the backward
    /// graph are optimized.
    pub cycle_iters: usize,
    pub rng_seed: u64,
    /// Stop once the relative decrease of the total loss falls below this.
    pub convergence_tol: f64,
    pub levels: usize,
    pub binding: BindingMethod,
}

impl Default for RegistrationConfig {
    fn default() -> Self {
        Self::with_iters(500)
    }
}

impl RegistrationConfig {
    /// Defaults with `max_iters` iterations, the first 40% of them cyclic.
    pub fn with_iters(max_iters: usize) -> Self {
        Self {
            weights: LossWeights::default(),
            max_iters,
            learning_rate: 1e-3,
            cycle_iters: max_iters * 2 / 5,
            rng_seed: 0,
            convergence_tol: 1e-7,
            levels: 4,
            binding: BindingMethod::Trace,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        if self.max_iters == 0 {
            return Err(Error::Argument("max_iters must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::Argument("learning rate must be positive".into()));
        }
        if self.cycle_iters > self.max_iters {
            return Err(Error::Argument("cycle_iters exceeds max_iters".into()));
        }
        if self.levels == 0 {
            return Err(Error::Argument("at least one hierarchy level is required".into()));
        }
        if let BindingMethod::Knn { k: 0 } = self.binding {
            return Err(Error::Argument("knn binding needs k >= 1".into()));
        }
        Ok(())
    }

    fn cycle_active(&self) -> bool {
        self.weights.use_cycle && self.cycle_iters > 0
    }
}

/// Loss values recorded before the update of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub total: f64,
    #[serde(flatten)]
    pub terms: LossTerms,
    /// Weighted objective of the backward graph; zero outside the cycle phase.
    pub backward: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegistrationReport {
    pub forward_params: Vec<[f64; PARAMS_PER_NODE]>,
    pub backward_params: Option<Vec<[f64; PARAMS_PER_NODE]>>,
    #[serde(skip)]
    pub graph: DeformGraph,
    #[serde(skip)]
    pub deformed: TriMesh,
    pub level_sizes: Vec<usize>,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
    pub iterations: usize,
    pub final_chamfer: f64,
    pub wall_time_secs: f64,
}

impl RegistrationReport {
    /// Equality of everything except the wall time.
    pub fn same_outcome(&self, other: &Self) -> bool {
        self.forward_params == other.forward_params
            && self.backward_params == other.backward_params
            && self.deformed == other.deformed
            && self.level_sizes == other.level_sizes
            && self.trace == other.trace
            && self.converged == other.converged
            && self.iterations == other.iterations
            && self.final_chamfer.to_bits() == other.final_chamfer.to_bits()
    }
}

/// Graph and binding for one mesh.
pub struct Rig {
    pub hierarchy: MeshHierarchy,
    pub graph: DeformGraph,
    pub binding: BindingTable,
}

/// Builds the hierarchy, the coarsest-level graph and the binding of `mesh`.
pub fn rig(mesh: &TriMesh, levels: usize, seed: u64, method: BindingMethod) -> Result<Rig> {
    let hierarchy = build_hierarchy(mesh, levels, seed)?;
    let graph = DeformGraph::from_hierarchy(&hierarchy);
    let binding = match method {
        BindingMethod::Trace => bind_trace_propagate(&hierarchy, &graph.edges),
        BindingMethod::Knn { k } => bind_knn(mesh.vertices(), &graph.nodes, k)?,
    };
    Ok(Rig {
        hierarchy,
        graph,
        binding,
    })
}

fn add_into(acc: &mut [f64], extra: &[f64]) {
    for (a, b) in acc.iter_mut().zip(extra) {
        *a += b;
    }
}

/// Aligns `source` to `target` by Adam on the combined loss.
pub fn register(source: &TriMesh, target: &TriMesh, config: &RegistrationConfig) -> Result<RegistrationReport> {
    config.validate()?;
    let min_vertices = 4 * config.levels;
    if source.vertex_count() < min_vertices {
        return Err(Error::Argument(format!(
            "source has {} vertices; {} levels need at least {min_vertices}",
            source.vertex_count(),
            config.levels
        )));
    }
    if target.vertex_count() == 0 {
        return Err(Error::Argument("target mesh is empty".into()));
    }
    let start = Instant::now();
    let cycle = config.cycle_active();
    let kernel = KernelConfig::default();
    let src_pts = source.vertices();
    let tgt_pts = target.vertices();
    let src_tree = KdTree::new(src_pts);
    let tgt_tree = KdTree::new(tgt_pts);

    let mut fwd = rig(source, config.levels, config.rng_seed, config.binding)?;
    let mut bwd = if cycle {
        Some(rig(target, config.levels, config.rng_seed, config.binding)?)
    } else {
        None
    };
    let n_fwd = PARAMS_PER_NODE * fwd.graph.node_count();
    let n_bwd = bwd.as_ref().map_or(0, |b| PARAMS_PER_NODE * b.graph.node_count());
    let mut params = fwd.graph.flat_params();
    if let Some(b) = &bwd {
        params.extend(b.graph.flat_params());
    }
    let mut opt = Adam::new(params.len(), config.learning_rate);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut prev_total: Option<f64> = None;

    for iter in 0..config.max_iters {
        let in_cycle = cycle && iter < config.cycle_iters;
        fwd.graph.set_flat_params(&params[..n_fwd])?;
        let deformed = apply_ed(src_pts, &fwd.graph, &fwd.binding)?;

        let mut weights = config.weights;
        weights.use_cycle = in_cycle;
        let mut grad = vec![0.0; n_fwd + n_bwd];
        let mut backward_total = 0.0;
        let mut extra_point_grad: Option<Vec<Point3>> = None;
        let mut cycled = None;

        if in_cycle {
            let b = bwd.as_mut().expect("backward rig exists in the cycle phase");
            b.graph.set_flat_params(&params[n_fwd..])?;
            // backward alignment of the target onto the source
            let back_deformed = apply_ed(tgt_pts, &b.graph, &b.binding)?;
            let mut bw = config.weights;
            bw.use_cycle = false;
            let back = total_loss(
                &LossInputs {
                    source: target,
                    deformed: &back_deformed,
                    target: src_pts,
                    target_tree: Some(&src_tree),
                    graph: &b.graph,
                    cycled: None,
                    features: None,
                    kernel: &kernel,
                },
                &bw,
            )?;
            backward_total = back.total;
            let jb = ed_jacobian(tgt_pts, &b.graph, &b.binding)?;
            add_into(&mut grad[n_fwd..], &back.param_gradient(&jb));

            let nearest = nearest_indices(&deformed, &tgt_tree);
            let sel = b.binding.select(&nearest);
            cycled = Some((apply_ed(&deformed, &b.graph, &sel)?, sel));
        }

        let fl = total_loss(
            &LossInputs {
                source,
                deformed: &deformed,
                target: tgt_pts,
                target_tree: Some(&tgt_tree),
                graph: &fwd.graph,
                cycled: cycled.as_ref().map(|(c, _)| c.as_slice()),
                features: None,
                kernel: &kernel,
            },
            &weights,
        )?;
        if let Some((_, sel)) = &cycled {
            let b = bwd.as_ref().expect("backward rig exists in the cycle phase");
            let jc = ed_jacobian(&deformed, &b.graph, sel)?;
            add_into(&mut grad[n_fwd..], &jc.transpose_mul(&fl.grad_cycled));
            let pj = ed_point_jacobians(&b.graph, sel)?;
            extra_point_grad = Some(
                pj.iter()
                    .zip(&fl.grad_cycled)
                    .map(|(m, g)| m.transpose() * g)
                    .collect(),
            );
        }
        let total = fl.total + backward_total;
        if !total.is_finite() {
            return Err(Error::Diverged(iter));
        }
        trace.push(IterationRecord {
            iter,
            total,
            terms: fl.terms,
            backward: backward_total,
        });

        if total == 0.0 {
            converged = true;
            break;
        }
        if !in_cycle {
            if let Some(prev) = prev_total {
                let decrease = prev - total;
                if decrease >= 0.0 && decrease < config.convergence_tol * prev {
                    converged = true;
                    break;
                }
            }
            prev_total = Some(total);
        }

        let jf = ed_jacobian(src_pts, &fwd.graph, &fwd.binding)?;
        let mut point_grad = fl.grad_deformed.clone();
        if let Some(extra) = extra_point_grad {
            for (p, e) in point_grad.iter_mut().zip(extra) {
                *p += e;
            }
        }
        let mut gf = jf.transpose_mul(&point_grad);
        add_into(&mut gf, &fl.grad_params);
        add_into(&mut grad[..n_fwd], &gf);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged(iter));
        }
        opt.step(&mut params, &grad);
    }

    fwd.graph.set_flat_params(&params[..n_fwd])?;
    let deformed_pts = apply_ed(src_pts, &fwd.graph, &fwd.binding)?;
    let final_chamfer = chamfer(&deformed_pts, tgt_pts)?.value;
    if !final_chamfer.is_finite() {
        return Err(Error::Diverged(trace.len()));
    }
    let backward_params = bwd.is_some().then(|| {
        params[n_fwd..]
            .chunks_exact(PARAMS_PER_NODE)
            .map(|c| c.try_into().expect("chunk of nine"))
            .collect()
    });
    Ok(RegistrationReport {
        forward_params: fwd.graph.params.iter().map(|p| p.to_array()).collect(),
        backward_params,
        deformed: source.with_vertices(deformed_pts)?,
        level_sizes: fwd.hierarchy.level_sizes(),
        iterations: trace.len(),
        trace,
        converged,
        final_chamfer,
        graph: fwd.graph,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Nearest target vertex for each deformed source point; ties go to the lower index.
pub fn correspondences_from_registration(deformed_source: &[Point3], target: &TriMesh) -> Vec<usize> {
    if target.vertex_count() == 0 {
        return Vec::new();
    }
    nearest_indices(deformed_source, &KdTree::new(target.vertices()))
}
