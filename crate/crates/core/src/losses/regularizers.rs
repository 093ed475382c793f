use super::PointLoss;
use crate::deform::{DeformGraph, PARAMS_PER_NODE};
use crate::error::{Error, Result};
use crate::mesh::{uniform_laplacian_coords, laplacian_coords_of, TriMesh};
use crate::rotation::{rot6d_with_jacobian, rotate_jacobian};
use crate::Point3;

/// How residual vectors are reduced to scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualNorm {
    #[default]
    Squared,
    /// Plain Euclidean norm; its gradient is taken as zero at a zero residual.
    Unsquared,
}

fn same_len(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Argument(format!("{what}: expected {expected} positions, got {got}")));
    }
    Ok(())
}

/// Squared-residual ARAP energy over both directions of every graph edge,
/// with the gradient over all node parameters.
pub fn arap(graph: &DeformGraph) -> Result<(f64, Vec<f64>)> {
    arap_with(graph, ResidualNorm::Squared)
}

pub fn arap_with(graph: &DeformGraph, norm: ResidualNorm) -> Result<(f64, Vec<f64>)> {
    let decoded = graph
        .params
        .iter()
        .map(|p| rot6d_with_jacobian(&p.rot6))
        .collect::<Result<Vec<_>>>()?;
    let mut grad = vec![0.0; PARAMS_PER_NODE * graph.node_count()];
    let mut value = 0.0;
    for &[a, b] in &graph.edges {
        for (i, j) in [(a, b), (b, a)] {
            let (rot, rows) = &decoded[i];
            let u = graph.nodes[j] - graph.nodes[i];
            let e = rot * u + graph.params[i].translation - graph.params[j].translation - u;
            let len = e.norm();
            let de = match norm {
                ResidualNorm::Squared => {
                    value += len * len;
                    e * 2.0
                }
                ResidualNorm::Unsquared => {
                    value += len;
                    if len > 0.0 {
                        e / len
                    } else {
                        Point3::zeros()
                    }
                }
            };
            let dr = rotate_jacobian(rows, &u).transpose() * de;
            let gi = &mut grad[i * PARAMS_PER_NODE..(i + 1) * PARAMS_PER_NODE];
            for k in 0..6 {
                gi[k] += dr[k];
            }
            for k in 0..3 {
                gi[6 + k] += de[k];
            }
            let gj = &mut grad[j * PARAMS_PER_NODE..(j + 1) * PARAMS_PER_NODE];
            for k in 0..3 {
                gj[6 + k] -= de[k];
            }
        }
    }
    Ok((value, grad))
}

/// Mean squared change of edge length; `skipped` counts zero-length rest edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeLoss {
    pub loss: PointLoss,
    pub skipped: usize,
}

pub fn edge_loss(mesh: &TriMesh, deformed: &[Point3]) -> Result<EdgeLoss> {
    let rest = mesh.vertices();
    same_len("edge loss", rest.len(), deformed.len())?;
    let mut grad = vec![Point3::zeros(); rest.len()];
    let mut skipped = 0;
    let mut used = 0usize;
    let mut sum = 0.0;
    let mut terms = Vec::with_capacity(mesh.edges().len());
    for &[a, b] in mesh.edges() {
        let l0 = (rest[a] - rest[b]).norm();
        if l0 == 0.0 {
            skipped += 1;
            continue;
        }
        used += 1;
        let e = deformed[a] - deformed[b];
        let l = e.norm();
        sum += (l - l0).powi(2);
        terms.push((a, b, e, l, l0));
    }
    let value = if used == 0 { 0.0 } else { sum / used as f64 };
    for (a, b, e, l, l0) in terms {
        if l > 0.0 {
            let g = e * (2.0 * (l - l0) / (l * used as f64));
            grad[a] += g;
            grad[b] -= g;
        }
    }
    Ok(EdgeLoss {
        loss: PointLoss { value, grad },
        skipped,
    })
}

/// Mean squared change of uniform Laplacian coordinates.
pub fn laplacian_loss(mesh: &TriMesh, deformed: &[Point3]) -> Result<PointLoss> {
    same_len("laplacian loss", mesh.vertex_count(), deformed.len())?;
    let rest = uniform_laplacian_coords(mesh)?;
    let now = laplacian_coords_of(mesh.adjacency(), deformed)?;
    let n = rest.len() as f64;
    let mut value = 0.0;
    let mut grad = vec![Point3::zeros(); rest.len()];
    for (j, nbrs) in mesh.adjacency().iter().enumerate() {
        let r = now[j] - rest[j];
        value += r.norm_squared();
        grad[j] += r * (2.0 / n);
        let share = r * (2.0 / (n * nbrs.len() as f64));
        for &k in nbrs {
            grad[k] -= share;
        }
    }
    Ok(PointLoss {
        value: value / n,
        grad,
    })
}

/// Mean squared distance between each point and its image after the round
/// trip, with the gradient with respect to `cycled`.
pub fn cycle_loss(source: &[Point3], cycled: &[Point3]) -> Result<PointLoss> {
    same_len("cycle loss", source.len(), cycled.len())?;
    if source.is_empty() {
        return Err(Error::Argument("cycle loss of an empty point set".into()));
    }
    let n = source.len() as f64;
    let mut value = 0.0;
    let grad = source
        .iter()
        .zip(cycled)
        .map(|(p, c)| {
            let d = c - p;
            value += d.norm_squared();
            d * (2.0 / n)
        })
        .collect();
    Ok(PointLoss {
        value: value / n,
        grad,
    })
}
