//! Quadric-error-metric edge-collapse decimation.
//!
//! Each vertex carries the sum of area-weighted plane quadrics of its incident
//! faces, plus heavily weighted constraint planes along boundary edges. Edges
//! are collapsed cheapest-first from a lazily invalidated priority queue.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::Point3;

/// Weight of a boundary constraint plane, relative to the mean face area.
const BOUNDARY_WEIGHT: f64 = 1000.0;

/// Determinant threshold for the normalized 3×3 quadric block.
const SINGULAR_DET: f64 = 1e-12;

/// Provenance of a decimation: every input vertex maps to the output vertex
/// it was merged into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexMap {
    pub fine_to_coarse: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Decimation {
    pub mesh: TriMesh,
    pub map: VertexMap,
    /// Set when no valid collapse remained before reaching the target.
    pub stalled: bool,
    /// Quadric error of every executed collapse, in execution order.
    pub collapse_errors: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    cost: f64,
    u: usize,
    v: usize,
    stamp_u: u32,
    stamp_v: u32,
    target: Point3,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    // min-heap on cost, then on (u, v) for a deterministic order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.u.cmp(&self.u))
            .then_with(|| other.v.cmp(&self.v))
    }
}

fn plane_quadric(normal: &Vector3<f64>, point: &Point3, weight: f64) -> Matrix4<f64> {
    let p = Vector4::new(normal.x, normal.y, normal.z, -normal.dot(point));
    p * p.transpose() * weight
}

fn quadric_error(q: &Matrix4<f64>, x: &Point3) -> f64 {
    let h = Vector4::new(x.x, x.y, x.z, 1.0);
    (h.transpose() * q * h)[0].max(0.0)
}

/// Minimizer of the quadric, or the best of {a, b, midpoint} when the
/// linear system is singular.
fn best_position(q: &Matrix4<f64>, a: &Point3, b: &Point3) -> (Point3, f64) {
    let block: Matrix3<f64> = q.fixed_view::<3, 3>(0, 0).into_owned();
    let scale = block.amax();
    if scale > 0.0 && (block / scale).determinant().abs() >= SINGULAR_DET {
        if let Some(inv) = block.try_inverse() {
            let rhs = -q.fixed_view::<3, 1>(0, 3).into_owned();
            let x = inv * rhs;
            if x.iter().all(|c| c.is_finite()) {
                return (x, quadric_error(q, &x));
            }
        }
    }
    let mid = (a + b) * 0.5;
    [*a, *b, mid]
        .into_iter()
        .map(|p| (p, quadric_error(q, &p)))
        .fold(None, |best: Option<(Point3, f64)>, c| match best {
            Some(b) if b.1 <= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("three candidates")
}

struct Decimator {
    pos: Vec<Point3>,
    quadrics: Vec<Matrix4<f64>>,
    faces: Vec<[usize; 3]>,
    face_alive: Vec<bool>,
    vert_faces: Vec<Vec<usize>>,
    alive: Vec<bool>,
    stamp: Vec<u32>,
    parent: Vec<usize>,
    heap: BinaryHeap<Candidate>,
}

impl Decimator {
    fn new(mesh: &TriMesh) -> Self {
        let n = mesh.vertex_count();
        let pos = mesh.vertices().to_vec();
        let faces = mesh.faces().to_vec();
        let mut quadrics = vec![Matrix4::zeros(); n];
        let mut vert_faces = vec![Vec::new(); n];
        let mut total_area = 0.0;
        let mut face_normals = Vec::with_capacity(faces.len());
        for (fi, f) in faces.iter().enumerate() {
            let cross = (pos[f[1]] - pos[f[0]]).cross(&(pos[f[2]] - pos[f[0]]));
            let area = 0.5 * cross.norm();
            total_area += area;
            let normal = if area > 0.0 { cross.normalize() } else { Vector3::zeros() };
            face_normals.push(normal);
            if area > 0.0 {
                let q = plane_quadric(&normal, &pos[f[0]], area);
                for &i in f {
                    quadrics[i] += q;
                }
            }
            for &i in f {
                vert_faces[i].push(fi);
            }
        }

        if !faces.is_empty() {
            let boundary_weight = BOUNDARY_WEIGHT * total_area / faces.len() as f64;
            let mut edge_faces: Vec<([usize; 2], usize)> = faces
                .iter()
                .enumerate()
                .flat_map(|(fi, f)| {
                    [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])]
                        .map(|(a, b)| ([a.min(b), a.max(b)], fi))
                })
                .collect();
            edge_faces.sort_unstable();
            let mut i = 0;
            while i < edge_faces.len() {
                let mut j = i + 1;
                while j < edge_faces.len() && edge_faces[j].0 == edge_faces[i].0 {
                    j += 1;
                }
                if j - i == 1 {
                    let ([a, b], fi) = edge_faces[i];
                    let m = (pos[b] - pos[a]).cross(&face_normals[fi]);
                    if m.norm() > 0.0 {
                        let q = plane_quadric(&m.normalize(), &pos[a], boundary_weight);
                        quadrics[a] += q;
                        quadrics[b] += q;
                    }
                }
                i = j;
            }
        }

        let face_count = faces.len();
        let mut d = Self {
            pos,
            quadrics,
            faces,
            face_alive: vec![true; face_count],
            vert_faces,
            alive: vec![true; n],
            stamp: vec![0; n],
            parent: (0..n).collect(),
            heap: BinaryHeap::new(),
        };
        for &[a, b] in mesh.edges() {
            d.push_candidate(a, b);
        }
        d
    }

    fn push_candidate(&mut self, a: usize, b: usize) {
        let (u, v) = (a.min(b), a.max(b));
        let q = self.quadrics[u] + self.quadrics[v];
        let (target, cost) = best_position(&q, &self.pos[u], &self.pos[v]);
        self.heap.push(Candidate {
            cost,
            u,
            v,
            stamp_u: self.stamp[u],
            stamp_v: self.stamp[v],
            target,
        });
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.vert_faces[v]
            .iter()
            .filter(|&&f| self.face_alive[f])
            .flat_map(|&f| self.faces[f])
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn face_normal(&self, f: &[usize; 3], moved: &[usize; 2], to: &Point3) -> Vector3<f64> {
        let p = |i: usize| if moved.contains(&i) { *to } else { self.pos[i] };
        (p(f[1]) - p(f[0])).cross(&(p(f[2]) - p(f[0])))
    }

    /// Topology and fold-over checks for collapsing `v` into `u`.
    fn collapse_allowed(&self, u: usize, v: usize, target: &Point3) -> bool {
        // link condition: shared neighbors are exactly the apexes of faces on uv
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let shared = nu.iter().filter(|w| nv.binary_search(w).is_ok()).count();
        let apexes = self.vert_faces[u]
            .iter()
            .filter(|&&f| self.face_alive[f] && self.faces[f].contains(&v))
            .count();
        if shared != apexes {
            return false;
        }
        let moved = [u, v];
        for &w in &[u, v] {
            for &f in &self.vert_faces[w] {
                if !self.face_alive[f] {
                    continue;
                }
                let face = self.faces[f];
                if face.contains(&u) && face.contains(&v) {
                    continue;
                }
                let before = self.face_normal(&face, &[usize::MAX, usize::MAX], target);
                let after = self.face_normal(&face, &moved, target);
                if before.dot(&after) < 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn collapse(&mut self, u: usize, v: usize, target: Point3) {
        self.pos[u] = target;
        self.quadrics[u] = self.quadrics[u] + self.quadrics[v];
        self.alive[v] = false;
        self.parent[v] = u;
        let moved = std::mem::take(&mut self.vert_faces[v]);
        for f in moved {
            if !self.face_alive[f] {
                continue;
            }
            if self.faces[f].contains(&u) {
                self.face_alive[f] = false;
            } else {
                for i in &mut self.faces[f] {
                    if *i == v {
                        *i = u;
                    }
                }
                self.vert_faces[u].push(f);
            }
        }
        let alive = &self.face_alive;
        self.vert_faces[u].retain(|&f| alive[f]);
        self.stamp[u] += 1;
        for w in self.neighbors(u) {
            self.push_candidate(u, w);
        }
    }

    fn find(&self, mut i: usize) -> usize {
        while self.parent[i] != i {
            i = self.parent[i];
        }
        i
    }
}

/// Decimates `mesh` to `target_vertex_count` vertices.
///
/// If every remaining collapse is rejected before the target is reached the
/// best-effort mesh is returned with `stalled` set.
pub fn qem_decimate(mesh: &TriMesh, target_vertex_count: usize) -> Result<Decimation> {
    if target_vertex_count < 4 {
        return Err(Error::Argument(format!(
            "target vertex count {target_vertex_count} is below 4"
        )));
    }
    if target_vertex_count > mesh.vertex_count() {
        return Err(Error::Argument(format!(
            "target vertex count {target_vertex_count} exceeds input size {}",
            mesh.vertex_count()
        )));
    }

    let mut d = Decimator::new(mesh);
    let mut remaining = mesh.vertex_count();
    let mut collapse_errors = Vec::new();
    while remaining > target_vertex_count {
        let Some(c) = d.heap.pop() else { break };
        if !d.alive[c.u] || !d.alive[c.v] || d.stamp[c.u] != c.stamp_u || d.stamp[c.v] != c.stamp_v
        {
            continue;
        }
        if !d.collapse_allowed(c.u, c.v, &c.target) {
            continue;
        }
        d.collapse(c.u, c.v, c.target);
        collapse_errors.push(c.cost);
        remaining -= 1;
    }
    let stalled = remaining > target_vertex_count;

    let mut new_index = vec![usize::MAX; d.pos.len()];
    let mut verts = Vec::with_capacity(remaining);
    for (i, p) in d.pos.iter().enumerate() {
        if d.alive[i] {
            new_index[i] = verts.len();
            verts.push(*p);
        }
    }
    let faces = d
        .faces
        .iter()
        .zip(&d.face_alive)
        .filter(|(_, &a)| a)
        .map(|(f, _)| f.map(|i| new_index[i]))
        .collect();
    let fine_to_coarse = (0..d.pos.len()).map(|i| new_index[d.find(i)]).collect();
    Ok(Decimation {
        mesh: TriMesh::new(verts, faces)?,
        map: VertexMap { fine_to_coarse },
        stalled,
        collapse_errors,
    })
}
