//! Procedural meshes used by tests, examples and the CLI demos.

use std::collections::HashMap;
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::mesh::TriMesh;
use crate::Point3;

/// Unit icosphere: 12 vertices at level 0, `10·4^level + 2` in general.
pub fn icosphere(level: u32) -> TriMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(verts, faces).expect("icosphere topology is valid")
}

/// Closed torus with `nu` segments around the main ring and `nv` around the tube.
pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = TAU * i as f64 / nu as f64;
        for j in 0..nv {
            let v = TAU * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            verts.push(Point3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let idx = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(verts, faces).expect("torus topology is valid")
}

/// Open tube along +z: `rings` rings of `around` vertices, from z = 0 to `length`.
pub fn cylinder(radius: f64, length: f64, around: usize, rings: usize) -> TriMesh {
    let mut verts = Vec::with_capacity(around * rings);
    for r in 0..rings {
        let z = length * r as f64 / (rings - 1) as f64;
        for a in 0..around {
            let phi = TAU * a as f64 / around as f64;
            verts.push(Point3::new(radius * phi.cos(), radius * phi.sin(), z));
        }
    }
    let idx = |r: usize, a: usize| r * around + (a % around);
    let mut faces = Vec::with_capacity(2 * around * rings);
    for r in 0..rings - 1 {
        for a in 0..around {
            faces.push([idx(r, a), idx(r, a + 1), idx(r + 1, a + 1)]);
            faces.push([idx(r, a), idx(r + 1, a + 1), idx(r + 1, a)]);
        }
    }
    TriMesh::new(verts, faces).expect("cylinder topology is valid")
}

/// Flat rectangular grid in the plane `y = height`, `nx × nz` vertices
/// spanning `[0, width] × [0, depth]`.
pub fn grid(nx: usize, nz: usize, width: f64, depth: f64, height: f64) -> TriMesh {
    let (verts, faces) = grid_parts(nx, nz, width, depth, height, 0);
    TriMesh::new(verts, faces).expect("grid topology is valid")
}

fn grid_parts(
    nx: usize,
    nz: usize,
    width: f64,
    depth: f64,
    height: f64,
    offset: usize,
) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let mut verts = Vec::with_capacity(nx * nz);
    for i in 0..nx {
        for k in 0..nz {
            verts.push(Point3::new(
                width * i as f64 / (nx - 1) as f64,
                height,
                depth * k as f64 / (nz - 1) as f64,
            ));
        }
    }
    let idx = |i: usize, k: usize| offset + i * nz + k;
    let mut faces = Vec::new();
    for i in 0..nx - 1 {
        for k in 0..nz - 1 {
            faces.push([idx(i, k), idx(i + 1, k), idx(i + 1, k + 1)]);
            faces.push([idx(i, k), idx(i + 1, k + 1), idx(i, k + 1)]);
        }
    }
    (verts, faces)
}

/// Two disconnected parallel strips stacked `gap` apart along y.
///
/// Vertices `0..nx*nz` form the lower strip, the rest the upper one. The
/// strips share no edges, so any coarsening that follows mesh edges keeps
/// them separate, while Euclidean neighborhoods straddle the gap.
pub fn two_strips(nx: usize, nz: usize, width: f64, depth: f64, gap: f64) -> TriMesh {
    let (mut verts, mut faces) = grid_parts(nx, nz, width, depth, 0.0, 0);
    let (v2, f2) = grid_parts(nx, nz, width, depth, gap, nx * nz);
    verts.extend(v2);
    faces.extend(f2);
    TriMesh::new(verts, faces).expect("strip topology is valid")
}

/// `n ≥ 3` random points in the unit cube joined as a triangle strip.
pub fn random_mesh(n: usize, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let verts: Vec<Point3> = (0..n)
        .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
        .collect();
    let faces = (0..n.saturating_sub(2)).map(|i| [i, i + 1, i + 2]).collect();
    TriMesh::new(verts, faces).expect("strip topology is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_sizes() {
        assert_eq!(icosphere(0).vertex_count(), 12);
        assert_eq!(icosphere(3).vertex_count(), 642);
        assert_eq!(torus(1.0, 0.3, 106, 65).vertex_count(), 6890);
        assert_eq!(cylinder(0.3, 2.0, 20, 40).vertex_count(), 800);
        assert_eq!(two_strips(10, 4, 1.0, 0.3, 0.05).vertex_count(), 80);
    }

    #[test]
    fn closed_meshes_are_two_manifold() {
        for m in [icosphere(2), torus(1.0, 0.3, 12, 8)] {
            let mut count: HashMap<[usize; 2], usize> = HashMap::new();
            for f in m.faces() {
                for (a, b) in [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])] {
                    *count.entry([a.min(b), a.max(b)]).or_default() += 1;
                }
            }
            assert!(count.values().all(|&c| c == 2));
        }
    }
}
