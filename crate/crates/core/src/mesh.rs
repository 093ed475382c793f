//! Indexed triangle meshes, Wavefront OBJ text I/O and uniform Laplacian coordinates.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::Point3;

/// Indexed triangle mesh with derived edge and adjacency tables.
///
/// The edge list holds each undirected pair once as `[lo, hi]`, sorted
/// lexicographically; adjacency lists are sorted ascending. A mesh is
/// immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    adjacency: Vec<Vec<usize>>,
}

impl TriMesh {
    /// Builds a mesh, rejecting out-of-range indices and faces that repeat a vertex.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.len();
        for (fi, f) in faces.iter().enumerate() {
            for &i in f {
                if i >= n {
                    return Err(Error::InvalidFace {
                        face: fi,
                        index: i,
                        vertex_count: n,
                    });
                }
            }
            if f[0] == f[1] || f[0] == f[2] {
                return Err(Error::DegenerateFace {
                    face: fi,
                    vertex: f[0],
                });
            }
            if f[1] == f[2] {
                return Err(Error::DegenerateFace {
                    face: fi,
                    vertex: f[1],
                });
            }
        }
        let edges = edges_of(&faces);
        let adjacency = adjacency_of(n, &edges);
        Ok(Self {
            vertices,
            faces,
            edges,
            adjacency,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Same connectivity, new positions.
    pub fn with_vertices(&self, vertices: Vec<Point3>) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::Argument(format!(
                "expected {} positions, got {}",
                self.vertices.len(),
                vertices.len()
            )));
        }
        Ok(Self {
            vertices,
            faces: self.faces.clone(),
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
        })
    }

    /// Axis-aligned bounding box as `(min, max)`; `None` for an empty mesh.
    pub fn bounding_box(&self) -> Option<(Point3, Point3)> {
        bounding_box(&self.vertices)
    }

    /// Length of the bounding-box diagonal, 0 for an empty mesh.
    pub fn bbox_diagonal(&self) -> f64 {
        self.bounding_box().map_or(0.0, |(lo, hi)| (hi - lo).norm())
    }
}

pub(crate) fn bounding_box(points: &[Point3]) -> Option<(Point3, Point3)> {
    let first = points.first()?;
    let mut lo = *first;
    let mut hi = *first;
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    Some((lo, hi))
}

fn edges_of(faces: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut edges: Vec<[usize; 2]> = faces
        .iter()
        .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
        .map(|(a, b)| [a.min(b), a.max(b)])
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

pub(crate) fn adjacency_of(n: usize, edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &[a, b] in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Parses Wavefront OBJ text.
///
/// Only `v` and `f` records are read; polygons are fan-triangulated and
/// `vt`/`vn` references inside face tokens are ignored. Negative indices
/// count back from the most recent vertex.
pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    // (line number, face) so index errors can point back at the source
    let mut face_lines = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coords = [0.0; 3];
                for c in &mut coords {
                    let tok = tokens.next().ok_or_else(|| Error::Parse {
                        line: line_no,
                        message: "vertex record needs three coordinates".into(),
                    })?;
                    *c = parse_f64(tok, line_no)?;
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in tokens {
                    let idx_tok = tok.split('/').next().unwrap_or("");
                    let raw_idx: i64 = idx_tok.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("malformed face index {tok:?}"),
                    })?;
                    let n = vertices.len();
                    let resolved = if raw_idx > 0 {
                        raw_idx - 1
                    } else if raw_idx < 0 {
                        n as i64 + raw_idx
                    } else {
                        -1
                    };
                    if resolved < 0 {
                        return Err(Error::FaceIndex {
                            line: line_no,
                            index: raw_idx,
                            vertex_count: n,
                        });
                    }
                    poly.push((resolved as usize, raw_idx));
                }
                if poly.len() < 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                    face_lines.push(line_no);
                }
            }
            _ => {}
        }
    }

    // positive indices may forward-reference vertices, so range-check at the end
    let n = vertices.len();
    let mut tris = Vec::with_capacity(faces.len());
    for (f, &line) in faces.iter().zip(&face_lines) {
        for &(i, raw) in f {
            if i >= n {
                return Err(Error::FaceIndex {
                    line,
                    index: raw,
                    vertex_count: n,
                });
            }
        }
        let tri = [f[0].0, f[1].0, f[2].0];
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(Error::Parse {
                line,
                message: "face repeats a vertex index".into(),
            });
        }
        tris.push(tri);
    }
    TriMesh::new(vertices, tris)
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("malformed number {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite coordinate {tok:?}"),
        });
    }
    Ok(v)
}

/// Serializes a mesh as OBJ text. Coordinates use the shortest round-trip
/// decimal form, so re-parsing reproduces them exactly.
pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 40 + mesh.faces.len() * 20);
    let _ = writeln!(
        out,
        "# {} vertices, {} faces",
        mesh.vertices.len(),
        mesh.faces.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

/// `δ_j = v_j − mean(neighbors of v_j)` for every vertex of the mesh.
pub fn uniform_laplacian_coords(mesh: &TriMesh) -> Result<Vec<Point3>> {
    laplacian_coords_of(mesh.adjacency(), mesh.vertices())
}

/// Uniform Laplacian coordinates of arbitrary positions over a fixed adjacency.
pub fn laplacian_coords_of(adjacency: &[Vec<usize>], positions: &[Point3]) -> Result<Vec<Point3>> {
    if adjacency.len() != positions.len() {
        return Err(Error::Argument(format!(
            "adjacency covers {} vertices but {} positions given",
            adjacency.len(),
            positions.len()
        )));
    }
    adjacency
        .iter()
        .enumerate()
        .map(|(j, nbrs)| {
            if nbrs.is_empty() {
                return Err(Error::IsolatedVertex(j));
            }
            let sum: Point3 = nbrs.iter().map(|&k| positions[k]).sum();
            Ok(positions[j] - sum / nbrs.len() as f64)
        })
        .collect()
}
