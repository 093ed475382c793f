#![allow(dead_code)]

use ed_align::registration::{rig, BindingMethod};
use ed_align::rotation::matrix_to_rot6d;
use ed_align::{apply_ed, shapes, Point3, TriMesh};
use nalgebra::{Rotation3, Vector3};

pub fn transform(mesh: &TriMesh, f: impl Fn(&Point3) -> Point3) -> TriMesh {
    mesh.with_vertices(mesh.vertices().iter().map(f).collect()).unwrap()
}

/// 800-vertex tube along x that tapers, has an oval section and sags, so no
/// rigid motion maps it onto itself.
pub fn asymmetric_tube() -> TriMesh {
    let base = shapes::cylinder(0.3, 2.0, 20, 40);
    let lay = Rotation3::from_axis_angle(&Vector3::y_axis(), std::f64::consts::FRAC_PI_2);
    transform(&base, |v| {
        let s = v.z - 1.0;
        let th = v.y.atan2(v.x);
        let k = (1.0 + 0.35 * s) * (1.0 + 0.25 * (2.0 * th).cos());
        let mut p = lay * Vector3::new(v.x * k, v.y * k, s);
        p.y += 0.2 * s * s;
        p
    })
}

pub fn rotated_about_z(mesh: &TriMesh, degrees: f64) -> TriMesh {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), degrees.to_radians());
    transform(mesh, |v| r * v)
}

/// Straight 800-vertex cylinder and the same cylinder bent into a 30° arc by
/// prescribed node transforms of its own deformation graph.
pub fn bent_cylinder_pair(levels: usize, seed: u64) -> (TriMesh, TriMesh) {
    let src = shapes::cylinder(0.3, 2.0, 20, 40);
    let angle = 30f64.to_radians();
    let length = 2.0;
    let rho = length / angle;
    let centre = Point3::new(rho, 0.0, 0.0);
    let r = rig(&src, levels, seed, BindingMethod::Trace).unwrap();
    let mut g = r.graph.clone();
    for (p, n) in g.params.iter_mut().zip(&r.graph.nodes) {
        let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), angle * n.z / length);
        let bent = centre + rot * Vector3::new(n.x - rho, n.y, 0.0);
        p.rot6 = matrix_to_rot6d(rot.matrix());
        p.translation = bent - n;
    }
    let tgt = src.with_vertices(apply_ed(src.vertices(), &g, &r.binding).unwrap()).unwrap();
    (src, tgt)
}

pub const STRIP_NX: usize = 24;
pub const STRIP_NZ: usize = 6;

/// Two parallel strips 0.05 apart; the target lifts the upper one by `lift`.
pub fn lifted_strips(lift: f64) -> (TriMesh, TriMesh, usize) {
    let src = shapes::two_strips(STRIP_NX, STRIP_NZ, 2.4, 0.5, 0.05);
    let lower = STRIP_NX * STRIP_NZ;
    let tgt = src
        .with_vertices(
            src.vertices()
                .iter()
                .enumerate()
                .map(|(i, v)| if i >= lower { v + Point3::y() * lift } else { *v })
                .collect(),
        )
        .unwrap();
    (src, tgt, lower)
}

/// Central differences of `f` at `x`.
pub fn fd_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = f(&p);
            p[i] = x[i] - h;
            let down = f(&p);
            p[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖∞ / ‖b‖∞`, with `b` the analytic gradient.
pub fn rel_err(fd: &[f64], analytic: &[f64]) -> f64 {
    let scale = analytic.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff = fd.iter().zip(analytic).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

pub fn flatten(points: &[Point3]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

pub fn unflatten(flat: &[f64]) -> Vec<Point3> {
    flat.chunks_exact(3).map(|c| Point3::new(c[0], c[1], c[2])).collect()
}
