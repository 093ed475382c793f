use rayon::prelude::*;

use super::PointLoss;
use crate::error::{Error, Result};
use crate::spatial::{nearest_brute_force, KdTree};
use crate::Point3;

/// Index of the nearest point of `tree` for every query point.
pub fn nearest_indices(queries: &[Point3], tree: &KdTree) -> Vec<usize> {
    queries
        .par_iter()
        .map(|q| tree.nearest(q).expect("tree is nonempty").0)
        .collect()
}

fn check(a: &[Point3], b: &[Point3]) -> Result<()> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("chamfer distance needs two nonempty point sets".into()));
    }
    Ok(())
}

/// Both directional means from precomputed nearest indices. `a_to_b[j]` is
/// the nearest point of `b` to `a[j]` and vice versa.
fn from_matches(a: &[Point3], b: &[Point3], a_to_b: &[usize], b_to_a: &[usize]) -> PointLoss {
    let n = a.len() as f64;
    let m = b.len() as f64;
    let mut grad = vec![Point3::zeros(); a.len()];
    let mut forward = 0.0;
    for (j, &k) in a_to_b.iter().enumerate() {
        let d = a[j] - b[k];
        forward += d.norm_squared();
        grad[j] += d * (2.0 / n);
    }
    let mut backward = 0.0;
    for (k, &j) in b_to_a.iter().enumerate() {
        let d = a[j] - b[k];
        backward += d.norm_squared();
        grad[j] += d * (2.0 / m);
    }
    PointLoss {
        value: forward / n + backward / m,
        grad,
    }
}

/// Symmetric Chamfer distance: mean squared nearest distance from `a` to `b`
/// plus from `b` to `a`, with the gradient with respect to `a`.
pub fn chamfer(a: &[Point3], b: &[Point3]) -> Result<PointLoss> {
    check(a, b)?;
    chamfer_with_tree(a, b, &KdTree::new(b))
}

/// [`chamfer`] reusing a prebuilt tree over `b`.
pub fn chamfer_with_tree(a: &[Point3], b: &[Point3], b_tree: &KdTree) -> Result<PointLoss> {
    check(a, b)?;
    if b_tree.len() != b.len() {
        return Err(Error::Argument("tree does not index the target set".into()));
    }
    let a_tree = KdTree::new(a);
    let a_to_b = nearest_indices(a, b_tree);
    let b_to_a = nearest_indices(b, &a_tree);
    Ok(from_matches(a, b, &a_to_b, &b_to_a))
}

/// [`chamfer`] by exhaustive O(nm) search.
pub fn chamfer_brute_force(a: &[Point3], b: &[Point3]) -> Result<PointLoss> {
    check(a, b)?;
    let a_to_b: Vec<usize> = a.iter().map(|q| nearest_brute_force(b, q).unwrap().0).collect();
    let b_to_a: Vec<usize> = b.iter().map(|q| nearest_brute_force(a, q).unwrap().0).collect();
    Ok(from_matches(a, b, &a_to_b, &b_to_a))
}
