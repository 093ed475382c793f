//! Static 3D kd-tree for nearest and k-nearest queries.
//!
//! Ties are broken toward the lower point index, so results agree with an
//! exhaustive scan that keeps the first minimum.

use std::cmp::Ordering;

use crate::Point3;

/// Below this many points queries scan linearly instead of descending the tree.
const BRUTE_FORCE_LIMIT: usize = 32;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl KdTree {
    pub fn new(points: &[Point3]) -> Self {
        let mut tree = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        if points.len() > BRUTE_FORCE_LIMIT {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let (lo, hi) = crate::mesh::bounding_box(
            &self.order[start..end]
                .iter()
                .map(|&i| self.points[i])
                .collect::<Vec<_>>(),
        )
        .expect("non-empty range");
        let axis = (hi - lo).imax();
        let mid = start + (end - start) / 2;
        let pts = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            pts[a][axis]
                .partial_cmp(&pts[b][axis])
                .unwrap_or(Ordering::Equal)
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(Node::Leaf { start, end });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Index and squared distance of the nearest point; `None` if the tree is empty.
    pub fn nearest(&self, q: &Point3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        if self.nodes.is_empty() {
            return nearest_brute_force(&self.points, q);
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_in(0, q, &mut best);
        Some(best)
    }

    fn nearest_in(&self, node: usize, q: &Point3, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = (self.points[i] - q).norm_squared();
                    if d < best.1 || (d == best.1 && i < best.0) {
                        *best = (i, d);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.nearest_in(near, q, best);
                // equality keeps the far side so index ties resolve like a linear scan
                if diff * diff <= best.1 {
                    self.nearest_in(far, q, best);
                }
            }
        }
    }

    /// The `k` nearest points ordered by `(squared distance, index)`.
    pub fn k_nearest(&self, q: &Point3, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        if self.nodes.is_empty() {
            return k_nearest_brute_force(&self.points, q, k);
        }
        let mut heap: Vec<(usize, f64)> = Vec::with_capacity(k + 1);
        self.k_nearest_in(0, q, k, &mut heap);
        heap
    }

    fn k_nearest_in(&self, node: usize, q: &Point3, k: usize, found: &mut Vec<(usize, f64)>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d = (self.points[i] - q).norm_squared();
                    insert_candidate(found, k, (i, d));
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.k_nearest_in(near, q, k, found);
                let worst = if found.len() < k {
                    f64::INFINITY
                } else {
                    found[k - 1].1
                };
                if diff * diff <= worst {
                    self.k_nearest_in(far, q, k, found);
                }
            }
        }
    }
}

fn by_distance_then_index(a: &(usize, f64), b: &(usize, f64)) -> Ordering {
    a.1.partial_cmp(&b.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

// keeps `found` sorted and at most `k` long
fn insert_candidate(found: &mut Vec<(usize, f64)>, k: usize, cand: (usize, f64)) {
    if found.len() == k && by_distance_then_index(&cand, &found[k - 1]) != Ordering::Less {
        return;
    }
    let pos = found
        .binary_search_by(|probe| by_distance_then_index(probe, &cand))
        .unwrap_or_else(|p| p);
    found.insert(pos, cand);
    found.truncate(k);
}

/// Linear-scan nearest neighbor, first minimum wins.
pub fn nearest_brute_force(points: &[Point3], q: &Point3) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = (p - q).norm_squared();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

fn k_nearest_brute_force(points: &[Point3], q: &Point3, k: usize) -> Vec<(usize, f64)> {
    let mut found = Vec::with_capacity(k + 1);
    for (i, p) in points.iter().enumerate() {
        insert_candidate(&mut found, k, (i, (p - q).norm_squared()));
    }
    found
}
