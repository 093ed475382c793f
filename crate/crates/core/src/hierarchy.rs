//! Multi-level mesh hierarchy built by greedy normalized-cut matching.
//!
//! Each coarsening step pairs every unmarked vertex with the unmarked
//! neighbor that maximizes `w_ij (1/d_i + 1/d_j)` (unit edge weights,
//! combinatorial degrees), visiting vertices in a seeded random order.
//! Matched pairs and leftover singletons become the vertices of the next
//! level. A coarse vertex sits at the centroid of the finest-level vertices
//! it represents, so the first step pools pairs at their midpoint.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mesh::{adjacency_of, TriMesh};
use crate::Point3;

/// Fewest vertices a level may have and still be coarsened again.
pub const MIN_LEVEL_VERTICES: usize = 4;

/// One pooling step: fine vertex → coarse cluster, with per-member weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolingMap {
    pub assignment: Vec<usize>,
    pub weights: Vec<f64>,
    cluster_count: usize,
}

impl PoolingMap {
    /// Builds a map from an assignment, giving each member of a cluster the
    /// weight `1 / |cluster|`. Cluster ids must be dense in `0..max+1`.
    pub fn uniform(assignment: Vec<usize>) -> Self {
        let cluster_count = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut sizes = vec![0usize; cluster_count];
        for &c in &assignment {
            sizes[c] += 1;
        }
        let weights = assignment.iter().map(|&c| 1.0 / sizes[c] as f64).collect();
        Self {
            assignment,
            weights,
            cluster_count,
        }
    }

    /// Weights each member by the number of finest-level vertices it stands
    /// for, so pooled positions stay exact centroids of the traced clusters.
    pub fn size_weighted(assignment: Vec<usize>, member_sizes: &[usize]) -> Self {
        let cluster_count = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut totals = vec![0usize; cluster_count];
        for (v, &c) in assignment.iter().enumerate() {
            totals[c] += member_sizes[v];
        }
        let weights = assignment
            .iter()
            .enumerate()
            .map(|(v, &c)| member_sizes[v] as f64 / totals[c] as f64)
            .collect();
        Self {
            assignment,
            weights,
            cluster_count,
        }
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    /// Members of every cluster, ascending.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cluster_count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Vertex positions and edges of one hierarchy level.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub positions: Vec<Point3>,
    pub edges: Vec<[usize; 2]>,
    pub adjacency: Vec<Vec<usize>>,
}

impl Level {
    pub fn from_mesh(mesh: &TriMesh) -> Self {
        Self {
            positions: mesh.vertices().to_vec(),
            edges: mesh.edges().to_vec(),
            adjacency: mesh.adjacency().to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Levels `M_1..M_L` (finest first) and the `L − 1` pooling maps between them.
/// The coarsest level is the deformation graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshHierarchy {
    pub levels: Vec<Level>,
    pub pools: Vec<PoolingMap>,
}

/// Greedy matching for a fixed visiting order.
pub fn graclus_match(adjacency: &[Vec<usize>], order: &[usize]) -> PoolingMap {
    let n = adjacency.len();
    let mut assignment = vec![usize::MAX; n];
    let mut next = 0;
    for &v in order {
        if assignment[v] != usize::MAX {
            continue;
        }
        let inv_dv = 1.0 / adjacency[v].len().max(1) as f64;
        let mut best: Option<(usize, f64)> = None;
        for &j in &adjacency[v] {
            if j == v || assignment[j] != usize::MAX {
                continue;
            }
            let cut = inv_dv + 1.0 / adjacency[j].len() as f64;
            // strictly greater keeps the lowest index among equal cuts
            if best.is_none_or(|(bj, bc)| cut > bc || (cut == bc && j < bj)) {
                best = Some((j, cut));
            }
        }
        assignment[v] = next;
        if let Some((j, _)) = best {
            assignment[j] = next;
        }
        next += 1;
    }
    PoolingMap::uniform(assignment)
}

/// One coarsening step with a seeded visiting order.
pub fn graclus_coarsen(adjacency: &[Vec<usize>], rng_seed: u64) -> Result<PoolingMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    graclus_coarsen_with(adjacency, &mut rng)
}

fn graclus_coarsen_with(adjacency: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Result<PoolingMap> {
    if adjacency.is_empty() {
        return Err(Error::Argument("cannot coarsen an empty graph".into()));
    }
    let mut order: Vec<usize> = (0..adjacency.len()).collect();
    order.shuffle(rng);
    Ok(graclus_match(adjacency, &order))
}

/// Weighted combination of each cluster's member positions.
pub fn pool_positions(fine: &[Point3], pool: &PoolingMap) -> Vec<Point3> {
    let mut out = vec![Point3::zeros(); pool.cluster_count];
    for ((p, &c), &w) in fine.iter().zip(&pool.assignment).zip(&pool.weights) {
        out[c] += p * w;
    }
    out
}

/// Contracted edge set: one coarse edge per pair of distinct clusters joined
/// by at least one fine edge.
pub fn coarsen_edges(fine_edges: &[[usize; 2]], pool: &PoolingMap) -> Vec<[usize; 2]> {
    let mut out: Vec<[usize; 2]> = fine_edges
        .iter()
        .filter_map(|&[a, b]| {
            let (ca, cb) = (pool.assignment[a], pool.assignment[b]);
            (ca != cb).then(|| [ca.min(cb), ca.max(cb)])
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Builds `num_levels` levels by repeated coarsening.
///
/// Fails if a level that still has to be coarsened has fewer than
/// [`MIN_LEVEL_VERTICES`] vertices; the final level may be smaller.
pub fn build_hierarchy(mesh: &TriMesh, num_levels: usize, rng_seed: u64) -> Result<MeshHierarchy> {
    if num_levels < 2 {
        return Err(Error::Argument(format!(
            "a hierarchy needs at least 2 levels, got {num_levels}"
        )));
    }
    if mesh.vertex_count() == 0 {
        return Err(Error::Argument("cannot build a hierarchy on an empty mesh".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut levels = vec![Level::from_mesh(mesh)];
    let mut sizes = vec![1usize; mesh.vertex_count()];
    let mut pools = Vec::with_capacity(num_levels - 1);
    while levels.len() < num_levels {
        let fine = levels.last().expect("at least one level");
        let level_no = levels.len();
        // the input mesh itself is allowed to be tiny; coarsened levels are not
        if level_no > 1 && fine.len() < MIN_LEVEL_VERTICES {
            return Err(Error::HierarchyCollapsed {
                level: level_no,
                vertices: fine.len(),
            });
        }
        let matched = graclus_coarsen_with(&fine.adjacency, &mut rng)?;
        let pool = PoolingMap::size_weighted(matched.assignment, &sizes);
        let mut next_sizes = vec![0usize; pool.cluster_count()];
        for (v, &c) in pool.assignment.iter().enumerate() {
            next_sizes[c] += sizes[v];
        }
        sizes = next_sizes;
        let positions = pool_positions(&fine.positions, &pool);
        let edges = coarsen_edges(&fine.edges, &pool);
        let adjacency = adjacency_of(positions.len(), &edges);
        levels.push(Level {
            positions,
            edges,
            adjacency,
        });
        pools.push(pool);
    }
    Ok(MeshHierarchy { levels, pools })
}

impl MeshHierarchy {
    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }

    pub fn coarsest(&self) -> &Level {
        self.levels.last().expect("hierarchy has levels")
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Level::len).collect()
    }

    /// Coarsest-level node reached by every finest-level vertex.
    pub fn composed_assignment(&self) -> Vec<usize> {
        let mut map: Vec<usize> = (0..self.finest().len()).collect();
        for pool in &self.pools {
            for c in &mut map {
                *c = pool.assignment[*c];
            }
        }
        map
    }

    /// Clusters `C_i` of finest-level vertices for every coarsest node, by table lookup.
    pub fn trace_all(&self) -> Vec<Vec<usize>> {
        let mut clusters = vec![Vec::new(); self.coarsest().len()];
        for (v, node) in self.composed_assignment().into_iter().enumerate() {
            clusters[node].push(v);
        }
        clusters
    }

    /// Finest-level vertices merged into coarsest node `node`, ascending.
    pub fn trace(&self, node: usize) -> Vec<usize> {
        // walk down level by level: T_1^{-1} ∘ ... ∘ T_{L-1}^{-1}
        let mut current = vec![node];
        for pool in self.pools.iter().rev() {
            let members: Vec<Vec<usize>> = pool.clusters();
            current = current
                .iter()
                .flat_map(|&c| members[c].iter().copied())
                .collect();
        }
        current.sort_unstable();
        current
    }
}
