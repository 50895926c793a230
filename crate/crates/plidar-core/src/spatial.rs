//! Exact nearest-neighbor search over point clouds.
//!
//! The k-d tree is the performance core behind the Chamfer distance. It
//! is exact by contract: for any query it returns the same index and the
//! same (bitwise) squared distance as [`nearest_brute`], including the
//! lowest-index rule at ties. Both paths compute distances through
//! [`crate::sq_dist`] so the summation order is identical.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::PointCloud;
use crate::sq_dist;

/// Default number of points per leaf.
pub const DEFAULT_LEAF_SIZE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmptyCloudError;

impl fmt::Display for EmptyCloudError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "nearest-neighbor search requires a non-empty cloud")
    }
}

impl core::error::Error for EmptyCloudError {}

#[derive(Debug, Clone)]
enum Node {
    Split {
        axis: u8,
        value: f64,
        /// Index of the right child; the left child is `self + 1`.
        right: u32,
    },
    Leaf {
        start: u32,
        end: u32,
    },
}

/// Immutable balanced 3-d tree over a point list.
///
/// Built once, then read-only; safe for unlimited concurrent readers.
#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<[f64; 3]>,
    /// Permutation of original indices, partitioned by the nodes.
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl KdTree {
    /// Builds a tree with the default leaf size.
    pub fn build(pc: &PointCloud) -> Result<Self, EmptyCloudError> {
        Self::build_with_leaf_size(pc, DEFAULT_LEAF_SIZE)
    }

    /// Builds with an explicit leaf size (for benchmarking).
    pub fn build_with_leaf_size(
        pc: &PointCloud,
        leaf_size: usize,
    ) -> Result<Self, EmptyCloudError> {
        if pc.is_empty() {
            return Err(EmptyCloudError);
        }
        let leaf_size = leaf_size.max(1);
        let points = pc.points().to_vec();
        let mut order: Vec<u32> = (0..points.len() as u32).collect();
        let mut nodes = Vec::new();
        build_node(&points, &mut order, 0, &mut nodes, leaf_size);
        Ok(Self {
            points,
            order,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Exact nearest neighbor: index of the closest stored point and the
    /// squared Euclidean distance to it. Ties break to the lowest index.
    pub fn nearest(&self, q: &[f64; 3]) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        self.search(0, q, &mut best);
        best
    }

    fn search(&self, node: usize, q: &[f64; 3], best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &idx in &self.order[start as usize..end as usize] {
                    let d = sq_dist(q, &self.points[idx as usize]);
                    let idx = idx as usize;
                    if d < best.1 || (d == best.1 && idx < best.0) {
                        *best = (idx, d);
                    }
                }
            }
            Node::Split { axis, value, right } => {
                let diff = q[axis as usize] - value;
                let (near, far) = if diff < 0.0 {
                    (node + 1, right as usize)
                } else {
                    (right as usize, node + 1)
                };
                self.search(near, q, best);
                // <= so that equal-distance candidates on the far side are
                // still visited (lowest-index tie-break must see them).
                if diff * diff <= best.1 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn build_node(
    points: &[[f64; 3]],
    order: &mut [u32],
    offset: usize,
    nodes: &mut Vec<Node>,
    leaf_size: usize,
) {
    if order.len() <= leaf_size {
        nodes.push(Node::Leaf {
            start: offset as u32,
            end: (offset + order.len()) as u32,
        });
        return;
    }
    // Median split on the widest axis of the bounding box.
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in order.iter() {
        let p = &points[i as usize];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let mut axis = 0;
    for a in 1..3 {
        if hi[a] - lo[a] > hi[axis] - lo[axis] {
            axis = a;
        }
    }
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        points[a as usize][axis]
            .partial_cmp(&points[b as usize][axis])
            .unwrap()
    });
    let value = points[order[mid] as usize][axis];

    let this = nodes.len();
    nodes.push(Node::Split {
        axis: axis as u8,
        value,
        right: 0, // patched below
    });
    let (left, right_slice) = order.split_at_mut(mid);
    build_node(points, left, offset, nodes, leaf_size);
    let right_node = nodes.len() as u32;
    if let Node::Split { right, .. } = &mut nodes[this] {
        *right = right_node;
    }
    build_node(points, right_slice, offset + mid, nodes, leaf_size);
}

/// Linear-scan nearest neighbor with the same tie-break rule as
/// [`KdTree::nearest`]. Reference semantics for the index.
pub fn nearest_brute(pc: &PointCloud, q: &[f64; 3]) -> Result<(usize, f64), EmptyCloudError> {
    if pc.is_empty() {
        return Err(EmptyCloudError);
    }
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in pc.points().iter().enumerate() {
        let d = sq_dist(q, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    Ok(best)
}
