//! Core machinery for Pseudo-LiDAR point cloud interpolation.
//!
//! This crate holds the pure algorithmic parts of the pipeline: pinhole
//! geometry between depth maps and point clouds, an exact k-d tree for
//! nearest-neighbor search, Chamfer / Earth Mover's distance metrics with
//! the KITTI-style depth-map error suite, differentiable loss functions,
//! and the deterministic temporal interpolation operators (scene-flow
//! warping, midpoint synthesis, baselines, hole-filling densification).
//!
//! Everything here is `no_std` + `alloc`: no IO, no global state, no
//! threads. All types are immutable values after construction and all
//! operations are pure functions, so anything in this crate is safe to
//! call concurrently. File formats, the synthetic scene generator and the
//! CLI live in the companion `plidar` crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod geometry;
pub mod interp;
pub mod loss;
pub mod metrics;
pub mod spatial;

pub use geometry::{CameraIntrinsics, CropOffsets, DepthMap, PointCloud};
pub use interp::{
    DensifyParams, FlowDirection, FlowProvider, InterpolationMode, OpticalFlow, PipelineParams,
    SceneFlow,
};
pub use loss::LossWeights;
pub use metrics::MetricsReport;
pub use spatial::KdTree;

/// Squared Euclidean distance between two points.
///
/// Every distance in this crate funnels through this function so that the
/// k-d tree and the brute-force oracle produce bitwise-identical values
/// (same summation order: x, y, z).
#[inline]
pub fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}
