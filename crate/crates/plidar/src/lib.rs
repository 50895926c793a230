//! IO, synthetic-scene generation, and the batch evaluation harness for
//! Pseudo-LiDAR point cloud interpolation. The algorithmic core lives in
//! `plidar-core`; this crate adds everything that touches the filesystem:
//!
//! - 16-bit depth-map PNGs (KITTI depth-completion convention, 1/256 m)
//! - binary point clouds (little-endian f32 x/y/z/attribute records)
//! - `PLSF0001` scene-flow files, index-aligned with back-projected maps
//! - ASCII PLY export for viewers
//! - plain-text intrinsics files
//! - a seeded synthetic-scene generator with exact motion oracles
//! - the `plidar` CLI: interpolate, evaluate, baseline, synth, bench

pub mod harness;
pub mod io;
pub mod synth;

pub use harness::{AggregateReport, FrameRow, RunConfig};
pub use io::IoError;
pub use synth::{OracleFlowProvider, RigidMotion, SceneSpec, SyntheticScene};
