//! Binary point clouds in the KITTI velodyne layout: consecutive
//! little-endian f32 records of (x, y, z, attribute).

use std::fs;
use std::path::Path;

use plidar_core::geometry::PointCloud;

use super::IoError;

const RECORD_BYTES: usize = 16;

pub fn read_cloud_bin(path: &Path) -> Result<PointCloud, IoError> {
    let bytes = fs::read(path).map_err(|e| IoError::file(path, e))?;
    if bytes.len() % RECORD_BYTES != 0 {
        return Err(IoError::Truncated {
            path: path.to_path_buf(),
            offset: (bytes.len() / RECORD_BYTES * RECORD_BYTES) as u64,
            message: format!(
                "file length {} is not a multiple of the {RECORD_BYTES}-byte record",
                bytes.len()
            ),
        });
    }
    let n = bytes.len() / RECORD_BYTES;
    let mut points = Vec::with_capacity(n);
    let mut attrs = Vec::with_capacity(n);
    for rec in bytes.chunks_exact(RECORD_BYTES) {
        let f = |i: usize| f32::from_le_bytes(rec[4 * i..4 * i + 4].try_into().unwrap());
        points.push([f(0) as f64, f(1) as f64, f(2) as f64]);
        attrs.push(f(3));
    }
    PointCloud::new(points)
        .and_then(|pc| pc.with_attributes(attrs))
        .map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn write_cloud_bin(pc: &PointCloud, path: &Path) -> Result<(), IoError> {
    let mut bytes = Vec::with_capacity(pc.len() * RECORD_BYTES);
    for (i, p) in pc.points().iter().enumerate() {
        let attr = pc.attributes().map_or(0.0, |a| a[i]);
        for v in [p[0] as f32, p[1] as f32, p[2] as f32, attr] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|e| IoError::file(path, e))
}
