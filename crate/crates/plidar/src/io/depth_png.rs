//! 16-bit grayscale depth-map PNGs, KITTI depth-completion convention:
//! depth in meters = stored value / 256, stored 0 = no measurement.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use plidar_core::geometry::DepthMap;

use super::IoError;

/// Stored units per meter.
pub const DEPTH_SCALE: f64 = 256.0;

/// Valid-depth ceiling; measurements beyond LiDAR range are rejected at
/// read time rather than silently clamped.
pub const MAX_DEPTH_M: f64 = 200.0;

pub fn read_depth_png(path: &Path) -> Result<DepthMap, IoError> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => IoError::file(path, io),
        other => IoError::BadImage {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })?;
    let DynamicImage::ImageLuma16(img) = img else {
        return Err(IoError::NotLuma16 {
            path: path.to_path_buf(),
        });
    };
    let (width, height) = img.dimensions();
    let mut depths = Vec::with_capacity(width as usize * height as usize);
    for (i, px) in img.pixels().enumerate() {
        let d = px.0[0] as f64 / DEPTH_SCALE;
        if d > MAX_DEPTH_M {
            let u = i as u32 % width;
            let v = i as u32 / width;
            return Err(IoError::DepthOutOfRange {
                path: path.to_path_buf(),
                u,
                v,
                depth_m: d,
            });
        }
        depths.push(d);
    }
    DepthMap::new(width, height, depths)
        .map_err(|e| IoError::Invalid(e.to_string()))
}

pub fn write_depth_png(depth: &DepthMap, path: &Path) -> Result<(), IoError> {
    let mut buf: Vec<u16> = Vec::with_capacity(depth.depths().len());
    for &d in depth.depths() {
        let stored = (d * DEPTH_SCALE + 0.5).floor();
        if stored > u16::MAX as f64 {
            return Err(IoError::DepthNotEncodable { depth_m: d });
        }
        buf.push(stored as u16);
    }
    let img: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(depth.width(), depth.height(), buf)
            .expect("buffer sized from the map");
    img.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => IoError::file(path, io),
        other => IoError::BadImage {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
