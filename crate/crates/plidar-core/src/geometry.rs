//! Pinhole-camera conversions between depth maps and point clouds.
//!
//! Depth maps are dense row-major grids of metric depths where `0.0`
//! means "no measurement". Back-projection turns every valid pixel into
//! a 3D point on its pixel-center ray; projection rasterizes a cloud
//! back into a depth map with a minimum-depth z-buffer.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Errors from geometry constructors and operations.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Focal length was zero, negative, or not finite.
    InvalidFocalLength(f64),
    /// A principal-point coordinate was not finite.
    InvalidPrincipalPoint(f64),
    /// Depth buffer length does not match `width * height`.
    DepthLengthMismatch { expected: usize, got: usize },
    /// A depth value was negative or not finite.
    InvalidDepth { index: usize, value: f64 },
    /// A point coordinate was not finite.
    InvalidPoint { index: usize },
    /// Per-point data (attributes or pixel origins) has the wrong count.
    CountMismatch { points: usize, got: usize },
    /// Crop target exceeds the source dimensions.
    CropTooLarge {
        width: u32,
        height: u32,
        target_w: u32,
        target_h: u32,
    },
    /// Two depth maps that must share dimensions do not.
    DimensionMismatch {
        a: (u32, u32),
        b: (u32, u32),
    },
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::InvalidFocalLength(v) => {
                write!(f, "focal length must be positive and finite, got {v}")
            }
            GeometryError::InvalidPrincipalPoint(v) => {
                write!(f, "principal point must be finite, got {v}")
            }
            GeometryError::DepthLengthMismatch { expected, got } => {
                write!(f, "depth buffer has {got} entries, expected {expected}")
            }
            GeometryError::InvalidDepth { index, value } => {
                write!(f, "depth at index {index} must be finite and >= 0, got {value}")
            }
            GeometryError::InvalidPoint { index } => {
                write!(f, "point {index} has a non-finite coordinate")
            }
            GeometryError::CountMismatch { points, got } => {
                write!(f, "per-point data has {got} entries for {points} points")
            }
            GeometryError::CropTooLarge {
                width,
                height,
                target_w,
                target_h,
            } => write!(
                f,
                "crop target {target_w}x{target_h} exceeds source {width}x{height}"
            ),
            GeometryError::DimensionMismatch { a, b } => {
                write!(f, "depth maps differ in size: {}x{} vs {}x{}", a.0, a.1, b.0, b.1)
            }
        }
    }
}

impl core::error::Error for GeometryError {}

/// Pinhole camera parameters mapping pixels to rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraIntrinsics {
    f_u: f64,
    f_v: f64,
    c_u: f64,
    c_v: f64,
}

impl CameraIntrinsics {
    pub fn new(f_u: f64, f_v: f64, c_u: f64, c_v: f64) -> Result<Self, GeometryError> {
        if !(f_u.is_finite() && f_u > 0.0) {
            return Err(GeometryError::InvalidFocalLength(f_u));
        }
        if !(f_v.is_finite() && f_v > 0.0) {
            return Err(GeometryError::InvalidFocalLength(f_v));
        }
        if !c_u.is_finite() {
            return Err(GeometryError::InvalidPrincipalPoint(c_u));
        }
        if !c_v.is_finite() {
            return Err(GeometryError::InvalidPrincipalPoint(c_v));
        }
        Ok(Self { f_u, f_v, c_u, c_v })
    }

    pub fn f_u(&self) -> f64 {
        self.f_u
    }

    pub fn f_v(&self) -> f64 {
        self.f_v
    }

    pub fn c_u(&self) -> f64 {
        self.c_u
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }
}

/// Dense pixel grid of metric depths; `0.0` marks an invalid pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: u32,
    height: u32,
    depths: Vec<f64>,
}

impl DepthMap {
    /// Builds a map from a row-major depth buffer in meters.
    ///
    /// Every entry must be finite and non-negative. The 200 m valid-depth
    /// ceiling is enforced by the file readers, not here, so intermediate
    /// products of warping may exceed it without being silently clamped.
    pub fn new(width: u32, height: u32, depths: Vec<f64>) -> Result<Self, GeometryError> {
        let expected = width as usize * height as usize;
        if depths.len() != expected {
            return Err(GeometryError::DepthLengthMismatch {
                expected,
                got: depths.len(),
            });
        }
        for (i, &d) in depths.iter().enumerate() {
            if !d.is_finite() || d < 0.0 {
                return Err(GeometryError::InvalidDepth { index: i, value: d });
            }
        }
        Ok(Self {
            width,
            height,
            depths,
        })
    }

    /// All-invalid map of the given size.
    pub fn zeros(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            depths: vec![0.0; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> f64 {
        self.depths[v as usize * self.width as usize + u as usize]
    }

    #[inline]
    pub fn is_valid(&self, u: u32, v: u32) -> bool {
        self.get(u, v) > 0.0
    }

    /// Number of pixels with a measurement.
    pub fn valid_count(&self) -> usize {
        self.depths.iter().filter(|&&d| d > 0.0).count()
    }

    pub fn same_dimensions(&self, other: &DepthMap) -> Result<(), GeometryError> {
        if self.width != other.width || self.height != other.height {
            return Err(GeometryError::DimensionMismatch {
                a: (self.width, self.height),
                b: (other.width, other.height),
            });
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn set(&mut self, u: u32, v: u32, depth: f64) {
        self.depths[v as usize * self.width as usize + u as usize] = depth;
    }
}

/// Ordered list of 3D points in camera coordinates, with optional
/// per-point attributes and pixel provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    attributes: Option<Vec<f32>>,
    pixel_origin: Option<Vec<(u32, u32)>>,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Result<Self, GeometryError> {
        for (i, p) in points.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite() && p[2].is_finite()) {
                return Err(GeometryError::InvalidPoint { index: i });
            }
        }
        Ok(Self {
            points,
            attributes: None,
            pixel_origin: None,
        })
    }

    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            attributes: None,
            pixel_origin: None,
        }
    }

    /// Attaches a scalar attribute (e.g. reflectance) per point.
    pub fn with_attributes(mut self, attributes: Vec<f32>) -> Result<Self, GeometryError> {
        if attributes.len() != self.points.len() {
            return Err(GeometryError::CountMismatch {
                points: self.points.len(),
                got: attributes.len(),
            });
        }
        self.attributes = Some(attributes);
        Ok(self)
    }

    pub fn with_pixel_origin(mut self, origin: Vec<(u32, u32)>) -> Result<Self, GeometryError> {
        if origin.len() != self.points.len() {
            return Err(GeometryError::CountMismatch {
                points: self.points.len(),
                got: origin.len(),
            });
        }
        self.pixel_origin = Some(origin);
        Ok(self)
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn attributes(&self) -> Option<&[f32]> {
        self.attributes.as_deref()
    }

    pub fn pixel_origin(&self) -> Option<&[(u32, u32)]> {
        self.pixel_origin.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Offsets removed by [`crop_bottom`]; apply to intrinsics before using
/// the cropped map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropOffsets {
    pub left: u32,
    pub top: u32,
}

impl CropOffsets {
    /// Shifts the principal point into the cropped pixel frame.
    pub fn adjust_intrinsics(&self, k: &CameraIntrinsics) -> CameraIntrinsics {
        CameraIntrinsics {
            f_u: k.f_u,
            f_v: k.f_v,
            c_u: k.c_u - self.left as f64,
            c_v: k.c_v - self.top as f64,
        }
    }
}

/// Round-half-up to the nearest integer, for pixel rasterization.
#[inline]
fn round_half_up(x: f64) -> f64 {
    libm::floor(x + 0.5)
}

/// Back-projects every valid pixel to a 3D point on its pixel-center ray.
///
/// Output order is row-major over the image, so it is deterministic and
/// index-aligned with any flow file generated for the same map. Each
/// point records its source pixel in `pixel_origin`.
pub fn back_project(depth: &DepthMap, k: &CameraIntrinsics) -> PointCloud {
    let mut points = Vec::with_capacity(depth.valid_count());
    let mut origin = Vec::with_capacity(points.capacity());
    for v in 0..depth.height() {
        for u in 0..depth.width() {
            let z = depth.get(u, v);
            if z > 0.0 {
                let x = (u as f64 - k.c_u) * z / k.f_u;
                let y = (v as f64 - k.c_v) * z / k.f_v;
                points.push([x, y, z]);
                origin.push((u, v));
            }
        }
    }
    PointCloud {
        points,
        attributes: None,
        pixel_origin: Some(origin),
    }
}

/// Continuous image coordinates of a point, or `None` when `z <= 0`.
pub fn project_point(p: &[f64; 3], k: &CameraIntrinsics) -> Option<(f64, f64)> {
    if p[2] <= 0.0 {
        return None;
    }
    Some((
        k.f_u * p[0] / p[2] + k.c_u,
        k.f_v * p[1] / p[2] + k.c_v,
    ))
}

/// Rasterizes a cloud into a depth map.
///
/// Pixel coordinates are rounded half-up; points landing outside the
/// image or behind the camera are discarded. Collisions keep the
/// minimum depth (z-buffer).
pub fn project(pc: &PointCloud, k: &CameraIntrinsics, width: u32, height: u32) -> DepthMap {
    let mut map = DepthMap::zeros(width, height);
    for p in pc.points() {
        let Some((uf, vf)) = project_point(p, k) else {
            continue;
        };
        let u = round_half_up(uf);
        let v = round_half_up(vf);
        if u < 0.0 || v < 0.0 || u >= width as f64 || v >= height as f64 {
            continue;
        }
        let (u, v) = (u as u32, v as u32);
        let cur = map.get(u, v);
        if cur == 0.0 || p[2] < cur {
            map.set(u, v, p[2]);
        }
    }
    map
}

/// Bottom-anchored, horizontally centered crop (KITTI convention).
///
/// Returns the cropped map plus the offsets the caller must apply to the
/// intrinsics via [`CropOffsets::adjust_intrinsics`].
pub fn crop_bottom(
    depth: &DepthMap,
    target_w: u32,
    target_h: u32,
) -> Result<(DepthMap, CropOffsets), GeometryError> {
    if target_w > depth.width() || target_h > depth.height() {
        return Err(GeometryError::CropTooLarge {
            width: depth.width(),
            height: depth.height(),
            target_w,
            target_h,
        });
    }
    let left = (depth.width() - target_w) / 2;
    let top = depth.height() - target_h;
    let mut out = Vec::with_capacity(target_w as usize * target_h as usize);
    for v in 0..target_h {
        for u in 0..target_w {
            out.push(depth.get(left + u, top + v));
        }
    }
    Ok((
        DepthMap {
            width: target_w,
            height: target_h,
            depths: out,
        },
        CropOffsets { left, top },
    ))
}
