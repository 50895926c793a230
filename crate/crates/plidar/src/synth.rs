//! Seeded synthetic scenes with exact motion oracles.
//!
//! A scene is simple geometry (fronto-parallel planes and axis-aligned
//! boxes) sampled on pixel-center rays, moved rigidly between frames.
//! Because every ground-truth point sits exactly on a pixel-center ray,
//! back-projecting the rendered maps reproduces the clouds exactly, and
//! the analytic flows make the warping pipeline testable to tight
//! tolerances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use plidar_core::geometry::{back_project, CameraIntrinsics, DepthMap, PointCloud};
use plidar_core::interp::{
    FlowDirection, FlowProvider, InterpError, OpticalFlow, SceneFlow,
};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("rotation magnitude {0} rad exceeds the pi/4 limit")]
    RotationTooLarge(f64),
    #[error("translation magnitude {0} m exceeds the 5 m limit")]
    TranslationTooLarge(f64),
    #[error("sparsity must lie in (0, 1], got {0}")]
    BadSparsity(f64),
    #[error("scene geometry is empty: no pixel ray hits a primitive")]
    EmptyScene,
}

/// Rigid motion as axis-angle rotation (vector direction = axis,
/// magnitude = angle in radians) followed by a translation in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidMotion {
    pub axis_angle: [f64; 3],
    pub translation: [f64; 3],
}

impl RigidMotion {
    pub fn identity() -> Self {
        Self {
            axis_angle: [0.0; 3],
            translation: [0.0; 3],
        }
    }

    pub fn translation(t: [f64; 3]) -> Self {
        Self {
            axis_angle: [0.0; 3],
            translation: t,
        }
    }

    pub fn angle(&self) -> f64 {
        let a = &self.axis_angle;
        (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
    }

    /// Rodrigues rotation matrix.
    fn rotation(&self) -> [[f64; 3]; 3] {
        let theta = self.angle();
        if theta < 1e-15 {
            return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        }
        let k = [
            self.axis_angle[0] / theta,
            self.axis_angle[1] / theta,
            self.axis_angle[2] / theta,
        ];
        let (s, c) = theta.sin_cos();
        let v = 1.0 - c;
        [
            [
                c + k[0] * k[0] * v,
                k[0] * k[1] * v - k[2] * s,
                k[0] * k[2] * v + k[1] * s,
            ],
            [
                k[1] * k[0] * v + k[2] * s,
                c + k[1] * k[1] * v,
                k[1] * k[2] * v - k[0] * s,
            ],
            [
                k[2] * k[0] * v - k[1] * s,
                k[2] * k[1] * v + k[0] * s,
                c + k[2] * k[2] * v,
            ],
        ]
    }

    pub fn apply(&self, p: &[f64; 3]) -> [f64; 3] {
        let r = self.rotation();
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + self.translation[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + self.translation[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + self.translation[2],
        ]
    }

    /// Motion scaled to a fraction of the interval (half motion = 0.5).
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            axis_angle: [
                self.axis_angle[0] * s,
                self.axis_angle[1] * s,
                self.axis_angle[2] * s,
            ],
            translation: [
                self.translation[0] * s,
                self.translation[1] * s,
                self.translation[2] * s,
            ],
        }
    }

    pub fn inverse(&self) -> Self {
        let neg = Self {
            axis_angle: [
                -self.axis_angle[0],
                -self.axis_angle[1],
                -self.axis_angle[2],
            ],
            translation: [0.0; 3],
        };
        let r_inv = neg.rotation();
        Self {
            axis_angle: neg.axis_angle,
            translation: [
                -(r_inv[0][0] * self.translation[0]
                    + r_inv[0][1] * self.translation[1]
                    + r_inv[0][2] * self.translation[2]),
                -(r_inv[1][0] * self.translation[0]
                    + r_inv[1][1] * self.translation[1]
                    + r_inv[1][2] * self.translation[2]),
                -(r_inv[2][0] * self.translation[0]
                    + r_inv[2][1] * self.translation[1]
                    + r_inv[2][2] * self.translation[2]),
            ],
        }
    }

    /// Exact flow for a cloud: `sf_i = motion(p_i) - p_i`.
    pub fn flow_for(&self, pc: &PointCloud) -> SceneFlow {
        let vectors = pc
            .points()
            .iter()
            .map(|p| {
                let q = self.apply(p);
                [q[0] - p[0], q[1] - p[1], q[2] - p[2]]
            })
            .collect();
        SceneFlow::new(vectors).expect("finite motion of finite points")
    }
}

/// Scene geometry, intersected along pixel-center rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    /// Fronto-parallel plane at constant depth.
    Plane { z: f64 },
    /// Axis-aligned box.
    Box { center: [f64; 3], size: [f64; 3] },
}

impl Primitive {
    /// Depth (z coordinate) where the ray through direction
    /// `(dx, dy, 1)` first hits this primitive, if it does.
    fn hit(&self, dx: f64, dy: f64) -> Option<f64> {
        match *self {
            Primitive::Plane { z } => (z > 0.0).then_some(z),
            Primitive::Box { center, size } => {
                let dir = [dx, dy, 1.0];
                let mut z_min = 0.0f64;
                let mut z_max = f64::INFINITY;
                for a in 0..3 {
                    let lo = center[a] - size[a] / 2.0;
                    let hi = center[a] + size[a] / 2.0;
                    if dir[a].abs() < 1e-12 {
                        if lo > 0.0 || hi < 0.0 {
                            return None;
                        }
                    } else {
                        let (t0, t1) = (lo / dir[a], hi / dir[a]);
                        let (t0, t1) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                        z_min = z_min.max(t0);
                        z_max = z_max.min(t1);
                    }
                }
                (z_min <= z_max && z_min > 0.0).then_some(z_min)
            }
        }
    }
}

/// Parameters of a synthetic scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: u32,
    pub height: u32,
    pub intrinsics: CameraIntrinsics,
    /// Full motion over the t-1 -> t+1 interval.
    pub motion: RigidMotion,
    /// Fraction of covered pixels kept in the rendered sparse maps.
    pub sparsity: f64,
    pub seed: u64,
    pub primitives: Vec<Primitive>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            width: 64,
            height: 48,
            intrinsics: CameraIntrinsics::new(600.0, 600.0, 32.0, 24.0).unwrap(),
            motion: RigidMotion::identity(),
            sparsity: 0.04,
            seed: 0,
            primitives: vec![
                Primitive::Plane { z: 20.0 },
                Primitive::Box {
                    center: [0.1, 0.05, 10.0],
                    size: [0.5, 0.5, 0.5],
                },
            ],
        }
    }
}

/// A generated scene: ground-truth clouds at t-1, t, t+1 plus the
/// rendered sparse maps. Flows come from the stored motion via
/// [`RigidMotion::flow_for`]; the clouds at t-1 sit exactly on
/// pixel-center rays.
#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub spec: SceneSpec,
    pub prev_cloud: PointCloud,
    pub mid_cloud: PointCloud,
    pub next_cloud: PointCloud,
    pub sparse_prev: DepthMap,
    pub sparse_mid: DepthMap,
    pub sparse_next: DepthMap,
}

impl SyntheticScene {
    /// Exact forward flow (t-1 -> t+1) for any cloud in the scene frame.
    pub fn flow_forward(&self, pc: &PointCloud) -> SceneFlow {
        self.spec.motion.flow_for(pc)
    }

    /// Exact backward flow (t+1 -> t-1).
    pub fn flow_backward(&self, pc: &PointCloud) -> SceneFlow {
        self.spec.motion.inverse().flow_for(pc)
    }

    pub fn oracle_provider(&self) -> OracleFlowProvider {
        OracleFlowProvider {
            motion: self.spec.motion,
        }
    }
}

pub fn generate_synthetic(spec: &SceneSpec) -> Result<SyntheticScene, SynthError> {
    if spec.motion.angle() >= core::f64::consts::FRAC_PI_4 {
        return Err(SynthError::RotationTooLarge(spec.motion.angle()));
    }
    let t = &spec.motion.translation;
    let t_norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
    if t_norm > 5.0 {
        return Err(SynthError::TranslationTooLarge(t_norm));
    }
    if !(spec.sparsity > 0.0 && spec.sparsity <= 1.0) {
        return Err(SynthError::BadSparsity(spec.sparsity));
    }

    let k = &spec.intrinsics;
    let mut points = Vec::new();
    for v in 0..spec.height {
        for u in 0..spec.width {
            let dx = (u as f64 - k.c_u()) / k.f_u();
            let dy = (v as f64 - k.c_v()) / k.f_v();
            let depth = spec
                .primitives
                .iter()
                .filter_map(|p| p.hit(dx, dy))
                .fold(f64::INFINITY, f64::min);
            if depth.is_finite() {
                points.push([dx * depth, dy * depth, depth]);
            }
        }
    }
    if points.is_empty() {
        return Err(SynthError::EmptyScene);
    }

    let half = spec.motion.scaled(0.5);
    let mid_points: Vec<[f64; 3]> = points.iter().map(|p| half.apply(p)).collect();
    let next_points: Vec<[f64; 3]> = points.iter().map(|p| spec.motion.apply(p)).collect();
    let prev_cloud = PointCloud::new(points).expect("finite geometry");
    let mid_cloud = PointCloud::new(mid_points).expect("finite geometry");
    let next_cloud = PointCloud::new(next_points).expect("finite geometry");

    let render = |pc: &PointCloud| -> DepthMap {
        let full = plidar_core::geometry::project(pc, k, spec.width, spec.height);
        // Same seed per frame: a static scene renders three identical maps.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let depths = full
            .depths()
            .iter()
            .map(|&d| {
                let keep = rng.gen::<f64>() < spec.sparsity;
                if keep {
                    d
                } else {
                    0.0
                }
            })
            .collect();
        DepthMap::new(spec.width, spec.height, depths).expect("masking preserves validity")
    };

    Ok(SyntheticScene {
        sparse_prev: render(&prev_cloud),
        sparse_mid: render(&mid_cloud),
        sparse_next: render(&next_cloud),
        spec: spec.clone(),
        prev_cloud,
        mid_cloud,
        next_cloud,
    })
}

/// Flow provider computing exact flows from the scene's rigid motion;
/// stands in for a perfect scene-flow estimator.
#[derive(Debug, Clone, Copy)]
pub struct OracleFlowProvider {
    pub motion: RigidMotion,
}

impl FlowProvider for OracleFlowProvider {
    fn scene_flow(
        &self,
        source: &PointCloud,
        direction: FlowDirection,
    ) -> Result<SceneFlow, InterpError> {
        Ok(match direction {
            FlowDirection::Forward => self.motion.flow_for(source),
            FlowDirection::Backward => self.motion.inverse().flow_for(source),
        })
    }
}

/// Oracle flows perturbed by zero-mean Gaussian noise of scale `sigma`
/// meters; deterministic per (seed, direction, count).
#[derive(Debug, Clone, Copy)]
pub struct NoisyFlowProvider {
    pub motion: RigidMotion,
    pub sigma: f64,
    pub seed: u64,
}

impl FlowProvider for NoisyFlowProvider {
    fn scene_flow(
        &self,
        source: &PointCloud,
        direction: FlowDirection,
    ) -> Result<SceneFlow, InterpError> {
        let exact = OracleFlowProvider {
            motion: self.motion,
        }
        .scene_flow(source, direction)?;
        let dir_tag = match direction {
            FlowDirection::Forward => 0u64,
            FlowDirection::Backward => 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (dir_tag << 32));
        let vectors = exact
            .vectors()
            .iter()
            .map(|v| {
                // Box-Muller; rand_distr not needed for this one use.
                let mut gauss = || {
                    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    let u2: f64 = rng.gen();
                    (-2.0 * u1.ln()).sqrt() * (2.0 * core::f64::consts::PI * u2).cos()
                };
                [
                    v[0] + self.sigma * gauss(),
                    v[1] + self.sigma * gauss(),
                    v[2] + self.sigma * gauss(),
                ]
            })
            .collect();
        SceneFlow::new(vectors)
    }
}

/// Projects a rigid motion into a per-pixel 2D optical flow over the
/// full t-1 -> t+1 interval. Pixels without depth get zero flow.
pub fn optical_flow_from_motion(
    depth: &DepthMap,
    k: &CameraIntrinsics,
    motion: &RigidMotion,
) -> OpticalFlow {
    let cloud = back_project(depth, k);
    optical_flow_from_scene_flow(depth, k, &motion.flow_for(&cloud))
}

/// Same projection but from an explicit scene flow that is index-aligned
/// with `back_project(depth, k)`.
pub fn optical_flow_from_scene_flow(
    depth: &DepthMap,
    k: &CameraIntrinsics,
    sf: &SceneFlow,
) -> OpticalFlow {
    let cloud = back_project(depth, k);
    let mut of = OpticalFlow::zeros(depth.width(), depth.height());
    let n = cloud.len().min(sf.len());
    for i in 0..n {
        let p = cloud.points()[i];
        let v = sf.vectors()[i];
        let moved = [p[0] + v[0], p[1] + v[1], p[2] + v[2]];
        let (u0, v0) = cloud.pixel_origin().unwrap()[i];
        if let Some((u1, v1)) = plidar_core::geometry::project_point(&moved, k) {
            of.set(u0, v0, [u1 - u0 as f64, v1 - v0 as f64]);
        }
    }
    of
}
