//! Evaluation metrics: KITTI-style depth-map errors (RMSE / MAE and
//! their inverse-depth variants) plus point-cloud Chamfer distance and
//! exact Earth Mover's Distance.
//!
//! Units: depth errors are reported in millimeters, inverse-depth errors
//! in 1/km, Chamfer values in m² (squared norms), EMD in meters
//! (unsquared norms). The squared-vs-unsquared mismatch between CD and
//! EMD is deliberate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{DepthMap, GeometryError, PointCloud};
use crate::spatial::{nearest_brute, EmptyCloudError, KdTree};

/// Hard cap on exact EMD input size; the assignment solve is O(n³).
pub const EMD_MAX_POINTS: usize = 512;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// Depth maps differ in size.
    Dimension(GeometryError),
    /// Ground truth has no valid pixel; depth metrics are undefined.
    NoValidPixels,
    /// A Chamfer input cloud was empty.
    EmptyCloud,
    /// EMD requires equal-size clouds.
    SizeMismatch { a: usize, b: usize },
    /// EMD input exceeds [`EMD_MAX_POINTS`]; sample the clouds first.
    OverLimit { n: usize },
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::Dimension(e) => write!(f, "{e}"),
            MetricsError::NoValidPixels => {
                write!(f, "ground truth has no valid pixels; depth metrics undefined")
            }
            MetricsError::EmptyCloud => write!(f, "point-cloud metric requires non-empty clouds"),
            MetricsError::SizeMismatch { a, b } => {
                write!(f, "EMD requires equal-size clouds, got {a} and {b}")
            }
            MetricsError::OverLimit { n } => write!(
                f,
                "EMD limited to {EMD_MAX_POINTS} points (O(n^3) assignment), got {n}; \
                 subsample the clouds first"
            ),
        }
    }
}

impl core::error::Error for MetricsError {}

impl From<EmptyCloudError> for MetricsError {
    fn from(_: EmptyCloudError) -> Self {
        MetricsError::EmptyCloud
    }
}

/// Per-frame metric values. Depth fields come from [`depth_metrics`],
/// cloud fields from [`chamfer`]; the harness merges both.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    /// Root mean squared depth error, millimeters.
    pub rmse_mm: f64,
    /// Mean absolute depth error, millimeters.
    pub mae_mm: f64,
    /// RMSE of inverse depth, 1/km.
    pub irmse_per_km: f64,
    /// MAE of inverse depth, 1/km.
    pub imae_per_km: f64,
    /// Pixels with valid ground truth (evaluation set size).
    pub n_valid: usize,
    /// Pixels excluded from the inverse metrics because pred was 0.
    pub n_inverse_excluded: usize,
    /// Symmetric Chamfer sum, m².
    pub cd_sum_m2: f64,
    /// Per-point Chamfer mean, m² per point.
    pub cd_mean_m2: f64,
    pub n_pred: usize,
    pub n_gt: usize,
}

/// Depth-map error metrics over the pixels where `gt > 0`.
///
/// Pixels the prediction left empty count in RMSE/MAE with pred = 0 and
/// are excluded from the inverse metrics (their inverse is undefined).
pub fn depth_metrics(pred: &DepthMap, gt: &DepthMap) -> Result<MetricsReport, MetricsError> {
    pred.same_dimensions(gt).map_err(MetricsError::Dimension)?;

    let mut n_valid = 0usize;
    let mut sum_sq_mm = 0.0;
    let mut sum_abs_mm = 0.0;
    let mut n_inv = 0usize;
    let mut sum_sq_inv = 0.0;
    let mut sum_abs_inv = 0.0;

    for (&p, &g) in pred.depths().iter().zip(gt.depths()) {
        if g <= 0.0 {
            continue;
        }
        n_valid += 1;
        let err_mm = (p - g) * 1000.0;
        sum_sq_mm += err_mm * err_mm;
        sum_abs_mm += err_mm.abs();
        if p > 0.0 {
            n_inv += 1;
            // inverse depth in 1/km: 1000 / depth_m
            let err_inv = 1000.0 / p - 1000.0 / g;
            sum_sq_inv += err_inv * err_inv;
            sum_abs_inv += err_inv.abs();
        }
    }
    if n_valid == 0 {
        return Err(MetricsError::NoValidPixels);
    }

    let (irmse, imae) = if n_inv > 0 {
        (
            libm::sqrt(sum_sq_inv / n_inv as f64),
            sum_abs_inv / n_inv as f64,
        )
    } else {
        (0.0, 0.0)
    };
    Ok(MetricsReport {
        rmse_mm: libm::sqrt(sum_sq_mm / n_valid as f64),
        mae_mm: sum_abs_mm / n_valid as f64,
        irmse_per_km: irmse,
        imae_per_km: imae,
        n_valid,
        n_inverse_excluded: n_valid - n_inv,
        ..MetricsReport::default()
    })
}

/// Directional Chamfer term: sum over `a` of the squared distance to the
/// nearest point of `b`, accelerated by the k-d tree. Summation runs in
/// index order of `a`.
pub fn chamfer_directional(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricsError> {
    if a.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let tree = KdTree::build(b)?;
    let mut sum = 0.0;
    for p in a.points() {
        sum += tree.nearest(p).1;
    }
    Ok(sum)
}

/// Same as [`chamfer_directional`] but via linear scans; reference path
/// for tests and benchmarking.
pub fn chamfer_directional_brute(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricsError> {
    if a.is_empty() || b.is_empty() {
        return Err(MetricsError::EmptyCloud);
    }
    let mut sum = 0.0;
    for p in a.points() {
        sum += nearest_brute(b, p)?.1;
    }
    Ok(sum)
}

/// Symmetric Chamfer distance.
///
/// `cd_sum` adds both directional terms; `cd_mean` normalizes each
/// direction by its own cloud size before adding, so it is comparable
/// across clouds of different sizes (the headline value).
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<(f64, f64), MetricsError> {
    let ab = chamfer_directional(a, b)?;
    let ba = chamfer_directional(b, a)?;
    Ok((ab + ba, ab / a.len() as f64 + ba / b.len() as f64))
}

/// Exact Earth Mover's Distance: minimum over bijections of the summed
/// unsquared Euclidean distances, solved by the Hungarian algorithm on
/// the full pairwise distance matrix.
pub fn emd_exact(a: &PointCloud, b: &PointCloud) -> Result<f64, MetricsError> {
    let n = a.len();
    if n != b.len() {
        return Err(MetricsError::SizeMismatch {
            a: n,
            b: b.len(),
        });
    }
    if n == 0 {
        return Err(MetricsError::EmptyCloud);
    }
    if n > EMD_MAX_POINTS {
        return Err(MetricsError::OverLimit { n });
    }

    let mut cost = vec![0.0f64; n * n];
    for (i, p) in a.points().iter().enumerate() {
        for (j, q) in b.points().iter().enumerate() {
            cost[i * n + j] = libm::sqrt(crate::sq_dist(p, q));
        }
    }
    let assignment = solve_assignment(&cost, n);
    let total = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i * n + j])
        .sum();
    Ok(total)
}

/// Hungarian algorithm (Jonker-Volgenant variant with potentials),
/// O(n³). Returns for each row the assigned column of a minimum-cost
/// perfect matching on the n×n cost matrix.
fn solve_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    // 1-based arrays; p[j] is the row matched to column j, p[0] scratch.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    for j in 1..=n {
        row_to_col[p[j] - 1] = j - 1;
    }
    row_to_col
}
