//! Per-frame rows and their aggregation into CSV / JSON reports.

use anyhow::Result;
use plidar_core::metrics::MetricsReport;
use serde_json::json;

pub const CSV_HEADER: &str =
    "frame_id,rmse_mm,mae_mm,irmse_per_km,imae_per_km,cd_mean_m2,cd_sum_m2,n_valid,wall_ms";

#[derive(Debug, Clone)]
pub struct FrameRow {
    pub frame_id: String,
    pub metrics: MetricsReport,
    pub wall_ms: f64,
}

/// Mean (or standard deviation) of the floating-point columns.
#[derive(Debug, Clone, Copy, Default)]
pub struct AggregateStats {
    pub rmse_mm: f64,
    pub mae_mm: f64,
    pub irmse_per_km: f64,
    pub imae_per_km: f64,
    pub cd_mean_m2: f64,
    pub cd_sum_m2: f64,
    pub n_valid: f64,
    pub wall_ms: f64,
}

impl AggregateStats {
    fn columns(row: &FrameRow) -> [f64; 8] {
        [
            row.metrics.rmse_mm,
            row.metrics.mae_mm,
            row.metrics.irmse_per_km,
            row.metrics.imae_per_km,
            row.metrics.cd_mean_m2,
            row.metrics.cd_sum_m2,
            row.metrics.n_valid as f64,
            row.wall_ms,
        ]
    }

    fn from_columns(c: [f64; 8]) -> Self {
        Self {
            rmse_mm: c[0],
            mae_mm: c[1],
            irmse_per_km: c[2],
            imae_per_km: c[3],
            cd_mean_m2: c[4],
            cd_sum_m2: c[5],
            n_valid: c[6],
            wall_ms: c[7],
        }
    }
}

#[derive(Debug, Clone)]
pub struct AggregateReport {
    pub rows: Vec<FrameRow>,
    pub mean: AggregateStats,
    /// Population standard deviation (zero for a single frame).
    pub std: AggregateStats,
}

impl AggregateReport {
    pub fn from_rows(rows: Vec<FrameRow>) -> Result<Self> {
        anyhow::ensure!(!rows.is_empty(), "no frames to aggregate");
        let n = rows.len() as f64;
        let mut mean = [0.0f64; 8];
        for row in &rows {
            for (m, v) in mean.iter_mut().zip(AggregateStats::columns(row)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = [0.0f64; 8];
        for row in &rows {
            for ((s, v), m) in var.iter_mut().zip(AggregateStats::columns(row)).zip(mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut var {
            *s = (*s / n).sqrt();
        }
        Ok(Self {
            rows,
            mean: AggregateStats::from_columns(mean),
            std: AggregateStats::from_columns(var),
        })
    }

    /// One line per frame plus a trailing `mean` row, fixed column order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let m = &row.metrics;
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.frame_id,
                m.rmse_mm,
                m.mae_mm,
                m.irmse_per_km,
                m.imae_per_km,
                m.cd_mean_m2,
                m.cd_sum_m2,
                m.n_valid,
                row.wall_ms
            ));
        }
        let a = &self.mean;
        out.push_str(&format!(
            "mean,{},{},{},{},{},{},{},{}\n",
            a.rmse_mm,
            a.mae_mm,
            a.irmse_per_km,
            a.imae_per_km,
            a.cd_mean_m2,
            a.cd_sum_m2,
            a.n_valid,
            a.wall_ms
        ));
        out
    }

    pub fn to_json(&self) -> String {
        let stats = |s: &AggregateStats| {
            json!({
                "rmse_mm": s.rmse_mm,
                "mae_mm": s.mae_mm,
                "irmse_per_km": s.irmse_per_km,
                "imae_per_km": s.imae_per_km,
                "cd_mean_m2": s.cd_mean_m2,
                "cd_sum_m2": s.cd_sum_m2,
                "n_valid": s.n_valid,
                "wall_ms": s.wall_ms,
            })
        };
        let frames: Vec<_> = self
            .rows
            .iter()
            .map(|row| {
                let m = &row.metrics;
                json!({
                    "frame_id": row.frame_id,
                    "rmse_mm": m.rmse_mm,
                    "mae_mm": m.mae_mm,
                    "irmse_per_km": m.irmse_per_km,
                    "imae_per_km": m.imae_per_km,
                    "cd_mean_m2": m.cd_mean_m2,
                    "cd_sum_m2": m.cd_sum_m2,
                    "n_valid": m.n_valid,
                    "wall_ms": row.wall_ms,
                })
            })
            .collect();
        serde_json::to_string_pretty(&json!({
            "frames": frames,
            "mean": stats(&self.mean),
            "std": stats(&self.std),
        }))
        .expect("json value serializes")
    }
}
