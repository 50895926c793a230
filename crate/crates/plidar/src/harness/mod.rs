//! Batch evaluation harness: frame discovery, per-frame pipeline runs
//! with isolated failures, metric aggregation, and report emission.

mod report;

pub use report::{AggregateReport, AggregateStats, FrameRow, CSV_HEADER};

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Deserialize;

use plidar_core::geometry::{back_project, CameraIntrinsics, DepthMap};
use plidar_core::interp::{
    average_baseline, interpolate_frame, merge_min, warp_depth_by_optical_flow, FlowDirection,
    FlowProvider, InterpError, PipelineParams, SceneFlow,
};
use plidar_core::metrics::{chamfer, depth_metrics, MetricsReport};
use plidar_core::spatial::KdTree;
use plidar_core::PointCloud;

use crate::io;
use crate::synth::{self, SceneSpec};

/// Values readable from a `--config` TOML file; command-line flags
/// override anything set here.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub prev: Option<PathBuf>,
    pub next: Option<PathBuf>,
    pub flow_fwd: Option<PathBuf>,
    pub flow_bwd: Option<PathBuf>,
    pub pred: Option<PathBuf>,
    pub gt: Option<PathBuf>,
    pub gt_depth: Option<PathBuf>,
    pub intrinsics: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub mode: Option<String>,
    pub alpha: Option<f64>,
    pub densify_k: Option<usize>,
    pub densify_radius: Option<u32>,
    pub report: Option<String>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub sample_points: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Flow files read from disk; validated against the source cloud at
/// lookup time.
#[derive(Debug, Clone, Default)]
pub struct FileFlowProvider {
    pub forward: Option<SceneFlow>,
    pub backward: Option<SceneFlow>,
}

impl FlowProvider for FileFlowProvider {
    fn scene_flow(
        &self,
        source: &PointCloud,
        direction: FlowDirection,
    ) -> Result<SceneFlow, InterpError> {
        let (flow, name) = match direction {
            FlowDirection::Forward => (&self.forward, "forward"),
            FlowDirection::Backward => (&self.backward, "backward"),
        };
        let Some(flow) = flow else {
            return Err(InterpError::Provider(format!("no {name} flow supplied")));
        };
        if flow.len() != source.len() {
            return Err(InterpError::CountMismatch {
                expected: source.len(),
                got: flow.len(),
            });
        }
        Ok(flow.clone())
    }
}

/// Expands a path to the sorted list of frame files: a directory yields
/// its entries with the given extension, a file yields itself.
pub fn list_frames(path: &Path, extension: &str) -> Result<Vec<PathBuf>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)
            .with_context(|| format!("listing {}", path.display()))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == extension))
            .collect();
        files.sort();
        if files.is_empty() {
            bail!("no .{extension} files in {}", path.display());
        }
        Ok(files)
    } else if path.is_file() {
        Ok(vec![path.to_path_buf()])
    } else {
        bail!("{} does not exist", path.display());
    }
}

fn frame_id(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "frame".into())
}

/// Outcome of a batch command; per-frame failures are isolated and the
/// process exit code encodes whether any occurred.
#[derive(Debug, Default)]
pub struct BatchOutcome {
    pub processed: usize,
    pub failures: Vec<(String, String)>,
}

impl BatchOutcome {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

pub struct InterpolateJob {
    pub prev: Vec<PathBuf>,
    pub next: Vec<PathBuf>,
    pub flow_fwd: Option<Vec<PathBuf>>,
    pub flow_bwd: Option<Vec<PathBuf>>,
    pub intrinsics: CameraIntrinsics,
    pub out_dir: PathBuf,
    pub params: PipelineParams,
    pub write_ply: bool,
}

/// Runs the full interpolation pipeline over each frame triple, writing
/// a dense 16-bit depth map and a binary cloud (plus optional PLY).
pub fn run_interpolate(job: &InterpolateJob) -> Result<BatchOutcome> {
    if job.prev.len() != job.next.len() {
        bail!(
            "frame count mismatch: {} prev vs {} next",
            job.prev.len(),
            job.next.len()
        );
    }
    for (name, flows) in [("forward", &job.flow_fwd), ("backward", &job.flow_bwd)] {
        if let Some(flows) = flows {
            if flows.len() != job.prev.len() {
                bail!(
                    "frame count mismatch: {} {name} flows vs {} frames",
                    flows.len(),
                    job.prev.len()
                );
            }
        }
    }
    std::fs::create_dir_all(&job.out_dir)?;

    let results: Vec<(String, Result<(), String>)> = (0..job.prev.len())
        .into_par_iter()
        .map(|i| {
            let id = frame_id(&job.prev[i]);
            let run = |id: &str| -> Result<()> {
                let d_prev = io::read_depth_png(&job.prev[i])?;
                let d_next = io::read_depth_png(&job.next[i])?;
                let provider = FileFlowProvider {
                    forward: job
                        .flow_fwd
                        .as_ref()
                        .map(|f| io::read_scene_flow(&f[i]))
                        .transpose()?,
                    backward: job
                        .flow_bwd
                        .as_ref()
                        .map(|f| io::read_scene_flow(&f[i]))
                        .transpose()?,
                };
                let (dense, cloud) =
                    interpolate_frame(&d_prev, &d_next, &provider, &job.intrinsics, &job.params)?;
                io::write_depth_png(&dense, &job.out_dir.join(format!("{id}_dense.png")))?;
                io::write_cloud_bin(&cloud, &job.out_dir.join(format!("{id}_cloud.bin")))?;
                if job.write_ply {
                    io::write_ply(&cloud, &job.out_dir.join(format!("{id}_cloud.ply")))?;
                }
                Ok(())
            };
            let result = run(&id).map_err(|e| format!("{e:#}"));
            (id, result)
        })
        .collect();

    let mut outcome = BatchOutcome::default();
    for (id, r) in results {
        match r {
            Ok(()) => outcome.processed += 1,
            Err(msg) => outcome.failures.push((id, msg)),
        }
    }
    Ok(outcome)
}

/// Depth metrics against ground-truth maps plus Chamfer distance between
/// the back-projected clouds, one row per frame.
pub fn run_evaluate(
    pred: &[PathBuf],
    gt: &[PathBuf],
    k: &CameraIntrinsics,
) -> Result<AggregateReport> {
    if pred.len() != gt.len() {
        bail!(
            "frame count mismatch: {} predictions vs {} ground truths",
            pred.len(),
            gt.len()
        );
    }
    let rows: Vec<Result<FrameRow>> = pred
        .par_iter()
        .zip(gt)
        .map(|(pred_path, gt_path)| {
            let start = Instant::now();
            let pred_map = io::read_depth_png(pred_path)?;
            let gt_map = io::read_depth_png(gt_path)?;
            let metrics = evaluate_frame(&pred_map, &gt_map, k)?;
            Ok(FrameRow {
                frame_id: frame_id(pred_path),
                metrics,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect();
    AggregateReport::from_rows(rows.into_iter().collect::<Result<Vec<_>>>()?)
}

/// One frame's full metric set: depth errors plus cloud Chamfer.
pub fn evaluate_frame(
    pred: &DepthMap,
    gt: &DepthMap,
    k: &CameraIntrinsics,
) -> Result<MetricsReport> {
    let mut metrics = depth_metrics(pred, gt)?;
    let pred_pc = back_project(pred, k);
    let gt_pc = back_project(gt, k);
    let (cd_sum, cd_mean) = chamfer(&pred_pc, &gt_pc)?;
    metrics.cd_sum_m2 = cd_sum;
    metrics.cd_mean_m2 = cd_mean;
    metrics.n_pred = pred_pc.len();
    metrics.n_gt = gt_pc.len();
    Ok(metrics)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Average,
    OpticalFlow,
}

pub struct BaselineJob {
    pub kind: BaselineKind,
    pub prev: Vec<PathBuf>,
    pub next: Vec<PathBuf>,
    /// Scene-flow files for the optical-flow baseline; the 2D flow is
    /// obtained by projecting them (discarding the depth component).
    pub flow_fwd: Option<Vec<PathBuf>>,
    pub flow_bwd: Option<Vec<PathBuf>>,
    pub gt: Vec<PathBuf>,
    pub intrinsics: CameraIntrinsics,
    pub out_dir: PathBuf,
    pub alpha: f64,
}

/// Runs a baseline interpolator through the same evaluation path as the
/// pipeline, for side-by-side reports.
pub fn run_baseline(job: &BaselineJob) -> Result<AggregateReport> {
    if job.prev.len() != job.next.len() || job.prev.len() != job.gt.len() {
        bail!(
            "frame count mismatch: {} prev / {} next / {} gt",
            job.prev.len(),
            job.next.len(),
            job.gt.len()
        );
    }
    std::fs::create_dir_all(&job.out_dir)?;
    let rows: Vec<Result<FrameRow>> = (0..job.prev.len())
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let id = frame_id(&job.prev[i]);
            let d_prev = io::read_depth_png(&job.prev[i])?;
            let d_next = io::read_depth_png(&job.next[i])?;
            let mid = match job.kind {
                BaselineKind::Average => average_baseline(&d_prev, &d_next)?,
                BaselineKind::OpticalFlow => {
                    let read_flow = |set: &Option<Vec<PathBuf>>, name: &str| {
                        set.as_ref()
                            .map(|f| io::read_scene_flow(&f[i]))
                            .transpose()?
                            .ok_or_else(|| {
                                anyhow::anyhow!("optical-flow baseline needs {name} flow files")
                            })
                    };
                    let sf_fwd = read_flow(&job.flow_fwd, "forward")?;
                    let sf_bwd = read_flow(&job.flow_bwd, "backward")?;
                    optical_flow_baseline(
                        &d_prev,
                        &d_next,
                        &sf_fwd,
                        &sf_bwd,
                        &job.intrinsics,
                        job.alpha,
                    )?
                }
            };
            io::write_depth_png(&mid, &job.out_dir.join(format!("{id}_baseline.png")))?;
            let gt_map = io::read_depth_png(&job.gt[i])?;
            let metrics = evaluate_frame(&mid, &gt_map, &job.intrinsics)?;
            Ok(FrameRow {
                frame_id: id,
                metrics,
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect();
    AggregateReport::from_rows(rows.into_iter().collect::<Result<Vec<_>>>()?)
}

/// The 2D-motion baseline: project the scene flows to per-pixel optical
/// flow, shift both maps toward the midpoint, and merge. Depth values
/// travel unchanged, which is exactly the flaw being measured.
pub fn optical_flow_baseline(
    d_prev: &DepthMap,
    d_next: &DepthMap,
    sf_fwd: &SceneFlow,
    sf_bwd: &SceneFlow,
    k: &CameraIntrinsics,
    alpha: f64,
) -> Result<DepthMap> {
    let of_fwd = synth::optical_flow_from_scene_flow(d_prev, k, sf_fwd);
    let of_bwd = synth::optical_flow_from_scene_flow(d_next, k, sf_bwd);
    let from_prev = warp_depth_by_optical_flow(d_prev, &of_fwd, alpha)?;
    let from_next = warp_depth_by_optical_flow(d_next, &of_bwd, 1.0 - alpha)?;
    Ok(merge_min(&from_prev, &from_next)?)
}

/// Writes a generated scene to disk: the sparse triple, flow files
/// aligned with the back-projections of the sparse maps, intrinsics,
/// and the oracle midpoint cloud.
pub fn run_synth(spec: &SceneSpec, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let scene = synth::generate_synthetic(spec)?;
    io::write_depth_png(&scene.sparse_prev, &out_dir.join("prev.png"))?;
    io::write_depth_png(&scene.sparse_mid, &out_dir.join("mid.png"))?;
    io::write_depth_png(&scene.sparse_next, &out_dir.join("next.png"))?;
    let prev_pc = back_project(&scene.sparse_prev, &spec.intrinsics);
    let next_pc = back_project(&scene.sparse_next, &spec.intrinsics);
    io::write_scene_flow(&scene.flow_forward(&prev_pc), &out_dir.join("flow_fwd.plsf"))?;
    io::write_scene_flow(&scene.flow_backward(&next_pc), &out_dir.join("flow_bwd.plsf"))?;
    io::write_intrinsics(&spec.intrinsics, &out_dir.join("intrinsics.txt"))?;
    io::write_cloud_bin(&scene.mid_cloud, &out_dir.join("midpoint_cloud.bin"))?;
    Ok(())
}

/// One row of the `bench` command output.
#[derive(Debug, Clone, Copy)]
pub struct BenchRow {
    pub n: usize,
    pub build_ms: f64,
    pub indexed_ms: f64,
    pub brute_ms: f64,
    pub speedup: f64,
}

pub const BENCH_CSV_HEADER: &str = "n,build_ms,indexed_ms,brute_ms,speedup";

/// Times symmetric Chamfer between two random n-point clouds, indexed
/// vs brute force, reporting the median of `runs` timings each.
pub fn run_bench(sizes: &[usize], runs: usize, seed: u64) -> Result<Vec<BenchRow>> {
    use plidar_core::metrics::{chamfer_directional, chamfer_directional_brute};
    use rand::{Rng, SeedableRng};

    let runs = runs.max(1);
    let mut out = Vec::new();
    for &n in sizes {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let mut cloud = || -> PointCloud {
            PointCloud::new(
                (0..n)
                    .map(|_| {
                        [
                            rng.gen_range(-50.0..50.0),
                            rng.gen_range(-50.0..50.0),
                            rng.gen_range(0.5..80.0),
                        ]
                    })
                    .collect(),
            )
            .expect("finite samples")
        };
        let a = cloud();
        let b = cloud();

        let median = |mut samples: Vec<f64>| -> f64 {
            samples.sort_by(|x, y| x.partial_cmp(y).unwrap());
            samples[samples.len() / 2]
        };
        let time = |f: &dyn Fn()| -> f64 {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1e3
        };

        let build_ms = median((0..runs).map(|_| time(&|| drop(KdTree::build(&a)))).collect());
        let indexed_ms = median(
            (0..runs)
                .map(|_| {
                    time(&|| {
                        chamfer_directional(&a, &b).unwrap();
                        chamfer_directional(&b, &a).unwrap();
                    })
                })
                .collect(),
        );
        let brute_ms = median(
            (0..runs)
                .map(|_| {
                    time(&|| {
                        chamfer_directional_brute(&a, &b).unwrap();
                        chamfer_directional_brute(&b, &a).unwrap();
                    })
                })
                .collect(),
        );
        out.push(BenchRow {
            n,
            build_ms,
            indexed_ms,
            brute_ms,
            speedup: brute_ms / indexed_ms,
        });
    }
    Ok(out)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n, r.build_ms, r.indexed_ms, r.brute_ms, r.speedup
        ));
    }
    out
}
