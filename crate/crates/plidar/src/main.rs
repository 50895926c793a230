use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use plidar::harness::{
    self, bench_csv, list_frames, BaselineJob, BaselineKind, InterpolateJob, RunConfig,
};
use plidar::io;
use plidar::synth::{Primitive, RigidMotion, SceneSpec};
use plidar_core::geometry::CameraIntrinsics;
use plidar_core::interp::{DensifyParams, InterpolationMode, PipelineParams, SampleSpec};

#[derive(Parser)]
#[command(name = "plidar", version, about = "Pseudo-LiDAR frame interpolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the frame-processing commands. Every value is
/// optional here so a `--config` TOML file can supply it; a flag given
/// on the command line always wins.
#[derive(Args, Debug, Default)]
struct Shared {
    /// TOML file with default values for the other flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Camera intrinsics text file (fu/fv/cu/cv)
    #[arg(long)]
    intrinsics: Option<PathBuf>,
    /// Warp mode: forward, backward, or union
    #[arg(long)]
    mode: Option<String>,
    /// Temporal position of the synthesized frame [default: 0.5]
    #[arg(long)]
    alpha: Option<f64>,
    /// Neighbors per pixel during densification [default: 8]
    #[arg(long)]
    densify_k: Option<usize>,
    /// Densification search radius in pixels [default: 12]
    #[arg(long)]
    densify_radius: Option<u32>,
    /// Report format: csv or json [default: csv]
    #[arg(long)]
    report: Option<String>,
    /// Seed for any randomized stage [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: all cores]
    #[arg(long)]
    jobs: Option<usize>,
    /// Subsample input clouds to at most this many points
    #[arg(long)]
    sample_points: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize intermediate depth frames from sparse pairs
    Interpolate {
        #[command(flatten)]
        shared: Shared,
        /// Earlier frame (PNG file or directory of PNGs)
        #[arg(long)]
        prev: Option<PathBuf>,
        /// Later frame (PNG file or directory of PNGs)
        #[arg(long)]
        next: Option<PathBuf>,
        /// Forward scene-flow file(s)
        #[arg(long)]
        flow_fwd: Option<PathBuf>,
        /// Backward scene-flow file(s)
        #[arg(long)]
        flow_bwd: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write an ASCII PLY per frame
        #[arg(long)]
        ply: bool,
    },
    /// Score predicted depth maps against ground truth
    Evaluate {
        #[command(flatten)]
        shared: Shared,
        /// Predicted depth map(s)
        #[arg(long)]
        pred: Option<PathBuf>,
        /// Ground-truth depth map(s)
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Write the report here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a reference baseline and score it
    Baseline {
        #[command(flatten)]
        shared: Shared,
        /// Which baseline: average or optical-flow
        #[arg(long)]
        which: Option<String>,
        #[arg(long)]
        prev: Option<PathBuf>,
        #[arg(long)]
        next: Option<PathBuf>,
        #[arg(long)]
        flow_fwd: Option<PathBuf>,
        #[arg(long)]
        flow_bwd: Option<PathBuf>,
        /// Ground-truth depth map(s)
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a synthetic scene with exact motion ground truth
    Synth {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        width: u32,
        #[arg(long, default_value_t = 48)]
        height: u32,
        /// Fraction of covered pixels kept [default: 0.04]
        #[arg(long)]
        sparsity: Option<f64>,
        /// Translation over the full interval, "tx,ty,tz" meters
        #[arg(long, default_value = "0,0,0")]
        translation: String,
        /// Axis-angle rotation over the full interval, "rx,ry,rz" radians
        #[arg(long, default_value = "0,0,0")]
        rotation: String,
    },
    /// Time indexed vs brute-force Chamfer on random clouds
    Bench {
        #[command(flatten)]
        shared: Shared,
        /// Comma-separated cloud sizes
        #[arg(long, default_value = "1000,10000,100000")]
        sizes: String,
        /// Timing repetitions per size (median reported)
        #[arg(long, default_value_t = 5)]
        runs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Flag value, else config-file value, else the built-in default.
fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

struct Resolved {
    config: RunConfig,
    intrinsics: Option<CameraIntrinsics>,
    params: PipelineParams,
    report: String,
    seed: u64,
}

fn resolve(shared: &Shared) -> Result<Resolved> {
    let config = match &shared.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(jobs) = pick_opt(&shared.jobs, &config.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    let mode = match pick(&shared.mode, &config.mode, "union".to_string()).as_str() {
        "forward" => InterpolationMode::Forward,
        "backward" => InterpolationMode::Backward,
        "union" => InterpolationMode::Union,
        other => bail!("unknown mode \"{other}\" (expected forward, backward, or union)"),
    };
    let report = pick(&shared.report, &config.report, "csv".to_string());
    if report != "csv" && report != "json" {
        bail!("unknown report format \"{report}\" (expected csv or json)");
    }
    let seed = pick(&shared.seed, &config.seed, 0);
    let params = PipelineParams {
        mode,
        alpha: pick(&shared.alpha, &config.alpha, 0.5),
        densify: DensifyParams {
            k: pick(&shared.densify_k, &config.densify_k, 8),
            radius: pick(&shared.densify_radius, &config.densify_radius, 12),
        },
        sample: pick_opt(&shared.sample_points, &config.sample_points)
            .map(|count| SampleSpec { count, seed }),
    };
    let intrinsics = pick_opt(&shared.intrinsics, &config.intrinsics)
        .map(|p| io::read_intrinsics(&p))
        .transpose()?;
    Ok(Resolved {
        config,
        intrinsics,
        params,
        report,
        seed,
    })
}

fn require<T>(v: Option<T>, what: &str) -> Result<T> {
    v.with_context(|| format!("missing required input: {what} (flag or config key)"))
}

fn frames(flag: &Option<PathBuf>, file: &Option<PathBuf>, what: &str, ext: &str) -> Result<Vec<PathBuf>> {
    list_frames(&require(pick_opt(flag, file), what)?, ext)
}

fn emit_report(report: &harness::AggregateReport, format: &str, out: &Option<PathBuf>) -> Result<()> {
    let text = if format == "json" {
        report.to_json()
    } else {
        report.to_csv()
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing report {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_vec3(text: &str, what: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing {what} \"{text}\""))?;
    anyhow::ensure!(parts.len() == 3, "{what} needs three comma-separated numbers");
    Ok([parts[0], parts[1], parts[2]])
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Interpolate {
            shared,
            prev,
            next,
            flow_fwd,
            flow_bwd,
            out,
            ply,
        } => {
            let r = resolve(&shared)?;
            let flow_set = |flag: &Option<PathBuf>, file: &Option<PathBuf>| {
                pick_opt(flag, file).map(|p| list_frames(&p, "plsf")).transpose()
            };
            let job = InterpolateJob {
                prev: frames(&prev, &r.config.prev, "--prev", "png")?,
                next: frames(&next, &r.config.next, "--next", "png")?,
                flow_fwd: flow_set(&flow_fwd, &r.config.flow_fwd)?,
                flow_bwd: flow_set(&flow_bwd, &r.config.flow_bwd)?,
                intrinsics: require(r.intrinsics, "--intrinsics")?,
                out_dir: require(pick_opt(&out, &r.config.out), "--out")?,
                params: r.params,
                write_ply: ply,
            };
            let outcome = harness::run_interpolate(&job)?;
            eprintln!("{} frame(s) written to {}", outcome.processed, job.out_dir.display());
            for (id, msg) in &outcome.failures {
                eprintln!("frame {id} failed: {msg}");
            }
            Ok(if outcome.ok() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Evaluate { shared, pred, gt, out } => {
            let r = resolve(&shared)?;
            let report = harness::run_evaluate(
                &frames(&pred, &r.config.pred, "--pred", "png")?,
                &frames(&gt, &r.config.gt, "--gt", "png")?,
                &require(r.intrinsics, "--intrinsics")?,
            )?;
            emit_report(&report, &r.report, &pick_opt(&out, &r.config.out))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Baseline {
            shared,
            which,
            prev,
            next,
            flow_fwd,
            flow_bwd,
            gt,
            out,
        } => {
            let r = resolve(&shared)?;
            let kind = match pick(&which, &None, "average".to_string()).as_str() {
                "average" => BaselineKind::Average,
                "optical-flow" => BaselineKind::OpticalFlow,
                other => bail!("unknown baseline \"{other}\" (expected average or optical-flow)"),
            };
            let flow_set = |flag: &Option<PathBuf>, file: &Option<PathBuf>| {
                pick_opt(flag, file).map(|p| list_frames(&p, "plsf")).transpose()
            };
            let out_dir = require(pick_opt(&out, &r.config.out), "--out")?;
            let job = BaselineJob {
                kind,
                prev: frames(&prev, &r.config.prev, "--prev", "png")?,
                next: frames(&next, &r.config.next, "--next", "png")?,
                flow_fwd: flow_set(&flow_fwd, &r.config.flow_fwd)?,
                flow_bwd: flow_set(&flow_bwd, &r.config.flow_bwd)?,
                gt: frames(&gt, &r.config.gt, "--gt", "png")?,
                intrinsics: require(r.intrinsics, "--intrinsics")?,
                out_dir: out_dir.clone(),
                alpha: r.params.alpha,
            };
            let report = harness::run_baseline(&job)?;
            emit_report(&report, &r.report, &Some(out_dir.join("report.csv")))?;
            print!("{}", if r.report == "json" { report.to_json() } else { report.to_csv() });
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth {
            shared,
            out,
            width,
            height,
            sparsity,
            translation,
            rotation,
        } => {
            let r = resolve(&shared)?;
            let intrinsics = r.intrinsics.unwrap_or(
                CameraIntrinsics::new(600.0, 600.0, width as f64 / 2.0, height as f64 / 2.0)
                    .expect("positive focal length"),
            );
            let spec = SceneSpec {
                width,
                height,
                intrinsics,
                motion: RigidMotion {
                    axis_angle: parse_vec3(&rotation, "--rotation")?,
                    translation: parse_vec3(&translation, "--translation")?,
                },
                sparsity: pick(&sparsity, &None, 0.04),
                seed: r.seed,
                primitives: vec![
                    Primitive::Plane { z: 20.0 },
                    Primitive::Box {
                        center: [0.5, 0.2, 10.0],
                        size: [1.0, 1.0, 1.0],
                    },
                ],
            };
            let out_dir = require(pick_opt(&out, &r.config.out), "--out")?;
            harness::run_synth(&spec, &out_dir)?;
            eprintln!("scene written to {}", out_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { shared, sizes, runs, out } => {
            let r = resolve(&shared)?;
            let sizes: Vec<usize> = sizes
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .context("parsing --sizes")?;
            let rows = harness::run_bench(&sizes, runs, r.seed)?;
            let csv = bench_csv(&rows);
            match pick_opt(&out, &r.config.out) {
                Some(path) => std::fs::write(&path, csv)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
