//! Command-line front end used by the `rdh` binary.
//!
//! ```text
//! rdh gen --case equal --points 200 --outliers 0.4 --out pts.csv
//! rdh solve pts.csv --case equal --ransac
//! rdh bench stability --trials 10000 --out stability.csv
//! rdh bench noise --sigmas 0,0.5,1 --out noise.csv
//! rdh bench ransac --outliers 0.2,0.6 --out curves.csv
//! ```

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::bench::{
    log10_histogram, run_noise, run_ransac_bench, run_stability, summarize, CurvePoint, ErrorRecord,
    HistogramBin, NoiseSummary,
};
use crate::error::{Error, Result};
use crate::io::{read_correspondences, sidecar_path, write_correspondences, write_csv, write_ground_truth, GroundTruth};
use crate::robust::{ransac, RobustConfig};
use crate::scene::{generate_instance, SceneConfig};
use crate::solvers::{CorrSet5, SolverCandidate, SolverCase, SolverOptions};

#[derive(Debug, Parser)]
#[command(name = "rdh", version, about = "Homography and radial distortion from five correspondences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate (H, λ, λ′) from a correspondence file and print JSON.
    Solve(SolveArgs),
    /// Run a synthetic experiment and write CSV.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Write a synthetic correspondence file and its ground-truth sidecar.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// CSV with header u1,v1,u2,v2 in centered pixels.
    input: PathBuf,
    #[arg(long, default_value = "independent")]
    case: SolverCase,
    /// Run LO-RANSAC over all correspondences instead of solving the first five.
    #[arg(long)]
    ransac: bool,
    #[arg(long, default_value_t = 5.0)]
    threshold_px: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Focal length in pixels used to normalize coordinates.
    #[arg(long, default_value_t = 1000.0)]
    focal: f64,
    #[arg(long, default_value_t = 500)]
    min_iterations: usize,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
    /// Skip the final least-squares refinement.
    #[arg(long)]
    no_refine: bool,
}

#[derive(Debug, Args)]
struct CommonBench {
    /// Comma-separated solver cases.
    #[arg(long, value_delimiter = ',', default_value = "one-sided,equal,independent")]
    case: Vec<SolverCase>,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    focal: f64,
    #[arg(long)]
    out: PathBuf,
    /// Write zeros in the timing columns so output is reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Subcommand)]
enum BenchCommand {
    /// Noise-free accuracy of the minimal solvers.
    Stability {
        #[command(flatten)]
        common: CommonBench,
        /// Also write a log10(h_error) histogram to this CSV.
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Median errors against pixel noise.
    Noise {
        #[command(flatten)]
        common: CommonBench,
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.5,1,2")]
        sigmas: Vec<f64>,
        /// Also write every trial to this CSV.
        #[arg(long)]
        records: Option<PathBuf>,
    },
    /// Best inlier count against time inside LO-RANSAC.
    Ransac {
        #[command(flatten)]
        common: CommonBench,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.4,0.6")]
        outliers: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long, default_value_t = 0.5)]
        noise: f64,
        #[arg(long, default_value_t = 5.0)]
        threshold_px: f64,
        /// Per-trial time limit in milliseconds.
        #[arg(long)]
        budget_ms: Option<f64>,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 500)]
        min_iterations: usize,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value = "independent")]
    case: SolverCase,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    outliers: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000.0)]
    focal: f64,
    /// Correspondence CSV; the sidecar is written next to it as *.gt.json.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(b) => bench(b),
        Command::Gen(g) => gen(g),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn candidate_json(c: &SolverCandidate) -> Result<Value> {
    let m = c.h.canonical()?;
    let h: Vec<f64> = (0..9).map(|k| m[(k / 3, k % 3)]).collect();
    Ok(json!({
        "h": h,
        "lambda": c.lambda,
        "lambda_p": c.lambda_p,
        "residual": c.residual,
        "transfer_residual": c.transfer_residual,
    }))
}

fn solve(a: SolveArgs) -> Result<()> {
    if !(a.focal > 0.0) {
        return Err(Error::ConfigInvalid("--focal must be positive".into()));
    }
    let corrs: Vec<_> = read_correspondences(&a.input)?
        .iter()
        .map(|c| c.scaled(1.0 / a.focal))
        .collect();
    let out = if a.ransac {
        let cfg = RobustConfig {
            solver_case: a.case,
            inlier_threshold_px: a.threshold_px,
            focal_scale: a.focal,
            min_iterations: a.min_iterations,
            max_iterations: a.max_iterations,
            refine_enabled: !a.no_refine,
            rng_seed: a.seed,
            ..RobustConfig::default()
        };
        let res = ransac(&corrs, &cfg)?;
        json!({
            "case": a.case,
            "model": candidate_json(&res.model)?,
            "num_inliers": res.num_inliers(),
            "inlier_mask": res.inlier_mask,
            "iterations": res.iterations,
            "models_evaluated": res.models_evaluated,
            "elapsed_ms": res.elapsed.as_secs_f64() * 1e3,
        })
    } else {
        if corrs.len() < 5 {
            return Err(Error::InsufficientData { needed: 5, got: corrs.len() });
        }
        let set = CorrSet5::new(
            std::array::from_fn(|i| corrs[i].src),
            std::array::from_fn(|i| corrs[i].dst),
        );
        let cands = a.case.solve(&set, &SolverOptions::default())?;
        let list = cands.iter().map(candidate_json).collect::<Result<Vec<_>>>()?;
        json!({ "case": a.case, "candidates": list })
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn scene_for(common: &CommonBench, case: SolverCase) -> SceneConfig {
    SceneConfig { case, focal: common.focal, rng_seed: common.seed, ..SceneConfig::default() }
}

fn bench(cmd: BenchCommand) -> Result<()> {
    match cmd {
        BenchCommand::Stability { common, hist } => {
            let mut records: Vec<ErrorRecord> = Vec::new();
            for &case in &common.case {
                records.extend(run_stability(&scene_for(&common, case), common.trials));
            }
            if common.no_timing {
                records.iter_mut().for_each(|r| r.elapsed_us = 0.0);
            }
            write_csv(create(&common.out)?, &ErrorRecord::HEADER, &records)?;
            if let Some(path) = hist {
                let bins = log10_histogram(&records, -16.0, 0.0, 64);
                write_csv(create(&path)?, &HistogramBin::HEADER, &bins)?;
            }
        }
        BenchCommand::Noise { common, sigmas, records: per_trial } => {
            if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0)) {
                return Err(Error::ConfigInvalid(format!("noise level {s} must be nonnegative")));
            }
            let mut records: Vec<ErrorRecord> = Vec::new();
            for &case in &common.case {
                records.extend(run_noise(&scene_for(&common, case), &sigmas, common.trials));
            }
            if common.no_timing {
                records.iter_mut().for_each(|r| r.elapsed_us = 0.0);
            }
            let summary: Vec<NoiseSummary> = summarize(&records);
            write_csv(create(&common.out)?, &NoiseSummary::HEADER, &summary)?;
            if let Some(path) = per_trial {
                write_csv(create(&path)?, &ErrorRecord::HEADER, &records)?;
            }
        }
        BenchCommand::Ransac {
            common,
            outliers,
            points,
            noise,
            threshold_px,
            budget_ms,
            grid,
            min_iterations,
            max_iterations,
        } => {
            let budget = match budget_ms {
                Some(ms) if ms >= 0.0 && ms.is_finite() => Some(Duration::from_secs_f64(ms / 1e3)),
                Some(ms) => return Err(Error::ConfigInvalid(format!("--budget-ms {ms} is invalid"))),
                None => None,
            };
            let mut curve: Vec<CurvePoint> = Vec::new();
            for &case in &common.case {
                for &fraction in &outliers {
                    let scene = SceneConfig {
                        num_points: points,
                        noise_sigma_px: noise,
                        outlier_fraction: fraction,
                        ..scene_for(&common, case)
                    };
                    scene.validate()?;
                    let robust = RobustConfig {
                        inlier_threshold_px: threshold_px,
                        min_iterations,
                        max_iterations,
                        rng_seed: common.seed,
                        ..RobustConfig::default()
                    };
                    robust.validate()?;
                    let mut b = run_ransac_bench(&scene, &robust, common.trials, budget, grid);
                    if common.no_timing {
                        b.curve.iter_mut().for_each(|p| p.time_ms = 0.0);
                    }
                    curve.extend(b.curve);
                }
            }
            write_csv(create(&common.out)?, &CurvePoint::HEADER, &curve)?;
        }
    }
    Ok(())
}

fn gen(g: GenArgs) -> Result<()> {
    let cfg = SceneConfig {
        num_points: g.points,
        focal: g.focal,
        case: g.case,
        noise_sigma_px: g.noise,
        outlier_fraction: g.outliers,
        rng_seed: g.seed,
        ..SceneConfig::default()
    };
    let inst = generate_instance(&cfg)?;
    write_correspondences(&g.out, &inst.corrs)?;
    write_ground_truth(&sidecar_path(&g.out), &GroundTruth::from_instance(&inst)?)?;
    let mut err = std::io::stderr();
    let _ = writeln!(err, "wrote {} correspondences to {}", inst.corrs.len(), g.out.display());
    Ok(())
}
