//! Synthetic experiments for the minimal solvers and the robust estimator.
//!
//! Trials run in parallel. Each trial draws its scene from its own random
//! stream, so results do not depend on scheduling. `RD_HOMOG_THREADS` caps
//! the number of worker threads.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::geometry::homography_error;
use crate::robust::{ransac, RobustConfig};
use crate::scene::{generate_instance_with, rng_for, SceneConfig};
use crate::solvers::{SolverCase, SolverOptions};

/// Relative-error floor for coefficients near zero.
const K_ERROR_EPS: f64 = 1e-6;

/// Runs `f` on a pool honouring `RD_HOMOG_THREADS`.
pub fn with_pool<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let threads = std::env::var("RD_HOMOG_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Relative coefficient error; the geometric mean of both sides for the
/// two-sided cases.
pub fn k_error(case: SolverCase, gt: (f64, f64), est: (f64, f64)) -> f64 {
    let side = |g: f64, e: f64| (e - g).abs() / g.abs().max(K_ERROR_EPS);
    match case {
        SolverCase::OneSided => side(gt.0, est.0),
        _ => (side(gt.0, est.0) * side(gt.1, est.1)).sqrt(),
    }
}

/// Outcome of one minimal-solver trial. Errors are NaN when the solver
/// returned no candidate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub trial_index: u64,
    pub solver_case: SolverCase,
    pub noise_sigma: f64,
    pub h_error: f64,
    pub k_error: f64,
    /// `max(|λ − λ*|, |λ′ − λ′*|)` of the reported candidate.
    pub lambda_abs_error: f64,
    pub num_candidates: usize,
    pub elapsed_us: f64,
}

impl ErrorRecord {
    pub const HEADER: [&'static str; 8] = [
        "trial_index",
        "solver_case",
        "noise_sigma",
        "h_error",
        "k_error",
        "lambda_abs_error",
        "num_candidates",
        "elapsed_us",
    ];

    pub fn failed(&self) -> bool {
        self.h_error.is_nan()
    }
}

/// Solves the first five correspondences of the trial's scene and reports
/// the candidate closest to the ground truth.
pub fn run_trial(cfg: &SceneConfig, sigma: f64, trial: u64, opts: &SolverOptions) -> ErrorRecord {
    let scene = SceneConfig { num_points: 5, noise_sigma_px: sigma, outlier_fraction: 0.0, ..cfg.clone() };
    let mut rec = ErrorRecord {
        trial_index: trial,
        solver_case: cfg.case,
        noise_sigma: sigma,
        h_error: f64::NAN,
        k_error: f64::NAN,
        lambda_abs_error: f64::NAN,
        num_candidates: 0,
        elapsed_us: 0.0,
    };
    let Ok(inst) = generate_instance_with(&scene, &mut rng_for(cfg.rng_seed, trial)) else {
        return rec;
    };
    let Some(set) = inst.corr_set5() else { return rec };
    let start = Instant::now();
    let cands = cfg.case.solve(&set, opts).unwrap_or_default();
    rec.elapsed_us = start.elapsed().as_secs_f64() * 1e6;
    rec.num_candidates = cands.len();
    let best = cands
        .iter()
        .filter_map(|c| homography_error(&c.h, &inst.gt_h).ok().map(|e| (e, c)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((e, c)) = best {
        rec.h_error = e;
        rec.k_error = k_error(cfg.case, (inst.gt_lambda, inst.gt_lambda_p), (c.lambda, c.lambda_p));
        rec.lambda_abs_error = (c.lambda - inst.gt_lambda).abs().max((c.lambda_p - inst.gt_lambda_p).abs());
    }
    rec
}

/// Noise-free trials on five-point scenes.
pub fn run_stability(cfg: &SceneConfig, trials: u64) -> Vec<ErrorRecord> {
    let opts = SolverOptions::default();
    with_pool(|| (0..trials).into_par_iter().map(|t| run_trial(cfg, 0.0, t, &opts)).collect())
}

/// One block of trials per noise level. Trial `t` sees the same scene at
/// every level; only the noise magnitude changes.
pub fn run_noise(cfg: &SceneConfig, sigmas: &[f64], trials_per_sigma: u64) -> Vec<ErrorRecord> {
    let opts = SolverOptions::default();
    with_pool(|| {
        sigmas
            .iter()
            .flat_map(|&s| (0..trials_per_sigma).map(move |t| (s, t)))
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(s, t)| run_trial(cfg, s, t, &opts))
            .collect()
    })
}

/// Median of the finite values, NaN when there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoiseSummary {
    pub solver_case: SolverCase,
    pub noise_sigma: f64,
    pub trials: usize,
    pub failures: usize,
    pub median_h_error: f64,
    pub median_k_error: f64,
}

impl NoiseSummary {
    pub const HEADER: [&'static str; 6] =
        ["solver_case", "noise_sigma", "trials", "failures", "median_h_error", "median_k_error"];
}

/// Per `(case, σ)` medians over the non-failed trials, in first-seen order.
pub fn summarize(records: &[ErrorRecord]) -> Vec<NoiseSummary> {
    let mut keys: Vec<(SolverCase, f64)> = Vec::new();
    for r in records {
        if !keys.iter().any(|&(c, s)| c == r.solver_case && s == r.noise_sigma) {
            keys.push((r.solver_case, r.noise_sigma));
        }
    }
    keys.into_iter()
        .map(|(case, sigma)| {
            let group: Vec<&ErrorRecord> =
                records.iter().filter(|r| r.solver_case == case && r.noise_sigma == sigma).collect();
            NoiseSummary {
                solver_case: case,
                noise_sigma: sigma,
                trials: group.len(),
                failures: group.iter().filter(|r| r.failed()).count(),
                median_h_error: median(group.iter().map(|r| r.h_error)),
                median_k_error: median(group.iter().map(|r| r.k_error)),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub solver_case: SolverCase,
    pub log10_lo: f64,
    pub log10_hi: f64,
    pub count: usize,
}

impl HistogramBin {
    pub const HEADER: [&'static str; 4] = ["solver_case", "log10_lo", "log10_hi", "count"];
}

/// Histogram of `log10(h_error)` per case on `bins` equal bins over
/// `[lo, hi]`; values outside are clamped into the end bins and exact zeros
/// land in the first bin.
pub fn log10_histogram(records: &[ErrorRecord], lo: f64, hi: f64, bins: usize) -> Vec<HistogramBin> {
    let width = (hi - lo) / bins as f64;
    let mut out = Vec::new();
    for case in SolverCase::ALL {
        let mut counts = vec![0usize; bins];
        let mut seen = false;
        for r in records.iter().filter(|r| r.solver_case == case && !r.failed()) {
            seen = true;
            let x = if r.h_error > 0.0 { r.h_error.log10() } else { lo };
            let k = (((x - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[k] += 1;
        }
        if seen {
            out.extend(counts.into_iter().enumerate().map(|(k, count)| HistogramBin {
                solver_case: case,
                log10_lo: lo + k as f64 * width,
                log10_hi: lo + (k + 1) as f64 * width,
                count,
            }));
        }
    }
    out
}

/// One robust-estimation trial.
#[derive(Clone, Debug)]
pub struct RansacTrial {
    pub trial_index: u64,
    pub true_inliers: usize,
    pub found_inliers: usize,
    /// True inliers marked as inliers by the estimator.
    pub recovered_true_inliers: usize,
    pub iterations: usize,
    pub elapsed: Duration,
    /// `(elapsed, best inlier count)` after every improvement.
    pub progress: Vec<(Duration, usize)>,
}

impl RansacTrial {
    pub fn recovery_rate(&self) -> f64 {
        self.recovered_true_inliers as f64 / self.true_inliers.max(1) as f64
    }

    /// Best inlier count reached by time `t`.
    pub fn inliers_at(&self, t: Duration) -> usize {
        self.progress.iter().take_while(|p| p.0 <= t).last().map_or(0, |p| p.1)
    }

    /// First time at which the best model had at least `count` inliers.
    pub fn time_to_reach(&self, count: usize) -> Option<Duration> {
        self.progress.iter().find(|p| p.1 >= count).map(|p| p.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub solver_case: SolverCase,
    pub outlier_fraction: f64,
    pub time_ms: f64,
    pub mean_inliers: f64,
    pub true_inliers: f64,
}

impl CurvePoint {
    pub const HEADER: [&'static str; 5] =
        ["solver_case", "outlier_fraction", "time_ms", "mean_inliers", "true_inliers"];
}

#[derive(Clone, Debug)]
pub struct RansacBench {
    pub trials: Vec<RansacTrial>,
    pub curve: Vec<CurvePoint>,
}

/// Runs the robust estimator on `trials` scenes generated from `scene`
/// (its case selects the solver) and averages the best-inlier curves on a
/// common grid of `grid_points` times.
pub fn run_ransac_bench(
    scene: &SceneConfig,
    robust: &RobustConfig,
    trials: u64,
    time_budget: Option<Duration>,
    grid_points: usize,
) -> RansacBench {
    let results: Vec<RansacTrial> = with_pool(|| {
        (0..trials)
            .into_par_iter()
            .filter_map(|t| {
                let inst = generate_instance_with(scene, &mut rng_for(scene.rng_seed, t)).ok()?;
                let cfg = RobustConfig {
                    solver_case: scene.case,
                    focal_scale: inst.focal,
                    rng_seed: robust.rng_seed.wrapping_add(t),
                    time_budget,
                    ..robust.clone()
                };
                let true_inliers = inst.num_inliers();
                match ransac(&inst.normalized(), &cfg) {
                    Ok(res) => Some(RansacTrial {
                        trial_index: t,
                        true_inliers,
                        found_inliers: res.num_inliers(),
                        recovered_true_inliers: res
                            .inlier_mask
                            .iter()
                            .zip(&inst.inlier_flags)
                            .filter(|(&m, &f)| m && f)
                            .count(),
                        iterations: res.iterations,
                        elapsed: res.elapsed,
                        progress: res.progress.iter().map(|p| (p.elapsed, p.inliers)).collect(),
                    }),
                    Err(_) => Some(RansacTrial {
                        trial_index: t,
                        true_inliers,
                        found_inliers: 0,
                        recovered_true_inliers: 0,
                        iterations: 0,
                        elapsed: Duration::ZERO,
                        progress: Vec::new(),
                    }),
                }
            })
            .collect()
    });

    let horizon = results
        .iter()
        .map(|r| r.elapsed)
        .max()
        .unwrap_or_default()
        .max(time_budget.unwrap_or_default());
    let n = results.len().max(1) as f64;
    let mean_true = results.iter().map(|r| r.true_inliers as f64).sum::<f64>() / n;
    let steps = grid_points.max(2);
    let curve = if results.is_empty() {
        Vec::new()
    } else {
        (0..steps)
            .map(|k| {
                let t = horizon.mul_f64(k as f64 / (steps - 1) as f64);
                CurvePoint {
                    solver_case: scene.case,
                    outlier_fraction: scene.outlier_fraction,
                    time_ms: t.as_secs_f64() * 1e3,
                    mean_inliers: results.iter().map(|r| r.inliers_at(t) as f64).sum::<f64>() / n,
                    true_inliers: mean_true,
                }
            })
            .collect()
    };
    RansacBench { trials: results, curve }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_error_examples() {
        assert_eq!(k_error(SolverCase::OneSided, (-0.1, 0.0), (-0.1, 0.0)), 0.0);
        assert!((k_error(SolverCase::OneSided, (-0.1, 0.0), (-0.11, 0.0)) - 0.1).abs() < 1e-12);
        let (a, b) = ((-0.11f64 + 0.1).abs() / 0.1, (-0.045f64 + 0.05).abs() / 0.05);
        let got = k_error(SolverCase::TwoSidedIndependent, (-0.1, -0.05), (-0.11, -0.045));
        assert!((got - (a * b).sqrt()).abs() < 1e-12);
        assert!((k_error(SolverCase::OneSided, (0.0, 0.0), (1e-6, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_examples() {
        assert_eq!(median([3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median([4.0, 1.0, f64::NAN, 2.0, 3.0]), 2.5);
        assert!(median([f64::NAN]).is_nan());
    }

    #[test]
    fn stability_is_reproducible_and_accurate() {
        let cfg = SceneConfig { case: SolverCase::TwoSidedEqual, rng_seed: 4, ..Default::default() };
        let a = run_stability(&cfg, 200);
        let b = run_stability(&cfg, 200);
        assert_eq!(a.len(), 200);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.h_error.to_bits(), y.h_error.to_bits());
            assert_eq!(x.trial_index, y.trial_index);
        }
        assert!(median(a.iter().map(|r| r.h_error)) < 1e-9);
        assert!(run_stability(&cfg, 0).is_empty());
    }

    #[test]
    fn noise_summary_counts_failures() {
        let cfg = SceneConfig { case: SolverCase::OneSided, ..Default::default() };
        let recs = run_noise(&cfg, &[0.0, 1.0], 50);
        let sum = summarize(&recs);
        assert_eq!(sum.len(), 2);
        assert_eq!(sum[0].trials, 50);
        assert_eq!(sum[0].failures, recs[..50].iter().filter(|r| r.failed()).count());
        assert!(sum[1].median_h_error > sum[0].median_h_error);
        assert!(run_noise(&cfg, &[], 10).is_empty());
    }

    #[test]
    fn histogram_covers_all_successes() {
        let cfg = SceneConfig { case: SolverCase::OneSided, ..Default::default() };
        let recs = run_stability(&cfg, 100);
        let hist = log10_histogram(&recs, -16.0, 0.0, 32);
        assert_eq!(hist.len(), 32);
        let total: usize = hist.iter().map(|b| b.count).sum();
        assert_eq!(total, recs.iter().filter(|r| !r.failed()).count());
    }

    #[test]
    fn ransac_bench_on_clean_data() {
        let scene = SceneConfig { case: SolverCase::OneSided, noise_sigma_px: 0.5, ..Default::default() };
        let robust = RobustConfig { min_iterations: 20, ..Default::default() };
        let bench = run_ransac_bench(&scene, &robust, 5, None, 10);
        assert_eq!(bench.trials.len(), 5);
        assert_eq!(bench.curve.len(), 10);
        for t in &bench.trials {
            assert!(t.found_inliers as f64 >= 0.95 * t.true_inliers as f64);
        }
        let last = bench.curve.last().unwrap();
        assert!(last.mean_inliers >= 0.95 * last.true_inliers);
        assert!(bench.curve.windows(2).all(|w| w[1].mean_inliers >= w[0].mean_inliers));
    }
}
