//! LO-RANSAC around the minimal solvers.
//!
//! Correspondences are in focal-normalized units; `focal_scale` converts
//! errors to pixels so thresholds can be stated in pixels.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;

use crate::distortion::{distort, lift};
use crate::error::{Error, Result};
use crate::geometry::{Homography, PointQuad, Vec2};
use crate::refine::{refine, refine_with, RefineOptions};
use crate::scene::rng_for;
use crate::solvers::{CorrSet5, SolverCandidate, SolverCase, SolverOptions};

/// One point match `src ↔ dst`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Correspondence {
    pub src: Vec2,
    pub dst: Vec2,
}

impl Correspondence {
    pub fn new(src: Vec2, dst: Vec2) -> Self {
        Self { src, dst }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.src * s, self.dst * s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustConfig {
    pub solver_case: SolverCase,
    pub inlier_threshold_px: f64,
    /// Pixels per normalized unit.
    pub focal_scale: f64,
    pub max_iterations: usize,
    pub min_iterations: usize,
    pub confidence: f64,
    pub lo_enabled: bool,
    pub refine_enabled: bool,
    pub rng_seed: u64,
    /// Wall-clock limit checked once `min_iterations` have run.
    pub time_budget: Option<Duration>,
    pub lo_inner_iterations: usize,
    pub solver_options: SolverOptions,
}

impl Default for RobustConfig {
    fn default() -> Self {
        Self {
            solver_case: SolverCase::TwoSidedIndependent,
            inlier_threshold_px: 5.0,
            focal_scale: 1000.0,
            max_iterations: 10_000,
            min_iterations: 500,
            confidence: 0.99,
            lo_enabled: true,
            refine_enabled: true,
            rng_seed: 0,
            time_budget: None,
            lo_inner_iterations: 10,
            solver_options: SolverOptions::default(),
        }
    }
}

impl RobustConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        if !(self.inlier_threshold_px > 0.0) {
            return bad("inlier_threshold_px must be positive");
        }
        if !(self.focal_scale > 0.0) {
            return bad("focal_scale must be positive");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return bad("confidence must lie in (0, 1)");
        }
        if self.min_iterations > self.max_iterations || self.max_iterations == 0 {
            return bad("need 0 < max_iterations and min_iterations <= max_iterations");
        }
        Ok(())
    }
}

/// Best-so-far inlier count at a point in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProgressPoint {
    pub elapsed: Duration,
    pub iteration: usize,
    pub inliers: usize,
}

#[derive(Clone, Debug)]
pub struct RobustResult {
    pub model: SolverCandidate,
    pub inlier_mask: Vec<bool>,
    pub iterations: usize,
    pub models_evaluated: usize,
    pub elapsed: Duration,
    /// Truncated quadratic cost of the model, in squared pixels.
    pub cost: f64,
    /// One entry per improvement of the best model.
    pub progress: Vec<ProgressPoint>,
}

impl RobustResult {
    pub fn num_inliers(&self) -> usize {
        self.inlier_mask.iter().filter(|&&m| m).count()
    }

    fn beats(&self, count: usize, cost: f64) -> bool {
        let own = self.num_inliers();
        count > own || (count == own && cost < self.cost)
    }
}

/// Symmetric transfer error in pixels: the larger of the forward
/// (`src → dst`) and backward (`dst → src`) reprojection distances. Points
/// the model cannot map score as infinite.
pub fn transfer_error(model: &SolverCandidate, corr: &Correspondence, focal_scale: f64) -> f64 {
    symmetric_error(model, &model.h.inverse(), corr) * focal_scale
}

fn one_way(h: &Homography, from: Vec2, l_from: f64, to: Vec2, l_to: f64) -> f64 {
    if (1.0 + l_from * from.norm_squared()).abs() < 1e-12 {
        return f64::INFINITY;
    }
    let Some(x) = h.apply(&lift(from, l_from)).to_euclidean() else {
        return f64::INFINITY;
    };
    match distort(x, l_to) {
        Ok(d) => (d - to).norm(),
        Err(_) => f64::INFINITY,
    }
}

fn symmetric_error(model: &SolverCandidate, inverse: &Homography, corr: &Correspondence) -> f64 {
    let fwd = one_way(&model.h, corr.src, model.lambda, corr.dst, model.lambda_p);
    let bwd = one_way(inverse, corr.dst, model.lambda_p, corr.src, model.lambda);
    let e = fwd.max(bwd);
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

struct Score {
    mask: Vec<bool>,
    count: usize,
    cost: f64,
}

fn score(model: &SolverCandidate, corrs: &[Correspondence], cfg: &RobustConfig, threshold: f64) -> Score {
    let t2 = threshold * threshold;
    let mut mask = Vec::with_capacity(corrs.len());
    let mut count = 0;
    let mut cost = 0.0;
    let inverse = model.h.inverse();
    for c in corrs {
        let e = symmetric_error(model, &inverse, c) * cfg.focal_scale;
        let inlier = e <= threshold;
        count += usize::from(inlier);
        cost += if inlier { e * e } else { t2 };
        mask.push(inlier);
    }
    Score { mask, count, cost }
}

fn result_from(model: SolverCandidate, s: Score) -> RobustResult {
    RobustResult {
        model,
        inlier_mask: s.mask,
        iterations: 0,
        models_evaluated: 0,
        elapsed: Duration::ZERO,
        cost: s.cost,
        progress: Vec::new(),
    }
}

fn sample_set(corrs: &[Correspondence], idx: &[usize]) -> CorrSet5 {
    CorrSet5::new(
        std::array::from_fn(|i| corrs[idx[i]].src),
        std::array::from_fn(|i| corrs[idx[i]].dst),
    )
}

/// Rejects samples whose first four points are nearly collinear in either
/// image before distortion is accounted for.
fn is_degenerate_sample(s: &CorrSet5) -> bool {
    let quad = |p: &[Vec2; 5]| PointQuad::from_euclidean([p[0], p[1], p[2], p[3]]);
    !quad(&s.src).is_general_position(1e-6) || !quad(&s.dst).is_general_position(1e-6)
}

fn required_iterations(inliers: usize, total: usize, confidence: f64) -> f64 {
    let w = inliers as f64 / total as f64;
    let p = w.powi(5);
    if p >= 1.0 {
        return 0.0;
    }
    if p <= 0.0 {
        return f64::INFINITY;
    }
    ((1.0 - confidence).ln() / (1.0 - p).ln()).ceil()
}

/// Draws inner minimal samples from the current inliers and polishes the
/// best model seen (possibly the current one) under a shrinking threshold
/// schedule. Never returns fewer inliers than `current`.
pub fn local_optimize(
    corrs: &[Correspondence],
    current: &RobustResult,
    cfg: &RobustConfig,
) -> RobustResult {
    let mut rng = rng_for(cfg.rng_seed ^ 0x5eed_10c4, current.iterations as u64);
    local_optimize_with(corrs, current, cfg, &mut rng).0
}

const LO_THRESHOLD_SCHEDULE: [f64; 3] = [2.0, 1.5, 1.0];
const LO_REFINE: RefineOptions = RefineOptions { max_iterations: 10, rel_tol: 1e-6 };

fn local_optimize_with(
    corrs: &[Correspondence],
    current: &RobustResult,
    cfg: &RobustConfig,
    rng: &mut impl Rng,
) -> (RobustResult, usize) {
    let inliers: Vec<usize> = (0..corrs.len()).filter(|&i| current.inlier_mask[i]).collect();
    let mut best = current.clone();
    if inliers.len() < 5 {
        return (best, 0);
    }
    let theta = cfg.inlier_threshold_px;
    let polish = |seed: SolverCandidate, best: &mut RobustResult| {
        let mut model = seed;
        for mult in LO_THRESHOLD_SCHEDULE {
            let s = score(&model, corrs, cfg, mult * theta);
            model = refine_with(corrs, &model, &s.mask, cfg.solver_case, &LO_REFINE).model;
        }
        let s = score(&model, corrs, cfg, theta);
        if best.beats(s.count, s.cost) {
            best.model = model;
            best.inlier_mask = s.mask;
            best.cost = s.cost;
        }
    };
    let mut evaluated = 0;
    for _ in 0..cfg.lo_inner_iterations {
        let pick: Vec<usize> = sample(rng, inliers.len(), 5).into_iter().map(|k| inliers[k]).collect();
        let Ok(cands) = cfg.solver_case.solve(&sample_set(corrs, &pick), &cfg.solver_options) else {
            continue;
        };
        for cand in cands {
            evaluated += 1;
            let s = score(&cand, corrs, cfg, theta);
            if best.beats(s.count, s.cost) {
                best.model = cand;
                best.inlier_mask = s.mask;
                best.cost = s.cost;
            }
        }
    }
    let seed = best.model;
    polish(seed, &mut best);
    (best, evaluated)
}

/// LO-RANSAC with adaptive termination. Deterministic for a fixed seed
/// unless a time budget cuts the run short.
pub fn ransac(corrs: &[Correspondence], cfg: &RobustConfig) -> Result<RobustResult> {
    cfg.validate()?;
    let n = corrs.len();
    if n < 5 {
        return Err(Error::InsufficientData { needed: 5, got: n });
    }
    let start = Instant::now();
    let mut rng = rng_for(cfg.rng_seed, 0);
    let mut lo_rng = rng_for(cfg.rng_seed, 1);
    let mut best: Option<RobustResult> = None;
    let mut progress = Vec::new();
    let mut iterations = 0;
    let mut effective = 0usize;
    let mut models_evaluated = 0;
    let mut needed = f64::INFINITY;

    while iterations < cfg.max_iterations {
        if iterations >= cfg.min_iterations {
            let over_budget = cfg.time_budget.is_some_and(|b| start.elapsed() >= b);
            if effective as f64 >= needed || over_budget {
                break;
            }
        }
        iterations += 1;
        let idx = sample(&mut rng, n, 5).into_vec();
        let set = sample_set(corrs, &idx);
        if is_degenerate_sample(&set) {
            continue;
        }
        let Ok(cands) = cfg.solver_case.solve(&set, &cfg.solver_options) else { continue };
        effective += 1;
        for cand in cands {
            models_evaluated += 1;
            let s = score(&cand, corrs, cfg, cfg.inlier_threshold_px);
            if best.as_ref().is_some_and(|b| !b.beats(s.count, s.cost)) {
                continue;
            }
            let mut candidate = result_from(cand, s);
            candidate.iterations = iterations;
            if cfg.lo_enabled {
                let (lo, evaluated) = local_optimize_with(corrs, &candidate, cfg, &mut lo_rng);
                models_evaluated += evaluated;
                candidate = lo;
            }
            let count = candidate.num_inliers();
            needed = required_iterations(count, n, cfg.confidence);
            progress.push(ProgressPoint { elapsed: start.elapsed(), iteration: iterations, inliers: count });
            best = Some(candidate);
        }
    }

    let mut best = best.ok_or(Error::NoModelFound)?;
    if cfg.refine_enabled {
        let refined = refine(corrs, &best.model, &best.inlier_mask, cfg.solver_case);
        let s = score(&refined, corrs, cfg, cfg.inlier_threshold_px);
        if s.count >= best.num_inliers() {
            best = result_from(refined, s);
        }
    }
    let s = score(&best.model, corrs, cfg, cfg.inlier_threshold_px);
    best.inlier_mask = s.mask;
    best.cost = s.cost;
    best.iterations = iterations;
    best.models_evaluated = models_evaluated;
    best.elapsed = start.elapsed();
    let count = best.num_inliers();
    if progress.last().is_none_or(|p| p.inliers != count) {
        progress.push(ProgressPoint { elapsed: best.elapsed, iteration: iterations, inliers: count });
    }
    best.progress = progress;
    Ok(best)
}
