//! Levenberg–Marquardt refinement of a perturbed model on noisy inliers.

use radial_homography::geometry::homography_error;
use radial_homography::refine::{refine_with, RefineOptions};
use radial_homography::scene::{generate_instance, SceneConfig};
use radial_homography::{Homography, Mat3, SolverCandidate, SolverCase};

fn main() -> radial_homography::Result<()> {
    let case = SolverCase::TwoSidedIndependent;
    let inst = generate_instance(&SceneConfig { case, num_points: 100, noise_sigma_px: 0.5, rng_seed: 5, ..Default::default() })?;
    let corrs = inst.normalized();
    let gt = inst.gt_h.canonical()?;
    let start = SolverCandidate {
        h: Homography::new(gt + Mat3::from_fn(|r, c| 1e-3 * ((r * 3 + c) as f64 - 4.0)))?,
        lambda: inst.gt_lambda + 0.02,
        lambda_p: inst.gt_lambda_p - 0.02,
        residual: 0.0,
        transfer_residual: 0.0,
    };
    let mask = vec![true; corrs.len()];
    let report = refine_with(&corrs, &start, &mask, case, &RefineOptions::default());
    println!("cost {:.3e} -> {:.3e} in {} iterations", report.initial_cost, report.final_cost, report.iterations);
    println!("H error   {:.2e} -> {:.2e}", homography_error(&start.h, &inst.gt_h)?, homography_error(&report.model.h, &inst.gt_h)?);
    println!("λ  {:+.5} -> {:+.5} (true {:+.5})", start.lambda, report.model.lambda, inst.gt_lambda);
    println!("λ′ {:+.5} -> {:+.5} (true {:+.5})", start.lambda_p, report.model.lambda_p, inst.gt_lambda_p);
    Ok(())
}
