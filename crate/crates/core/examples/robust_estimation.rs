//! Robust estimation with local optimization on contaminated
//! correspondences.
//!
//! Usage: `cargo run --release --example robust_estimation [outlier_fraction]`

use radial_homography::geometry::homography_error;
use radial_homography::robust::{ransac, RobustConfig};
use radial_homography::scene::{generate_instance, SceneConfig};
use radial_homography::SolverCase;

fn main() -> radial_homography::Result<()> {
    let outliers = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.4);
    for case in SolverCase::ALL {
        let inst = generate_instance(&SceneConfig {
            case,
            num_points: 200,
            noise_sigma_px: 0.5,
            outlier_fraction: outliers,
            rng_seed: 11,
            ..Default::default()
        })?;
        let cfg = RobustConfig { solver_case: case, focal_scale: inst.focal, ..Default::default() };
        let res = ransac(&inst.normalized(), &cfg)?;
        let recovered = res.inlier_mask.iter().zip(&inst.inlier_flags).filter(|(m, f)| **m && **f).count();
        println!(
            "{case:>11}: {} inliers ({recovered}/{} true), {} iterations, {:.2} ms, H error {:.1e}, λ {:+.4} (true {:+.4})",
            res.num_inliers(),
            inst.num_inliers(),
            res.iterations,
            res.elapsed.as_secs_f64() * 1e3,
            homography_error(&res.model.h, &inst.gt_h)?,
            res.model.lambda,
            inst.gt_lambda,
        );
    }
    Ok(())
}
