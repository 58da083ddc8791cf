//! Runs each minimal solver on a synthetic five-point scene and reports the
//! candidate closest to the ground truth.
//!
//! Usage: `cargo run --example minimal_solvers [seed]`

use std::time::Instant;

use radial_homography::geometry::homography_error;
use radial_homography::scene::{generate_instance, SceneConfig};
use radial_homography::{SolverCase, SolverOptions};

fn main() -> radial_homography::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    for case in SolverCase::ALL {
        let inst = generate_instance(&SceneConfig { case, num_points: 5, rng_seed: seed, ..Default::default() })?;
        let set = inst.corr_set5().expect("five points");
        let start = Instant::now();
        let cands = case.solve(&set, &SolverOptions::default())?;
        let took = start.elapsed();
        println!("{case}: {} candidate(s) in {:.1} µs", cands.len(), took.as_secs_f64() * 1e6);
        println!("  ground truth  λ = {:+.6}  λ′ = {:+.6}", inst.gt_lambda, inst.gt_lambda_p);
        for c in &cands {
            println!(
                "  candidate     λ = {:+.6}  λ′ = {:+.6}  H error {:.1e}  residual {:.1e}",
                c.lambda,
                c.lambda_p,
                homography_error(&c.h, &inst.gt_h)?,
                c.residual
            );
        }
    }
    Ok(())
}
