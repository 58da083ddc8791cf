//! Shows the raw root set of the independent case next to the candidates
//! that survive removal of the adjugate-induced roots.

use radial_homography::scene::{generate_instance, SceneConfig};
use radial_homography::solvers::{build_npair, solve_two_sided_independent_detailed};
use radial_homography::{SolverCase, SolverOptions};

fn main() -> radial_homography::Result<()> {
    let inst = generate_instance(&SceneConfig {
        case: SolverCase::TwoSidedIndependent,
        num_points: 5,
        rng_seed: 3,
        ..Default::default()
    })?;
    let set = inst.corr_set5().expect("five points");
    let opts = SolverOptions::default();
    let np = build_npair(&set)?;
    let sol = solve_two_sided_independent_detailed(&set, &opts)?;
    println!("ground truth: λ = {:+.6}, λ′ = {:+.6}", inst.gt_lambda, inst.gt_lambda_p);
    println!("{} real root(s) in range:", sol.raw.len());
    for &(l, lp) in &sol.raw {
        let kind = if np.is_spurious(l, lp, opts.spurious_tol) { "spurious" } else { "kept" };
        println!("  λ = {l:+.6}  λ′ = {lp:+.6}  residual {:.1e}  {kind}", np.residual(l, lp));
    }
    println!("{} candidate(s) after filtering", sol.candidates.len());
    Ok(())
}
