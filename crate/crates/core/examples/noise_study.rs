//! Noise-free stability and noise sensitivity of the three solvers.
//!
//! Usage: `cargo run --release --example noise_study [trials]`

use radial_homography::bench::{run_noise, run_stability, summarize};
use radial_homography::scene::SceneConfig;
use radial_homography::SolverCase;

fn main() {
    let trials = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    println!("{:>11}  {:>9}  {:>9}  {:>8}", "case", "median", "p99", "failures");
    for case in SolverCase::ALL {
        let recs = run_stability(&SceneConfig { case, ..Default::default() }, trials);
        let mut h: Vec<f64> = recs.iter().map(|r| if r.failed() { f64::INFINITY } else { r.h_error }).collect();
        h.sort_by(f64::total_cmp);
        let failures = recs.iter().filter(|r| r.failed()).count();
        println!("{case:>11}  {:9.2e}  {:9.2e}  {failures:>8}", h[h.len() / 2], h[(h.len() * 99) / 100]);
    }
    println!();
    println!("{:>11}  {:>5}  {:>12}  {:>12}", "case", "σ px", "median H err", "median k err");
    for case in SolverCase::ALL {
        let recs = run_noise(&SceneConfig { case, ..Default::default() }, &[0.0, 0.1, 0.5, 1.0, 2.0], trials);
        for s in summarize(&recs) {
            println!("{case:>11}  {:5.1}  {:12.3e}  {:12.3e}", s.noise_sigma, s.median_h_error, s.median_k_error);
        }
    }
}
