//! Simultaneous estimation of a planar homography and one-parameter
//! division-model radial distortion from five point correspondences.
//!
//! Three minimal solvers are provided, one per distortion configuration:
//!
//! * [`solvers::solve_one_sided`]: only the source image is distorted,
//! * [`solvers::solve_two_sided_equal`]: both images share one coefficient,
//! * [`solvers::solve_two_sided_independent`]: each image has its own.
//!
//! All of them are built on the closed-form four-point homography in
//! [`geometry`]. [`robust`] wraps the solvers in LO-RANSAC with a final
//! Levenberg–Marquardt refinement, and [`bench`] reproduces the synthetic
//! stability, noise and robust-estimation experiments.

pub mod bench;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod geometry;
pub mod io;
pub mod poly;
pub mod refine;
pub mod robust;
pub mod scene;
pub mod solvers;

pub use error::{Error, Result};
pub use geometry::{HomPoint, Homography, Mat3, PointQuad, Vec2, Vec3};
pub use solvers::{CorrSet5, SolverCandidate, SolverCase, SolverOptions};
