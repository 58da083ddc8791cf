//! Synthetic planar scenes seen by two distorted cameras.
//!
//! Camera 1 sits at the origin looking down `+z`. A plane `nᵀX = d₁` is
//! placed in front of it with a random tilt, and camera 2 is placed at a
//! random distance from the plane, looking back at the patch seen by
//! camera 1. Plane points are sampled uniformly in camera 1's field of view
//! and kept when they also fall inside camera 2's.

use std::f64::consts::PI;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::distortion::distort;
use crate::error::{Error, Result};
use crate::geometry::{Homography, Mat3, Vec2, Vec3};
use crate::robust::Correspondence;
use crate::solvers::{CorrSet5, SolverCase};

const MAX_PLANE_TILT_DEG: f64 = 30.0;
const MAX_VIEW_ANGLE_DEG: f64 = 45.0;
const LOOK_JITTER_DEG: f64 = 5.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub num_points: usize,
    /// Range of camera-to-plane distances.
    pub depth_range: (f64, f64),
    /// Focal length in pixels, shared by both cameras.
    pub focal: f64,
    /// Full field of view of the square image, in degrees.
    pub fov_deg: f64,
    pub lambda_range: (f64, f64),
    pub case: SolverCase,
    pub noise_sigma_px: f64,
    pub outlier_fraction: f64,
    pub rng_seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            num_points: 100,
            depth_range: (0.1, 10.0),
            focal: 1000.0,
            fov_deg: 70.0,
            lambda_range: (-0.2, -0.01),
            case: SolverCase::TwoSidedIndependent,
            noise_sigma_px: 0.0,
            outlier_fraction: 0.0,
            rng_seed: 0,
        }
    }
}

impl SceneConfig {
    /// Half-width of the image in normalized units.
    pub fn half_extent(&self) -> f64 {
        (0.5 * self.fov_deg.to_radians()).tan()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::ConfigInvalid(m.to_string()));
        let (dlo, dhi) = self.depth_range;
        if !(dlo > 0.0 && dhi >= dlo && dhi.is_finite()) {
            return bad("depth_range must be positive and increasing");
        }
        if !(self.focal > 0.0 && self.focal.is_finite()) {
            return bad("focal must be positive");
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return bad("fov_deg must lie in (0, 180)");
        }
        let (llo, lhi) = self.lambda_range;
        if !(llo <= lhi && llo.is_finite() && lhi.is_finite()) {
            return bad("lambda_range must be finite and increasing");
        }
        // The forward map must exist at the image corners.
        let r2 = 2.0 * self.half_extent().powi(2);
        if 1.0 - 4.0 * lhi.max(0.0) * r2 < 0.0 {
            return bad("lambda_range leaves the invertible branch inside the field of view");
        }
        if !(self.noise_sigma_px >= 0.0 && self.noise_sigma_px.is_finite()) {
            return bad("noise_sigma_px must be nonnegative");
        }
        if !(0.0..1.0).contains(&self.outlier_fraction) {
            return bad("outlier_fraction must lie in [0, 1)");
        }
        if self.num_points == 0 {
            return bad("num_points must be positive");
        }
        Ok(())
    }
}

/// Correspondences in centered pixel coordinates with their ground truth.
#[derive(Clone, Debug)]
pub struct SyntheticInstance {
    pub corrs: Vec<Correspondence>,
    /// Homography between the undistorted, focal-normalized images.
    pub gt_h: Homography,
    pub gt_lambda: f64,
    pub gt_lambda_p: f64,
    pub inlier_flags: Vec<bool>,
    pub focal: f64,
}

impl SyntheticInstance {
    /// Correspondences divided by the focal length.
    pub fn normalized(&self) -> Vec<Correspondence> {
        self.corrs.iter().map(|c| c.scaled(1.0 / self.focal)).collect()
    }

    /// The first five correspondences, normalized.
    pub fn corr_set5(&self) -> Option<CorrSet5> {
        let n = self.normalized();
        if n.len() < 5 {
            return None;
        }
        Some(CorrSet5::new(
            std::array::from_fn(|i| n[i].src),
            std::array::from_fn(|i| n[i].dst),
        ))
    }

    pub fn num_inliers(&self) -> usize {
        self.inlier_flags.iter().filter(|&&f| f).count()
    }
}

/// Deterministic stream `stream` of generator `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn generate_instance(cfg: &SceneConfig) -> Result<SyntheticInstance> {
    generate_instance_with(cfg, &mut rng_for(cfg.rng_seed, 0))
}

/// Direction drawn uniformly from the spherical cap of half-angle
/// `max_angle` around the unit vector `axis`.
fn sample_cone(rng: &mut impl Rng, axis: &Vec3, max_angle: f64) -> Vec3 {
    let cos_t = rng.random_range(max_angle.cos()..=1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = rng.random_range(0.0..2.0 * PI);
    let (e1, e2) = orthonormal_complement(axis);
    axis * cos_t + (e1 * phi.cos() + e2 * phi.sin()) * sin_t
}

fn orthonormal_complement(a: &Vec3) -> (Vec3, Vec3) {
    let helper = if a.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = a.cross(&helper).normalize();
    (e1, a.cross(&e1))
}

/// World-to-camera rotation whose optical axis is `forward`, with roll `roll`.
fn look_rotation(forward: &Vec3, roll: f64) -> Mat3 {
    let z = forward.normalize();
    let (a, b) = orthonormal_complement(&z);
    let (s, c) = roll.sin_cos();
    let x = a * c + b * s;
    let y = z.cross(&x);
    Mat3::from_rows(&[x.transpose(), y.transpose(), z.transpose()])
}

struct Pose {
    n: Vec3,
    d1: f64,
    r2: Mat3,
    c2: Vec3,
}

impl Pose {
    fn sample(rng: &mut impl Rng, cfg: &SceneConfig) -> Self {
        let (dlo, dhi) = cfg.depth_range;
        let n = sample_cone(rng, &Vec3::z(), MAX_PLANE_TILT_DEG.to_radians());
        let d1 = rng.random_range(dlo..=dhi);
        let p0 = Vec3::new(0.0, 0.0, d1 / n.z);
        let d2 = rng.random_range((0.5 * d1).max(dlo)..=(2.0 * d1).min(dhi));
        let m = sample_cone(rng, &n, MAX_VIEW_ANGLE_DEG.to_radians());
        let c2 = p0 - m * (d2 / m.dot(&n));
        let look = sample_cone(rng, &(p0 - c2).normalize(), LOOK_JITTER_DEG.to_radians());
        let r2 = look_rotation(&look, rng.random_range(0.0..2.0 * PI));
        Pose { n, d1, r2, c2 }
    }

    /// `H = R₂ (I − C₂ nᵀ / d₁)`.
    fn homography(&self) -> Mat3 {
        self.r2 * (Mat3::identity() - self.c2 * self.n.transpose() / self.d1)
    }

    /// Plane point seen by camera 1 at normalized position `x`.
    fn backproject(&self, x: Vec2) -> Option<Vec3> {
        let ray = Vec3::new(x.x, x.y, 1.0);
        let denom = self.n.dot(&ray);
        (denom > 1e-6).then(|| ray * (self.d1 / denom))
    }

    fn project2(&self, p: &Vec3) -> Option<Vec2> {
        let q = self.r2 * (p - self.c2);
        (q.z > 1e-9).then(|| Vec2::new(q.x / q.z, q.y / q.z))
    }
}

/// Scene generation from an explicit random source.
pub fn generate_instance_with(cfg: &SceneConfig, rng: &mut impl Rng) -> Result<SyntheticInstance> {
    cfg.validate()?;
    let t = cfg.half_extent();
    let (llo, lhi) = cfg.lambda_range;
    let lambda = rng.random_range(llo..=lhi);
    let (lambda, lambda_p) = match cfg.case {
        SolverCase::TwoSidedIndependent => (lambda, rng.random_range(llo..=lhi)),
        case => case.constrain(lambda, 0.0),
    };

    let (pose, pairs) = 'pose: loop {
        let pose = Pose::sample(rng, cfg);
        let mut pairs = Vec::with_capacity(cfg.num_points);
        let mut attempts = 0;
        while pairs.len() < cfg.num_points {
            attempts += 1;
            if attempts > 50 * cfg.num_points + 100 {
                continue 'pose;
            }
            let x = Vec2::new(rng.random_range(-t..t), rng.random_range(-t..t));
            let Some(p) = pose.backproject(x) else { continue };
            let Some(y) = pose.project2(&p) else { continue };
            if y.x.abs() < t && y.y.abs() < t {
                pairs.push((x, y));
            }
        }
        break (pose, pairs);
    };

    let gt_h = Homography::new(pose.homography())?;
    let f = cfg.focal;
    let noise = Normal::new(0.0, cfg.noise_sigma_px).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    let jitter = |rng: &mut dyn rand::RngCore| {
        if cfg.noise_sigma_px > 0.0 {
            Vec2::new(noise.sample(rng), noise.sample(rng))
        } else {
            Vec2::zeros()
        }
    };
    let mut corrs = Vec::with_capacity(pairs.len());
    for (x, y) in pairs {
        let src = distort(x, lambda)? * f;
        let dst = distort(y, lambda_p)? * f;
        let src = src + jitter(rng);
        let dst = dst + jitter(rng);
        corrs.push(Correspondence::new(src, dst));
    }

    let mut inlier_flags = vec![true; corrs.len()];
    let num_outliers = (cfg.outlier_fraction * corrs.len() as f64).round() as usize;
    let half = t * f;
    for i in sample(rng, corrs.len(), num_outliers).into_iter() {
        let mut uniform = || Vec2::new(rng.random_range(-half..half), rng.random_range(-half..half));
        corrs[i] = Correspondence::new(uniform(), uniform());
        inlier_flags[i] = false;
    }

    Ok(SyntheticInstance {
        corrs,
        gt_h,
        gt_lambda: lambda,
        gt_lambda_p: lambda_p,
        inlier_flags,
        focal: f,
    })
}
