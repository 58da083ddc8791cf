//! One-parameter division model with the distortion center at the origin.
//!
//! A distorted point `p` with radius `r` corresponds to the undistorted point
//! `p / (1 + λ r²)`. Coordinates are expected to be centered on the principal
//! point and divided by the focal length.

use crate::error::{Error, Result};
use crate::geometry::{HomPoint, Vec2};

/// `(u, v, 1 + λ(u² + v²))`.
pub fn lift(p: Vec2, lambda: f64) -> HomPoint {
    HomPoint::new(p.x, p.y, 1.0 + lambda * p.norm_squared())
}

/// Maps a distorted point to its rectified position.
pub fn undistort(p: Vec2, lambda: f64) -> Result<Vec2> {
    let w = 1.0 + lambda * p.norm_squared();
    if w.abs() < 1e-12 {
        return Err(Error::SingularRadius);
    }
    Ok(p / w)
}

/// Inverse of [`undistort`], on the branch that tends to the identity as
/// `λ → 0`.
pub fn distort(p: Vec2, lambda: f64) -> Result<Vec2> {
    let disc = 1.0 - 4.0 * lambda * p.norm_squared();
    if disc < 0.0 {
        return Err(Error::NotInvertible);
    }
    // r_d = 2 r_u / (1 + sqrt(disc)), the smaller root of λ r_u r_d² − r_d + r_u = 0.
    Ok(p * (2.0 / (1.0 + disc.sqrt())))
}

/// Derivatives of [`distort`] at `p`: the 2×2 Jacobian with respect to the
/// undistorted point (row-major) and the derivative with respect to `λ`.
pub(crate) fn distort_jacobian(p: Vec2, d: Vec2, lambda: f64) -> ([f64; 4], Vec2) {
    // Implicit differentiation of d − p (1 + λ|d|²) = 0.
    let a = [
        1.0 - 2.0 * lambda * p.x * d.x,
        -2.0 * lambda * p.x * d.y,
        -2.0 * lambda * p.y * d.x,
        1.0 - 2.0 * lambda * p.y * d.y,
    ];
    let det = a[0] * a[3] - a[1] * a[2];
    let inv = [a[3] / det, -a[1] / det, -a[2] / det, a[0] / det];
    let w = 1.0 + lambda * d.norm_squared();
    let dp = [inv[0] * w, inv[1] * w, inv[2] * w, inv[3] * w];
    let r2 = d.norm_squared();
    let dl = Vec2::new(
        (inv[0] * p.x + inv[1] * p.y) * r2,
        (inv[2] * p.x + inv[3] * p.y) * r2,
    );
    (dp, dl)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lift_examples() {
        assert_eq!(lift(Vec2::new(0.0, 0.0), -0.1), HomPoint::new(0.0, 0.0, 1.0));
        let l = lift(Vec2::new(1.0, 0.0), -0.1);
        assert_eq!((l.u(), l.v()), (1.0, 0.0));
        assert!((l.w() - 0.9).abs() < 1e-15);
        assert_eq!(lift(Vec2::new(3.0, 4.0), 0.0), HomPoint::new(3.0, 4.0, 1.0));
    }

    #[test]
    fn undistort_examples() {
        let p = Vec2::new(0.3, -0.8);
        assert_eq!(undistort(p, 0.0).unwrap(), p);
        let q = undistort(Vec2::new(1.0, 0.0), -0.19).unwrap();
        assert!((q.x - 1.0 / 0.81).abs() < 1e-15 && q.y == 0.0);
        assert!((q.x - 1.234568).abs() < 1e-6);
        assert!(matches!(undistort(Vec2::new(1.0, 0.0), -1.0), Err(Error::SingularRadius)));
    }

    #[test]
    fn distort_examples() {
        let p = Vec2::new(0.3, -0.8);
        assert_eq!(distort(p, 0.0).unwrap(), p);
        let d = distort(Vec2::new(1.0 / 0.9, 0.0), -0.1).unwrap();
        assert!((d.x - 1.0).abs() < 1e-14 && d.y == 0.0);
        assert!(matches!(distort(Vec2::new(1.0, 0.0), 0.5), Err(Error::NotInvertible)));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = Vec2::new(0.4, -0.3);
        let lambda = -0.17;
        let d = distort(p, lambda).unwrap();
        let (j, dl) = distort_jacobian(p, d, lambda);
        let h = 1e-6;
        let fx = (distort(p + Vec2::new(h, 0.0), lambda).unwrap()
            - distort(p - Vec2::new(h, 0.0), lambda).unwrap())
            / (2.0 * h);
        let fy = (distort(p + Vec2::new(0.0, h), lambda).unwrap()
            - distort(p - Vec2::new(0.0, h), lambda).unwrap())
            / (2.0 * h);
        let fl = (distort(p, lambda + h).unwrap() - distort(p, lambda - h).unwrap()) / (2.0 * h);
        assert!((j[0] - fx.x).abs() < 1e-8 && (j[2] - fx.y).abs() < 1e-8);
        assert!((j[1] - fy.x).abs() < 1e-8 && (j[3] - fy.y).abs() < 1e-8);
        assert!((dl - fl).norm() < 1e-8);
    }

    proptest! {
        #[test]
        fn distort_then_undistort_round_trips(
            x in -1.0f64..1.0, y in -1.0f64..1.0, lambda in -0.2f64..-0.01
        ) {
            let p = Vec2::new(x, y);
            let q = undistort(distort(p, lambda).unwrap(), lambda).unwrap();
            prop_assert!((q - p).norm() < 1e-12);
        }

        #[test]
        fn lift_dehomogenizes_to_undistort(
            x in -1.0f64..1.0, y in -1.0f64..1.0, lambda in -0.5f64..0.5
        ) {
            let p = Vec2::new(x, y);
            if let Ok(u) = undistort(p, lambda) {
                let l = lift(p, lambda).to_euclidean().unwrap();
                prop_assert!((l - u).norm() <= 1e-12 * (1.0 + u.norm()));
            }
        }

        #[test]
        fn undistort_commutes_with_rotation(
            x in -1.0f64..1.0, y in -1.0f64..1.0, lambda in -0.2f64..0.2, theta in 0.0f64..6.3
        ) {
            let (s, c) = theta.sin_cos();
            let rot = |v: Vec2| Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y);
            let p = Vec2::new(x, y);
            let a = undistort(rot(p), lambda).unwrap();
            let b = rot(undistort(p, lambda).unwrap());
            prop_assert!((a - b).abs().max() < 1e-12);
            if let (Ok(a), Ok(b)) = (distort(rot(p), lambda), distort(p, lambda)) {
                prop_assert!((a - rot(b)).abs().max() < 1e-12);
            }
        }

        #[test]
        fn undistorted_radius_is_monotone_for_negative_lambda(
            r in 0.0f64..1.5, dr in 1e-6f64..0.1, lambda in -0.4f64..-1e-3
        ) {
            let r2 = r + dr;
            prop_assume!(1.0 + lambda * r2 * r2 > 0.05);
            let ru = |r: f64| r / (1.0 + lambda * r * r);
            prop_assert!(ru(r2) > ru(r));
        }
    }
}
