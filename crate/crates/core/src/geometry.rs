//! Closed-form projective machinery.
//!
//! The four-point homography is assembled from the classical construction
//! that maps the projective basis `(1,0,0), (0,1,0), (0,0,1), (1,1,1)` onto
//! each quad, with every matrix inverse replaced by an adjugate. No SVD or
//! null-space computation is involved, so the result is exact up to rounding.

use nalgebra::{Matrix3, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;
pub type Vec3 = Vector3<f64>;
pub type Vec2 = Vector2<f64>;

/// A triple of points is treated as collinear when the determinant of the
/// stacked, unit-normalized points falls below this value.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Homogeneous 2D point `(u, v, w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HomPoint(pub Vec3);

impl HomPoint {
    pub fn new(u: f64, v: f64, w: f64) -> Self {
        Self(Vec3::new(u, v, w))
    }

    /// Lifts a Euclidean point to `(x, y, 1)`.
    pub fn from_euclidean(p: Vec2) -> Self {
        Self(Vec3::new(p.x, p.y, 1.0))
    }

    pub fn u(&self) -> f64 {
        self.0.x
    }

    pub fn v(&self) -> f64 {
        self.0.y
    }

    pub fn w(&self) -> f64 {
        self.0.z
    }

    /// Dehomogenizes; `None` for points at (numerical) infinity.
    pub fn to_euclidean(&self) -> Option<Vec2> {
        let w = self.0.z;
        if w.abs() <= 1e-300 || !w.is_finite() {
            return None;
        }
        Some(Vec2::new(self.0.x / w, self.0.y / w))
    }

    /// Sine of the angle between the two representatives; zero iff the
    /// points coincide up to scale.
    pub fn projective_distance(&self, other: &HomPoint) -> f64 {
        let a = self.0.normalize();
        let b = other.0.normalize();
        a.cross(&b).norm()
    }
}

/// Nonsingular 3×3 matrix, defined up to nonzero scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(Mat3);

impl Homography {
    /// Wraps `m`, rejecting singular matrices (checked on the unit-Frobenius
    /// representative).
    pub fn new(m: Mat3) -> Result<Self> {
        let h = Self(m);
        h.canonical()?;
        Ok(h)
    }

    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    /// Unit Frobenius norm with positive determinant.
    pub fn canonical(&self) -> Result<Mat3> {
        canonicalize(&self.0)
    }

    /// Inverse up to scale, computed with the adjugate.
    pub fn inverse(&self) -> Homography {
        Homography(adjugate3(&self.0))
    }

    pub fn apply(&self, p: &HomPoint) -> HomPoint {
        apply(self, p)
    }

    /// Maps a Euclidean point; `None` when the image lands at infinity.
    pub fn transfer(&self, p: Vec2) -> Option<Vec2> {
        self.apply(&HomPoint::from_euclidean(p)).to_euclidean()
    }
}

fn canonicalize(m: &Mat3) -> Result<Mat3> {
    let norm = m.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::Degenerate("homography has zero or non-finite norm"));
    }
    let mut n = m / norm;
    let det = det3(&n);
    if det.abs() <= 1e-12 {
        return Err(Error::Degenerate("homography is singular"));
    }
    if det < 0.0 {
        n = -n;
    }
    Ok(n)
}

/// Four homogeneous points on one side of the correspondence.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointQuad(pub [HomPoint; 4]);

impl PointQuad {
    pub fn new(pts: [HomPoint; 4]) -> Self {
        Self(pts)
    }

    pub fn from_euclidean(pts: [Vec2; 4]) -> Self {
        Self(pts.map(HomPoint::from_euclidean))
    }

    /// `Ξ = (x₁ x₂ x₃)`: the first three points as columns.
    pub fn basis(&self) -> Mat3 {
        Mat3::from_columns(&[self.0[0].0, self.0[1].0, self.0[2].0])
    }

    /// True when no three points are collinear at tolerance `tol`.
    pub fn is_general_position(&self, tol: f64) -> bool {
        min_triple_det(&self.0) > tol
    }
}

/// Smallest |det| over the four point triples, each point scaled to unit norm.
fn min_triple_det(pts: &[HomPoint; 4]) -> f64 {
    let n: Vec<Vec3> = pts
        .iter()
        .map(|p| {
            let norm = p.0.norm();
            if norm > 0.0 {
                p.0 / norm
            } else {
                Vec3::zeros()
            }
        })
        .collect();
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    TRIPLES
        .iter()
        .map(|t| det3(&Mat3::from_columns(&[n[t[0]], n[t[1]], n[t[2]]])).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Coefficients `Γ` with `x₄ ∼ γ₁x₁ + γ₂x₂ + γ₃x₃` (scaled by det Ξ).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaTriple(pub [f64; 3]);

impl GammaTriple {
    pub fn as_vec(&self) -> Vec3 {
        Vec3::new(self.0[0], self.0[1], self.0[2])
    }
}

/// Determinant by cofactor expansion along the first row.
pub fn det3(m: &Mat3) -> f64 {
    m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
        - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
        + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
}

/// Explicit 3×3 adjugate, `m · adj(m) = det(m) · I`.
pub fn adjugate3(m: &Mat3) -> Mat3 {
    let (u1, u2, u3) = (m[(0, 0)], m[(0, 1)], m[(0, 2)]);
    let (v1, v2, v3) = (m[(1, 0)], m[(1, 1)], m[(1, 2)]);
    let (w1, w2, w3) = (m[(2, 0)], m[(2, 1)], m[(2, 2)]);
    Mat3::new(
        v2 * w3 - v3 * w2,
        u3 * w2 - u2 * w3,
        u2 * v3 - u3 * v2,
        v3 * w1 - v1 * w3,
        u1 * w3 - u3 * w1,
        u3 * v1 - u1 * v3,
        v1 * w2 - v2 * w1,
        u2 * w1 - u1 * w2,
        u1 * v2 - u2 * v1,
    )
}

/// `Γ = adj(Ξ) x₄`.
pub fn gamma_of(quad: &PointQuad) -> Result<GammaTriple> {
    if !quad.is_general_position(DEGENERACY_TOL) {
        return Err(Error::Degenerate("collinear point triple"));
    }
    let g = adjugate3(&quad.basis()) * quad.0[3].0;
    Ok(GammaTriple([g.x, g.y, g.z]))
}

/// `H = Ξ′ diag(Γ′) diag(Γ)⁻¹ adj(Ξ)`, mapping `src[i]` to `dst[i]` up to scale.
pub fn closed_form_homography(src: &PointQuad, dst: &PointQuad) -> Result<Homography> {
    let g = gamma_of(src)?;
    let gp = gamma_of(dst)?;
    Ok(Homography(closed_form_matrix(src, dst, &g, &gp)))
}

/// The closed form without the general-position guard. Callers that have
/// already validated the quads use this directly.
pub(crate) fn closed_form_matrix(
    src: &PointQuad,
    dst: &PointQuad,
    g: &GammaTriple,
    gp: &GammaTriple,
) -> Mat3 {
    let scale = Vec3::new(gp.0[0] / g.0[0], gp.0[1] / g.0[1], gp.0[2] / g.0[2]);
    let mut left = dst.basis();
    for (j, s) in scale.iter().enumerate() {
        left.column_mut(j).scale_mut(*s);
    }
    left * adjugate3(&src.basis())
}

/// `h · p` without dehomogenization.
pub fn apply(h: &Homography, p: &HomPoint) -> HomPoint {
    HomPoint(h.0 * p.0)
}

/// `‖Â − B̂‖_F` between canonical (unit-Frobenius, positive-determinant)
/// representatives.
pub fn homography_error(a: &Homography, b: &Homography) -> Result<f64> {
    let an = a.canonical()?;
    let bn = b.canonical()?;
    Ok((an - bn).norm())
}

/// Same metric on raw matrices.
pub fn matrix_error(a: &Mat3, b: &Mat3) -> Result<f64> {
    Ok((canonicalize(a)? - canonicalize(b)?).norm())
}
