//! Minimal solvers for homographies with division-model radial distortion.
//!
//! With the four basis points lifted by the division model, the fifth
//! correspondence gives `N(λ) ∼ N′(λ′)` where
//! `N(λ) = (diag Γ(λ))⁻¹ adj(Ξ(λ)) x₅(λ)` with the diagonal cleared, a cubic
//! vector polynomial. Each distortion configuration reduces
//! `N(λ) × N′(λ′) = 0` to a different univariate problem:
//!
//! | case        | equations            | solutions |
//! |-------------|----------------------|-----------|
//! | one-sided   | cubic in λ           | ≤ 3       |
//! | equal       | sextic in λ          | ≤ 6       |
//! | independent | resultant in λ       | ≤ 9 raw, ≤ 5 after filtering |

use std::fmt;
use std::str::FromStr;

use crate::distortion::lift;
use crate::error::{Error, Result};
use crate::geometry::{closed_form_homography, det3, Homography, Mat3, PointQuad, Vec2, Vec3};
use crate::poly::{
    cubic_roots_trig, sturm_real_roots, sylvester_resultant_deflated, vec_cross, BiPoly, Poly,
    VecPoly, DEFAULT_LAMBDA_RADIUS,
};

/// Distortion configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SolverCase {
    /// `λ′ = 0`: only the source image is distorted.
    #[serde(rename = "one-sided")]
    OneSided,
    /// `λ′ = λ`.
    #[serde(rename = "equal")]
    TwoSidedEqual,
    /// Independent `λ` and `λ′`.
    #[serde(rename = "independent")]
    TwoSidedIndependent,
}

impl SolverCase {
    pub const ALL: [SolverCase; 3] = [
        SolverCase::OneSided,
        SolverCase::TwoSidedEqual,
        SolverCase::TwoSidedIndependent,
    ];

    /// Upper bound on the number of candidates returned per call.
    pub fn max_solutions(self) -> usize {
        match self {
            SolverCase::OneSided => 3,
            SolverCase::TwoSidedEqual => 6,
            SolverCase::TwoSidedIndependent => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverCase::OneSided => "one-sided",
            SolverCase::TwoSidedEqual => "equal",
            SolverCase::TwoSidedIndependent => "independent",
        }
    }

    /// Applies the case constraint to a `(λ, λ′)` pair.
    pub fn constrain(self, lambda: f64, lambda_p: f64) -> (f64, f64) {
        match self {
            SolverCase::OneSided => (lambda, 0.0),
            SolverCase::TwoSidedEqual => (lambda, lambda),
            SolverCase::TwoSidedIndependent => (lambda, lambda_p),
        }
    }

    pub fn solve(self, c: &CorrSet5, opts: &SolverOptions) -> Result<Vec<SolverCandidate>> {
        match self {
            SolverCase::OneSided => solve_one_sided(c, opts),
            SolverCase::TwoSidedEqual => solve_two_sided_equal(c, opts),
            SolverCase::TwoSidedIndependent => solve_two_sided_independent(c, opts),
        }
    }
}

impl fmt::Display for SolverCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for SolverCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-sided" | "one_sided" | "onesided" => Ok(SolverCase::OneSided),
            "equal" | "two-sided-equal" => Ok(SolverCase::TwoSidedEqual),
            "independent" | "two-sided-independent" => Ok(SolverCase::TwoSidedIndependent),
            other => Err(Error::Parse(format!("unknown solver case `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Interval searched for distortion coefficients.
    pub lambda_range: (f64, f64),
    /// Largest accepted sine between `N(λ)` and `N′(λ′)`; `None` selects
    /// the per-case default.
    pub residual_tol: Option<f64>,
    /// Relative threshold of the determinant check that removes the roots
    /// introduced by the adjugates.
    pub spurious_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            lambda_range: (-DEFAULT_LAMBDA_RADIUS, DEFAULT_LAMBDA_RADIUS),
            residual_tol: None,
            spurious_tol: 1e-8,
        }
    }
}

impl SolverOptions {
    pub fn residual_tol_for(&self, case: SolverCase) -> f64 {
        self.residual_tol.unwrap_or(match case {
            // 4.5-point problems: one component is solved exactly, the other
            // two only agree up to the measurement noise.
            SolverCase::OneSided | SolverCase::TwoSidedEqual => 0.1,
            SolverCase::TwoSidedIndependent => 1e-6,
        })
    }
}

/// Five distorted correspondences in focal-normalized, centered units.
/// Indices 0..4 form the basis quad and index 4 is the constraint point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrSet5 {
    pub src: [Vec2; 5],
    pub dst: [Vec2; 5],
}

impl CorrSet5 {
    pub fn new(src: [Vec2; 5], dst: [Vec2; 5]) -> Self {
        Self { src, dst }
    }

    /// Moves correspondence `i` into the constraint slot.
    pub fn with_fifth(&self, i: usize) -> Self {
        let mut out = *self;
        out.src.swap(i, 4);
        out.dst.swap(i, 4);
        out
    }
}

/// One solution `(H, λ, λ′)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverCandidate {
    pub h: Homography,
    pub lambda: f64,
    pub lambda_p: f64,
    /// Largest component of `N̂(λ) × N̂′(λ′)` with both factors normalized.
    pub residual: f64,
    /// Distance between `H x₅` and `x₅′` in undistorted destination units.
    pub transfer_residual: f64,
}

/// `N(λ)` and `N′(λ′)` with the affine quantities they are built from.
#[derive(Clone, Debug, PartialEq)]
pub struct NPair {
    pub n: VecPoly,
    pub n_p: VecPoly,
    /// `det Ξ(λ)`.
    pub det_src: Poly,
    /// `det Ξ′(λ′)`.
    pub det_dst: Poly,
    pub gamma_src: [Poly; 3],
    pub gamma_dst: [Poly; 3],
}

struct SideExpansion {
    n: VecPoly,
    det: Poly,
    gamma: [Poly; 3],
}

/// Determinant of three columns `aₖ + λ bₖ` where every `bₖ` is parallel to
/// `e₃`; terms quadratic in `λ` vanish.
fn affine_det(cols: [(Vec3, Vec3); 3]) -> Poly {
    let m = |c: [Vec3; 3]| det3(&Mat3::from_columns(&c));
    let [(a0, b0), (a1, b1), (a2, b2)] = cols;
    Poly::linear(
        m([a0, a1, a2]),
        m([b0, a1, a2]) + m([a0, b1, a2]) + m([a0, a1, b2]),
    )
}

fn expand_side(pts: &[Vec2; 5]) -> Result<SideExpansion> {
    let cols: [(Vec3, Vec3); 5] =
        pts.map(|p| (Vec3::new(p.x, p.y, 1.0), Vec3::new(0.0, 0.0, p.norm_squared())));
    let basis = [cols[0], cols[1], cols[2]];
    // Cramer: (adj(Ξ) x)ᵢ = det(Ξ with column i replaced by x).
    let replace = |i: usize, x: (Vec3, Vec3)| {
        let mut c = basis;
        c[i] = x;
        affine_det(c)
    };
    let gamma: [Poly; 3] = std::array::from_fn(|i| replace(i, cols[3]));
    let a: [Poly; 3] = std::array::from_fn(|i| replace(i, cols[4]));
    let det = affine_det(basis);

    let scale = pts
        .iter()
        .map(|p| 1.0 + p.norm_squared())
        .fold(1.0, f64::max)
        .powi(3);
    let tol = 1e-12 * scale;
    if det.max_abs() <= tol || gamma.iter().chain(a.iter()).any(|g| g.max_abs() <= tol) {
        return Err(Error::Degenerate("collinear points for every distortion value"));
    }
    let comp = |i: usize| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        &a[i] * &(&gamma[j] * &gamma[k])
    };
    let (n0, n1, n2) = (comp(0), comp(1), comp(2));
    Ok(SideExpansion {
        n: VecPoly::from_components([&n0, &n1, &n2]),
        det,
        gamma,
    })
}

/// Builds `N(λ)` and `N′(λ′)` from the five correspondences.
pub fn build_npair(c: &CorrSet5) -> Result<NPair> {
    let s = expand_side(&c.src)?;
    let d = expand_side(&c.dst)?;
    Ok(NPair {
        n: s.n,
        n_p: d.n,
        det_src: s.det,
        det_dst: d.det,
        gamma_src: s.gamma,
        gamma_dst: d.gamma,
    })
}

impl NPair {
    /// Sine of the angle between `N(λ)` and `N′(λ′)`, as the largest
    /// component of the normalized cross product.
    pub fn residual(&self, lambda: f64, lambda_p: f64) -> f64 {
        let a = self.n.eval(lambda);
        let b = self.n_p.eval(lambda_p);
        let (na, nb) = (a.norm(), b.norm());
        if !(na > 1e-14 * self.n.max_abs()) || !(nb > 1e-14 * self.n_p.max_abs()) {
            return f64::INFINITY;
        }
        (a / na).cross(&(b / nb)).amax()
    }

    /// True at the roots introduced by the adjugate formulation: a vanishing
    /// `det Ξ` or a vanishing `γᵢ` on either side.
    pub fn is_spurious(&self, lambda: f64, lambda_p: f64, tol: f64) -> bool {
        let near_zero = |p: &Poly, x: f64| p.eval(x).abs() <= tol * p.max_abs() * (1.0 + x.abs());
        near_zero(&self.det_src, lambda)
            || near_zero(&self.det_dst, lambda_p)
            || self.gamma_src.iter().any(|g| near_zero(g, lambda))
            || self.gamma_dst.iter().any(|g| near_zero(g, lambda_p))
    }
}

/// Index of the best-conditioned equation: the largest ratio of the
/// nominal leading coefficient to the largest coefficient, among equations
/// that are not negligibly small.
fn select_component(eqs: &[Poly; 3], nominal_degree: usize) -> usize {
    let biggest = eqs.iter().map(Poly::max_abs).fold(0.0, f64::max);
    let score = |p: &Poly| {
        let m = p.max_abs();
        if m <= 1e-3 * biggest || m == 0.0 {
            return -1.0;
        }
        p.coeffs().get(nominal_degree).copied().unwrap_or(0.0).abs() / m
    };
    (0..3)
        .max_by(|&i, &j| score(&eqs[i]).total_cmp(&score(&eqs[j])))
        .unwrap_or(0)
}

fn check_radius(points: &[Vec2; 5], lambda: f64) -> Result<()> {
    if points
        .iter()
        .any(|p| (1.0 + lambda * p.norm_squared()).abs() < 1e-12)
    {
        return Err(Error::SingularRadius);
    }
    Ok(())
}

/// Homography between the `λ`-undistorted source quad and the
/// `λ′`-undistorted destination quad (points 0..4).
pub fn recover_h(c: &CorrSet5, lambda: f64, lambda_p: f64) -> Result<Homography> {
    check_radius(&c.src, lambda)?;
    check_radius(&c.dst, lambda_p)?;
    let src = PointQuad::new(std::array::from_fn(|i| lift(c.src[i], lambda)));
    let dst = PointQuad::new(std::array::from_fn(|i| lift(c.dst[i], lambda_p)));
    closed_form_homography(&src, &dst)
}

/// Euclidean distance between `H x₅` and `x₅′` after undistortion.
pub fn fifth_point_residual(c: &CorrSet5, h: &Homography, lambda: f64, lambda_p: f64) -> f64 {
    let mapped = h.apply(&lift(c.src[4], lambda)).to_euclidean();
    let target = lift(c.dst[4], lambda_p).to_euclidean();
    match (mapped, target) {
        (Some(a), Some(b)) => {
            let d = (a - b).norm();
            if d.is_finite() {
                d
            } else {
                f64::INFINITY
            }
        }
        _ => f64::INFINITY,
    }
}

fn make_candidate(
    c: &CorrSet5,
    np: &NPair,
    lambda: f64,
    lambda_p: f64,
    tol: f64,
) -> Option<SolverCandidate> {
    let residual = np.residual(lambda, lambda_p);
    if !(residual <= tol) {
        return None;
    }
    let h = recover_h(c, lambda, lambda_p).ok()?;
    Some(SolverCandidate {
        h,
        lambda,
        lambda_p,
        residual,
        transfer_residual: fifth_point_residual(c, &h, lambda, lambda_p),
    })
}

fn finish(mut cands: Vec<SolverCandidate>, max: usize) -> Vec<SolverCandidate> {
    cands.sort_by(|a, b| a.transfer_residual.total_cmp(&b.transfer_residual));
    cands.truncate(max);
    cands
}

fn in_range(x: f64, range: (f64, f64)) -> bool {
    x >= range.0 && x <= range.1
}

/// `λ′ = 0`: a root of one cubic component of `N(λ) × N′(0)`, checked
/// against the other two.
pub fn solve_one_sided(c: &CorrSet5, opts: &SolverOptions) -> Result<Vec<SolverCandidate>> {
    let np = build_npair(c)?;
    let target = VecPoly::constant(np.n_p.eval(0.0));
    let eqs: [Poly; 3] = vec_cross(&np.n, &target).map(|e| e.specialize_y(0.0));
    let k = select_component(&eqs, 3);
    let roots = match cubic_roots_trig(&eqs[k]) {
        Ok(r) => r,
        Err(Error::ZeroPolynomial) => Vec::new(),
        Err(e) => return Err(e),
    };
    let tol = opts.residual_tol_for(SolverCase::OneSided);
    let cands = roots
        .into_iter()
        .filter(|&l| in_range(l, opts.lambda_range))
        .filter_map(|l| make_candidate(c, &np, l, 0.0, tol))
        .collect();
    Ok(finish(cands, 3))
}

/// `λ′ = λ`: Sturm roots of one sextic component of `N(λ) × N′(λ)`.
pub fn solve_two_sided_equal(c: &CorrSet5, opts: &SolverOptions) -> Result<Vec<SolverCandidate>> {
    let np = build_npair(c)?;
    let eqs: [Poly; 3] = vec_cross(&np.n, &np.n_p).map(|e| e.diagonal());
    let k = select_component(&eqs, 6);
    let (lo, hi) = opts.lambda_range;
    let roots = match sturm_real_roots(&eqs[k], lo, hi) {
        Ok(r) => r,
        Err(Error::ZeroPolynomial) => Vec::new(),
        Err(e) => return Err(e),
    };
    let tol = opts.residual_tol_for(SolverCase::TwoSidedEqual);
    let cands = roots
        .into_iter()
        .filter_map(|l| make_candidate(c, &np, l, l, tol))
        .collect();
    Ok(finish(cands, 6))
}

/// Real solutions of the independent case, before and after removal of the
/// adjugate-induced roots.
#[derive(Clone, Debug)]
pub struct IndependentSolution {
    /// Every real `(λ, λ′)` satisfying all three equations.
    pub raw: Vec<(f64, f64)>,
    pub candidates: Vec<SolverCandidate>,
}

/// Independent `λ` and `λ′`.
pub fn solve_two_sided_independent(
    c: &CorrSet5,
    opts: &SolverOptions,
) -> Result<Vec<SolverCandidate>> {
    Ok(solve_two_sided_independent_detailed(c, opts)?.candidates)
}

/// Like [`solve_two_sided_independent`] but also reports the raw root set.
///
/// `λ′` is eliminated from two components with a Sylvester resultant. For
/// components `i, j` the resultant carries the extraneous factor `N_k(λ)³`
/// (`k` the third index), whose roots pair with every root of `N′_k`; it is
/// divided out, leaving a degree-9 polynomial whose roots are the `λ` of the
/// nine solutions. `λ′` is recovered from the cubics in `λ′` at each root
/// and the pair is polished by Gauss–Newton on all three equations.
pub fn solve_two_sided_independent_detailed(
    c: &CorrSet5,
    opts: &SolverOptions,
) -> Result<IndependentSolution> {
    let np = build_npair(c)?;
    let eqs = vec_cross(&np.n, &np.n_p);
    let (lo, hi) = opts.lambda_range;
    let radius = lo.abs().max(hi.abs());

    let lead_score = |e: &BiPoly| e.coeff_y(e.degree_y()).max_abs() / e.max_abs().max(f64::MIN_POSITIVE);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| lead_score(&eqs[b]).total_cmp(&lead_score(&eqs[a])));
    let pairs = [
        (order[0], order[1], order[2]),
        (order[0], order[2], order[1]),
        (order[1], order[2], order[0]),
    ];

    let mut last_err = None;
    let mut lambdas = None;
    for &(i, j, k) in &pairs {
        match sylvester_resultant_deflated(&eqs[i], &eqs[j], &np.n.component(k), 3, radius) {
            Ok(r) if r.max_abs() > 0.0 => match sturm_real_roots(&r, lo, hi) {
                Ok(roots) => {
                    lambdas = Some(roots);
                    break;
                }
                Err(e) => last_err = Some(e),
            },
            Ok(_) => last_err = Some(Error::DegreeDeficient),
            Err(e) => last_err = Some(e),
        }
    }
    let Some(lambdas) = lambdas else {
        return Err(last_err.unwrap_or(Error::DegreeDeficient));
    };

    let tol = opts.residual_tol_for(SolverCase::TwoSidedIndependent);
    let slack = 0.05 * (hi - lo);
    let mut raw: Vec<(f64, f64, f64)> = Vec::new();
    for &l in &lambdas {
        let mut starts: Vec<f64> = Vec::new();
        for e in &eqs {
            if let Ok(r) = cubic_roots_trig(&e.specialize_x(l)) {
                starts.extend(r.into_iter().filter(|&y| y >= lo - slack && y <= hi + slack));
            }
        }
        for lp in starts {
            if !(np.residual(l, lp) < 1e-2) {
                continue;
            }
            let (x, y) = gauss_newton(&eqs, l, lp);
            if !in_range(x, opts.lambda_range) || !in_range(y, opts.lambda_range) {
                continue;
            }
            let res = np.residual(x, y);
            if !(res <= tol) {
                continue;
            }
            if raw
                .iter()
                .any(|&(a, b, _)| (a - x).abs() < 1e-8 && (b - y).abs() < 1e-8)
            {
                continue;
            }
            raw.push((x, y, res));
        }
    }
    if raw.len() > 9 {
        raw.sort_by(|a, b| a.2.total_cmp(&b.2));
        raw.truncate(9);
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let cands = raw
        .iter()
        .filter(|&&(x, y, _)| !np.is_spurious(x, y, opts.spurious_tol))
        .filter_map(|&(x, y, _)| make_candidate(c, &np, x, y, tol))
        .collect();
    Ok(IndependentSolution {
        raw: raw.into_iter().map(|(x, y, _)| (x, y)).collect(),
        candidates: finish(cands, 5),
    })
}

/// Gauss–Newton on the three equations in two unknowns; steps that do not
/// reduce the residual norm are rejected.
fn gauss_newton(eqs: &[BiPoly; 3], mut x: f64, mut y: f64) -> (f64, f64) {
    let eval = |x: f64, y: f64| {
        let mut f = [0.0; 3];
        let mut j = [[0.0; 2]; 3];
        for (m, e) in eqs.iter().enumerate() {
            let (v, dx, dy) = e.eval_with_gradient(x, y);
            f[m] = v;
            j[m] = [dx, dy];
        }
        (f, j)
    };
    let norm2 = |f: &[f64; 3]| f.iter().map(|v| v * v).sum::<f64>();
    let (mut f, mut j) = eval(x, y);
    for _ in 0..20 {
        let mut a = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for m in 0..3 {
            for r in 0..2 {
                g[r] += j[m][r] * f[m];
                for s in 0..2 {
                    a[r][s] += j[m][r] * j[m][s];
                }
            }
        }
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let dx = -(a[1][1] * g[0] - a[0][1] * g[1]) / det;
        let dy = -(a[0][0] * g[1] - a[1][0] * g[0]) / det;
        let (nx, ny) = (x + dx, y + dy);
        let (nf, nj) = eval(nx, ny);
        if !(norm2(&nf) < norm2(&f)) {
            break;
        }
        x = nx;
        y = ny;
        f = nf;
        j = nj;
        if dx.abs().max(dy.abs()) <= 1e-15 * (1.0 + x.abs().max(y.abs())) {
            break;
        }
    }
    (x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::distort;
    use crate::geometry::homography_error;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Noise-free instance: random src in the undistorted image, a random
    /// homography, then both sides distorted.
    fn synthetic(rng: &mut impl Rng, lambda: f64, lambda_p: f64) -> (CorrSet5, Homography) {
        loop {
            let m = Mat3::identity()
                + Mat3::from_fn(|_, _| rng.random_range(-0.3..0.3));
            let Ok(h) = Homography::new(m) else { continue };
            let und: [Vec2; 5] = std::array::from_fn(|_| {
                Vec2::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6))
            });
            let mut ok = true;
            let mut src = [Vec2::zeros(); 5];
            let mut dst = [Vec2::zeros(); 5];
            for i in 0..5 {
                let Some(t) = h.transfer(und[i]) else { ok = false; break };
                if t.norm() > 1.0 {
                    ok = false;
                    break;
                }
                src[i] = distort(und[i], lambda).unwrap();
                dst[i] = distort(t, lambda_p).unwrap();
            }
            if !ok {
                continue;
            }
            let q = PointQuad::from_euclidean([und[0], und[1], und[2], und[3]]);
            if !q.is_general_position(0.05) {
                continue;
            }
            return (CorrSet5::new(src, dst), h);
        }
    }

    fn contains(cands: &[SolverCandidate], h: &Homography, l: f64, lp: f64, tol: f64) -> bool {
        cands.iter().any(|c| {
            (c.lambda - l).abs() < tol
                && (c.lambda_p - lp).abs() < tol
                && homography_error(&c.h, h).unwrap() < tol
        })
    }

    #[test]
    fn npair_vanishes_at_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (l, lp) = (rng.random_range(-0.2..-0.01), rng.random_range(-0.2..-0.01));
            let (c, _) = synthetic(&mut rng, l, lp);
            let np = build_npair(&c).unwrap();
            assert!(np.residual(l, lp) < 1e-9);
            let e = vec_cross(&np.n, &np.n_p);
            let scale = np.n.eval(l).norm() * np.n_p.eval(lp).norm();
            for comp in &e {
                assert!(comp.eval(l, lp).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn npair_matches_uncleared_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (c, _) = synthetic(&mut rng, -0.1, -0.05);
        let np = build_npair(&c).unwrap();
        for _ in 0..20 {
            let l = rng.random_range(-0.5..0.5);
            let xi = Mat3::from_columns(&[
                lift(c.src[0], l).0,
                lift(c.src[1], l).0,
                lift(c.src[2], l).0,
            ]);
            let adj = crate::geometry::adjugate3(&xi);
            let g = adj * lift(c.src[3], l).0;
            let a = adj * lift(c.src[4], l).0;
            let direct = Vec3::new(a.x / g.x, a.y / g.y, a.z / g.z);
            let n = np.n.eval(l);
            assert!(direct.normalize().cross(&n.normalize()).norm() < 1e-10);
        }
    }

    #[test]
    fn npair_constant_when_all_radii_vanish() {
        // Only the origin has zero radius, so use a tiny scale where the
        // λ-dependence is below rounding.
        let s = 1e-9;
        let pts = [
            Vec2::new(0.0, 0.0),
            Vec2::new(s, 0.0),
            Vec2::new(0.0, s),
            Vec2::new(s, 2.0 * s),
            Vec2::new(-s, 0.5 * s),
        ];
        let c = CorrSet5::new(pts, pts);
        let np = build_npair(&c);
        // Either degenerate (determinants at rounding level) or constant.
        if let Ok(np) = np {
            let rel = np.n.coeffs[1..].iter().map(|v| v.amax()).fold(0.0, f64::max)
                / np.n.coeffs[0].amax();
            assert!(rel < 1e-12);
        }
        let big = [
            Vec2::new(0.1, 0.2),
            Vec2::new(0.9, -0.1),
            Vec2::new(-0.3, 0.7),
            Vec2::new(0.5, 0.5),
            Vec2::new(0.2, -0.4),
        ];
        let c = CorrSet5::new(big, big);
        let np = build_npair(&c).unwrap();
        assert_eq!(np.n.coeffs.len(), 4);
        assert!(np.n.coeffs[3].amax() > 0.0);
    }

    #[test]
    fn collinear_basis_is_degenerate() {
        let src = [
            Vec2::new(0.0, 0.0),
            Vec2::new(0.3, 0.3),
            Vec2::new(0.6, 0.6),
            Vec2::new(0.1, 0.5),
            Vec2::new(0.4, -0.2),
        ];
        // Collinear through the origin stays collinear under any λ.
        let c = CorrSet5::new(src, src);
        assert!(matches!(build_npair(&c), Err(Error::Degenerate(_))));
        assert!(solve_one_sided(&c, &SolverOptions::default()).is_err());
    }

    #[test]
    fn one_sided_recovers_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let (c, h) = synthetic(&mut rng, -0.1, 0.0);
            let cands = solve_one_sided(&c, &SolverOptions::default()).unwrap();
            assert!(cands.len() <= 3);
            assert!(contains(&cands, &h, -0.1, 0.0, 1e-8), "{cands:?}");
            assert!(cands.iter().all(|c| c.lambda_p == 0.0));
        }
    }

    #[test]
    fn one_sided_pinhole_matches_plain_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (c, h) = synthetic(&mut rng, 0.0, 0.0);
        let cands = solve_one_sided(&c, &SolverOptions::default()).unwrap();
        let best = cands.iter().find(|k| k.lambda.abs() < 1e-10).expect("pinhole root");
        let plain = closed_form_homography(
            &PointQuad::from_euclidean([c.src[0], c.src[1], c.src[2], c.src[3]]),
            &PointQuad::from_euclidean([c.dst[0], c.dst[1], c.dst[2], c.dst[3]]),
        )
        .unwrap();
        assert!(homography_error(&best.h, &plain).unwrap() < 1e-9);
        assert!(homography_error(&best.h, &h).unwrap() < 1e-9);
    }

    #[test]
    fn equal_recovers_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let (c, h) = synthetic(&mut rng, -0.15, -0.15);
            let cands = solve_two_sided_equal(&c, &SolverOptions::default()).unwrap();
            assert!(cands.len() <= 6);
            assert!(contains(&cands, &h, -0.15, -0.15, 1e-8), "{cands:?}");
        }
        let (c, _) = synthetic(&mut rng, 0.0, 0.0);
        let cands = solve_two_sided_equal(&c, &SolverOptions::default()).unwrap();
        assert!(cands.iter().any(|k| k.lambda.abs() < 1e-10));
    }

    #[test]
    fn independent_recovers_ground_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..200 {
            let (c, h) = synthetic(&mut rng, -0.12, -0.05);
            let sol = solve_two_sided_independent_detailed(&c, &SolverOptions::default()).unwrap();
            assert!(sol.raw.len() <= 9);
            assert!(sol.candidates.len() <= 5);
            assert!(contains(&sol.candidates, &h, -0.12, -0.05, 1e-7), "{:?}", sol.raw);
        }
    }

    #[test]
    fn independent_filter_removes_adjugate_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (c, _) = synthetic(&mut rng, -0.12, -0.05);
        let opts = SolverOptions {
            lambda_range: (-50.0, 50.0),
            ..SolverOptions::default()
        };
        let np = build_npair(&c).unwrap();
        let sol = solve_two_sided_independent_detailed(&c, &opts).unwrap();
        let spurious: Vec<_> = sol
            .raw
            .iter()
            .filter(|&&(x, y)| np.is_spurious(x, y, 1e-8))
            .collect();
        // Three γ-type roots and one determinant root, all real.
        let expected = (0..3)
            .filter(|&i| {
                let (g, gp) = (&np.gamma_src[i], &np.gamma_dst[i]);
                let (x, y) = (-g.coeffs()[0] / g.coeffs()[1], -gp.coeffs()[0] / gp.coeffs()[1]);
                x.abs() < 50.0 && y.abs() < 50.0
            })
            .count()
            + usize::from({
                let (d, dp) = (&np.det_src, &np.det_dst);
                (d.coeffs()[0] / d.coeffs()[1]).abs() < 50.0
                    && (dp.coeffs()[0] / dp.coeffs()[1]).abs() < 50.0
            });
        assert_eq!(spurious.len(), expected, "raw {:?}", sol.raw);
        for &&(x, y) in &spurious {
            assert!(!sol.candidates.iter().any(|k| (k.lambda - x).abs() < 1e-9 && (k.lambda_p - y).abs() < 1e-9));
        }
    }

    #[test]
    fn recover_h_residual_grows_away_from_truth() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let (c, h) = synthetic(&mut rng, -0.1, -0.07);
        let best = recover_h(&c, -0.1, -0.07).unwrap();
        assert!(homography_error(&best, &h).unwrap() < 1e-9);
        assert!(fifth_point_residual(&c, &best, -0.1, -0.07) < 1e-9);
        let sweep: Vec<f64> = (0..6)
            .map(|k| {
                let d = 1e-3 * k as f64;
                let h = recover_h(&c, -0.1 + d, -0.07).unwrap();
                fifth_point_residual(&c, &h, -0.1 + d, -0.07)
            })
            .collect();
        assert!(sweep.windows(2).all(|w| w[1] > w[0]), "{sweep:?}");
    }

    #[test]
    fn recover_h_rejects_singular_radius() {
        let pts = [
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 0.5),
            Vec2::new(-0.5, 0.0),
            Vec2::new(0.2, 0.3),
            Vec2::new(0.1, -0.4),
        ];
        let c = CorrSet5::new(pts, pts);
        assert!(matches!(recover_h(&c, -1.0, 0.0), Err(Error::SingularRadius)));
    }

    #[test]
    fn case_names_round_trip() {
        for case in SolverCase::ALL {
            assert_eq!(case.name().parse::<SolverCase>().unwrap(), case);
        }
        assert!("bogus".parse::<SolverCase>().is_err());
    }
}
