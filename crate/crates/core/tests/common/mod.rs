//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix3, SMatrix, Vector3};
use rand::Rng;
use radial_homography::distortion::lift;
use radial_homography::solvers::CorrSet5;
use radial_homography::{Mat3, Vec2};

/// All eigenvalues of the companion matrix of `coeffs` (ascending order,
/// nonzero leading coefficient) as `(re, im)` pairs.
pub fn companion_eigenvalues(coeffs: &[f64]) -> Vec<(f64, f64)> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut c = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        c[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        c[(i, n - 1)] = -coeffs[i] / lead;
    }
    c.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

/// Real roots from the companion oracle, sorted, counting eigenvalues with
/// `|im| ≤ imag_tol·max(1, |re|)` as real.
pub fn companion_real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut r: Vec<f64> = companion_eigenvalues(coeffs)
        .into_iter()
        .filter(|&(re, im)| im.abs() <= imag_tol * re.abs().max(1.0))
        .map(|(re, _)| re)
        .collect();
    r.sort_by(f64::total_cmp);
    r
}

/// Ascending coefficients of `lead · Π (x − rᵢ) · Π (x² − 2aₖx + aₖ² + bₖ²)`.
pub fn expand(lead: f64, real: &[f64], complex: &[(f64, f64)]) -> Vec<f64> {
    let mut c = vec![lead];
    let mul = |c: &[f64], f: &[f64]| {
        let mut out = vec![0.0; c.len() + f.len() - 1];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        out
    };
    for &r in real {
        c = mul(&c, &[-r, 1.0]);
    }
    for &(a, b) in complex {
        c = mul(&c, &[a * a + b * b, -2.0 * a, 1.0]);
    }
    c
}

/// Random polynomial of degree `deg` with independent standard normal
/// coefficients.
pub fn gaussian_polynomial(rng: &mut impl Rng, deg: usize) -> Vec<f64> {
    (0..=deg).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

/// Companion-matrix real roots polished by Newton steps on `coeffs`; a
/// step is kept only when it lowers `|p|`.
pub fn polished_real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let eval = |x: f64| {
        coeffs.iter().rev().fold((0.0, 0.0), |(p, d), &c| (p * x + c, d * x + p))
    };
    let mut roots = companion_real_roots(coeffs, imag_tol);
    for r in roots.iter_mut() {
        for _ in 0..5 {
            let (p, d) = eval(*r);
            if d == 0.0 {
                break;
            }
            let next = *r - p / d;
            if eval(next).0.abs() < p.abs() {
                *r = next;
            } else {
                break;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Random polynomial of degree `deg` with well-separated roots. Real roots
/// lie in `[-3, 3]` and keep a distance of at least `sep` from each other
/// and from every entry of `avoid`; complex pairs have imaginary part in
/// `[0.05, 1]`.
pub fn random_polynomial(rng: &mut impl Rng, deg: usize, sep: f64, avoid: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let pairs = rng.random_range(0..=deg / 2);
    let nreal = deg - 2 * pairs;
    let mut real: Vec<f64> = Vec::with_capacity(nreal);
    while real.len() < nreal {
        let r = rng.random_range(-3.0..3.0);
        if real.iter().chain(avoid).all(|&q| (q - r).abs() >= sep) {
            real.push(r);
        }
    }
    let complex: Vec<(f64, f64)> = (0..pairs)
        .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(0.05..1.0)))
        .collect();
    let lead = rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    real.sort_by(f64::total_cmp);
    (expand(lead, &real, &complex), real)
}

/// Four-point DLT: the null vector of the 8×9 system, taken as the right
/// singular vector of the smallest singular value.
pub fn dlt_homography(src: &[Vec2; 4], dst: &[Vec2; 4]) -> Mat3 {
    let mut a = SMatrix::<f64, 9, 9>::zeros();
    for (k, (p, q)) in src.iter().zip(dst).enumerate() {
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        let r1 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let r2 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for j in 0..9 {
            a[(2 * k, j)] = r1[j];
            a[(2 * k + 1, j)] = r2[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let imin = svd.singular_values.imin();
    let h = v_t.row(imin);
    Mat3::from_row_slice(h.transpose().as_slice())
}

/// Cleared vector `N(λ)` of one side, computed with dense determinants:
/// `Nᵢ = Aᵢ Γⱼ Γₖ`, where `Aᵢ` and `Γᵢ` replace column `i` of the lifted
/// basis by the fifth and fourth lifted points.
pub fn n_vector(pts: &[Vec2; 5], lambda: f64) -> Vector3<f64> {
    let l: Vec<Vector3<f64>> = pts.iter().map(|p| lift(*p, lambda).0).collect();
    let basis = [l[0], l[1], l[2]];
    let replaced = |i: usize, x: Vector3<f64>| {
        let mut c = basis;
        c[i] = x;
        Matrix3::from_columns(&c).determinant()
    };
    let g: [f64; 3] = std::array::from_fn(|i| replaced(i, l[3]));
    let a: [f64; 3] = std::array::from_fn(|i| replaced(i, l[4]));
    Vector3::from_fn(|i, _| a[i] * g[(i + 1) % 3] * g[(i + 2) % 3])
}

/// `N(λ) × N′(λ′)`.
pub fn cross_equations(c: &CorrSet5, lambda: f64, lambda_p: f64) -> Vector3<f64> {
    n_vector(&c.src, lambda).cross(&n_vector(&c.dst, lambda_p))
}

/// Sine of the angle between `N(λ)` and `N′(λ′)`.
pub fn sine_residual(c: &CorrSet5, lambda: f64, lambda_p: f64) -> f64 {
    let a = n_vector(&c.src, lambda);
    let b = n_vector(&c.dst, lambda_p);
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return f64::INFINITY;
    }
    (a / na).cross(&(b / nb)).amax()
}

/// Ascending coefficients of the cubic `λ′ ↦ Eₘ(λ, λ′)`, interpolated from
/// four samples.
fn cubic_in_lambda_p(c: &CorrSet5, m: usize, lambda: f64) -> [f64; 4] {
    let xs: [f64; 4] = [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0];
    let v = SMatrix::<f64, 4, 4>::from_fn(|i, j| xs[i].powi(j as i32));
    let f = nalgebra::Vector4::from_fn(|i, _| cross_equations(c, lambda, xs[i])[m]);
    let sol = v.lu().solve(&f).expect("Vandermonde is invertible");
    [sol[0], sol[1], sol[2], sol[3]]
}

fn real_cubic_roots(c: &[f64; 4]) -> Vec<f64> {
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || c[3].abs() < 1e-12 * scale {
        return Vec::new();
    }
    companion_real_roots(c, 1e-9)
}

/// Newton on two of the three equations with a finite-difference Jacobian.
fn newton2(c: &CorrSet5, a: usize, b: usize, mut x: f64, mut y: f64) -> Option<(f64, f64)> {
    let f = |x: f64, y: f64| {
        let e = cross_equations(c, x, y);
        (e[a], e[b])
    };
    for _ in 0..60 {
        let (f0, f1) = f(x, y);
        let hx = 1e-7 * x.abs().max(1.0);
        let hy = 1e-7 * y.abs().max(1.0);
        let (ax0, ax1) = f(x + hx, y);
        let (bx0, bx1) = f(x - hx, y);
        let (ay0, ay1) = f(x, y + hy);
        let (by0, by1) = f(x, y - hy);
        let j = [
            [(ax0 - bx0) / (2.0 * hx), (ay0 - by0) / (2.0 * hy)],
            [(ax1 - bx1) / (2.0 * hx), (ay1 - by1) / (2.0 * hy)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !det.is_finite() || det == 0.0 {
            return None;
        }
        let dx = (j[1][1] * f0 - j[0][1] * f1) / det;
        let dy = (j[0][0] * f1 - j[1][0] * f0) / det;
        x -= dx;
        y -= dy;
        if !x.is_finite() || !y.is_finite() || x.abs() > 10.0 || y.abs() > 10.0 {
            return None;
        }
        if dx.abs() < 1e-15 * x.abs().max(1.0) && dy.abs() < 1e-15 * y.abs().max(1.0) {
            break;
        }
    }
    Some((x, y))
}

/// Brute-force solution of the independent case on `[-r, r]²`.
///
/// For each pair of equations `(Eₐ, E_b)`, the real branches `λ′(λ)` of
/// `Eₐ = 0` are traced on a dense `λ` grid, sign changes of `E_b` along
/// each branch are refined by 2D Newton, and the results are kept when
/// `N(λ)` and `N′(λ′)` are parallel. Cells around a same-sign local
/// minimum of `|E_b|` are rescanned on a finer grid so that close root
/// pairs are not lost.
pub fn brute_force_independent(c: &CorrSet5, r: f64, grid: usize, accept: f64) -> Vec<(f64, f64)> {
    let mut found: Vec<(f64, f64)> = Vec::new();
    for (a, b) in [(0, 1), (1, 2), (2, 0)] {
        scan_branches(c, a, b, -r, r, grid, 3, accept, &mut found);
    }
    found.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)));
    found
}

#[allow(clippy::too_many_arguments)]
fn scan_branches(
    c: &CorrSet5,
    a: usize,
    b: usize,
    lo: f64,
    hi: f64,
    grid: usize,
    depth: usize,
    accept: f64,
    found: &mut Vec<(f64, f64)>,
) {
    let lambdas: Vec<f64> = (0..=grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    let branches: Vec<Vec<(f64, f64)>> = lambdas
        .iter()
        .map(|&l| {
            real_cubic_roots(&cubic_in_lambda_p(c, a, l))
                .into_iter()
                .map(|y| (y, cross_equations(c, l, y)[b]))
                .collect()
        })
        .collect();
    let mut refine_cells: Vec<usize> = Vec::new();
    for i in 0..grid {
        let (r0, r1) = (&branches[i], &branches[i + 1]);
        if r0.len() != r1.len() {
            continue;
        }
        for (k, (&(y0, g0), &(y1, g1))) in r0.iter().zip(r1).enumerate() {
            if g0 * g1 > 0.0 {
                let prev = i.checked_sub(1).map(|p| &branches[p]).filter(|p| p.len() == r0.len());
                if let Some(prev) = prev {
                    if g0.abs() < prev[k].1.abs() && g0.abs() < g1.abs() && depth > 0 {
                        refine_cells.push(i);
                    }
                }
                continue;
            }
            let t = if g0 == g1 { 0.5 } else { g0 / (g0 - g1) };
            let x = lambdas[i] + t * (lambdas[i + 1] - lambdas[i]);
            let y = y0 + t * (y1 - y0);
            let Some((x, y)) = newton2(c, a, b, x, y) else { continue };
            if sine_residual(c, x, y) > accept {
                continue;
            }
            if !found.iter().any(|&(p, q)| (p - x).abs() < 1e-9 && (q - y).abs() < 1e-9) {
                found.push((x, y));
            }
        }
    }
    refine_cells.dedup();
    for i in refine_cells {
        scan_branches(c, a, b, lambdas[i - 1], lambdas[i + 1], 64, depth - 1, accept, found);
    }
}

/// Five random points per side, uniform in `[-s, s]²`.
pub fn random_corr_set(rng: &mut impl Rng, s: f64) -> CorrSet5 {
    let mut pt = || Vec2::new(rng.random_range(-s..s), rng.random_range(-s..s));
    CorrSet5::new(std::array::from_fn(|_| pt()), std::array::from_fn(|_| pt()))
}

/// `q`-quantile (nearest rank) of `v`; NaN counts as `+∞`.
pub fn quantile(v: &[f64], q: f64) -> f64 {
    let mut s: Vec<f64> = v.iter().map(|x| if x.is_nan() { f64::INFINITY } else { *x }).collect();
    s.sort_by(f64::total_cmp);
    let idx = ((q * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1;
    s[idx]
}
