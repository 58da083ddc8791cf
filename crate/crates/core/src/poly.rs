//! Polynomial machinery for the minimal solvers.
//!
//! Univariate polynomials are stored with ascending coefficients. Real roots
//! come from the trigonometric cubic formula or from Sturm-sequence
//! isolation followed by safeguarded Newton refinement. Bivariate
//! polynomials carry the cross-product equations of the independent case and
//! are reduced to one variable with a Sylvester resultant evaluated at
//! Chebyshev nodes.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Vec3;

/// Default half-width of the interval searched for distortion coefficients.
pub const DEFAULT_LAMBDA_RADIUS: f64 = 1.5;

/// Roots closer than this are reported once.
pub const ROOT_MERGE_TOL: f64 = 1e-8;

/// Leading coefficients below this fraction of the largest one are dropped.
const TRIM_REL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    /// `coeffs[k]` multiplies `x^k`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn linear(c0: f64, c1: f64) -> Self {
        Self { coeffs: vec![c0, c1] }
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots
            .iter()
            .fold(Poly::constant(1.0), |acc, &r| &acc * &Poly::linear(-r, 1.0))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Index of the last nonzero coefficient, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|&c| c != 0.0)
    }

    pub fn leading(&self) -> f64 {
        self.degree().map_or(0.0, |d| self.coeffs[d])
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Drops leading coefficients that are negligible relative to the largest.
    pub fn trimmed(&self, rel_tol: f64) -> Poly {
        let tol = rel_tol * self.max_abs();
        let end = self
            .coeffs
            .iter()
            .rposition(|c| c.abs() > tol)
            .map_or(0, |d| d + 1);
        Poly::new(self.coeffs[..end].to_vec())
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative by a single Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut p = 0.0;
        let mut dp = 0.0;
        for &c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    /// Remainder of the division by `divisor`, whose leading coefficient is
    /// taken as its last nonzero entry.
    pub fn rem(&self, divisor: &Poly) -> Poly {
        let Some(dd) = divisor.degree() else {
            return self.clone();
        };
        let lead = divisor.coeffs[dd];
        let mut r = self.coeffs.clone();
        while let Some(rd) = r.iter().rposition(|&c| c != 0.0) {
            if rd < dd {
                break;
            }
            let f = r[rd] / lead;
            let shift = rd - dd;
            for (k, &c) in divisor.coeffs[..=dd].iter().enumerate() {
                r[k + shift] -= f * c;
            }
            r[rd] = 0.0;
        }
        r.truncate(dd);
        Poly::new(r)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(0.0)
                        + rhs.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1.0)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.coeffs.is_empty() || rhs.coeffs.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }
}

fn merge_sorted(mut roots: Vec<f64>) -> Vec<f64> {
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() < ROOT_MERGE_TOL);
    roots
}

/// Newton steps that are kept only while they reduce `|p|`.
fn polish(p: &Poly, mut x: f64, steps: usize) -> f64 {
    let (mut fx, _) = p.eval_with_derivative(x);
    for _ in 0..steps {
        let (_, d) = p.eval_with_derivative(x);
        if d == 0.0 || fx == 0.0 {
            break;
        }
        let next = x - fx / d;
        let fnext = p.eval(next);
        if !(fnext.abs() < fx.abs()) {
            break;
        }
        x = next;
        fx = fnext;
    }
    x
}

/// All real roots of a polynomial of degree at most three.
///
/// Cubics are solved with the trigonometric (and hyperbolic) form of the
/// depressed cubic, so no complex arithmetic is involved.
pub fn cubic_roots_trig(p: &Poly) -> Result<Vec<f64>> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let t = p.trimmed(TRIM_REL);
    let c = t.coeffs();
    let raw = match t.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(1) => vec![-c[0] / c[1]],
        Some(2) => quadratic_roots(c[0], c[1], c[2]),
        Some(3) => depressed_cubic_roots(c[2] / c[3], c[1] / c[3], c[0] / c[3]),
        Some(_) => {
            return Err(Error::ConfigInvalid(
                "cubic_roots_trig expects degree at most three".into(),
            ))
        }
    };
    let tol = 1e-9 * p.max_abs();
    let roots = raw
        .into_iter()
        .map(|r| polish(p, r, 4))
        .filter(|&r| r.is_finite() && p.eval(r).abs() <= tol.max(1e-9 * p.eval_scale(r)))
        .collect();
    Ok(merge_sorted(roots))
}

impl Poly {
    /// `Σ |c_k| |x|^k`, the natural magnitude against which `p(x)` rounds.
    fn eval_scale(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Vec<f64> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    let scale = (c1 * c1).max((4.0 * c2 * c0).abs());
    if disc < -1e-14 * scale {
        return Vec::new();
    }
    let sq = disc.max(0.0).sqrt();
    if sq == 0.0 {
        return vec![-c1 / (2.0 * c2)];
    }
    let q = -0.5 * (c1 + sq.copysign(c1));
    vec![q / c2, c0 / q]
}

/// Roots of `x³ + a x² + b x + c`.
fn depressed_cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let scale = 1.0 + a.abs() + b.abs().sqrt() + c.abs().cbrt();
    let ts: Vec<f64> = if p.abs() <= 1e-15 * scale * scale {
        vec![(-q).cbrt()]
    } else {
        let d = (q / 2.0).powi(2) + (p / 3.0).powi(3);
        if d < 0.0 {
            let m = 2.0 * (-p / 3.0).sqrt();
            let arg = (3.0 * q / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
            let theta = arg.acos() / 3.0;
            (0..3)
                .map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos())
                .collect()
        } else if p < 0.0 {
            let arg = (-3.0 * q.abs() / (2.0 * p) * (-3.0 / p).sqrt()).max(1.0);
            let t1 = -2.0 * q.signum() * (-p / 3.0).sqrt() * (arg.acosh() / 3.0).cosh();
            // Near a double root the hyperbolic branch reports only the simple
            // root; the pair sits at −t₁/2 and is verified by the caller.
            if arg < 1.0 + 1e-6 {
                vec![t1, -t1 / 2.0]
            } else {
                vec![t1]
            }
        } else {
            let arg = 3.0 * q / (2.0 * p) * (3.0 / p).sqrt();
            vec![-2.0 * (p / 3.0).sqrt() * (arg.asinh() / 3.0).sinh()]
        }
    };
    ts.into_iter().map(|t| t - shift).collect()
}

/// Sturm chain `p, p′, −rem(p, p′), …`, each member scaled to unit max-norm.
pub fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let normalize = |q: &Poly| {
        let m = q.max_abs();
        q.scale(1.0 / m).trimmed(TRIM_REL)
    };
    let mut chain = vec![normalize(p)];
    let d = chain[0].derivative();
    if d.max_abs() == 0.0 {
        return chain;
    }
    chain.push(normalize(&d));
    loop {
        let n = chain.len();
        if chain[n - 1].degree().unwrap_or(0) == 0 {
            break;
        }
        let r = chain[n - 2].rem(&chain[n - 1]);
        if r.max_abs() <= 1e-13 {
            break;
        }
        chain.push(normalize(&-&r));
    }
    chain
}

fn sign_changes(chain: &[Poly], x: f64) -> usize {
    let mut count = 0;
    let mut last = 0.0f64;
    for q in chain {
        let v = q.eval(x);
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}

/// Distinct real roots of `p` in `(lo, hi)`.
///
/// Roots are isolated with Sturm sign-change counts, then refined by a
/// Newton iteration safeguarded by bisection on the isolating bracket.
pub fn sturm_real_roots(p: &Poly, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::IntervalDegenerate);
    }
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let p = p.trimmed(TRIM_REL);
    if p.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let chain = sturm_chain(&p);
    let pn = &chain[0];
    let width = hi - lo;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..8 {
        if pn.eval(a) != 0.0 {
            break;
        }
        a -= 1e-9 * width;
    }
    for _ in 0..8 {
        if pn.eval(b) != 0.0 {
            break;
        }
        b += 1e-9 * width;
    }

    let mut roots = Vec::new();
    let mut stack = vec![(a, b, sign_changes(&chain, a), sign_changes(&chain, b), 0u32)];
    while let Some((a, b, va, vb, depth)) = stack.pop() {
        let count = va.saturating_sub(vb);
        if count == 0 {
            continue;
        }
        let (fa, fb) = (pn.eval(a), pn.eval(b));
        if count == 1 && fa * fb < 0.0 {
            roots.push(bracketed_newton(pn, a, b, fa));
            continue;
        }
        if depth > 80 || b - a <= 1e-13 * (1.0 + a.abs().max(b.abs())) {
            roots.push(polish(pn, 0.5 * (a + b), 8));
            continue;
        }
        let mut m = 0.5 * (a + b);
        if pn.eval(m) == 0.0 {
            m += 1e-3 * (b - a);
        }
        let vm = sign_changes(&chain, m);
        stack.push((a, m, va, vm, depth + 1));
        stack.push((m, b, vm, vb, depth + 1));
    }
    Ok(merge_sorted(roots))
}

/// Root of `p` in `(a, b)` given `p(a) p(b) < 0`.
fn bracketed_newton(p: &Poly, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    let mut x = 0.5 * (a + b);
    let mut step_prev = b - a;
    for _ in 0..200 {
        let (f, df) = p.eval_with_derivative(x);
        if f == 0.0 {
            return x;
        }
        if (f < 0.0) == neg_at_a {
            a = x;
        } else {
            b = x;
        }
        let newton = x - f / df;
        let (next, step) = if df != 0.0 && newton > a && newton < b && (f / df).abs() < 0.5 * step_prev {
            (newton, (f / df).abs())
        } else {
            (0.5 * (a + b), 0.5 * (b - a))
        };
        if step <= 4.0 * f64::EPSILON * (1.0 + next.abs()) || next == x {
            return next;
        }
        step_prev = step;
        x = next;
    }
    x
}

/// Polynomial with 3-vector coefficients, `coeffs[k]` multiplying `x^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct VecPoly {
    pub coeffs: Vec<Vec3>,
}

impl VecPoly {
    pub fn from_components(c: [&Poly; 3]) -> Self {
        let n = c.iter().map(|p| p.coeffs().len()).max().unwrap_or(0);
        let at = |p: &Poly, k: usize| p.coeffs().get(k).copied().unwrap_or(0.0);
        Self {
            coeffs: (0..n)
                .map(|k| Vec3::new(at(c[0], k), at(c[1], k), at(c[2], k)))
                .collect(),
        }
    }

    pub fn constant(v: Vec3) -> Self {
        Self { coeffs: vec![v] }
    }

    pub fn component(&self, i: usize) -> Poly {
        Poly::new(self.coeffs.iter().map(|v| v[i]).collect())
    }

    pub fn eval(&self, x: f64) -> Vec3 {
        self.coeffs
            .iter()
            .rev()
            .fold(Vec3::zeros(), |acc, c| acc * x + c)
    }

    /// Value and derivative at `x`.
    pub fn eval_with_derivative(&self, x: f64) -> (Vec3, Vec3) {
        let mut p = Vec3::zeros();
        let mut dp = Vec3::zeros();
        for c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.amax()))
    }
}

/// Bivariate polynomial; entry `(i, j)` multiplies `x^i y^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    pub coeffs: DMatrix<f64>,
}

impl BiPoly {
    pub fn new(coeffs: DMatrix<f64>) -> Self {
        Self { coeffs }
    }

    /// Declared degree in the first variable.
    pub fn degree_x(&self) -> usize {
        self.coeffs.nrows().saturating_sub(1)
    }

    /// Declared degree in the second variable.
    pub fn degree_y(&self) -> usize {
        self.coeffs.ncols().saturating_sub(1)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.specialize_x(x).eval(y)
    }

    /// Coefficient of `y^j` as a polynomial in `x`.
    pub fn coeff_y(&self, j: usize) -> Poly {
        Poly::new(self.coeffs.column(j).iter().copied().collect())
    }

    /// Fixes `y`, leaving a polynomial in `x`.
    pub fn specialize_y(&self, y: f64) -> Poly {
        let mut out = vec![0.0; self.coeffs.nrows()];
        for i in 0..self.coeffs.nrows() {
            out[i] = self.coeffs.row(i).iter().rev().fold(0.0, |acc, &c| acc * y + c);
        }
        Poly::new(out)
    }

    /// Fixes `x`, leaving a polynomial in `y`.
    pub fn specialize_x(&self, x: f64) -> Poly {
        let mut out = vec![0.0; self.coeffs.ncols()];
        for j in 0..self.coeffs.ncols() {
            out[j] = self.coeffs.column(j).iter().rev().fold(0.0, |acc, &c| acc * x + c);
        }
        Poly::new(out)
    }

    /// Substitutes `y := x`.
    pub fn diagonal(&self) -> Poly {
        let mut out = vec![0.0; self.coeffs.nrows() + self.coeffs.ncols() - 1];
        for i in 0..self.coeffs.nrows() {
            for j in 0..self.coeffs.ncols() {
                out[i + j] += self.coeffs[(i, j)];
            }
        }
        Poly::new(out)
    }

    /// Partial derivatives `(∂/∂x, ∂/∂y)` evaluated at a point, with the value.
    pub fn eval_with_gradient(&self, x: f64, y: f64) -> (f64, f64, f64) {
        let (px, dpx) = self.specialize_y(y).eval_with_derivative(x);
        let (_, dpy) = self.specialize_x(x).eval_with_derivative(y);
        (px, dpx, dpy)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.amax()
    }
}

/// Componentwise cross product `a(x) × b(y)` as three bivariate polynomials.
pub fn vec_cross(a: &VecPoly, b: &VecPoly) -> [BiPoly; 3] {
    let (na, nb) = (a.coeffs.len().max(1), b.coeffs.len().max(1));
    std::array::from_fn(|i| {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        BiPoly::new(DMatrix::from_fn(na, nb, |r, c| {
            match (a.coeffs.get(r), b.coeffs.get(c)) {
                (Some(ar), Some(bc)) => ar[j] * bc[k] - ar[k] * bc[j],
                _ => 0.0,
            }
        }))
    })
}

/// Sylvester matrix of `p` and `q` in `y` at a fixed `x`.
pub fn sylvester_matrix(p: &Poly, q: &Poly, m: usize, n: usize) -> DMatrix<f64> {
    let size = m + n;
    let mut s = DMatrix::zeros(size, size);
    let pc = |j: usize| p.coeffs().get(j).copied().unwrap_or(0.0);
    let qc = |j: usize| q.coeffs().get(j).copied().unwrap_or(0.0);
    for i in 0..n {
        for j in 0..=m {
            s[(i, i + m - j)] = pc(j);
        }
    }
    for i in 0..m {
        for j in 0..=n {
            s[(n + i, i + n - j)] = qc(j);
        }
    }
    s
}

/// `Res_y(p, q)` evaluated at a fixed `x`.
pub fn resultant_at(p: &BiPoly, q: &BiPoly, x: f64) -> f64 {
    let s = sylvester_matrix(&p.specialize_x(x), &q.specialize_x(x), p.degree_y(), q.degree_y());
    s.determinant()
}

fn check_leading(p: &BiPoly) -> Result<()> {
    let lead = p.coeff_y(p.degree_y());
    if p.degree_y() == 0 {
        return Err(Error::DegreeDeficient);
    }
    if lead.max_abs() <= 1e-14 * p.max_abs() {
        return Err(Error::DegreeDeficient);
    }
    Ok(())
}

/// Resultant of `p` and `q` with respect to their second variable, as a
/// polynomial in the first.
///
/// The determinant of the Sylvester matrix is sampled at Chebyshev nodes on
/// `[-DEFAULT_LAMBDA_RADIUS, DEFAULT_LAMBDA_RADIUS]` and the coefficients are
/// recovered by least squares.
pub fn sylvester_resultant(p: &BiPoly, q: &BiPoly) -> Result<Poly> {
    check_leading(p)?;
    check_leading(q)?;
    let degree = p.degree_x() * q.degree_y() + q.degree_x() * p.degree_y();
    Ok(fit_chebyshev(
        |x| resultant_at(p, q, x),
        None,
        degree,
        DEFAULT_LAMBDA_RADIUS,
    ))
}

/// Resultant with a known factor `factor^multiplicity` divided out.
///
/// The fit minimises `Σ (factor(xᵢ)^m R(xᵢ) − Res(xᵢ))²`, so the quotient is
/// obtained without dividing sampled values.
pub fn sylvester_resultant_deflated(
    p: &BiPoly,
    q: &BiPoly,
    factor: &Poly,
    multiplicity: u32,
    radius: f64,
) -> Result<Poly> {
    check_leading(p)?;
    check_leading(q)?;
    let full = p.degree_x() * q.degree_y() + q.degree_x() * p.degree_y();
    let removed = factor.degree().unwrap_or(0) * multiplicity as usize;
    let degree = full.saturating_sub(removed);
    Ok(fit_chebyshev(
        |x| resultant_at(p, q, x),
        Some((factor, multiplicity)),
        degree,
        radius,
    ))
}

/// Least-squares fit of a degree-`degree` polynomial `R` to `f` with
/// `f(x) ≈ w(x) R(x)` at `2(degree + 1)` Chebyshev nodes on `[-radius, radius]`.
fn fit_chebyshev(
    f: impl Fn(f64) -> f64,
    weight: Option<(&Poly, u32)>,
    degree: usize,
    radius: f64,
) -> Poly {
    let cols = degree + 1;
    let rows = 2 * cols;
    let mut a = DMatrix::zeros(rows, cols);
    let mut b = DVector::zeros(rows);
    for i in 0..rows {
        let t = ((2 * i + 1) as f64 * PI / (2 * rows) as f64).cos();
        let x = radius * t;
        let w = weight.map_or(1.0, |(p, m)| p.eval(x).powi(m as i32));
        let mut tk = 1.0;
        for k in 0..cols {
            a[(i, k)] = w * tk;
            tk *= t;
        }
        b[i] = f(x);
    }
    // Column equilibration keeps the weighted basis well scaled.
    let norms: Vec<f64> = (0..cols)
        .map(|k| a.column(k).norm().max(f64::MIN_POSITIVE))
        .collect();
    for (k, n) in norms.iter().enumerate() {
        a.column_mut(k).scale_mut(1.0 / n);
    }
    let svd = a.svd(true, true);
    let sol = svd
        .solve(&b, 1e-15)
        .unwrap_or_else(|_| DVector::zeros(cols));
    Poly::new(
        (0..cols)
            .map(|k| sol[k] / norms[k] / radius.powi(k as i32))
            .collect(),
    )
}
