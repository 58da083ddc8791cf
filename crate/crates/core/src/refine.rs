//! Levenberg–Marquardt refinement of `(H, λ, λ′)` on inlier correspondences.
//!
//! The residual of a correspondence `(p, p′)` is
//! `distort(π(H · lift(p, λ)), λ′) − p′` in normalized units. The
//! homography is kept at unit Frobenius norm by holding its largest entry
//! fixed and optimizing the other eight.

use nalgebra::{DMatrix, DVector};

use crate::distortion::{distort, distort_jacobian, lift};
use crate::geometry::{Homography, Mat3, Vec2};
use crate::robust::Correspondence;
use crate::solvers::{SolverCandidate, SolverCase};

const MAX_REJECTED_STEPS: usize = 12;

/// Residual assigned to correspondences the model cannot map.
const FAILED_RESIDUAL: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Stop once an accepted step lowers the cost by less than this fraction.
    pub rel_tol: f64,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self { max_iterations: 100, rel_tol: 1e-10 }
    }
}

/// Least-squares problem over the inliers of one model.
#[derive(Clone, Debug)]
pub struct RefineProblem<'a> {
    corrs: Vec<&'a Correspondence>,
    case: SolverCase,
    gauge: usize,
    gauge_value: f64,
}

impl<'a> RefineProblem<'a> {
    /// Sets up the problem around `model`, whose canonical homography fixes
    /// the gauge.
    pub fn new(
        corrs: &'a [Correspondence],
        mask: &[bool],
        model: &SolverCandidate,
        case: SolverCase,
    ) -> Option<(Self, DVector<f64>)> {
        let h = model.h.canonical().ok()?;
        let gauge = h.iamax_full();
        let gauge = gauge.0 + 3 * gauge.1;
        let problem = Self {
            corrs: corrs.iter().zip(mask).filter(|(_, &m)| m).map(|(c, _)| c).collect(),
            case,
            gauge,
            gauge_value: h[gauge],
        };
        let params = problem.pack(&h, model.lambda, model.lambda_p);
        Some((problem, params))
    }

    pub fn num_params(&self) -> usize {
        match self.case {
            SolverCase::TwoSidedIndependent => 10,
            _ => 9,
        }
    }

    pub fn num_residuals(&self) -> usize {
        2 * self.corrs.len()
    }

    fn pack(&self, h: &Mat3, lambda: f64, lambda_p: f64) -> DVector<f64> {
        let mut p = DVector::zeros(self.num_params());
        let mut k = 0;
        for i in 0..9 {
            if i != self.gauge {
                p[k] = h[i];
                k += 1;
            }
        }
        p[8] = lambda;
        if self.case == SolverCase::TwoSidedIndependent {
            p[9] = lambda_p;
        }
        p
    }

    /// `(H, λ, λ′)` encoded by `p`, with the case constraint applied.
    pub fn unpack(&self, p: &DVector<f64>) -> (Mat3, f64, f64) {
        let mut h = Mat3::zeros();
        let mut k = 0;
        for i in 0..9 {
            if i == self.gauge {
                h[i] = self.gauge_value;
            } else {
                h[i] = p[k];
                k += 1;
            }
        }
        let lp = if self.case == SolverCase::TwoSidedIndependent { p[9] } else { 0.0 };
        let (l, lp) = self.case.constrain(p[8], lp);
        (h, l, lp)
    }

    /// Maps `src` through the model; `None` if it leaves the model's domain.
    fn forward(h: &Mat3, lambda: f64, lambda_p: f64, src: Vec2) -> Option<(Vec2, nalgebra::Vector3<f64>, Vec2)> {
        let u = lift(src, lambda).0;
        let y = h * u;
        if !(y.z.abs() > 1e-12) {
            return None;
        }
        let x = Vec2::new(y.x / y.z, y.y / y.z);
        let d = distort(x, lambda_p).ok()?;
        Some((x, y, d))
    }

    pub fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
        let (h, l, lp) = self.unpack(p);
        let mut r = DVector::zeros(self.num_residuals());
        for (k, c) in self.corrs.iter().enumerate() {
            let e = match Self::forward(&h, l, lp, c.src) {
                Some((_, _, d)) => d - c.dst,
                None => Vec2::new(FAILED_RESIDUAL, FAILED_RESIDUAL),
            };
            r[2 * k] = e.x;
            r[2 * k + 1] = e.y;
        }
        r
    }

    /// Sum of squared residuals.
    pub fn cost(&self, p: &DVector<f64>) -> f64 {
        let (h, l, lp) = self.unpack(p);
        self.corrs
            .iter()
            .map(|c| match Self::forward(&h, l, lp, c.src) {
                Some((_, _, d)) => (d - c.dst).norm_squared(),
                None => 2.0 * FAILED_RESIDUAL * FAILED_RESIDUAL,
            })
            .sum()
    }

    /// Residual of one correspondence and its two Jacobian rows (unused
    /// trailing columns are zero). `None` where the model is undefined.
    fn point_terms(&self, h: &Mat3, l: f64, lp: f64, c: &Correspondence) -> Option<(Vec2, [[f64; 10]; 2])> {
        let (x, y, d) = Self::forward(h, l, lp, c.src)?;
        let (jd, dd_dlp) = distort_jacobian(x, d, lp);
        let iz = 1.0 / y.z;
        // dx/dy, 2×3.
        let dxdy = [[iz, 0.0, -x.x * iz], [0.0, iz, -x.y * iz]];
        // dd/dy = jd · dx/dy.
        let mut dddy = [[0.0; 3]; 2];
        for a in 0..2 {
            for b in 0..3 {
                dddy[a][b] = jd[2 * a] * dxdy[0][b] + jd[2 * a + 1] * dxdy[1][b];
            }
        }
        let u = lift(c.src, l).0;
        let mut rows = [[0.0; 10]; 2];
        let mut col = 0;
        for idx in 0..9 {
            if idx == self.gauge {
                continue;
            }
            // Column-major storage: idx = row + 3 · column.
            let (row, cidx) = (idx % 3, idx / 3);
            for a in 0..2 {
                rows[a][col] = dddy[a][row] * u[cidx];
            }
            col += 1;
        }
        // dy/dλ = H · (0, 0, r²).
        let dydl = h.column(2) * c.src.norm_squared();
        for a in 0..2 {
            let mut v = (0..3).map(|b| dddy[a][b] * dydl[b]).sum::<f64>();
            if self.case == SolverCase::TwoSidedEqual {
                v += dd_dlp[a];
            }
            rows[a][8] = v;
            if self.case == SolverCase::TwoSidedIndependent {
                rows[a][9] = dd_dlp[a];
            }
        }
        Some((d - c.dst, rows))
    }

    /// Analytic Jacobian of [`residuals`](Self::residuals).
    pub fn jacobian(&self, p: &DVector<f64>) -> DMatrix<f64> {
        let (h, l, lp) = self.unpack(p);
        let np = self.num_params();
        let mut jac = DMatrix::zeros(self.num_residuals(), np);
        for (k, c) in self.corrs.iter().enumerate() {
            if let Some((_, rows)) = self.point_terms(&h, l, lp, c) {
                for a in 0..2 {
                    for col in 0..np {
                        jac[(2 * k + a, col)] = rows[a][col];
                    }
                }
            }
        }
        jac
    }

    /// `JᵀJ` and `Jᵀr`, padded to ten parameters with an identity block.
    fn normal_equations(&self, p: &DVector<f64>) -> (Matrix10, Vector10) {
        let (h, l, lp) = self.unpack(p);
        let mut a = Matrix10::zeros();
        let mut g = Vector10::zeros();
        for c in &self.corrs {
            let Some((r, rows)) = self.point_terms(&h, l, lp, c) else { continue };
            for (row, res) in rows.iter().zip([r.x, r.y]) {
                let v = Vector10::from_row_slice(row);
                a.ger(1.0, &v, &v, 1.0);
                g.axpy(res, &v, 1.0);
            }
        }
        for i in self.num_params()..10 {
            a[(i, i)] = 1.0;
        }
        (a, g)
    }
}

type Matrix10 = nalgebra::SMatrix<f64, 10, 10>;
type Vector10 = nalgebra::SVector<f64, 10>;

#[derive(Clone, Copy, Debug)]
pub struct RefineReport {
    pub model: SolverCandidate,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub iterations: usize,
}

/// Refines `model` on the correspondences selected by `mask`. Returns the
/// input unchanged when fewer than five inliers are selected or no step
/// lowers the cost.
pub fn refine(
    corrs: &[Correspondence],
    model: &SolverCandidate,
    mask: &[bool],
    case: SolverCase,
) -> SolverCandidate {
    refine_with(corrs, model, mask, case, &RefineOptions::default()).model
}

pub fn refine_with(
    corrs: &[Correspondence],
    model: &SolverCandidate,
    mask: &[bool],
    case: SolverCase,
    opts: &RefineOptions,
) -> RefineReport {
    let unchanged = |cost: f64| RefineReport {
        model: *model,
        initial_cost: cost,
        final_cost: cost,
        iterations: 0,
    };
    if mask.iter().filter(|&&m| m).count() < 5 {
        return unchanged(f64::NAN);
    }
    let Some((problem, mut p)) = RefineProblem::new(corrs, mask, model, case) else {
        return unchanged(f64::NAN);
    };
    let np = problem.num_params();
    let initial_cost = problem.cost(&p);
    let mut cost = initial_cost;
    let mut mu = 1e-3;
    let mut iterations = 0;
    'outer: while iterations < opts.max_iterations && cost > 1e-30 {
        iterations += 1;
        let (a, g) = problem.normal_equations(&p);
        if g.amax() <= 1e-300 {
            break;
        }
        for _ in 0..MAX_REJECTED_STEPS {
            let mut damped = a;
            for i in 0..10 {
                damped[(i, i)] += mu * a[(i, i)].max(1e-12);
            }
            let Some(chol) = damped.cholesky() else {
                mu *= 10.0;
                continue;
            };
            let step = chol.solve(&(-g)).rows(0, np).into_owned();
            if step.norm() <= 1e-15 * (1.0 + p.norm()) {
                break 'outer;
            }
            let trial = &p + &step;
            let tc = problem.cost(&trial);
            if tc < cost {
                let rel = (cost - tc) / cost;
                p = trial;
                cost = tc;
                mu = (mu * 0.1).max(1e-15);
                if rel < opts.rel_tol {
                    break 'outer;
                }
                continue 'outer;
            }
            mu *= 10.0;
        }
        break;
    }
    if !(cost < initial_cost) {
        return unchanged(initial_cost);
    }
    let (h, lambda, lambda_p) = problem.unpack(&p);
    let Ok(h) = Homography::new(h) else {
        return unchanged(initial_cost);
    };
    let rms = (cost / problem.num_residuals() as f64).sqrt();
    RefineReport {
        model: SolverCandidate {
            h,
            lambda,
            lambda_p,
            residual: rms,
            transfer_residual: rms,
        },
        initial_cost,
        final_cost: cost,
        iterations,
    }
}
