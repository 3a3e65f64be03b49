//! LASSO reduction of the least-squares gTV problem and its FISTA solver.
//!
//! The objective is `F(a) = ||y - H a||_2^2 + lambda ||a||_1` without a 1/2
//! factor, so the gradient of the data term is `2 H^T (H a - y)` and its
//! Lipschitz constant is `2 lambda_max(H^T H)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::check_full_column_rank;
use crate::spline::sparsity_index;

/// Window over which the relative objective change is measured.
pub const STALL_WINDOW: usize = 10;

/// Orthogonal projector `I - Q (Q^T Q)^{-1} Q^T` onto the complement of `range(Q)`.
pub fn build_projector(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_full_column_rank(q)?;
    let m = q.nrows();
    let gram = q.tr_mul(q);
    let chol = gram.cholesky().ok_or(Error::NullSpaceRankDeficient {
        rank: 0,
        required: q.ncols(),
    })?;
    let proj = q * chol.solve(&q.transpose());
    let mut out = DMatrix::identity(m, m) - proj;
    // symmetrize rounding
    out = (&out + out.transpose()) * 0.5;
    Ok(out)
}

/// Least-squares null-space coefficients `(Q^T Q)^{-1} Q^T (z - P a)`.
pub fn recover_b(q: &DMatrix<f64>, z: &DVector<f64>, p: &DMatrix<f64>, a: &DVector<f64>) -> Result<DVector<f64>> {
    check_full_column_rank(q)?;
    let r = z - p * a;
    let chol = q.tr_mul(q).cholesky().ok_or(Error::NullSpaceRankDeficient {
        rank: 0,
        required: q.ncols(),
    })?;
    Ok(chol.solve(&q.tr_mul(&r)))
}

/// `2 lambda_max(H^T H)` by power iteration on the smaller Gram matrix.
pub fn power_iteration_lipschitz(h: &DMatrix<f64>) -> f64 {
    let gram = if h.nrows() <= h.ncols() {
        h * h.transpose()
    } else {
        h.tr_mul(h)
    };
    let n = gram.nrows();
    if n == 0 || gram.amax() == 0.0 {
        return 0.0;
    }
    // deterministic start with no special structure
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64 + 1.0) * 0.618_033_988_749_895).fract());
    v.normalize_mut();
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let next = &gram * &v;
        let rayleigh = v.dot(&next);
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = next / norm;
        if (rayleigh - estimate).abs() <= 1e-13 * rayleigh.abs() {
            estimate = rayleigh;
            break;
        }
        estimate = rayleigh;
    }
    2.0 * estimate
}

#[derive(Clone, Debug)]
pub struct LassoProblem {
    pub h: DMatrix<f64>,
    pub y: DVector<f64>,
    pub lambda: f64,
    /// `2 lambda_max(H^T H)`
    pub lipschitz: f64,
}

impl LassoProblem {
    pub fn new(h: DMatrix<f64>, y: DVector<f64>, lambda: f64) -> Result<Self> {
        let lipschitz = power_iteration_lipschitz(&h);
        Self::with_lipschitz(h, y, lambda, lipschitz)
    }

    /// Reuses a Lipschitz constant computed for the same `H`.
    pub fn with_lipschitz(h: DMatrix<f64>, y: DVector<f64>, lambda: f64, lipschitz: f64) -> Result<Self> {
        if h.nrows() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: h.nrows(),
                found: y.len(),
                context: "LASSO data vector",
            });
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::NonPositiveLambda(lambda));
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidConfig(format!("invalid Lipschitz constant {lipschitz}")));
        }
        Ok(LassoProblem {
            h,
            y,
            lambda,
            lipschitz,
        })
    }

    pub fn objective(&self, a: &DVector<f64>) -> f64 {
        (&self.y - &self.h * a).norm_squared() + self.lambda * a.lp_norm(1)
    }

    /// Gradient `2 H^T (H a - y)` of the data term.
    pub fn gradient(&self, a: &DVector<f64>) -> DVector<f64> {
        self.h.tr_mul(&(&self.h * a - &self.y)) * 2.0
    }

    /// Largest violation of the LASSO optimality conditions.
    ///
    /// Active coordinates need `g_i = -lambda sign(a_i)`, inactive ones `|g_i| <= lambda`.
    pub fn kkt_residual(&self, a: &DVector<f64>) -> f64 {
        let g = self.gradient(a);
        let thr = crate::spline::zero_threshold(a.as_slice());
        g.iter()
            .zip(a.iter())
            .map(|(&gi, &ai)| {
                if ai.abs() >= thr {
                    (gi + self.lambda * ai.signum()).abs()
                } else {
                    (gi.abs() - self.lambda).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }

    /// Smallest `lambda` for which `a = 0` is optimal: `2 ||H^T y||_inf`.
    pub fn lambda_max(&self) -> f64 {
        2.0 * self.h.tr_mul(&self.y).amax()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopCriteria {
    /// Relative objective change over [`STALL_WINDOW`] iterations.
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Stop early once `||a||_0 <= target` and the looser `sparsity_eps_rel` holds.
    pub sparsity_target: Option<usize>,
    pub sparsity_eps_rel: f64,
}

impl Default for StopCriteria {
    fn default() -> Self {
        StopCriteria {
            eps_rel: 1e-10,
            max_iter: 200_000,
            sparsity_target: None,
            sparsity_eps_rel: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LassoResult {
    pub a: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub sparsity: usize,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn fista(prob: &LassoProblem, a0: &DVector<f64>, stop: &StopCriteria) -> Result<LassoResult> {
    fista_observed(prob, a0, stop, |_, _, _| {})
}

/// FISTA with a per-iteration observer `(iteration, objective, iterate)`.
///
/// Iteration 0 is the starting point. The returned point is the iterate with
/// the lowest objective, so `F(result) <= F(a0)` always holds.
pub fn fista_observed<O>(prob: &LassoProblem, a0: &DVector<f64>, stop: &StopCriteria, mut observe: O) -> Result<LassoResult>
where
    O: FnMut(usize, f64, &DVector<f64>),
{
    let n = prob.h.ncols();
    if a0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a0.len(),
            context: "FISTA starting point",
        });
    }
    if prob.lipschitz == 0.0 {
        // H = 0: the minimizer is a = 0
        let a = DVector::zeros(n);
        let objective = prob.objective(&a);
        return Ok(LassoResult {
            a,
            objective,
            iterations: 0,
            converged: true,
            sparsity: 0,
        });
    }
    let step = 1.0 / prob.lipschitz;
    let shrink = prob.lambda * step;

    let mut a = a0.clone();
    let mut ha = &prob.h * &a;
    let mut ha_prev = ha.clone();
    let mut a_prev = a.clone();
    let mut y = a.clone();
    let mut hy = ha.clone();
    let mut t = 1.0f64;

    let objective_of = |ha: &DVector<f64>, a: &DVector<f64>| (&prob.y - ha).norm_squared() + prob.lambda * a.lp_norm(1);
    let f0 = objective_of(&ha, &a);
    if !f0.is_finite() {
        return Err(Error::NonFiniteObjective { iteration: 0 });
    }
    observe(0, f0, &a);
    let mut history = vec![f0];
    let mut best = (f0, a.clone());
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=stop.max_iter {
        iterations = k;
        let grad = prob.h.tr_mul(&(&hy - &prob.y)) * 2.0;
        let mut next = y - grad * step;
        next.apply(|v| *v = soft_threshold(*v, shrink));

        a_prev.copy_from(&a);
        ha_prev.copy_from(&ha);
        a = next;
        ha = &prob.h * &a;

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        t = t_next;
        y = &a + (&a - &a_prev) * beta;
        hy = &ha + (&ha - &ha_prev) * beta;

        let f = objective_of(&ha, &a);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective { iteration: k });
        }
        observe(k, f, &a);
        if f < best.0 {
            best = (f, a.clone());
        }
        history.push(f);

        if k >= STALL_WINDOW {
            let old = history[k - STALL_WINDOW];
            let rel = (old - f).abs() / f.abs().max(f64::MIN_POSITIVE);
            if rel < stop.eps_rel {
                converged = true;
                break;
            }
            if let Some(target) = stop.sparsity_target {
                if rel < stop.sparsity_eps_rel && sparsity_index(a.as_slice()) <= target {
                    converged = true;
                    break;
                }
            }
        }
    }

    let (objective, a) = best;
    let sparsity = sparsity_index(a.as_slice());
    Ok(LassoResult {
        a,
        objective,
        iterations,
        converged,
        sparsity,
    })
}
