//! Tikhonov (L2) reconstruction through the saddle-point system
//!
//! ```text
//! [ V + lambda I   W ] [a]   [z]
//! [ W^T            0 ] [b] = [0]
//! ```

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurements::MeasurementModel;
use crate::operators::Operator;

/// Pivots below this fraction of the largest pivot mark the block system singular.
const PIVOT_RATIO_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TikhonovSolution {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda: f64,
    /// `||z - (V a + W b)||_2`
    pub residual: f64,
    /// `a^T V a = ||L f||^2`
    pub reg_value: f64,
}

/// The `(M + N0)` square block matrix.
pub fn block_matrix(v: &DMatrix<f64>, w: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
    let m = v.nrows();
    let n0 = w.ncols();
    let mut k = DMatrix::zeros(m + n0, m + n0);
    k.view_mut((0, 0), (m, m)).copy_from(v);
    for i in 0..m {
        k[(i, i)] += lambda;
    }
    k.view_mut((0, m), (m, n0)).copy_from(w);
    k.view_mut((m, 0), (n0, m)).copy_from(&w.transpose());
    k
}

pub fn solve_tikhonov(
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    z: &DVector<f64>,
    lambda: f64,
) -> Result<TikhonovSolution> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::NonPositiveLambda(lambda));
    }
    let m = v.nrows();
    if v.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: v.ncols(),
            context: "V must be square",
        });
    }
    if w.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: w.nrows(),
            context: "rows of W",
        });
    }
    if z.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: z.len(),
            context: "measurement vector",
        });
    }
    let n0 = w.ncols();
    let k = block_matrix(v, w, lambda);
    // symmetric equilibration so that the pivot test is scale-free
    let scale = DVector::from_fn(m + n0, |i, _| {
        let r = k.row(i).amax();
        if r > 0.0 {
            1.0 / r.sqrt()
        } else {
            1.0
        }
    });
    let scaled = DMatrix::from_fn(m + n0, m + n0, |i, j| scale[i] * k[(i, j)] * scale[j]);
    let lu = scaled.full_piv_lu();
    let u_diag = lu.u().diagonal();
    let max_pivot = u_diag.amax();
    let min_pivot = u_diag.iter().fold(f64::INFINITY, |acc, p| acc.min(p.abs()));
    if !(max_pivot > 0.0) || min_pivot <= PIVOT_RATIO_TOL * max_pivot {
        return Err(Error::SingularSystem);
    }
    let mut rhs = DVector::zeros(m + n0);
    rhs.rows_mut(0, m).copy_from(z);
    let rhs = rhs.component_mul(&scale);
    let sol = lu.solve(&rhs).ok_or(Error::SingularSystem)?.component_mul(&scale);
    let a = sol.rows(0, m).into_owned();
    let b = sol.rows(m, n0).into_owned();
    let fitted = v * &a + w * &b;
    let residual = (z - fitted).norm();
    let reg_value = a.dot(&(v * &a));
    Ok(TikhonovSolution {
        a: a.as_slice().to_vec(),
        b: b.as_slice().to_vec(),
        lambda,
        residual,
        reg_value,
    })
}

impl TikhonovSolution {
    /// `J2 = ||z - (V a + W b)||^2 + lambda a^T V a`.
    pub fn objective(&self, v: &DMatrix<f64>, w: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
        tikhonov_objective(v, w, z, self.lambda, &DVector::from_column_slice(&self.a), &DVector::from_column_slice(&self.b))
    }

    /// `f2(x) = sum_m a_m phi_m(x) + sum_n b_n p_n(x)`.
    pub fn eval(&self, model: &MeasurementModel, op: Operator, x: f64) -> f64 {
        let phi = model.tikhonov_basis_all(op, x);
        let kernel: f64 = phi.iter().zip(&self.a).map(|(p, a)| p * a).sum();
        let null: f64 = self
            .b
            .iter()
            .enumerate()
            .map(|(n, c)| c * op.nullspace_eval(n, x))
            .sum();
        kernel + null
    }

    pub fn sample(&self, model: &MeasurementModel, op: Operator, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(model, op, x)).collect()
    }
}

pub fn tikhonov_objective(
    v: &DMatrix<f64>,
    w: &DMatrix<f64>,
    z: &DVector<f64>,
    lambda: f64,
    a: &DVector<f64>,
    b: &DVector<f64>,
) -> f64 {
    let r = z - (v * a + w * b);
    r.norm_squared() + lambda * a.dot(&(v * a))
}
