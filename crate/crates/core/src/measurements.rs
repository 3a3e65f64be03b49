//! Measurement functionals and the system matrices built from them.
//!
//! Every measurement is lifted to real rows. Ideal sampling contributes one row
//! per sample point. A windowed Fourier measurement at pulsation `w` contributes
//! two rows, `int_0^T cos(w x) f(x) dx` and `-int_0^T sin(w x) f(x) dx`, the real
//! and imaginary parts of `int_0^T exp(-j w x) f(x) dx`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::quadrature::{integrate, poly_exp_integral, Tolerance};
use crate::spline::SplineSignal;

/// Minimum separation between two sample points (or two pulsation magnitudes).
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurementModel {
    IdealSampling { samples: Vec<f64> },
    WindowedFourier { pulsations: Vec<f64>, window: f64 },
}

/// A single real measurement row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    Sample(f64),
    /// `x -> cos(w x)` on `[0, T]`.
    Cosine { pulsation: f64, window: f64 },
    /// `x -> -sin(w x)` on `[0, T]`.
    NegSine { pulsation: f64, window: f64 },
}

impl Functional {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Functional::Sample(_) => panic!("a Dirac functional has no pointwise values"),
            Functional::Cosine { pulsation, window } => {
                if (0.0..=window).contains(&x) {
                    (pulsation * x).cos()
                } else {
                    0.0
                }
            }
            Functional::NegSine { pulsation, window } => {
                if (0.0..=window).contains(&x) {
                    -(pulsation * x).sin()
                } else {
                    0.0
                }
            }
        }
    }
}

/// Grid of candidate knots `n * step`, `n = 0..n-1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    pub step: f64,
}

impl GridSpec {
    /// Grid of `n` points covering `[0, domain]`.
    pub fn covering(domain: f64, n: usize) -> Self {
        GridSpec {
            n,
            step: domain / n as f64,
        }
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.step
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.step).collect()
    }
}

/// `V = <h_m, phi_n>` and `W = <h_m, p_n>`.
#[derive(Clone, Debug)]
pub struct TikhonovSystem {
    pub v: DMatrix<f64>,
    pub w: DMatrix<f64>,
}

/// `P = <h_m, rho_L(. - n step)>` and `Q = <h_m, p_n>`.
#[derive(Clone, Debug)]
pub struct GtvSystem {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
}

impl MeasurementModel {
    pub fn sampling(samples: Vec<f64>) -> Self {
        MeasurementModel::IdealSampling { samples }
    }

    pub fn fourier(pulsations: Vec<f64>, window: f64) -> Self {
        MeasurementModel::WindowedFourier { pulsations, window }
    }

    /// Number of real measurement rows `M`.
    pub fn rows(&self) -> usize {
        match self {
            MeasurementModel::IdealSampling { samples } => samples.len(),
            MeasurementModel::WindowedFourier { pulsations, .. } => 2 * pulsations.len(),
        }
    }

    pub fn functionals(&self) -> Vec<Functional> {
        match self {
            MeasurementModel::IdealSampling { samples } => {
                samples.iter().map(|&x| Functional::Sample(x)).collect()
            }
            MeasurementModel::WindowedFourier { pulsations, window } => pulsations
                .iter()
                .flat_map(|&w| {
                    [
                        Functional::Cosine {
                            pulsation: w,
                            window: *window,
                        },
                        Functional::NegSine {
                            pulsation: w,
                            window: *window,
                        },
                    ]
                })
                .collect(),
        }
    }

    /// Natural signal domain `[0, T]` of a Fourier model.
    pub fn window(&self) -> Option<f64> {
        match self {
            MeasurementModel::WindowedFourier { window, .. } => Some(*window),
            MeasurementModel::IdealSampling { .. } => None,
        }
    }

    /// Checks finiteness, distinctness and, when given, containment in `[0, domain]`.
    pub fn validate(&self, domain: Option<f64>) -> Result<()> {
        match self {
            MeasurementModel::IdealSampling { samples } => {
                if samples.is_empty() {
                    return Err(Error::InvalidModel("no sample points".into()));
                }
                if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
                    return Err(Error::InvalidModel(format!("non-finite sample point {x}")));
                }
                if let Some(t) = domain {
                    if let Some(x) = samples.iter().find(|&&x| !(0.0..=t).contains(&x)) {
                        return Err(Error::InvalidModel(format!(
                            "sample point {x} outside the domain [0, {t}]"
                        )));
                    }
                }
                check_distinct(samples, |x| x)
            }
            MeasurementModel::WindowedFourier { pulsations, window } => {
                if pulsations.is_empty() {
                    return Err(Error::InvalidModel("no pulsations".into()));
                }
                if !(window.is_finite() && *window > 0.0) {
                    return Err(Error::InvalidModel(format!("window must be positive, got {window}")));
                }
                if let Some(w) = pulsations.iter().find(|w| !w.is_finite()) {
                    return Err(Error::InvalidModel(format!("non-finite pulsation {w}")));
                }
                if let Some(t) = domain {
                    if (t - window).abs() > 1e-12 * t.max(1.0) {
                        return Err(Error::InvalidModel(format!(
                            "window {window} differs from the signal domain {t}"
                        )));
                    }
                }
                // w and -w give linearly dependent row pairs
                check_distinct(pulsations, f64::abs)
            }
        }
    }

    /// `H{f}` for an arbitrary pointwise-evaluable signal.
    ///
    /// Fourier rows use adaptive quadrature.
    pub fn measure<F: Fn(f64) -> f64 + Sync>(&self, f: F) -> Result<DVector<f64>> {
        self.measure_with(f, Tolerance::default())
    }

    pub fn measure_with<F: Fn(f64) -> f64 + Sync>(&self, f: F, tol: Tolerance) -> Result<DVector<f64>> {
        match self {
            MeasurementModel::IdealSampling { samples } => {
                Ok(DVector::from_iterator(samples.len(), samples.iter().map(|&x| f(x))))
            }
            MeasurementModel::WindowedFourier { window, .. } => {
                let rows = self.functionals();
                let values: Result<Vec<f64>> = rows
                    .iter()
                    .map(|g| integrate(|x| g.eval(x) * f(x), 0.0, *window, tol))
                    .collect();
                Ok(DVector::from_vec(values?))
            }
        }
    }

    /// `H{s}` of a spline through the closed-form atom responses.
    pub fn measure_spline(&self, s: &SplineSignal) -> DVector<f64> {
        let op = s.op();
        let mut z = self.nullspace_matrix(op) * DVector::from_column_slice(s.b());
        for (&t, &a) in s.knots().iter().zip(s.weights()) {
            if a != 0.0 {
                z.axpy(a, &self.atom_response(op, t), 1.0);
            }
        }
        z
    }

    /// Column `<h_m, rho_L(. - tau)>` for all rows.
    pub fn atom_response(&self, op: Operator, tau: f64) -> DVector<f64> {
        match self {
            MeasurementModel::IdealSampling { samples } => {
                DVector::from_iterator(samples.len(), samples.iter().map(|&x| op.green(x - tau)))
            }
            MeasurementModel::WindowedFourier { pulsations, window } => {
                let p = (op.order() - 1) as u32;
                let mut col = DVector::zeros(2 * pulsations.len());
                for (i, &w) in pulsations.iter().enumerate() {
                    let v = poly_exp_integral(tau.max(0.0), *window, tau, p, w);
                    col[2 * i] = v.re;
                    col[2 * i + 1] = v.im;
                }
                col
            }
        }
    }

    /// `W = Q = [<h_m, x^n>]`.
    pub fn nullspace_matrix(&self, op: Operator) -> DMatrix<f64> {
        let n0 = op.nullspace_dim();
        match self {
            MeasurementModel::IdealSampling { samples } => {
                DMatrix::from_fn(samples.len(), n0, |m, n| op.nullspace_eval(n, samples[m]))
            }
            MeasurementModel::WindowedFourier { pulsations, window } => {
                let mut q = DMatrix::zeros(2 * pulsations.len(), n0);
                for (i, &w) in pulsations.iter().enumerate() {
                    for n in 0..n0 {
                        let v = poly_exp_integral(0.0, *window, 0.0, n as u32, w);
                        q[(2 * i, n)] = v.re;
                        q[(2 * i + 1, n)] = v.im;
                    }
                }
                q
            }
        }
    }

    /// Tikhonov basis function `phi_m = rho_{L*L} * h_m` evaluated at `x`.
    pub fn tikhonov_basis(&self, op: Operator, row: usize, x: f64) -> f64 {
        match self {
            MeasurementModel::IdealSampling { samples } => op.gram_kernel(x - samples[row]),
            MeasurementModel::WindowedFourier { pulsations, window } => {
                let v = fourier_kernel_convolution(op, pulsations[row / 2], *window, x);
                if row % 2 == 0 {
                    v.re
                } else {
                    v.im
                }
            }
        }
    }

    /// All basis functions at `x` in one pass.
    pub fn tikhonov_basis_all(&self, op: Operator, x: f64) -> DVector<f64> {
        match self {
            MeasurementModel::IdealSampling { samples } => {
                DVector::from_iterator(samples.len(), samples.iter().map(|&s| op.gram_kernel(x - s)))
            }
            MeasurementModel::WindowedFourier { pulsations, window } => {
                let mut out = DVector::zeros(2 * pulsations.len());
                for (i, &w) in pulsations.iter().enumerate() {
                    let v = fourier_kernel_convolution(op, w, *window, x);
                    out[2 * i] = v.re;
                    out[2 * i + 1] = v.im;
                }
                out
            }
        }
    }

    /// Assembles `(V, W)` and checks well-posedness over the null space.
    pub fn assemble_tikhonov(&self, op: Operator) -> Result<TikhonovSystem> {
        self.validate(None)?;
        let w = self.nullspace_matrix(op);
        check_full_column_rank(&w)?;
        let v = match self {
            MeasurementModel::IdealSampling { samples } => {
                let m = samples.len();
                DMatrix::from_fn(m, m, |i, j| op.gram_kernel(samples[i] - samples[j]))
            }
            MeasurementModel::WindowedFourier { window, .. } => {
                let rows = self.functionals();
                let m = rows.len();
                let tol = Tolerance::default();
                let pairs: Vec<(usize, usize)> =
                    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
                let entries: Result<Vec<f64>> = pairs
                    .par_iter()
                    .map(|&(i, j)| {
                        let g = rows[i];
                        integrate(|x| g.eval(x) * self.tikhonov_basis(op, j, x), 0.0, *window, tol)
                    })
                    .collect();
                let mut v = DMatrix::zeros(m, m);
                for (&(i, j), e) in pairs.iter().zip(entries?) {
                    v[(i, j)] = e;
                    v[(j, i)] = e;
                }
                v
            }
        };
        Ok(TikhonovSystem { v, w })
    }

    /// Assembles the dictionary matrix `P` over `grid` and `Q`.
    pub fn assemble_gtv(&self, op: Operator, grid: GridSpec) -> Result<GtvSystem> {
        self.validate(None)?;
        if grid.n == 0 || !(grid.step.is_finite() && grid.step > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "grid needs n > 0 and a positive step, got n={} step={}",
                grid.n, grid.step
            )));
        }
        let extent = grid.extent();
        let needed = match self {
            MeasurementModel::IdealSampling { samples } => samples.iter().fold(0.0f64, |m, &x| m.max(x)),
            MeasurementModel::WindowedFourier { window, .. } => *window,
        };
        let below_zero = matches!(self, MeasurementModel::IdealSampling { samples } if samples.iter().any(|&x| x < 0.0));
        if needed > extent * (1.0 + 1e-12) || below_zero {
            return Err(Error::GridDoesNotCoverDomain {
                n: grid.n,
                step: grid.step,
                domain: needed,
            });
        }
        let mut p = DMatrix::zeros(self.rows(), grid.n);
        for (n, tau) in grid.knots().into_iter().enumerate() {
            p.set_column(n, &self.atom_response(op, tau));
        }
        let q = self.nullspace_matrix(op);
        Ok(GtvSystem { p, q })
    }
}

/// `(rho_{L*L} * exp(-j w .) 1_[0,T])(x)` in closed form.
fn fourier_kernel_convolution(op: Operator, w: f64, window: f64, x: f64) -> Complex64 {
    let (p, c) = op.gram_kernel_parts();
    let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
    // |x-y|^p = (-1)^p (y-x)^p for y < x
    let left = poly_exp_integral(0.0, x.min(window), x, p as u32, w);
    let right = poly_exp_integral(x.max(0.0), window, x, p as u32, w);
    c * (sign * left + right)
}

fn check_distinct(values: &[f64], key: impl Fn(f64) -> f64) -> Result<()> {
    let mut keyed: Vec<(f64, usize)> = values.iter().enumerate().map(|(i, &v)| (key(v), i)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in keyed.windows(2) {
        let distance = pair[1].0 - pair[0].0;
        if distance <= MIN_SEPARATION {
            return Err(Error::DuplicateSamples {
                first: pair[0].1.min(pair[1].1),
                second: pair[0].1.max(pair[1].1),
                distance,
            });
        }
    }
    Ok(())
}

/// Numerical rank from singular values relative to the largest one.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().fold(0.0f64, |m, &s| m.max(s));
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

pub(crate) fn check_full_column_rank(a: &DMatrix<f64>) -> Result<()> {
    let rank = if a.nrows() < a.ncols() {
        a.nrows().min(numerical_rank(a, 1e-10))
    } else {
        numerical_rank(a, 1e-10)
    };
    if rank < a.ncols() {
        return Err(Error::NullSpaceRankDeficient {
            rank,
            required: a.ncols(),
        });
    }
    Ok(())
}
