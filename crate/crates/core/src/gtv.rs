//! gTV reconstruction on a grid of Green's-function atoms.
//!
//! Knots are searched on `{n * step}`; the innovation weights `a` and the
//! null-space coefficients `b` solve either the exact-fit linear program
//! `min ||a||_1 s.t. P a + Q b = z` or the least-squares problem
//! `min ||z - P a - Q b||^2 + lambda ||a||_1`. The latter is reduced to a
//! LASSO on `(Q' P, Q' z)`, solved with FISTA and then moved to an extreme
//! point of the LASSO solution set by the simplex method.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{build_projector, fista_observed, power_iteration_lipschitz, recover_b, LassoProblem, StopCriteria};
use crate::measurements::{GridSpec, GtvSystem, MeasurementModel};
use crate::operators::Operator;
use crate::simplex::{refine_extreme_point, solve_l1_lp, LpProblem};
use crate::spline::{sparsity_index, SplineSignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitMode {
    /// Measurements are matched exactly.
    #[serde(rename = "exact")]
    ExactFit,
    /// Quadratic data term with weight-`lambda` gTV penalty.
    #[serde(rename = "lsq")]
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtvConfig {
    pub grid: GridSpec,
    pub lambda: f64,
    pub mode: FitMode,
    pub stop: StopCriteria,
}

#[derive(Clone, Debug)]
pub struct GtvDiagnostics {
    pub mode: FitMode,
    /// Grid weights, length `N`.
    pub coefficients: DVector<f64>,
    pub b: DVector<f64>,
    /// FISTA output before refinement (least-squares mode only).
    pub fista_coefficients: Option<DVector<f64>>,
    pub sparsity_fista: Option<usize>,
    pub sparsity: usize,
    pub l1_fista: Option<f64>,
    pub l1: f64,
    /// LASSO objective of the returned weights (least-squares), or `||a||_1` (exact fit).
    pub objective: f64,
    pub kkt_residual: Option<f64>,
    pub fista_iterations: usize,
    pub fista_converged: bool,
    pub lp_pivots: usize,
}

#[derive(Clone, Debug)]
pub struct GtvReconstruction {
    pub signal: SplineSignal,
    pub diagnostics: GtvDiagnostics,
}

/// Assembled dictionary for one measurement model, operator and grid.
///
/// Everything that does not depend on `z` or `lambda` is computed once.
#[derive(Clone, Debug)]
pub struct GtvProblem {
    op: Operator,
    grid: GridSpec,
    system: GtvSystem,
    projector: DMatrix<f64>,
    h: DMatrix<f64>,
    lipschitz: f64,
}

impl GtvProblem {
    pub fn new(model: &MeasurementModel, op: Operator, grid: GridSpec) -> Result<Self> {
        if let Some(window) = model.window() {
            if (grid.extent() - window).abs() > 1e-12 * window.max(1.0) {
                return Err(Error::InvalidConfig(format!(
                    "grid extent {} must equal the window {window}",
                    grid.extent()
                )));
            }
        }
        if grid.n <= model.rows() {
            return Err(Error::InvalidConfig(format!(
                "grid size {} must exceed the number of measurements {}",
                grid.n,
                model.rows()
            )));
        }
        let system = model.assemble_gtv(op, grid)?;
        let projector = build_projector(&system.q)?;
        let h = &projector * &system.p;
        let lipschitz = power_iteration_lipschitz(&h);
        Ok(GtvProblem {
            op,
            grid,
            system,
            projector,
            h,
            lipschitz,
        })
    }

    pub fn op(&self) -> Operator {
        self.op
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn p(&self) -> &DMatrix<f64> {
        &self.system.p
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.system.q
    }

    /// `H = Q' P`.
    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// The LASSO instance for data `z` and weight `lambda`.
    pub fn lasso(&self, z: &DVector<f64>, lambda: f64) -> Result<LassoProblem> {
        self.check_len(z)?;
        LassoProblem::with_lipschitz(self.h.clone(), &self.projector * z, lambda, self.lipschitz)
    }

    /// Smallest `lambda` at which the least-squares weights vanish.
    pub fn lambda_max(&self, z: &DVector<f64>) -> f64 {
        2.0 * self.h.tr_mul(&(&self.projector * z)).amax()
    }

    /// `P a + Q b`.
    pub fn forward(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        &self.system.p * a + &self.system.q * b
    }

    /// Spline with a knot at every nonzero grid weight.
    pub fn spline(&self, a: &DVector<f64>, b: &DVector<f64>) -> SplineSignal {
        let (knots, weights): (Vec<f64>, Vec<f64>) = a
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(n, &w)| (n as f64 * self.grid.step, w))
            .unzip();
        SplineSignal::new(self.op, knots, weights, b.as_slice().to_vec())
            .expect("grid spline dimensions are consistent")
            .with_domain(self.grid.extent())
    }

    fn check_len(&self, z: &DVector<f64>) -> Result<()> {
        if z.len() != self.system.p.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.system.p.nrows(),
                found: z.len(),
                context: "measurement vector",
            });
        }
        Ok(())
    }

    /// Exact fit: `min ||a||_1 s.t. P a + Q b = z`.
    pub fn solve_exact(&self, z: &DVector<f64>) -> Result<GtvReconstruction> {
        self.check_len(z)?;
        let (m, n) = self.system.p.shape();
        let n0 = self.system.q.ncols();
        let mut a_mat = DMatrix::zeros(m, n + n0);
        a_mat.view_mut((0, 0), (m, n)).copy_from(&self.system.p);
        a_mat.view_mut((0, n), (m, n0)).copy_from(&self.system.q);
        let lp = LpProblem::new(a_mat, z.clone(), (n..n + n0).collect())?;
        let res = solve_l1_lp(&lp)?.ensure_optimal()?;
        let diagnostics = GtvDiagnostics {
            mode: FitMode::ExactFit,
            sparsity: sparsity_index(res.a.as_slice()),
            l1: res.l1,
            objective: res.l1,
            coefficients: res.a.clone(),
            b: res.b.clone(),
            fista_coefficients: None,
            sparsity_fista: None,
            l1_fista: None,
            kkt_residual: None,
            fista_iterations: 0,
            fista_converged: true,
            lp_pivots: res.pivots,
        };
        Ok(GtvReconstruction {
            signal: self.spline(&res.a, &res.b),
            diagnostics,
        })
    }

    /// Least squares: FISTA on the LASSO, simplex refinement, then `b` by least squares.
    pub fn solve_least_squares(
        &self,
        z: &DVector<f64>,
        lambda: f64,
        stop: &StopCriteria,
        warm_start: Option<&DVector<f64>>,
    ) -> Result<GtvReconstruction> {
        self.solve_least_squares_observed(z, lambda, stop, warm_start, |_, _, _| {})
    }

    /// As [`Self::solve_least_squares`], reporting every FISTA iterate to `observe`.
    pub fn solve_least_squares_observed<O>(
        &self,
        z: &DVector<f64>,
        lambda: f64,
        stop: &StopCriteria,
        warm_start: Option<&DVector<f64>>,
        observe: O,
    ) -> Result<GtvReconstruction>
    where
        O: FnMut(usize, f64, &DVector<f64>),
    {
        let lasso = self.lasso(z, lambda)?;
        let n = self.grid.n;
        let a0 = match warm_start {
            Some(a) if a.len() == n => a.clone(),
            Some(a) => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.len(),
                    context: "warm start",
                })
            }
            None => DVector::zeros(n),
        };
        let fista_res = fista_observed(&lasso, &a0, stop, observe)?;
        let refined = refine_extreme_point(&self.h, &fista_res.a)?;
        let a = refined.a;
        let b = recover_b(&self.system.q, z, &self.system.p, &a)?;
        let diagnostics = GtvDiagnostics {
            mode: FitMode::LeastSquares,
            sparsity: sparsity_index(a.as_slice()),
            l1: a.lp_norm(1),
            objective: lasso.objective(&a),
            kkt_residual: Some(lasso.kkt_residual(&a)),
            sparsity_fista: Some(fista_res.sparsity),
            l1_fista: Some(fista_res.a.lp_norm(1)),
            fista_iterations: fista_res.iterations,
            fista_converged: fista_res.converged,
            lp_pivots: refined.pivots,
            fista_coefficients: Some(fista_res.a),
            coefficients: a.clone(),
            b: b.clone(),
        };
        Ok(GtvReconstruction {
            signal: self.spline(&a, &b),
            diagnostics,
        })
    }

    pub fn solve(&self, z: &DVector<f64>, cfg: &GtvConfig) -> Result<GtvReconstruction> {
        match cfg.mode {
            FitMode::ExactFit => self.solve_exact(z),
            FitMode::LeastSquares => self.solve_least_squares(z, cfg.lambda, &cfg.stop, None),
        }
    }
}

/// One-shot reconstruction: assemble, solve and package the spline.
pub fn reconstruct_gtv(
    model: &MeasurementModel,
    op: Operator,
    z: &DVector<f64>,
    cfg: &GtvConfig,
) -> Result<(SplineSignal, GtvDiagnostics)> {
    let problem = GtvProblem::new(model, op, cfg.grid)?;
    let rec = problem.solve(z, cfg)?;
    Ok((rec.signal, rec.diagnostics))
}
