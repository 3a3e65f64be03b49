//! Minimum-l1 solutions of underdetermined linear systems by two-phase simplex.
//!
//! `min ||a||_1  s.t.  A a = z` is solved in standard form with `a = s1 - s2`,
//! `s1, s2 >= 0`. Sign-free columns (null-space coefficients) are split the same
//! way but carry zero cost.
//!
//! The rows are first replaced by an orthonormal basis of their numerical row
//! space, so nearly dependent measurements cannot produce singular bases. A
//! revised simplex then refactorizes the basis at every pivot: Dantzig pricing
//! with a Harris ratio test, falling back to Bland's rule when the objective
//! stalls. The returned point is a basic feasible solution, i.e. a vertex.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LpOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    /// Primal infeasibility tolerated by the ratio test in exchange for larger pivots.
    pub harris_tol: f64,
    /// Singular values below `rank_tol` times the largest are treated as zero;
    /// the constraints are restricted to the remaining row space.
    pub rank_tol: f64,
    /// Basic entries below this, relative to the largest, are dropped from the
    /// returned vertex when the remaining support still fits the data.
    pub polish_tol: f64,
    /// Relative size of the right-hand side shift used against degeneracy.
    pub perturbation: f64,
    /// Reduced costs above `-optimality_tol`, relative to the dual scale, count as nonnegative.
    pub optimality_tol: f64,
    /// Record every pivot in [`LpResult::trace`].
    pub trace: bool,
    pub max_pivots: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            pivot_tol: 1e-10,
            feasibility_tol: 1e-8,
            optimality_tol: 1e-9,
            rank_tol: 1e-10,
            perturbation: 1e-7,
            polish_tol: 1e-6,
            harris_tol: 1e-11,
            trace: false,
            max_pivots: 100_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    a: DMatrix<f64>,
    z: DVector<f64>,
    free_cols: Vec<usize>,
}

impl LpProblem {
    pub fn new(a: DMatrix<f64>, z: DVector<f64>, free_cols: Vec<usize>) -> Result<Self> {
        if a.nrows() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: z.len(),
                context: "LP right-hand side",
            });
        }
        if let Some(&c) = free_cols.iter().find(|&&c| c >= a.ncols()) {
            return Err(Error::InvalidConfig(format!("free column {c} out of range")));
        }
        if !a.iter().chain(z.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidConfig("non-finite LP data".into()));
        }
        let mut free_cols = free_cols;
        free_cols.sort_unstable();
        free_cols.dedup();
        Ok(LpProblem { a, z, free_cols })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn free_cols(&self) -> &[usize] {
        &self.free_cols
    }

    fn is_free(&self, col: usize) -> bool {
        self.free_cols.binary_search(&col).is_ok()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PivotRecord {
    pub phase: u8,
    pub entering: usize,
    pub leaving_row: usize,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct LpResult {
    /// Values of the penalized columns, in column order.
    pub a: DVector<f64>,
    /// Values of the free columns, in the order of `free_cols`.
    pub b: DVector<f64>,
    pub l1: f64,
    /// Optimal dual vector `y` of `A a = z`: `|A^T y| <= 1` on penalized
    /// columns and `A^T y = 0` on free ones.
    pub duals: DVector<f64>,
    /// Columns of `A` in the final basis that carry a nonzero value.
    pub basis: Vec<usize>,
    pub status: LpStatus,
    pub phase_one_residual: f64,
    pub pivots: usize,
    pub trace: Vec<PivotRecord>,
}

impl LpResult {
    pub fn ensure_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            LpStatus::Infeasible => Err(Error::Infeasible {
                residual: self.phase_one_residual,
            }),
            LpStatus::Unbounded => Err(Error::Unbounded),
        }
    }

    /// Full coefficient vector of `A`'s columns.
    pub fn columns(&self, prob: &LpProblem) -> DVector<f64> {
        let n = prob.a.ncols();
        let mut x = DVector::zeros(n);
        let (mut ia, mut ib) = (0, 0);
        for j in 0..n {
            if prob.is_free(j) {
                x[j] = self.b[ib];
                ib += 1;
            } else {
                x[j] = self.a[ia];
                ia += 1;
            }
        }
        x
    }
}

pub fn solve_l1_lp(prob: &LpProblem) -> Result<LpResult> {
    solve_l1_lp_with(prob, &LpOptions::default())
}

/// Pivots without objective progress before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

/// Feasibility repairs allowed per phase.
const MAX_FLIP_ROUNDS: usize = 50;

/// Revised simplex over the split variables `[col 0 +, col 0 -, ..., artificials]`.
/// The basis is refactorized from the original data at every iteration.
struct Revised {
    /// Reduced constraint rows, signed so that the right-hand side is nonnegative.
    a: DMatrix<f64>,
    z: DVector<f64>,
    n_struct: usize,
    cost: Vec<f64>,
    basis: Vec<usize>,
}

struct Iterate {
    x: DVector<f64>,
    y: DVector<f64>,
}

impl Revised {
    fn entry(&self, v: usize, r: usize) -> f64 {
        if v < self.n_struct {
            let x = self.a[(r, v / 2)];
            if v % 2 == 0 {
                x
            } else {
                -x
            }
        } else if v - self.n_struct == r {
            1.0
        } else {
            0.0
        }
    }

    fn column(&self, v: usize) -> DVector<f64> {
        DVector::from_fn(self.a.nrows(), |r, _| self.entry(v, r))
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let m = self.basis.len();
        DMatrix::from_fn(m, m, |r, k| self.entry(self.basis[k], r))
    }

    fn singular() -> Error {
        Error::InvalidConfig("simplex basis became singular".into())
    }

    /// Basic values and duals of the current basis.
    fn iterate(&self) -> Result<(Iterate, nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>)> {
        let b = self.basis_matrix();
        let cb = DVector::from_fn(self.basis.len(), |k, _| self.cost[self.basis[k]]);
        let y = b.transpose().lu().solve(&cb).ok_or_else(Self::singular)?;
        let lu = b.lu();
        let x = lu.solve(&self.z).ok_or_else(Self::singular)?;
        Ok((Iterate { x, y }, lu))
    }

    fn objective(&self, x: &DVector<f64>) -> f64 {
        self.basis.iter().zip(x.iter()).map(|(&v, &xv)| self.cost[v] * xv).sum()
    }

    /// Pivots until no structural column prices out. Returns `false` when an
    /// improving ray exists.
    fn run(&mut self, opts: &LpOptions, phase: u8, trace: &mut Vec<PivotRecord>, pivots: &mut usize) -> Result<(bool, Iterate)> {
        let bounded_below = self.cost.iter().all(|&c| c >= 0.0);
        let n = self.a.ncols();
        let mut blocked = vec![false; self.n_struct];
        let mut flips = 0;
        let mut stall = 0;
        let mut best_obj = f64::INFINITY;
        loop {
            let (it, lu) = self.iterate()?;
            let obj = self.objective(&it.x);
            if obj < best_obj - 1e-13 * (1.0 + obj.abs()) {
                best_obj = obj;
                stall = 0;
            } else {
                stall += 1;
            }
            // a negative split variable is repaired by trading it for its twin
            if flips < MAX_FLIP_ROUNDS {
                let mut flipped = false;
                for k in 0..self.basis.len() {
                    if self.basis[k] < self.n_struct && it.x[k] < -opts.feasibility_tol {
                        self.basis[k] ^= 1;
                        flipped = true;
                    }
                }
                if flipped {
                    flips += 1;
                    continue;
                }
            }
            let in_basis = {
                let mut s = vec![false; self.n_struct];
                for &v in &self.basis {
                    if v < self.n_struct {
                        s[v] = true;
                    }
                }
                s
            };
            let at_y = self.a.tr_mul(&it.y);
            let reduced = |v: usize| {
                let t = if v % 2 == 0 { at_y[v / 2] } else { -at_y[v / 2] };
                self.cost[v] - t
            };
            let dual_tol = opts.optimality_tol * (1.0 + at_y.amax());
            let candidates = (0..2 * n).filter(|&v| !in_basis[v] && !blocked[v] && reduced(v) < -dual_tol);
            let entering = if stall < STALL_LIMIT {
                candidates.min_by(|&u, &v| reduced(u).total_cmp(&reduced(v)))
            } else {
                candidates.min()
            };
            let Some(col) = entering else {
                return Ok((true, it));
            };
            let w = lu.solve(&self.column(col)).ok_or_else(Self::singular)?;
            let tol = opts.pivot_tol * w.amax().max(1.0);
            let eligible = || (0..w.len()).filter(|&k| w[k] > tol);
            let leave = if stall < STALL_LIMIT {
                // Harris: the largest pivot among rows blocking within the tolerance
                let bound = eligible()
                    .map(|k| (it.x[k].max(0.0) + opts.harris_tol) / w[k])
                    .fold(f64::INFINITY, f64::min);
                eligible()
                    .filter(|&k| it.x[k].max(0.0) / w[k] <= bound)
                    .max_by(|&j, &k| w[j].total_cmp(&w[k]).then(self.basis[k].cmp(&self.basis[j])))
            } else {
                let ratio = |k: usize| it.x[k].max(0.0) / w[k];
                let best = eligible().map(ratio).fold(f64::INFINITY, f64::min);
                eligible()
                    .filter(|&k| ratio(k) <= best + 1e-12 * (1.0 + best))
                    .min_by_key(|&k| self.basis[k])
            }
            .map(|k| (k, it.x[k].max(0.0) / w[k]));
            let Some((row, step)) = leave else {
                if bounded_below {
                    // a descent ray is impossible with nonnegative costs
                    blocked[col] = true;
                    continue;
                }
                return Ok((false, it));
            };
            self.basis[row] = col;
            *pivots += 1;
            blocked.iter_mut().for_each(|b| *b = false);
            if opts.trace {
                let t = if col % 2 == 0 { at_y[col / 2] } else { -at_y[col / 2] };
                trace.push(PivotRecord {
                    phase,
                    entering: col,
                    leaving_row: row,
                    objective: self.objective(&it.x) + step * (self.cost[col] - t),
                });
            }
            if *pivots >= opts.max_pivots {
                return Err(Error::InvalidConfig(format!("simplex exceeded {} pivots", opts.max_pivots)));
            }
        }
    }
}

pub fn solve_l1_lp_with(prob: &LpProblem, opts: &LpOptions) -> Result<LpResult> {
    let (m, n) = prob.a.shape();
    let z_scale = prob.z.amax();

    // Row equilibration.
    let mut rows: Vec<usize> = Vec::with_capacity(m);
    let mut row_factor: Vec<f64> = Vec::with_capacity(m);
    for i in 0..m {
        let scale = prob.a.row(i).amax();
        if scale == 0.0 {
            if prob.z[i].abs() > opts.feasibility_tol * (1.0 + z_scale) {
                return Ok(infeasible(prob, prob.z[i].abs()));
            }
            continue;
        }
        rows.push(i);
        row_factor.push(1.0 / scale);
    }
    let eq_a = DMatrix::from_fn(rows.len(), n, |r, j| row_factor[r] * prob.a[(rows[r], j)]);
    let eq_z = DVector::from_fn(rows.len(), |r, _| row_factor[r] * prob.z[rows[r]]);

    // Orthonormal rows spanning the numerical row space, signed so that rhs >= 0.
    let (reduced_a, reduced_z, back) = if rows.is_empty() {
        (DMatrix::zeros(0, n), DVector::zeros(0), DMatrix::zeros(0, 0))
    } else {
        let svd = eq_a.clone().svd(true, false);
        let u = svd.u.as_ref().expect("left singular vectors requested");
        let sigma = &svd.singular_values;
        let cutoff = opts.rank_tol * sigma.max();
        let kept: Vec<usize> = (0..sigma.len()).filter(|&k| sigma[k] > cutoff && sigma[k] > 0.0).collect();
        let u_r = u.select_columns(&kept);
        let proj = u_r.tr_mul(&eq_z);
        let outside = (&eq_z - &u_r * &proj).norm();
        if outside > opts.feasibility_tol * (1.0 + eq_z.norm()) {
            return Ok(infeasible(prob, outside));
        }
        let scale: Vec<f64> = kept
            .iter()
            .enumerate()
            .map(|(r, &k)| if proj[r] < 0.0 { -1.0 } else { 1.0 } / sigma[k])
            .collect();
        let back = DMatrix::from_fn(rows.len(), kept.len(), |i, r| u_r[(i, r)] * scale[r]);
        let ra = back.tr_mul(&eq_a);
        let rz = back.tr_mul(&eq_z);
        (ra, rz, back)
    };
    let mr = reduced_a.nrows();
    if reduced_z.iter().all(|&v| v == 0.0) {
        let (a, b) = split(prob, &DVector::zeros(n));
        return Ok(LpResult {
            a,
            b,
            l1: 0.0,
            duals: DVector::zeros(m),
            basis: Vec::new(),
            status: LpStatus::Optimal,
            phase_one_residual: 0.0,
            pivots: 0,
            trace: Vec::new(),
        });
    }
    // Degenerate vertices are broken up by a small positive shift of the
    // right-hand side, removed again before the final pass.
    let delta = opts.perturbation * (1.0 + reduced_z.amax());
    let perturbed = DVector::from_fn(mr, |k, _| {
        let u = ((k + 1) as f64 * 0.618_033_988_749_894_9).fract();
        reduced_z[k] + delta * (0.5 + 0.5 * u)
    });

    let n_struct = 2 * n;
    let mut cost = vec![0.0; n_struct + mr];
    cost[n_struct..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = Revised {
        a: reduced_a,
        z: perturbed,
        n_struct,
        cost,
        basis: (n_struct..n_struct + mr).collect(),
    };
    let mut trace = Vec::new();
    let mut pivots = 0;

    // Phase one.
    let (_, it) = lp.run(opts, 1, &mut trace, &mut pivots)?;
    let residual = lp.objective(&it.x);
    let rhs_scale = lp.z.amax();
    if residual > opts.feasibility_tol * (1.0 + rhs_scale) {
        return Ok(infeasible(prob, residual));
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut keep = vec![true; mr];
    for k in 0..mr {
        let v = lp.basis[k];
        if v < n_struct {
            continue;
        }
        let e = DVector::from_fn(mr, |r, _| if r == k { 1.0 } else { 0.0 });
        let u = lp.basis_matrix().transpose().lu().solve(&e).ok_or_else(Revised::singular)?;
        let row = lp.a.tr_mul(&u);
        let best = (0..n)
            .filter(|&j| row[j].abs() > opts.pivot_tol)
            .max_by(|&x, &y| row[x].abs().total_cmp(&row[y].abs()));
        match best {
            Some(j) => {
                lp.basis[k] = 2 * j;
                pivots += 1;
            }
            None => keep[v - n_struct] = false,
        }
    }

    // Phase two: true costs on structural columns only.
    let kept: Vec<usize> = (0..mr).filter(|&r| keep[r]).collect();
    let basis: Vec<usize> = lp.basis.iter().copied().filter(|&v| v < n_struct).collect();
    let cost: Vec<f64> = (0..n_struct).map(|v| if prob.is_free(v / 2) { 0.0 } else { 1.0 }).collect();
    let mut lp = Revised {
        a: lp.a.select_rows(&kept),
        z: lp.z.select_rows(&kept),
        n_struct,
        cost,
        basis,
    };
    let (bounded, _) = lp.run(opts, 2, &mut trace, &mut pivots)?;
    lp.z = reduced_z.select_rows(&kept);
    let (bounded, it) = if bounded {
        lp.run(opts, 2, &mut trace, &mut pivots)?
    } else {
        (false, lp.iterate()?.0)
    };
    if !bounded {
        return Ok(LpResult {
            status: LpStatus::Unbounded,
            ..infeasible(prob, 0.0)
        });
    }

    let mut x = DVector::zeros(n);
    for (k, &v) in lp.basis.iter().enumerate() {
        // a slightly negative entry only moves weight between split halves
        x[v / 2] += if v % 2 == 0 { it.x[k] } else { -it.x[k] };
    }
    if let Some(p) = polish(prob, &eq_a, &eq_z, &x, opts) {
        x = p;
    }
    let mut y_full = DVector::zeros(mr);
    for (r, &kr) in kept.iter().enumerate() {
        y_full[kr] = it.y[r];
    }
    let y_eq = &back * y_full;
    let mut duals = DVector::zeros(m);
    for (i, &row) in rows.iter().enumerate() {
        duals[row] = y_eq[i] * row_factor[i];
    }
    let mut basis_cols: Vec<usize> = lp.basis.iter().map(|&v| v / 2).filter(|&j| x[j] != 0.0).collect();
    basis_cols.sort_unstable();
    basis_cols.dedup();

    let (a, b) = split(prob, &x);
    let l1 = a.lp_norm(1);
    Ok(LpResult {
        a,
        b,
        l1,
        duals,
        basis: basis_cols,
        status: LpStatus::Optimal,
        phase_one_residual: residual,
        pivots,
        trace,
    })
}

/// Zeroes basic entries at round-off level and refits the remaining support,
/// keeping the result only if signs and the residual survive.
fn polish(prob: &LpProblem, a: &DMatrix<f64>, z: &DVector<f64>, x: &DVector<f64>, opts: &LpOptions) -> Option<DVector<f64>> {
    let thr = opts.polish_tol * x.amax().max(1.0);
    let support: Vec<usize> = (0..x.len()).filter(|&j| x[j] != 0.0).collect();
    let kept: Vec<usize> = support.iter().copied().filter(|&j| prob.is_free(j) || x[j].abs() > thr).collect();
    if kept.len() == support.len() || a.nrows() == 0 {
        return None;
    }
    let mut out = DVector::zeros(x.len());
    if !kept.is_empty() {
        let sub = a.select_columns(&kept);
        let sol = sub.svd(true, true).solve(z, 1e-14).ok()?;
        for (i, &j) in kept.iter().enumerate() {
            if !prob.is_free(j) && sol[i].signum() != x[j].signum() {
                return None;
            }
            out[j] = sol[i];
        }
    }
    let before = (a * x - z).norm();
    let after = (a * &out - z).norm();
    (after <= (10.0 * before).max(opts.feasibility_tol * (1.0 + z.norm()))).then_some(out)
}

fn split(prob: &LpProblem, x: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (j, &v) in x.iter().enumerate() {
        if prob.is_free(j) {
            b.push(v);
        } else {
            a.push(v);
        }
    }
    (DVector::from_vec(a), DVector::from_vec(b))
}

fn infeasible(prob: &LpProblem, residual: f64) -> LpResult {
    let (a, b) = split(prob, &DVector::zeros(prob.a.ncols()));
    LpResult {
        a,
        b,
        l1: 0.0,
        duals: DVector::zeros(prob.a.nrows()),
        basis: Vec::new(),
        status: LpStatus::Infeasible,
        phase_one_residual: residual,
        pivots: 0,
        trace: Vec::new(),
    }
}

/// Extreme point of the LASSO solution set through `a_F`:
/// `min ||a||_1  s.t.  H a = H a_F`.
pub fn refine_extreme_point(h: &DMatrix<f64>, a_f: &DVector<f64>) -> Result<LpResult> {
    let z0 = h * a_f;
    let prob = LpProblem::new(h.clone(), z0, Vec::new())?;
    solve_l1_lp(&prob)?.ensure_optimal()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_sum_vertex() {
        let prob = LpProblem::new(DMatrix::from_row_slice(1, 2, &[1.0, 1.0]), DVector::from_vec(vec![1.0]), vec![]).unwrap();
        let r = solve_l1_lp(&prob).unwrap().ensure_optimal().unwrap();
        assert_abs_diff_eq!(r.l1, 1.0, epsilon = 1e-12);
        assert_eq!(r.a.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn unique_feasible_point() {
        let prob = LpProblem::new(DMatrix::identity(2, 2), DVector::from_vec(vec![2.0, -3.0]), vec![]).unwrap();
        let r = solve_l1_lp(&prob).unwrap().ensure_optimal().unwrap();
        assert_abs_diff_eq!(r.a[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.a[1], -3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.l1, 5.0, epsilon = 1e-12);
    }

    #[test]
    fn free_columns_are_not_penalized() {
        // a0 + b = 3, a0 - b = 1  -> a0 = 2, b = 1; l1 counts only a0
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -1.0]);
        let prob = LpProblem::new(a, DVector::from_vec(vec![3.0, 1.0]), vec![1]).unwrap();
        let r = solve_l1_lp(&prob).unwrap().ensure_optimal().unwrap();
        assert_abs_diff_eq!(r.a[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.l1, 2.0, epsilon = 1e-12);

        // z fully explained by the free column
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0]);
        let prob = LpProblem::new(a, DVector::from_vec(vec![-4.0, -4.0]), vec![2]).unwrap();
        let r = solve_l1_lp(&prob).unwrap().ensure_optimal().unwrap();
        assert_abs_diff_eq!(r.l1, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.b[0], -4.0, epsilon = 1e-12);
    }

    #[test]
    fn detects_infeasibility() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let prob = LpProblem::new(a, DVector::from_vec(vec![1.0, 2.0]), vec![]).unwrap();
        let r = solve_l1_lp(&prob).unwrap();
        assert_eq!(r.status, LpStatus::Infeasible);
        assert!(matches!(r.ensure_optimal(), Err(Error::Infeasible { .. })));

        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 0.0]);
        let prob = LpProblem::new(a, DVector::from_vec(vec![1.0, 2.0]), vec![]).unwrap();
        assert_eq!(solve_l1_lp(&prob).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn redundant_rows_are_handled() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 2.0, 4.0, 0.0, 0.0, 1.0, 1.0]);
        let prob = LpProblem::new(a.clone(), DVector::from_vec(vec![2.0, 4.0, 1.0]), vec![]).unwrap();
        let r = solve_l1_lp(&prob).unwrap().ensure_optimal().unwrap();
        assert!((&a * &r.a - prob.z()).amax() < 1e-10);
        // a = (0, 1, 0) has l1 = 1, the optimum
        assert_abs_diff_eq!(r.l1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn trace_records_pivots() {
        let prob = LpProblem::new(DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0]), DVector::from_vec(vec![6.0]), vec![]).unwrap();
        let opts = LpOptions {
            trace: true,
            ..LpOptions::default()
        };
        let r = solve_l1_lp_with(&prob, &opts).unwrap();
        assert_eq!(r.trace.len(), r.pivots);
        assert!(!r.trace.is_empty());
        assert_abs_diff_eq!(r.l1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn refinement_is_fixed_point_on_vertices() {
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.5, 0.2, 0.0, 0.0, 1.0, 0.3, 1.0]);
        let a_f = DVector::from_vec(vec![1.0, 0.0, 0.0, 2.0]);
        let r = refine_extreme_point(&h, &a_f).unwrap();
        assert!(r.l1 <= a_f.lp_norm(1) + 1e-9);
        assert!((&h * &r.a - &h * &a_f).amax() < 1e-12);
    }
}
