//! Spline-admissible regularization operators.
//!
//! Only the first and second derivative are supported. Both have closed-form
//! Green's functions, which keeps every dictionary atom and every Gram entry
//! analytic.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::SplineSignal;

/// Regularization operator `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    /// First derivative. Null space: constants.
    D,
    /// Second derivative. Null space: affine functions.
    D2,
}

impl Operator {
    pub const ALL: [Operator; 2] = [Operator::D, Operator::D2];

    pub fn order(self) -> usize {
        match self {
            Operator::D => 1,
            Operator::D2 => 2,
        }
    }

    /// Dimension `N0` of the null space.
    pub fn nullspace_dim(self) -> usize {
        self.order()
    }

    /// Causal Green's function: `1_+(x)` for `D`, `x_+` for `D2`.
    ///
    /// The step is right-continuous, so `green(D, 0) = 1`.
    pub fn green(self, x: f64) -> f64 {
        match self {
            Operator::D => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Operator::D2 => x.max(0.0),
        }
    }

    /// Green's function of `L* L`, the radial kernel of the Tikhonov basis.
    ///
    /// `D* D = -D^2` has Green's function `-|x|/2`; `(D^2)* D^2 = D^4` has
    /// `|x|^3 / 12`. With these signs the Gram matrix is conditionally
    /// positive definite on the null-space orthogonal complement.
    pub fn gram_kernel(self, x: f64) -> f64 {
        match self {
            Operator::D => -0.5 * x.abs(),
            Operator::D2 => x.abs().powi(3) / 12.0,
        }
    }

    /// Power `p` and signed scale `c` such that `gram_kernel(x) = c |x|^p`.
    pub(crate) fn gram_kernel_parts(self) -> (i32, f64) {
        match self {
            Operator::D => (1, -0.5),
            Operator::D2 => (3, 1.0 / 12.0),
        }
    }

    /// Null-space basis as monomial coefficient vectors: `[1]` or `[1], [0, 1]`.
    pub fn nullspace_basis(self) -> Vec<Vec<f64>> {
        (0..self.nullspace_dim())
            .map(|n| {
                let mut c = vec![0.0; n + 1];
                c[n] = 1.0;
                c
            })
            .collect()
    }

    /// Evaluates the `n`-th null-space basis function `x^n`.
    pub fn nullspace_eval(self, n: usize, x: f64) -> f64 {
        debug_assert!(n < self.nullspace_dim());
        x.powi(n as i32)
    }

    /// Innovation `L s = sum a_k delta(. - tau_k)` of a spline, as `(tau_k, a_k)` pairs.
    ///
    /// The null-space part is annihilated.
    pub fn apply_to_spline(self, s: &SplineSignal) -> Result<Vec<(f64, f64)>> {
        if s.op() != self {
            return Err(Error::OperatorMismatch {
                expected: self,
                found: s.op(),
            });
        }
        Ok(s.knots()
            .iter()
            .zip(s.weights())
            .filter(|(_, &a)| a != 0.0)
            .map(|(&t, &a)| (t, a))
            .collect())
    }
}

/// Evaluates a polynomial given by monomial coefficients.
pub fn eval_monomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operator::D => write!(f, "D"),
            Operator::D2 => write!(f, "D2"),
        }
    }
}

impl FromStr for Operator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" | "d" => Ok(Operator::D),
            "D2" | "d2" => Ok(Operator::D2),
            other => Err(Error::InvalidConfig(format!(
                "unknown operator '{other}', expected D or D2"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn green_values() {
        assert_eq!(Operator::D.green(1.0), 1.0);
        assert_eq!(Operator::D.green(-0.5), 0.0);
        assert_eq!(Operator::D.green(0.0), 1.0);
        assert_eq!(Operator::D2.green(2.0), 2.0);
        assert_eq!(Operator::D2.green(-3.0), 0.0);
    }

    #[test]
    fn green_is_causal() {
        for op in Operator::ALL {
            for i in 1..100 {
                assert_eq!(op.green(-(i as f64) * 0.037), 0.0);
            }
        }
    }

    #[test]
    fn gram_kernel_values() {
        assert_abs_diff_eq!(Operator::D.gram_kernel(3.0), -1.5);
        assert_abs_diff_eq!(Operator::D.gram_kernel(-3.0), -1.5);
        assert_abs_diff_eq!(Operator::D2.gram_kernel(2.0), 8.0 / 12.0, epsilon = 1e-15);
        assert_eq!(Operator::D2.gram_kernel(0.0), 0.0);
    }

    #[test]
    fn nullspace_basis_shapes() {
        assert_eq!(Operator::D.nullspace_basis(), vec![vec![1.0]]);
        assert_eq!(Operator::D2.nullspace_basis(), vec![vec![1.0], vec![0.0, 1.0]]);
        let basis = Operator::D2.nullspace_basis();
        assert_eq!(eval_monomial(&basis[1], 3.0), 3.0);
        assert_eq!(Operator::D2.nullspace_eval(1, 3.0), 3.0);
        for op in Operator::ALL {
            assert_eq!(op.nullspace_dim(), op.order());
        }
    }

    /// Symbolic derivative of monomial coefficients.
    fn differentiate(c: &[f64]) -> Vec<f64> {
        c.iter().enumerate().skip(1).map(|(k, &v)| k as f64 * v).collect()
    }

    #[test]
    fn nullspace_is_annihilated() {
        for op in Operator::ALL {
            for p in op.nullspace_basis() {
                let mut d = p.clone();
                for _ in 0..op.order() {
                    d = differentiate(&d);
                }
                assert!(d.iter().all(|&v| v == 0.0), "{op}: {p:?} -> {d:?}");
            }
        }
    }

    /// Finite-difference `L` applied to the Green's function approximates a unit Dirac.
    #[test]
    fn green_is_fundamental_solution() {
        let h = 1e-3;
        for op in Operator::ALL {
            let apply = |x: f64| match op {
                Operator::D => (op.green(x) - op.green(x - h)) / h,
                Operator::D2 => (op.green(x + h) - 2.0 * op.green(x) + op.green(x - h)) / (h * h),
            };
            // Riemann sum over a neighbourhood of the origin.
            let mass: f64 = (-50..=50).map(|i| apply(i as f64 * h) * h).sum();
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-9);
            for x in [-0.5, -0.1, 0.1, 0.7, 2.0] {
                assert_abs_diff_eq!(apply(x), 0.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn cubic_kernel_fourth_difference_vanishes_away_from_origin() {
        let h = 1e-2;
        let k = |x: f64| Operator::D2.gram_kernel(x);
        for x in [0.5, 1.0, -2.0, 3.3] {
            let d4 = k(x + 2.0 * h) - 4.0 * k(x + h) + 6.0 * k(x) - 4.0 * k(x - h) + k(x - 2.0 * h);
            assert_abs_diff_eq!(d4 / h.powi(4), 0.0, epsilon = 1e-6);
        }
        // and D^2 of |x|/2-type kernel gives the D kernel's relation: (D^2)(|x|^3/12) = |x|/2
        for x in [0.4, -1.2, 2.5] {
            let d2 = (k(x + h) - 2.0 * k(x) + k(x - h)) / (h * h);
            assert_abs_diff_eq!(d2, -Operator::D.gram_kernel(x), epsilon = 1e-4);
        }
    }

    #[test]
    fn innovation_of_spline() {
        let s = SplineSignal::new(Operator::D, vec![1.0, 2.0], vec![3.0, -3.0], vec![5.0]).unwrap();
        assert_eq!(Operator::D.apply_to_spline(&s).unwrap(), vec![(1.0, 3.0), (2.0, -3.0)]);

        let p = SplineSignal::new(Operator::D, vec![], vec![], vec![5.0]).unwrap();
        assert!(Operator::D.apply_to_spline(&p).unwrap().is_empty());

        let r = SplineSignal::new(Operator::D2, vec![0.0], vec![1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(Operator::D2.apply_to_spline(&r).unwrap(), vec![(0.0, 1.0)]);

        assert!(matches!(
            Operator::D2.apply_to_spline(&s),
            Err(Error::OperatorMismatch { .. })
        ));
    }

    #[test]
    fn parse_operator() {
        assert_eq!("D".parse::<Operator>().unwrap(), Operator::D);
        assert_eq!("D2".parse::<Operator>().unwrap(), Operator::D2);
        assert!("D3".parse::<Operator>().is_err());
    }
}
