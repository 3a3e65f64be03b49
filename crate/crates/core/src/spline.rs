//! Nonuniform L-splines: `f(x) = sum_k a_k rho_L(x - tau_k) + sum_n b_n x^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;

/// Relative threshold under which a weight counts as zero.
pub const ZERO_WEIGHT_REL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplineSignal {
    #[serde(rename = "operator")]
    op: Operator,
    knots: Vec<f64>,
    weights: Vec<f64>,
    b: Vec<f64>,
    /// Right end of the signal domain `[0, T]`, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    domain: Option<f64>,
}

impl SplineSignal {
    pub fn new(op: Operator, knots: Vec<f64>, weights: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if knots.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: knots.len(),
                found: weights.len(),
                context: "spline weights",
            });
        }
        if b.len() != op.nullspace_dim() {
            return Err(Error::DimensionMismatch {
                expected: op.nullspace_dim(),
                found: b.len(),
                context: "null-space coefficients",
            });
        }
        Ok(SplineSignal {
            op,
            knots,
            weights,
            b,
            domain: None,
        })
    }

    /// Signal made only of a null-space polynomial.
    pub fn polynomial(op: Operator, b: Vec<f64>) -> Result<Self> {
        Self::new(op, Vec::new(), Vec::new(), b)
    }

    pub fn zero(op: Operator) -> Self {
        SplineSignal {
            op,
            knots: Vec::new(),
            weights: Vec::new(),
            b: vec![0.0; op.nullspace_dim()],
            domain: None,
        }
    }

    pub fn with_domain(mut self, domain: f64) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn op(&self) -> Operator {
        self.op
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn domain(&self) -> Option<f64> {
        self.domain
    }

    pub fn eval(&self, x: f64) -> f64 {
        let innovation: f64 = self
            .knots
            .iter()
            .zip(&self.weights)
            .map(|(&t, &a)| a * self.op.green(x - t))
            .sum();
        innovation + self.nullspace_part(x)
    }

    pub fn nullspace_part(&self, x: f64) -> f64 {
        self.b
            .iter()
            .enumerate()
            .map(|(n, &c)| c * self.op.nullspace_eval(n, x))
            .sum()
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    /// `||L f||_M = ||a||_1`.
    pub fn tv_norm(&self) -> f64 {
        self.weights.iter().map(|a| a.abs()).sum()
    }

    /// Number of weights above the relative zero threshold.
    pub fn sparsity(&self) -> usize {
        let thr = zero_threshold(&self.weights);
        self.weights.iter().filter(|a| a.abs() >= thr).count()
    }

    /// Sorts knots, merges knots closer than `merge_tol` by summing their weights
    /// and drops negligible weights.
    pub fn canonicalize(&self, merge_tol: f64) -> SplineSignal {
        let mut pairs: Vec<(f64, f64)> = self
            .knots
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
            .collect();
        pairs.sort_by(|l, r| l.0.total_cmp(&r.0));

        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(pairs.len());
        for (t, a) in pairs {
            match merged.last_mut() {
                Some(last) if (t - last.0).abs() <= merge_tol => last.1 += a,
                _ => merged.push((t, a)),
            }
        }

        let weights: Vec<f64> = merged.iter().map(|p| p.1).collect();
        let thr = zero_threshold(&weights);
        let (knots, weights) = merged.into_iter().filter(|p| p.1.abs() >= thr).unzip();
        SplineSignal {
            op: self.op,
            knots,
            weights,
            b: self.b.clone(),
            domain: self.domain,
        }
    }
}

/// `1e-9 * max(1, ||a||_inf)`.
pub fn zero_threshold(a: &[f64]) -> f64 {
    let max = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ZERO_WEIGHT_REL * max.max(1.0)
}

/// Count of entries above [`zero_threshold`].
pub fn sparsity_index(a: &[f64]) -> usize {
    let thr = zero_threshold(a);
    a.iter().filter(|v| v.abs() >= thr).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn eval_step_and_ramp() {
        let s = SplineSignal::new(Operator::D, vec![0.5], vec![2.0], vec![1.0]).unwrap();
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(1.0), 3.0);

        let r = SplineSignal::new(Operator::D2, vec![1.0], vec![1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(r.eval(3.0), 2.0);
    }

    #[test]
    fn eval_polynomial_only() {
        let p = SplineSignal::polynomial(Operator::D2, vec![1.5, -2.0]).unwrap();
        let basis = Operator::D2.nullspace_basis();
        for x in [-1.0, 0.0, 0.3, 7.0] {
            let expected = 1.5 * crate::operators::eval_monomial(&basis[0], x)
                - 2.0 * crate::operators::eval_monomial(&basis[1], x);
            assert_abs_diff_eq!(p.eval(x), expected, epsilon = 1e-14);
        }
    }

    #[test]
    fn canonicalize_cancels_coincident_knots() {
        let s = SplineSignal::new(Operator::D, vec![1.0, 1.0], vec![2.0, -2.0], vec![0.0]).unwrap();
        assert!(s.canonicalize(1e-12).knots().is_empty());
    }

    #[test]
    fn canonicalize_sorts() {
        let s = SplineSignal::new(Operator::D, vec![2.0, 1.0], vec![1.0, 1.0], vec![0.0]).unwrap();
        let c = s.canonicalize(1e-12);
        assert_eq!(c.knots(), &[1.0, 2.0]);
        assert_eq!(c.weights(), &[1.0, 1.0]);
    }

    #[test]
    fn canonicalize_drops_tiny_weights() {
        let s = SplineSignal::new(Operator::D2, vec![0.2, 0.4], vec![1e-15, 1.0], vec![0.0, 0.0]).unwrap();
        let c = s.canonicalize(1e-12);
        assert_eq!(c.knots(), &[0.4]);
        assert_eq!(c.sparsity(), 1);
    }

    #[test]
    fn dimension_checks() {
        assert!(SplineSignal::new(Operator::D, vec![1.0], vec![], vec![0.0]).is_err());
        assert!(SplineSignal::new(Operator::D2, vec![], vec![], vec![0.0]).is_err());
    }

    proptest! {
        #[test]
        fn canonicalize_preserves_values(
            pairs in prop::collection::vec((0.0f64..10.0, -5.0f64..5.0), 0..20),
            b0 in -3.0f64..3.0,
            b1 in -3.0f64..3.0,
            d2 in any::<bool>(),
        ) {
            let op = if d2 { Operator::D2 } else { Operator::D };
            let b = if d2 { vec![b0, b1] } else { vec![b0] };
            let (knots, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let s = SplineSignal::new(op, knots, weights, b).unwrap();
            let c = s.canonicalize(1e-13);
            prop_assert!(c.knots().windows(2).all(|w| w[0] < w[1]));
            prop_assert!((c.tv_norm() - s.tv_norm()).abs() <= 1e-9 * (1.0 + s.tv_norm()));
            for i in 0..=200 {
                let x = -1.0 + i as f64 * 0.06;
                // stay off the knots where the step is discontinuous
                if s.knots().iter().any(|t| (t - x).abs() < 1e-9) { continue; }
                prop_assert!((c.eval(x) - s.eval(x)).abs() <= 1e-8 * (1.0 + s.eval(x).abs()));
            }
        }
    }
}
