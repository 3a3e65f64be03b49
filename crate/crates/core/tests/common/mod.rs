#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use spline_inverse::nalgebra::{DMatrix, DVector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| normal(rng))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// One sample per cell of a uniform partition of `[0, domain]`, away from cell edges.
pub fn jittered_samples(rng: &mut ChaCha8Rng, m: usize, domain: f64) -> Vec<f64> {
    let cell = domain / m as f64;
    (0..m).map(|i| (i as f64 + rng.random_range(0.15..0.85)) * cell).collect()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Minimum of `||y - H a||^2 + lambda ||a||_1` by enumerating supports and sign
/// patterns: on a fixed support with fixed signs the stationarity condition is
/// linear, and a minimizer with linearly independent support columns exists.
pub fn lasso_brute_force(h: &DMatrix<f64>, y: &DVector<f64>, lambda: f64) -> f64 {
    let (m, n) = h.shape();
    let objective = |a: &DVector<f64>| (y - h * a).norm_squared() + lambda * a.lp_norm(1);
    let mut best = objective(&DVector::zeros(n));
    for k in 1..=m.min(n) {
        for support in subsets(n, k) {
            let hs = h.select_columns(&support);
            let gram = hs.tr_mul(&hs);
            let Some(inv) = gram.clone().try_inverse() else { continue };
            if gram.clone().svd(false, false).singular_values.min() < 1e-10 {
                continue;
            }
            let hty = hs.tr_mul(y);
            for mask in 0..(1u32 << k) {
                let signs = DVector::from_fn(k, |i, _| if mask >> i & 1 == 1 { -1.0 } else { 1.0 });
                let coef = &inv * (&hty - &signs * (lambda / 2.0));
                if (0..k).any(|i| coef[i] * signs[i] <= 0.0) {
                    continue;
                }
                let mut a = DVector::zeros(n);
                for (i, &j) in support.iter().enumerate() {
                    a[j] = coef[i];
                }
                best = best.min(objective(&a));
            }
        }
    }
    best
}

/// Minimum of `||x||_1` over basic solutions of `A x = z`, `A` of full row rank:
/// the optimum of the linear program is attained at one of them.
pub fn l1_vertex_oracle(a: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    let (m, n) = a.shape();
    let mut best = f64::INFINITY;
    for cols in subsets(n, m) {
        let b = a.select_columns(&cols);
        if b.clone().svd(false, false).singular_values.min() < 1e-10 {
            continue;
        }
        if let Some(x) = b.lu().solve(z) {
            best = best.min(x.lp_norm(1));
        }
    }
    best
}

/// Largest violation of the l1 dual certificate `|A^T y| <= 1`.
pub fn dual_violation(a: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    (a.tr_mul(y).amax() - 1.0).max(0.0)
}
