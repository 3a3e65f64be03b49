//! Reconstruction quality and oracle tuning of the regularization weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reported in place of `+inf` for a perfect reconstruction.
pub const SNR_CAP_DB: f64 = 300.0;

/// `20 log10(||f|| / ||f - f_hat||)` over paired samples.
pub fn snr_db(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            found: estimate.len(),
            context: "SNR sample vectors",
        });
    }
    let signal: f64 = truth.iter().map(|f| f * f).sum::<f64>().sqrt();
    if signal == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    let error: f64 = truth
        .iter()
        .zip(estimate)
        .map(|(f, g)| (f - g) * (f - g))
        .sum::<f64>()
        .sqrt();
    if error == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    Ok((20.0 * (signal / error).log10()).min(SNR_CAP_DB))
}

/// SNR of `estimate` against `truth` on the points `grid`.
pub fn reconstruction_snr<F, G>(truth: F, estimate: G, grid: &[f64]) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let t: Vec<f64> = grid.iter().map(|&x| truth(x)).collect();
    let e: Vec<f64> = grid.iter().map(|&x| estimate(x)).collect();
    snr_db(&t, &e)
}

/// `points` equispaced points covering `[0, domain]`, both ends included.
pub fn uniform_grid(domain: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points)
            .map(|i| domain * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `count` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 || (count > 1 && hi == lo) {
        return Err(Error::InvalidConfig(format!(
            "log grid needs 0 < lo < hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (l, h) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == count - 1 {
                hi
            } else {
                (l + (h - l) * i as f64 / (count - 1) as f64).exp()
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LambdaSearch<T> {
    pub best_lambda: f64,
    pub best_snr: f64,
    pub best: T,
    /// One point per grid value, ascending in `lambda`.
    pub curve: Vec<LambdaPoint>,
}

/// Evaluates `eval` on every `lambda` and keeps the best SNR.
///
/// The grid is visited from the largest value down, which suits warm starts;
/// on ties the larger `lambda` wins. Failed grid points are recorded in the curve.
pub fn lambda_search<T, F>(lambdas: &[f64], mut eval: F) -> Result<LambdaSearch<T>>
where
    F: FnMut(f64) -> Result<(f64, T)>,
{
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig("empty lambda grid".into()));
    }
    if lambdas.windows(2).any(|w| !(w[0] < w[1])) || !(lambdas[0] > 0.0) {
        return Err(Error::InvalidConfig("lambda grid must be positive and strictly increasing".into()));
    }
    let mut curve = Vec::with_capacity(lambdas.len());
    let mut best: Option<(f64, f64, T)> = None;
    let mut last_err = None;
    for &lambda in lambdas.iter().rev() {
        match eval(lambda) {
            Ok((snr, est)) => {
                curve.push(LambdaPoint {
                    lambda,
                    snr_db: Some(snr),
                    error: None,
                });
                if best.as_ref().is_none_or(|(_, s, _)| snr > *s) {
                    best = Some((lambda, snr, est));
                }
            }
            Err(e) => {
                curve.push(LambdaPoint {
                    lambda,
                    snr_db: None,
                    error: Some(e.to_string()),
                });
                last_err = Some(e);
            }
        }
    }
    curve.reverse();
    match best {
        Some((best_lambda, best_snr, best)) => Ok(LambdaSearch {
            best_lambda,
            best_snr,
            best,
            curve,
        }),
        None => Err(Error::AllLambdasFailed(Box::new(last_err.expect("grid is not empty")))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn snr_examples() {
        let f = [1.0, -2.0, 0.5, 3.0];
        assert_eq!(snr_db(&f, &f).unwrap(), SNR_CAP_DB);
        assert_abs_diff_eq!(snr_db(&f, &[0.0; 4]).unwrap(), 0.0, epsilon = 1e-12);
        let g: Vec<f64> = f.iter().map(|v| v * 1.01).collect();
        assert_abs_diff_eq!(snr_db(&f, &g).unwrap(), 40.0, epsilon = 1e-9);
        assert!(matches!(snr_db(&[0.0; 3], &[1.0; 3]), Err(Error::ZeroGroundTruth)));
        let grid = uniform_grid(2.0, 201);
        assert_abs_diff_eq!(
            reconstruction_snr(|x| x.sin() + 2.0, |x| 0.9 * (x.sin() + 2.0), &grid).unwrap(),
            20.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn grids() {
        let g = log_grid(1e-4, 1e2, 30).unwrap();
        assert_eq!(g.len(), 30);
        assert_eq!(g[0], 1e-4);
        assert_eq!(g[29], 1e2);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(log_grid(0.5, 0.5, 1).unwrap(), vec![0.5]);
        assert!(log_grid(0.0, 1.0, 3).is_err());
        let u = uniform_grid(10.0, 2001);
        assert_eq!(u[0], 0.0);
        assert_eq!(u[2000], 10.0);
    }

    #[test]
    fn search_prefers_larger_lambda_on_ties() {
        let grid = [0.1, 1.0, 10.0];
        let s = lambda_search(&grid, |l| Ok((if l < 5.0 { 3.0 } else { 1.0 }, l))).unwrap();
        assert_eq!(s.best_lambda, 1.0);
        assert_eq!(s.best, 1.0);
        assert_eq!(s.curve.iter().map(|p| p.lambda).collect::<Vec<_>>(), grid.to_vec());
        let single = lambda_search(&[0.3], |_| Ok((7.0, ()))).map(|s| (s.best_lambda, s.best_snr)).unwrap();
        assert_eq!(single, (0.3, 7.0));
    }

    #[test]
    fn search_records_failures() {
        let s = lambda_search(&[1.0, 2.0], |l| {
            if l < 1.5 {
                Err(Error::SingularSystem)
            } else {
                Ok((1.0, ()))
            }
        })
        .unwrap();
        assert_eq!(s.best_lambda, 2.0);
        assert!(s.curve[0].error.is_some());
        let all = lambda_search::<(), _>(&[1.0], |_| Err(Error::SingularSystem));
        assert!(matches!(all, Err(Error::AllLambdasFailed(_))));
    }
}
