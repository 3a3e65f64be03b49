//! Ground-truth test signals and measurement noise.
//!
//! Sparse processes are driven by a finite sum of Dirac impulses, Gaussian
//! processes by white noise approximated on a fine grid. Both are returned as
//! [`SplineSignal`]s so they can be evaluated and measured in closed form.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::Operator;
use crate::spline::SplineSignal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpulseCount {
    Fixed(usize),
    /// Expected number of impulses per unit length.
    Rate(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    ImpulsivePoisson { count: ImpulseCount, amplitude_std: f64 },
    GaussianWhite { std: f64, grid_step: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    #[serde(rename = "operator")]
    pub op: Operator,
    pub innovation: Innovation,
    /// The signal lives on `[0, domain]`.
    pub domain: f64,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub compact_support: bool,
}

fn default_true() -> bool {
    true
}

impl ProcessConfig {
    pub fn sparse(op: Operator, impulses: usize, amplitude_std: f64, domain: f64, seed: u64) -> Self {
        ProcessConfig {
            op,
            innovation: Innovation::ImpulsivePoisson {
                count: ImpulseCount::Fixed(impulses),
                amplitude_std,
            },
            domain,
            seed,
            compact_support: true,
        }
    }

    pub fn gaussian(op: Operator, std: f64, grid_step: f64, domain: f64, seed: u64) -> Self {
        ProcessConfig {
            op,
            innovation: Innovation::GaussianWhite { std, grid_step },
            domain,
            seed,
            compact_support: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.domain > 0.0 && self.domain.is_finite()) {
            return Err(Error::InvalidConfig(format!("domain must be positive, got {}", self.domain)));
        }
        match self.innovation {
            Innovation::ImpulsivePoisson { count, amplitude_std } => {
                if !(amplitude_std > 0.0 && amplitude_std.is_finite()) {
                    return Err(Error::InvalidConfig(format!("amplitude std must be positive, got {amplitude_std}")));
                }
                match count {
                    ImpulseCount::Fixed(0) => Err(Error::InvalidConfig("impulse count must be at least 1".into())),
                    ImpulseCount::Rate(r) if !(r > 0.0 && r.is_finite()) => {
                        Err(Error::InvalidConfig(format!("impulse rate must be positive, got {r}")))
                    }
                    _ => Ok(()),
                }
            }
            Innovation::GaussianWhite { std, grid_step } => {
                if !(std >= 0.0 && std.is_finite()) {
                    return Err(Error::InvalidConfig(format!("std must be non-negative, got {std}")));
                }
                if !(grid_step > 0.0 && grid_step < self.domain) {
                    return Err(Error::InvalidConfig(format!("grid step {grid_step} must lie in (0, {})", self.domain)));
                }
                Ok(())
            }
        }
    }
}

/// Deterministic child seed for `(master, stream)` (SplitMix64 finalizer).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut x = master ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `count` sorted draws, uniform in `(0, upper]`.
pub fn uniform_points(count: usize, upper: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<f64> = (0..count).map(|_| upper * (1.0 - rng.random::<f64>())).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Least-norm projection of `weights` onto the innovations that produce a
/// signal vanishing to the right of the last knot: `sum a_k = 0`, plus
/// `sum a_k tau_k = 0` for `D2`.
pub fn project_innovations(op: Operator, knots: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let k = knots.len();
    let n0 = op.nullspace_dim();
    if k < n0 + 1 {
        return Err(Error::TooFewImpulses {
            required: n0 + 1,
            found: k,
        });
    }
    if weights.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: weights.len(),
            context: "innovation weights",
        });
    }
    // centred moments keep the constraint matrix well conditioned
    let centre = knots.iter().sum::<f64>() / k as f64;
    let c = DMatrix::from_fn(n0, k, |i, j| (knots[j] - centre).powi(i as i32));
    let gram = &c * c.transpose();
    let chol = gram.cholesky().ok_or(Error::NullSpaceRankDeficient { rank: 0, required: n0 })?;
    let mut a = DVector::from_column_slice(weights);
    for _ in 0..2 {
        let corr = c.transpose() * chol.solve(&(&c * &a));
        a -= corr;
    }
    Ok(a.as_slice().to_vec())
}

/// Impulse-driven L-spline with uniformly distributed knots and Gaussian weights.
pub fn generate_sparse_process(cfg: &ProcessConfig) -> Result<SplineSignal> {
    cfg.validate()?;
    let Innovation::ImpulsivePoisson { count, amplitude_std } = cfg.innovation else {
        return Err(Error::InvalidConfig("sparse process needs an impulsive innovation".into()));
    };
    let mut rng = rng_from_seed(cfg.seed);
    let k = match count {
        ImpulseCount::Fixed(k) => k,
        ImpulseCount::Rate(rate) => {
            let poisson = Poisson::new(rate * cfg.domain).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            poisson.sample(&mut rng) as usize
        }
    };
    let n0 = cfg.op.nullspace_dim();
    if cfg.compact_support && k < n0 + 1 {
        return Err(Error::TooFewImpulses {
            required: n0 + 1,
            found: k,
        });
    }
    let amp = Normal::new(0.0, amplitude_std).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut knots: Vec<f64> = (0..k)
        .map(|_| loop {
            let t = rng.random::<f64>() * cfg.domain;
            if t > 0.0 {
                break t;
            }
        })
        .collect();
    knots.sort_by(f64::total_cmp);
    let raw: Vec<f64> = (0..k).map(|_| amp.sample(&mut rng)).collect();
    let weights = if cfg.compact_support {
        project_innovations(cfg.op, &knots, &raw)?
    } else {
        raw
    };
    Ok(SplineSignal::new(cfg.op, knots, weights, vec![0.0; n0])?.with_domain(cfg.domain))
}

/// Gaussian-white-noise driven process on the grid `{k h}` with `h ~ grid_step`.
///
/// Each grid cell receives an impulse of weight `std * sqrt(h) * N(0, 1)`, so the
/// result is a Brownian motion (`D`) or its integral (`D2`) sampled at the grid
/// and interpolated by the Green's functions. With compact support the
/// weights are projected so that the signal vanishes outside
/// `[h, domain - h]`.
pub fn generate_gaussian_process(cfg: &ProcessConfig) -> Result<SplineSignal> {
    cfg.validate()?;
    let Innovation::GaussianWhite { std, grid_step } = cfg.innovation else {
        return Err(Error::InvalidConfig("gaussian process needs a white innovation".into()));
    };
    let cells = (cfg.domain / grid_step).round().max(2.0) as usize;
    let h = cfg.domain / cells as f64;
    let mut rng = rng_from_seed(cfg.seed);
    let scale = std * h.sqrt();
    let (knots, raw): (Vec<f64>, Vec<f64>) = if cfg.compact_support {
        (1..cells)
            .map(|k| (k as f64 * h, scale * rng.sample::<f64, _>(StandardNormal)))
            .unzip()
    } else {
        (0..cells)
            .map(|k| (k as f64 * h, scale * rng.sample::<f64, _>(StandardNormal)))
            .unzip()
    };
    let n0 = cfg.op.nullspace_dim();
    let weights = if cfg.compact_support && std > 0.0 {
        project_innovations(cfg.op, &knots, &raw)?
    } else {
        raw
    };
    Ok(SplineSignal::new(cfg.op, knots, weights, vec![0.0; n0])?.with_domain(cfg.domain))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// Noise rescaled so that the realized SNR equals the target.
    #[default]
    Exact,
    /// i.i.d. noise with the standard deviation implied by the target.
    Statistical,
}

/// `z + n` with `20 log10(||z|| / ||n||) = snr_db` (exactly or in expectation).
pub fn add_noise(z: &DVector<f64>, snr_db: f64, mode: NoiseMode, seed: u64) -> Result<DVector<f64>> {
    if snr_db == f64::INFINITY {
        return Ok(z.clone());
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidConfig("SNR must not be NaN".into()));
    }
    let norm = z.norm();
    if norm == 0.0 {
        return Err(Error::ZeroSignalNoise);
    }
    let m = z.len();
    let sigma = norm / (m as f64).sqrt() * 10f64.powf(-snr_db / 20.0);
    let mut rng = rng_from_seed(seed);
    let mut noise = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
    match mode {
        NoiseMode::Statistical => noise *= sigma,
        NoiseMode::Exact => {
            let target = norm * 10f64.powf(-snr_db / 20.0);
            let n = noise.norm();
            noise *= target / n;
        }
    }
    Ok(z + noise)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn two_impulses_make_a_pulse() {
        let cfg = ProcessConfig::sparse(Operator::D, 2, 1.0, 4.0, 7);
        let s = generate_sparse_process(&cfg).unwrap();
        let w = s.weights();
        assert_abs_diff_eq!(w[0], -w[1], epsilon = 1e-15);
        let (t0, t1) = (s.knots()[0], s.knots()[1]);
        let mid = 0.5 * (t0 + t1);
        assert_abs_diff_eq!(s.eval(mid), w[0], epsilon = 1e-15);
        assert_eq!(s.eval(t0 - 1e-9), 0.0);
        assert_abs_diff_eq!(s.eval(t1 + 1e-9), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn second_difference_projection() {
        // least-norm projection of (1, 1, 1) with knots (1, 2, 3): null space of
        // [[1, 1, 1], [1, 2, 3]] is spanned by (1, -2, 1), and (1,1,1)·(1,-2,1) = 0
        let a = project_innovations(Operator::D2, &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        for v in &a {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-15);
        }
        let a = project_innovations(Operator::D2, &[1.0, 2.0, 3.0], &[2.0, 0.0, 1.0]).unwrap();
        // (2,0,1)·(1,-2,1)/6 = 1/2
        assert_abs_diff_eq!(a[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(a[1], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a[2], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn too_few_impulses() {
        let cfg = ProcessConfig::sparse(Operator::D2, 2, 1.0, 4.0, 1);
        assert!(matches!(generate_sparse_process(&cfg), Err(Error::TooFewImpulses { required: 3, found: 2 })));
        let cfg = ProcessConfig::sparse(Operator::D, 1, 1.0, 4.0, 1);
        assert!(matches!(generate_sparse_process(&cfg), Err(Error::TooFewImpulses { required: 2, found: 1 })));
        let mut cfg = ProcessConfig::sparse(Operator::D, 1, 1.0, 4.0, 1);
        cfg.compact_support = false;
        assert_eq!(generate_sparse_process(&cfg).unwrap().knots().len(), 1);
    }

    #[test]
    fn sparsity_index_equals_count() {
        for op in Operator::ALL {
            let s = generate_sparse_process(&ProcessConfig::sparse(op, 9, 1.0, 10.0, 3)).unwrap();
            assert_eq!(s.sparsity(), 9);
        }
    }

    #[test]
    fn rate_mode_draws_a_count() {
        let mut cfg = ProcessConfig::sparse(Operator::D, 1, 1.0, 10.0, 11);
        cfg.innovation = Innovation::ImpulsivePoisson {
            count: ImpulseCount::Rate(2.0),
            amplitude_std: 1.0,
        };
        let s = generate_sparse_process(&cfg).unwrap();
        assert!(s.knots().len() > 2);
        assert!(s.knots().iter().all(|&t| t > 0.0 && t < 10.0));
    }

    #[test]
    fn gaussian_zero_std_is_zero() {
        let s = generate_gaussian_process(&ProcessConfig::gaussian(Operator::D2, 0.0, 0.01, 5.0, 2)).unwrap();
        for x in [0.0, 1.3, 4.9] {
            assert_eq!(s.eval(x), 0.0);
        }
    }

    #[test]
    fn gaussian_endpoints_vanish() {
        for op in Operator::ALL {
            let s = generate_gaussian_process(&ProcessConfig::gaussian(op, 1.0, 0.01, 5.0, 9)).unwrap();
            assert_eq!(s.eval(0.0), 0.0);
            assert_abs_diff_eq!(s.eval(5.0), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.eval(6.0), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn brownian_variance_grows_linearly() {
        // Var[s(x)] = std^2 x for the uncorrected D process
        let std = 1.5;
        let reps = 1000;
        let xs = [1.0, 2.0, 3.0, 4.0];
        let mut acc = [0.0; 4];
        for r in 0..reps {
            let mut cfg = ProcessConfig::gaussian(Operator::D, std, 0.05, 4.0, derive_seed(99, r));
            cfg.compact_support = false;
            let s = generate_gaussian_process(&cfg).unwrap();
            for (a, &x) in acc.iter_mut().zip(&xs) {
                *a += s.eval(x - 1e-9).powi(2);
            }
        }
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let sxy: f64 = xs.iter().zip(&acc).map(|(x, a)| x * a / reps as f64).sum();
        let slope = sxy / sxx;
        assert!((slope / (std * std) - 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn noise_modes() {
        let z = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(add_noise(&z, f64::INFINITY, NoiseMode::Exact, 1).unwrap(), z);
        let noisy = add_noise(&z, 40.0, NoiseMode::Exact, 1).unwrap();
        let snr = 20.0 * (z.norm() / (&noisy - &z).norm()).log10();
        assert_abs_diff_eq!(snr, 40.0, epsilon = 1e-9);
        let noisy = add_noise(&z, 0.0, NoiseMode::Exact, 1).unwrap();
        assert_abs_diff_eq!((&noisy - &z).norm(), z.norm(), epsilon = 1e-12);
        assert!(matches!(
            add_noise(&DVector::zeros(3), 20.0, NoiseMode::Exact, 1),
            Err(Error::ZeroSignalNoise)
        ));
        assert_eq!(add_noise(&DVector::zeros(3), f64::INFINITY, NoiseMode::Exact, 1).unwrap(), DVector::zeros(3));
    }

    #[test]
    fn statistical_noise_level() {
        let z = DVector::from_element(20000, 1.0);
        let noisy = add_noise(&z, 20.0, NoiseMode::Statistical, 5).unwrap();
        let std = (&noisy - &z).norm() / (z.len() as f64).sqrt();
        assert!((std / 0.1 - 1.0).abs() < 0.02);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sparse_signals_are_compact_and_reproducible(seed in any::<u64>(), k in 3usize..60, d2 in any::<bool>()) {
            let op = if d2 { Operator::D2 } else { Operator::D };
            let cfg = ProcessConfig::sparse(op, k, 1.0, 10.0, seed);
            let s = generate_sparse_process(&cfg).unwrap();
            prop_assert_eq!(&s, &generate_sparse_process(&cfg).unwrap());
            let sum: f64 = s.weights().iter().sum();
            prop_assert!(sum.abs() <= 1e-12);
            if d2 {
                let moment: f64 = s.weights().iter().zip(s.knots()).map(|(a, t)| a * t).sum();
                prop_assert!(moment.abs() <= 1e-12);
            }
            prop_assert!(s.eval(-1.0).abs() <= 1e-10);
            prop_assert!(s.eval(11.0).abs() <= 1e-10);
        }
    }
}
