//! Run configuration: TOML file, command-line overrides and consistency checks.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use spline_inverse::experiments::ExperimentConfig;
use spline_inverse::gtv::FitMode;
use spline_inverse::lasso::StopCriteria;
use spline_inverse::signals::NoiseMode;
use spline_inverse::Operator;

use crate::error::CliError;

pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    #[default]
    Sparse,
    Gaussian,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[default]
    None,
    Sampling,
    Fourier,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tikhonov,
    #[default]
    Gtv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Exact,
    Lsq,
}

impl From<ModeArg> for FitMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => FitMode::ExactFit,
            ModeArg::Lsq => FitMode::LeastSquares,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub process: Process,
    pub operator: Operator,
    /// Fixed number of impulses (sparse process).
    pub impulses: usize,
    /// Impulses per unit length; replaces `impulses` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    pub amplitude_std: f64,
    /// White-noise level (Gaussian process).
    pub std: f64,
    pub grid_step: f64,
    pub domain: f64,
    pub compact_support: bool,
    /// Points of the dense ground-truth curve.
    pub dense_points: usize,
    pub measure: Measure,
    /// Number of samples, or of pulsations for Fourier measurements.
    pub count: usize,
    pub omega_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub noise_mode: NoiseMode,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig {
            process: Process::Sparse,
            operator: Operator::D,
            impulses: 10,
            rate: None,
            amplitude_std: 1.0,
            std: 1.0,
            grid_step: 0.005,
            domain: 10.0,
            compact_support: true,
            dense_points: 2001,
            measure: Measure::None,
            count: 30,
            omega_max: 4.0 * std::f64::consts::PI,
            snr_db: None,
            noise_mode: NoiseMode::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub method: Method,
    pub operator: Operator,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub mode: FitMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_step: Option<f64>,
    /// Signal domain `[0, domain]`; taken from the input file or window when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<f64>,
    pub eval_points: usize,
    pub fista: StopCriteria,
    pub dump_matrices: bool,
    pub fista_trace: bool,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            input: None,
            method: Method::Gtv,
            operator: Operator::D,
            lambda: None,
            mode: FitMode::LeastSquares,
            grid_n: None,
            grid_step: None,
            domain: None,
            eval_points: 2001,
            fista: StopCriteria::default(),
            dump_matrices: false,
            fista_trace: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub verbose: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reconstruct: Option<ReconstructConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("out"),
            verbose: false,
            simulate: None,
            reconstruct: None,
            experiment: None,
        }
    }
}

/// Parses TOML text, separating unknown keys from other type or value errors.
pub fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| CliError::TypeMismatch(e.to_string()))?;
    T::deserialize(table).map_err(|e| {
        let msg = e.to_string();
        if msg.contains("unknown field") {
            CliError::UnknownKey(msg)
        } else {
            CliError::TypeMismatch(msg)
        }
    })
}

pub fn load_config_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_toml(&text)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    pub fn write_effective(&self) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out).map_err(|source| CliError::Io {
            path: self.out.clone(),
            source,
        })?;
        let path = self.out.join(EFFECTIVE_CONFIG);
        std::fs::write(&path, self.to_toml()).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }
}

fn inconsistent(msg: impl Into<String>) -> CliError {
    CliError::Inconsistent(msg.into())
}

impl SimulateConfig {
    pub fn check(&self) -> Result<(), CliError> {
        if !(self.domain > 0.0) {
            return Err(inconsistent("domain must be positive"));
        }
        if self.dense_points < 2 {
            return Err(inconsistent("dense_points must be at least 2"));
        }
        if self.measure != Measure::None && self.count == 0 {
            return Err(inconsistent("count must be positive when measuring"));
        }
        if self.snr_db.is_some() && self.measure == Measure::None {
            return Err(inconsistent("snr_db needs measurements (measure = sampling or fourier)"));
        }
        Ok(())
    }
}

impl ReconstructConfig {
    pub fn check(&self) -> Result<(), CliError> {
        if self.input.is_none() {
            return Err(inconsistent("input required"));
        }
        let needs_lambda = match self.method {
            Method::Tikhonov => true,
            Method::Gtv => self.mode == FitMode::LeastSquares,
        };
        match self.lambda {
            None if needs_lambda => return Err(inconsistent("lambda required")),
            Some(l) if needs_lambda && !(l > 0.0 && l.is_finite()) => {
                return Err(inconsistent(format!("lambda must be positive, got {l}")))
            }
            _ => {}
        }
        if self.method == Method::Gtv && self.grid_n.is_none() && self.grid_step.is_none() {
            return Err(inconsistent("gtv requires grid_n or grid_step"));
        }
        if self.method == Method::Tikhonov && self.fista_trace {
            return Err(inconsistent("fista_trace only applies to gtv least squares"));
        }
        if self.method == Method::Gtv && self.mode == FitMode::ExactFit && self.fista_trace {
            return Err(inconsistent("fista_trace only applies to gtv least squares"));
        }
        if self.eval_points < 2 {
            return Err(inconsistent("eval_points must be at least 2"));
        }
        Ok(())
    }
}
