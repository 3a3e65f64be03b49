//! Batch comparison of TV and L2 recovery from random Fourier samples.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtv::GtvProblem;
use crate::io::{fmt_f64, to_json_string, write_csv};
use crate::lasso::StopCriteria;
use crate::measurements::{GridSpec, MeasurementModel, TikhonovSystem};
use crate::metrics::{lambda_search, log_grid, snr_db, uniform_grid, LambdaPoint};
use crate::operators::Operator;
use crate::signals::{
    add_noise, derive_seed, generate_gaussian_process, generate_sparse_process, uniform_points, NoiseMode,
    ProcessConfig,
};
use crate::spline::{sparsity_index, SplineSignal};
use crate::tikhonov::solve_tikhonov;

/// One row of the table: a fixed number of impulses, or a Gaussian process.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalRow {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impulses: Option<usize>,
}

impl SignalRow {
    pub fn impulses(label: &str, k: usize) -> Self {
        SignalRow {
            label: label.to_string(),
            impulses: Some(k),
        }
    }

    pub fn gaussian() -> Self {
        SignalRow {
            label: "Gaussian".to_string(),
            impulses: None,
        }
    }
}

/// `count` log-spaced weights in `[lo, hi] * scale`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn values(&self, scale: f64) -> Result<Vec<f64>> {
        log_grid(self.lo * scale, self.hi * scale, self.count)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub operators: Vec<Operator>,
    pub rows: Vec<SignalRow>,
    /// Number of complex Fourier measurements.
    pub pulsations: usize,
    /// Pulsations are drawn uniformly in `(0, omega_max]`.
    pub omega_max: f64,
    pub window: f64,
    pub grid_n: usize,
    pub grid_step: f64,
    pub noiseless: bool,
    /// Measurement SNR of the noisy table; `None` skips it.
    pub noisy_snr_db: Option<f64>,
    pub noise_mode: NoiseMode,
    /// Multiples of `||z||` for the gTV weight.
    pub gtv_lambdas: LambdaGrid,
    /// Multiples of the spectral norm of `V` for the Tikhonov weight.
    pub tikhonov_lambdas: LambdaGrid,
    /// Use the exact-fit program for noiseless gTV instead of a weight search.
    pub noiseless_exact_fit: bool,
    pub realizations: usize,
    pub seed: u64,
    pub amplitude_std: f64,
    pub gaussian_std: f64,
    pub gaussian_step: f64,
    /// SNR grid density relative to the reconstruction grid.
    pub eval_oversampling: usize,
    pub fista: StopCriteria,
    pub write_curves: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            operators: vec![Operator::D, Operator::D2],
            rows: vec![
                SignalRow::impulses("Strong", 10),
                SignalRow::impulses("Medium", 100),
                SignalRow::impulses("Low", 2000),
                SignalRow::gaussian(),
            ],
            pulsations: 41,
            omega_max: 4.0 * std::f64::consts::PI,
            window: 10.0,
            grid_n: 200,
            grid_step: 0.05,
            noiseless: true,
            noisy_snr_db: Some(40.0),
            noise_mode: NoiseMode::Exact,
            gtv_lambdas: LambdaGrid {
                lo: 1e-4,
                hi: 1e2,
                count: 30,
            },
            tikhonov_lambdas: LambdaGrid {
                lo: 1e-12,
                hi: 1e0,
                count: 30,
            },
            noiseless_exact_fit: true,
            realizations: 40,
            seed: 0,
            amplitude_std: 1.0,
            gaussian_std: 1.0,
            gaussian_step: 0.005,
            eval_oversampling: 10,
            fista: StopCriteria {
                eps_rel: 1e-6,
                max_iter: 5_000,
                sparsity_target: None,
                sparsity_eps_rel: 1e-6,
            },
            write_curves: true,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.operators.is_empty() || self.rows.is_empty() {
            return bad("at least one operator and one row are required".into());
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.pulsations == 0 || !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return bad("pulsations must be positive with a positive band".into());
        }
        if (self.grid_n as f64 * self.grid_step - self.window).abs() > 1e-9 * self.window {
            return bad(format!(
                "grid_n * grid_step = {} must equal the window {}",
                self.grid_n as f64 * self.grid_step,
                self.window
            ));
        }
        if !self.noiseless && self.noisy_snr_db.is_none() {
            return bad("nothing to run: noiseless is false and no noisy SNR is set".into());
        }
        for g in [&self.gtv_lambdas, &self.tikhonov_lambdas] {
            g.values(1.0)?;
        }
        if !(self.amplitude_std > 0.0 && self.gaussian_std > 0.0 && self.gaussian_step > 0.0) {
            return bad("amplitude_std, gaussian_std and gaussian_step must be positive".into());
        }
        if self.eval_oversampling == 0 {
            return bad("eval_oversampling must be at least 1".into());
        }
        for row in &self.rows {
            if row.impulses == Some(0) {
                return bad(format!("row {} has no impulses", row.label));
            }
        }
        Ok(())
    }

    fn conditions(&self) -> Vec<Option<f64>> {
        let mut c = Vec::new();
        if self.noiseless {
            c.push(None);
        }
        if let Some(db) = self.noisy_snr_db {
            c.push(Some(db));
        }
        c
    }

    /// Fixed pulsations shared by every cell.
    pub fn draw_pulsations(&self) -> Vec<f64> {
        uniform_points(self.pulsations, self.omega_max, derive_seed(self.seed, 0))
    }

    fn signal_seed(&self, op_index: usize, row_index: usize, realization: usize) -> u64 {
        let cell = derive_seed(self.seed, 1 + (op_index * self.rows.len() + row_index) as u64);
        derive_seed(cell, realization as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "TV")]
    Tv,
    #[serde(rename = "L2")]
    L2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub operator: Operator,
    pub row: String,
    pub impulses: Option<usize>,
    /// `None` for noiseless measurements.
    pub measurement_snr_db: Option<f64>,
    pub realization: usize,
    pub seed: u64,
    pub method: Method,
    /// `None` when the exact-fit program was used.
    pub best_lambda: Option<f64>,
    pub snr_db: f64,
    pub sparsity: usize,
    pub truth_sparsity: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_curve: Vec<LambdaPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub operator: Operator,
    pub row: String,
    pub impulses: Option<usize>,
    pub measurement_snr_db: Option<f64>,
    pub tv_mean_snr_db: f64,
    pub l2_mean_snr_db: f64,
    pub tv_snr_db: Vec<f64>,
    pub l2_snr_db: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub name: String,
    pub x: Vec<f64>,
    pub ground_truth: Vec<f64>,
    pub tikhonov: Vec<f64>,
    pub gtv: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub pulsations: Vec<f64>,
    pub eval_points: usize,
    pub cells: Vec<CellSummary>,
    pub runs: Vec<RunRecord>,
    pub curves: Vec<Curve>,
}

/// Per-operator matrices shared by all realizations.
struct OperatorContext {
    op: Operator,
    tikhonov: TikhonovSystem,
    tikhonov_scale: f64,
    gtv: GtvProblem,
    /// Tikhonov basis functions on the evaluation grid.
    basis_eval: DMatrix<f64>,
    /// Grid atoms on the evaluation grid.
    atom_eval: DMatrix<f64>,
    null_eval: DMatrix<f64>,
}

impl OperatorContext {
    fn new(op: Operator, model: &MeasurementModel, grid: GridSpec, xs: &[f64]) -> Result<Self> {
        let tikhonov = model.assemble_tikhonov(op)?;
        let tikhonov_scale = tikhonov.v.clone().symmetric_eigenvalues().amax();
        let gtv = GtvProblem::new(model, op, grid)?;
        let m = model.rows();
        let mut basis_eval = DMatrix::zeros(xs.len(), m);
        for (i, &x) in xs.iter().enumerate() {
            basis_eval.row_mut(i).copy_from(&model.tikhonov_basis_all(op, x).transpose());
        }
        let knots = grid.knots();
        let atom_eval = DMatrix::from_fn(xs.len(), knots.len(), |i, j| op.green(xs[i] - knots[j]));
        let null_eval = DMatrix::from_fn(xs.len(), op.nullspace_dim(), |i, n| op.nullspace_eval(n, xs[i]));
        Ok(OperatorContext {
            op,
            tikhonov,
            tikhonov_scale,
            gtv,
            basis_eval,
            atom_eval,
            null_eval,
        })
    }
}

struct MethodOutcome {
    lambda: Option<f64>,
    snr: f64,
    sparsity: usize,
    curve: Vec<LambdaPoint>,
    values: Vec<f64>,
}

fn as_vec(v: DVector<f64>) -> Vec<f64> {
    v.as_slice().to_vec()
}

fn tikhonov_outcome(ctx: &OperatorContext, cfg: &ExperimentConfig, z: &DVector<f64>, truth: &[f64]) -> Result<MethodOutcome> {
    let lambdas = cfg.tikhonov_lambdas.values(ctx.tikhonov_scale)?;
    let search = lambda_search(&lambdas, |lambda| {
        let s = solve_tikhonov(&ctx.tikhonov.v, &ctx.tikhonov.w, z, lambda)?;
        let a = DVector::from_column_slice(&s.a);
        let b = DVector::from_column_slice(&s.b);
        let values = &ctx.basis_eval * &a + &ctx.null_eval * &b;
        let snr = snr_db(truth, values.as_slice())?;
        Ok((snr, (values, sparsity_index(&s.a))))
    })?;
    let (values, sparsity) = search.best;
    Ok(MethodOutcome {
        lambda: Some(search.best_lambda),
        snr: search.best_snr,
        sparsity,
        curve: search.curve,
        values: as_vec(values),
    })
}

fn gtv_outcome(
    ctx: &OperatorContext,
    cfg: &ExperimentConfig,
    z: &DVector<f64>,
    truth: &[f64],
    noisy: bool,
) -> Result<MethodOutcome> {
    let evaluate = |a: &DVector<f64>, b: &DVector<f64>| &ctx.atom_eval * a + &ctx.null_eval * b;
    if !noisy && cfg.noiseless_exact_fit {
        let rec = ctx.gtv.solve_exact(z)?;
        let d = rec.diagnostics;
        let values = evaluate(&d.coefficients, &d.b);
        return Ok(MethodOutcome {
            lambda: None,
            snr: snr_db(truth, values.as_slice())?,
            sparsity: d.sparsity,
            curve: Vec::new(),
            values: as_vec(values),
        });
    }
    let lambdas = cfg.gtv_lambdas.values(z.norm())?;
    let mut warm: Option<DVector<f64>> = None;
    let search = lambda_search(&lambdas, |lambda| {
        let rec = ctx.gtv.solve_least_squares(z, lambda, &cfg.fista, warm.as_ref())?;
        let d = rec.diagnostics;
        warm = d.fista_coefficients.clone();
        let values = evaluate(&d.coefficients, &d.b);
        Ok((snr_db(truth, values.as_slice())?, (values, d.sparsity)))
    })?;
    let (values, sparsity) = search.best;
    Ok(MethodOutcome {
        lambda: Some(search.best_lambda),
        snr: search.best_snr,
        sparsity,
        curve: search.curve,
        values: as_vec(values),
    })
}

fn generate_truth(cfg: &ExperimentConfig, op: Operator, row: &SignalRow, seed: u64) -> Result<SplineSignal> {
    match row.impulses {
        Some(k) => generate_sparse_process(&ProcessConfig::sparse(op, k, cfg.amplitude_std, cfg.window, seed)),
        None => generate_gaussian_process(&ProcessConfig::gaussian(
            op,
            cfg.gaussian_std,
            cfg.gaussian_step,
            cfg.window,
            seed,
        )),
    }
}

struct TaskOutput {
    runs: Vec<RunRecord>,
    curves: Vec<Curve>,
}

#[allow(clippy::too_many_arguments)]
fn run_task(
    cfg: &ExperimentConfig,
    model: &MeasurementModel,
    ctx: &OperatorContext,
    op_index: usize,
    row_index: usize,
    realization: usize,
    xs: &[f64],
) -> Result<TaskOutput> {
    let row = &cfg.rows[row_index];
    let seed = cfg.signal_seed(op_index, row_index, realization);
    let truth = generate_truth(cfg, ctx.op, row, seed)?;
    let truth_vals = truth.sample(xs);
    let z0 = model.measure_spline(&truth);
    let mut out = TaskOutput {
        runs: Vec::new(),
        curves: Vec::new(),
    };
    for (ci, cond) in cfg.conditions().into_iter().enumerate() {
        let z = match cond {
            None => z0.clone(),
            Some(db) => add_noise(&z0, db, cfg.noise_mode, derive_seed(seed, 1 + ci as u64))?,
        };
        let l2 = tikhonov_outcome(ctx, cfg, &z, &truth_vals)?;
        let tv = gtv_outcome(ctx, cfg, &z, &truth_vals, cond.is_some())?;
        for (method, o) in [(Method::Tv, &tv), (Method::L2, &l2)] {
            out.runs.push(RunRecord {
                operator: ctx.op,
                row: row.label.clone(),
                impulses: row.impulses,
                measurement_snr_db: cond,
                realization,
                seed,
                method,
                best_lambda: o.lambda,
                snr_db: o.snr,
                sparsity: o.sparsity,
                truth_sparsity: truth.sparsity(),
                lambda_curve: o.curve.clone(),
            });
        }
        if cfg.write_curves && realization == 0 {
            out.curves.push(Curve {
                name: format!("{}_{}_{}", ctx.op, row.label, condition_tag(cond)),
                x: xs.to_vec(),
                ground_truth: truth_vals.clone(),
                tikhonov: l2.values,
                gtv: tv.values,
            });
        }
    }
    Ok(out)
}

fn condition_tag(cond: Option<f64>) -> String {
    match cond {
        None => "noiseless".to_string(),
        Some(db) => format!("snr{db}dB"),
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Runs every (operator, row, realization) in parallel and aggregates per cell.
pub fn run_table1(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let pulsations = cfg.draw_pulsations();
    let model = MeasurementModel::fourier(pulsations.clone(), cfg.window);
    let grid = GridSpec {
        n: cfg.grid_n,
        step: cfg.grid_step,
    };
    let eval_points = cfg.grid_n * cfg.eval_oversampling + 1;
    let xs = uniform_grid(cfg.window, eval_points);
    let contexts: Vec<OperatorContext> = cfg
        .operators
        .par_iter()
        .map(|&op| OperatorContext::new(op, &model, grid, &xs))
        .collect::<Result<_>>()?;

    let tasks: Vec<(usize, usize, usize)> = (0..cfg.operators.len())
        .flat_map(|o| (0..cfg.rows.len()).flat_map(move |r| (0..cfg.realizations).map(move |k| (o, r, k))))
        .collect();
    let outputs: Vec<TaskOutput> = tasks
        .par_iter()
        .map(|&(o, r, k)| run_task(cfg, &model, &contexts[o], o, r, k, &xs))
        .collect::<Result<_>>()?;

    let mut runs = Vec::new();
    let mut curves = Vec::new();
    for o in outputs {
        runs.extend(o.runs);
        curves.extend(o.curves);
    }
    let mut cells = Vec::new();
    for cond in cfg.conditions() {
        for row in &cfg.rows {
            for &op in &cfg.operators {
                let pick = |m: Method| -> Vec<f64> {
                    runs.iter()
                        .filter(|r| r.operator == op && r.row == row.label && r.measurement_snr_db == cond && r.method == m)
                        .map(|r| r.snr_db)
                        .collect()
                };
                let tv = pick(Method::Tv);
                let l2 = pick(Method::L2);
                cells.push(CellSummary {
                    operator: op,
                    row: row.label.clone(),
                    impulses: row.impulses,
                    measurement_snr_db: cond,
                    tv_mean_snr_db: mean(&tv),
                    l2_mean_snr_db: mean(&l2),
                    tv_snr_db: tv,
                    l2_snr_db: l2,
                });
            }
        }
    }
    Ok(ExperimentResult {
        config: cfg.clone(),
        pulsations,
        eval_points,
        cells,
        runs,
        curves,
    })
}

impl ExperimentResult {
    pub fn cell(&self, op: Operator, row: &str, measurement_snr_db: Option<f64>) -> Option<&CellSummary> {
        self.cells
            .iter()
            .find(|c| c.operator == op && c.row == row && c.measurement_snr_db == measurement_snr_db)
    }

    /// CSV mirroring the table layout: one line per row, TV and L2 columns per operator.
    pub fn table_csv(&self, measurement_snr_db: Option<f64>) -> String {
        let mut header = vec!["impulses".to_string(), "sparsity".to_string()];
        for op in &self.config.operators {
            header.push(format!("{op}_TV"));
            header.push(format!("{op}_L2"));
        }
        let mut out = header.join(",") + "\n";
        for row in &self.config.rows {
            let mut line = vec![
                row.impulses.map_or("-".to_string(), |k| k.to_string()),
                row.label.clone(),
            ];
            for &op in &self.config.operators {
                let c = self.cell(op, &row.label, measurement_snr_db).expect("every cell is computed");
                line.push(fmt_f64(c.tv_mean_snr_db));
                line.push(fmt_f64(c.l2_mean_snr_db));
            }
            out += &(line.join(",") + "\n");
        }
        out
    }

    fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "snr_definition": format!(
                "20 log10(||f|| / ||f - f_hat||) over {} equispaced points of [0, {}]",
                self.eval_points, self.config.window
            ),
            "pulsations": self.pulsations,
            "config": self.config,
        })
    }

    /// Writes the tables, per-realization records, metadata and curves under `dir`.
    pub fn write_outputs(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for cond in self.config.conditions() {
            let name = match cond {
                None => "table1_noiseless.csv",
                Some(_) => "table1_noisy.csv",
            };
            fs::write(dir.join(name), self.table_csv(cond))?;
        }
        let mut runs = BufWriter::new(fs::File::create(dir.join("runs.jsonl"))?);
        for r in &self.runs {
            writeln!(runs, "{}", to_json_string(r).map_err(std::io::Error::other)?)?;
        }
        runs.flush()?;
        let meta = to_json_string(&self.metadata()).map_err(std::io::Error::other)?;
        fs::write(dir.join("table1_meta.json"), meta + "\n")?;
        if !self.curves.is_empty() {
            let cdir = dir.join("curves");
            fs::create_dir_all(&cdir)?;
            for c in &self.curves {
                let f = BufWriter::new(fs::File::create(cdir.join(format!("{}.csv", c.name)))?);
                let rows = (0..c.x.len()).map(|i| vec![c.x[i], c.ground_truth[i], c.tikhonov[i], c.gtv[i]]);
                write_csv(f, &["x", "ground_truth", "tikhonov", "gtv"], rows)?;
            }
        }
        Ok(())
    }
}
