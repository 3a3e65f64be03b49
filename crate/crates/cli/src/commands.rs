//! The three subcommands.

use std::path::Path;

use serde::Serialize;
use spline_inverse::experiments::run_table1;
use spline_inverse::gtv::{FitMode, GtvProblem, GtvReconstruction};
use spline_inverse::metrics::uniform_grid;
use spline_inverse::nalgebra::{DMatrix, DVector};
use spline_inverse::signals::{
    add_noise, derive_seed, generate_gaussian_process, generate_sparse_process, uniform_points, ImpulseCount,
    Innovation, ProcessConfig,
};
use spline_inverse::tikhonov::solve_tikhonov;
use spline_inverse::{GridSpec, MeasurementModel, Operator, SplineSignal};

use crate::config::{Measure, Method, Process, ReconstructConfig, RunConfig, SimulateConfig};
use crate::data::{load_measurements, save_measurements, write_columns, write_json, MeasurementFile};
use crate::error::CliError;

fn log(run: &RunConfig, msg: impl AsRef<str>) {
    if run.verbose {
        eprintln!("{}", msg.as_ref());
    }
}

pub fn simulate(run: &RunConfig, sim: &SimulateConfig) -> Result<(), CliError> {
    let innovation = match sim.process {
        Process::Sparse => Innovation::ImpulsivePoisson {
            count: match sim.rate {
                Some(r) => ImpulseCount::Rate(r),
                None => ImpulseCount::Fixed(sim.impulses),
            },
            amplitude_std: sim.amplitude_std,
        },
        Process::Gaussian => Innovation::GaussianWhite {
            std: sim.std,
            grid_step: sim.grid_step,
        },
    };
    let pcfg = ProcessConfig {
        op: sim.operator,
        innovation,
        domain: sim.domain,
        seed: run.seed,
        compact_support: sim.compact_support,
    };
    let truth = match sim.process {
        Process::Sparse => generate_sparse_process(&pcfg)?,
        Process::Gaussian => generate_gaussian_process(&pcfg)?,
    };
    log(run, format!("generated {} knots", truth.knots().len()));

    let out = &run.out;
    let xs = uniform_grid(sim.domain, sim.dense_points);
    let values = truth.sample(&xs);
    write_columns(&out.join("ground_truth.csv"), &["x", "value"], &[&xs, &values])?;
    write_columns(
        &out.join("innovation.csv"),
        &["knot", "weight"],
        &[truth.knots(), truth.weights()],
    )?;
    write_json(&out.join("signal.json"), &truth)?;

    let model = match sim.measure {
        Measure::None => None,
        Measure::Sampling => Some(MeasurementModel::sampling(uniform_points(
            sim.count,
            sim.domain,
            derive_seed(run.seed, 1),
        ))),
        Measure::Fourier => Some(MeasurementModel::fourier(
            uniform_points(sim.count, sim.omega_max, derive_seed(run.seed, 1)),
            sim.domain,
        )),
    };
    if let Some(model) = model {
        let clean = model.measure_spline(&truth);
        let z = match sim.snr_db {
            Some(db) => add_noise(&clean, db, sim.noise_mode, derive_seed(run.seed, 2))?,
            None => clean,
        };
        log(run, format!("wrote {} measurements", z.len()));
        let file = MeasurementFile {
            model,
            z: z.as_slice().to_vec(),
            domain: Some(sim.domain),
        };
        save_measurements(&out.join("measurements.json"), &file)?;
    }
    Ok(())
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn vec_of(v: &DVector<f64>) -> Vec<f64> {
    v.as_slice().to_vec()
}

#[derive(Serialize)]
struct TikhonovOutput<'a> {
    method: &'static str,
    operator: Operator,
    lambda: f64,
    a: &'a [f64],
    b: &'a [f64],
    residual: f64,
    reg_value: f64,
    objective: f64,
}

#[derive(Serialize)]
struct GtvDiagnosticsOutput {
    sparsity: usize,
    l1: f64,
    objective: f64,
    sparsity_fista: Option<usize>,
    l1_fista: Option<f64>,
    kkt_residual: Option<f64>,
    fista_iterations: usize,
    fista_converged: bool,
    lp_pivots: usize,
    data_residual: f64,
}

#[derive(Serialize)]
struct GtvOutput<'a> {
    method: &'static str,
    operator: Operator,
    mode: FitMode,
    lambda: Option<f64>,
    grid: GridSpec,
    signal: &'a SplineSignal,
    coefficients: Vec<f64>,
    diagnostics: GtvDiagnosticsOutput,
}

fn eval_extent(model: &MeasurementModel, domain: Option<f64>) -> f64 {
    if let Some(d) = domain.or(model.window()) {
        return d;
    }
    match model {
        MeasurementModel::IdealSampling { samples } => samples.iter().fold(0.0f64, |m, &s| m.max(s)),
        MeasurementModel::WindowedFourier { window, .. } => *window,
    }
}

fn resolve_grid(rc: &ReconstructConfig, domain: Option<f64>) -> Result<GridSpec, CliError> {
    let need_domain = || CliError::Inconsistent("grid needs both grid_n and grid_step, or a known domain".into());
    match (rc.grid_n, rc.grid_step) {
        (Some(n), Some(step)) => Ok(GridSpec { n, step }),
        (Some(n), None) => Ok(GridSpec::covering(domain.ok_or_else(need_domain)?, n)),
        (None, Some(step)) => {
            let d = domain.ok_or_else(need_domain)?;
            Ok(GridSpec {
                n: (d / step).round() as usize,
                step,
            })
        }
        (None, None) => Err(CliError::Inconsistent("gtv requires grid_n or grid_step".into())),
    }
}

pub fn reconstruct(run: &RunConfig, rc: &ReconstructConfig) -> Result<(), CliError> {
    let input = rc.input.as_deref().expect("checked by ReconstructConfig::check");
    let (z, model, file_domain) = load_measurements(input)?;
    let domain = rc.domain.or(file_domain).or(model.window());
    let out = &run.out;
    log(run, format!("loaded {} measurements from {}", z.len(), input.display()));

    match rc.method {
        Method::Tikhonov => {
            let lambda = rc.lambda.expect("checked by ReconstructConfig::check");
            let sys = model.assemble_tikhonov(rc.operator)?;
            if rc.dump_matrices {
                write_json(
                    &out.join("matrices.json"),
                    &serde_json::json!({ "V": rows_of(&sys.v), "W": rows_of(&sys.w) }),
                )?;
            }
            let sol = solve_tikhonov(&sys.v, &sys.w, &z, lambda)?;
            let objective = sol.objective(&sys.v, &sys.w, &z);
            log(run, format!("residual {:.6e}, objective {:.6e}", sol.residual, objective));
            write_json(
                &out.join("reconstruction.json"),
                &TikhonovOutput {
                    method: "tikhonov",
                    operator: rc.operator,
                    lambda,
                    a: &sol.a,
                    b: &sol.b,
                    residual: sol.residual,
                    reg_value: sol.reg_value,
                    objective,
                },
            )?;
            let xs = uniform_grid(eval_extent(&model, domain), rc.eval_points);
            let values = sol.sample(&model, rc.operator, &xs);
            write_columns(&out.join("reconstruction.csv"), &["x", "value"], &[&xs, &values])?;
        }
        Method::Gtv => {
            let grid = resolve_grid(rc, domain)?;
            let problem = GtvProblem::new(&model, rc.operator, grid)?;
            if rc.dump_matrices {
                write_json(
                    &out.join("matrices.json"),
                    &serde_json::json!({
                        "P": rows_of(problem.p()),
                        "Q": rows_of(problem.q()),
                        "H": rows_of(problem.h()),
                    }),
                )?;
            }
            let mut trace: Vec<(f64, f64)> = Vec::new();
            let rec: GtvReconstruction = match rc.mode {
                FitMode::ExactFit => problem.solve_exact(&z)?,
                FitMode::LeastSquares => {
                    let lambda = rc.lambda.expect("checked by ReconstructConfig::check");
                    problem.solve_least_squares_observed(&z, lambda, &rc.fista, None, |k, f, _| {
                        if rc.fista_trace {
                            trace.push((k as f64, f));
                        }
                    })?
                }
            };
            if rc.fista_trace {
                let (k, f): (Vec<f64>, Vec<f64>) = trace.into_iter().unzip();
                write_columns(&out.join("fista_trace.csv"), &["iteration", "objective"], &[&k, &f])?;
            }
            let d = &rec.diagnostics;
            let data_residual = (&z - problem.forward(&d.coefficients, &d.b)).norm();
            log(
                run,
                format!(
                    "sparsity {} (fista {:?}), l1 {:.6e}, {} FISTA iterations",
                    d.sparsity, d.sparsity_fista, d.l1, d.fista_iterations
                ),
            );
            write_json(
                &out.join("reconstruction.json"),
                &GtvOutput {
                    method: "gtv",
                    operator: rc.operator,
                    mode: rc.mode,
                    lambda: match rc.mode {
                        FitMode::ExactFit => None,
                        FitMode::LeastSquares => rc.lambda,
                    },
                    grid,
                    signal: &rec.signal,
                    coefficients: vec_of(&d.coefficients),
                    diagnostics: GtvDiagnosticsOutput {
                        sparsity: d.sparsity,
                        l1: d.l1,
                        objective: d.objective,
                        sparsity_fista: d.sparsity_fista,
                        l1_fista: d.l1_fista,
                        kkt_residual: d.kkt_residual,
                        fista_iterations: d.fista_iterations,
                        fista_converged: d.fista_converged,
                        lp_pivots: d.lp_pivots,
                        data_residual,
                    },
                },
            )?;
            let xs = uniform_grid(grid.extent(), rc.eval_points);
            let values = rec.signal.sample(&xs);
            write_columns(&out.join("reconstruction.csv"), &["x", "value"], &[&xs, &values])?;
        }
    }
    Ok(())
}

pub fn experiment(run: &RunConfig, out: &Path) -> Result<(), CliError> {
    let cfg = run.experiment.as_ref().expect("experiment section resolved");
    log(
        run,
        format!(
            "running {} realizations over {} operators and {} rows",
            cfg.realizations,
            cfg.operators.len(),
            cfg.rows.len()
        ),
    );
    let res = run_table1(cfg)?;
    res.write_outputs(out).map_err(|source| CliError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    if run.verbose {
        eprintln!("noiseless\n{}", res.table_csv(None));
        if cfg.noisy_snr_db.is_some() {
            eprintln!("noisy\n{}", res.table_csv(cfg.noisy_snr_db));
        }
    }
    Ok(())
}
