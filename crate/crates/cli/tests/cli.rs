use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn splinv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splinv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_then_reconstruct_with_both_methods() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let o = splinv(&[
        "simulate", "--process", "sparse", "--operator", "D2", "--impulses", "5", "--domain", "4",
        "--measure", "sampling", "--count", "16", "--seed", "3", "--out", p(&sim),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ground_truth.csv", "innovation.csv", "signal.json", "measurements.json", "effective_config.toml"] {
        assert!(sim.join(f).exists(), "missing {f}");
    }
    let truth = fs::read_to_string(sim.join("ground_truth.csv")).unwrap();
    assert!(truth.starts_with("x,value\n"));
    assert_eq!(truth.lines().count(), 2002);

    let input = sim.join("measurements.json");
    let gtv = dir.path().join("gtv");
    let o = splinv(&[
        "reconstruct", "--input", p(&input), "--method", "gtv", "--operator", "D2", "--lambda", "1e-3",
        "--grid-n", "80", "--dump-matrices", "--fista-trace", "--out", p(&gtv),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(gtv.join("reconstruction.json")).unwrap()).unwrap();
    assert!(rec["diagnostics"]["sparsity"].as_u64().unwrap() <= 16);
    assert_eq!(rec["grid"]["n"], 80);
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(gtv.join("matrices.json")).unwrap()).unwrap();
    assert_eq!(m["P"].as_array().unwrap().len(), 16);
    assert_eq!(m["P"][0].as_array().unwrap().len(), 80);
    let trace = fs::read_to_string(gtv.join("fista_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,objective\n0.0000000000000000e0,"));

    let exact = dir.path().join("exact");
    let o = splinv(&[
        "reconstruct", "--input", p(&input), "--operator", "D2", "--mode", "exact", "--grid-step", "0.05",
        "--out", p(&exact),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rec: serde_json::Value = serde_json::from_str(&fs::read_to_string(exact.join("reconstruction.json")).unwrap()).unwrap();
    assert!(rec["diagnostics"]["data_residual"].as_f64().unwrap() < 1e-8);

    let tik = dir.path().join("tik");
    let o = splinv(&[
        "reconstruct", "--input", p(&input), "--method", "tikhonov", "--operator", "D2", "--lambda", "0.01",
        "--out", p(&tik),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(tik.join("reconstruction.csv").exists());
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = splinv(&["simulate", "--process", "gaussian", "--seed", "9", "--measure", "fourier", "--count", "5", "--out", p(out)]);
        assert_eq!(code(&o), 0);
    }
    for f in ["ground_truth.csv", "measurements.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap());
    }
}

#[test]
fn missing_lambda_is_inconsistent() {
    let dir = tempfile::tempdir().unwrap();
    let o = splinv(&["reconstruct", "--method", "tikhonov", "--input", "x.json", "--out", p(dir.path())]);
    assert_eq!(code(&o), 5);
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda required"));
}

#[test]
fn config_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 1\n[reconstruct]\nlamda = 0.1\n").unwrap();
    assert_eq!(code(&splinv(&["--config", p(&cfg), "reconstruct"])), 3);
    fs::write(&cfg, "seed = \"one\"\n").unwrap();
    assert_eq!(code(&splinv(&["--config", p(&cfg), "reconstruct"])), 4);
    fs::write(&cfg, "[reconstruct]\nmethod = \"gtv\"\nlambda = 0.1\ninput = \"m.json\"\n").unwrap();
    assert_eq!(code(&splinv(&["--config", p(&cfg), "reconstruct", "--out", p(dir.path())])), 5);
}

#[test]
fn flags_override_file_and_effective_config_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "seed = 1\n[simulate]\nimpulses = 4\ndomain = 3.0\n").unwrap();
    let out = dir.path().join("o1");
    let o = splinv(&["--config", p(&cfg), "simulate", "--impulses", "6", "--seed", "2", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let eff = fs::read_to_string(out.join("effective_config.toml")).unwrap();
    assert!(eff.contains("impulses = 6"));
    assert!(eff.contains("seed = 2"));
    assert!(eff.contains("domain = 3.0"));
    let innovation = fs::read_to_string(out.join("innovation.csv")).unwrap();
    assert_eq!(innovation.lines().count(), 7);

    // replaying the effective config reproduces the outputs exactly
    let out2 = dir.path().join("o2");
    let o = splinv(&["--config", p(&out.join("effective_config.toml")), "simulate", "--out", p(&out2)]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(out.join("innovation.csv")).unwrap(), fs::read(out2.join("innovation.csv")).unwrap());
    let eff2 = fs::read_to_string(out2.join("effective_config.toml")).unwrap();
    assert_eq!(eff.replace(p(&out), p(&out2)), eff2);
}

#[test]
fn runtime_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("m.json");
    fs::write(&input, r#"{"kind": "ideal_sampling", "samples": [0.5, 0.5], "z": [1.0, 2.0]}"#).unwrap();
    let o = splinv(&["reconstruct", "--method", "tikhonov", "--lambda", "1", "--input", p(&input), "--out", p(dir.path())]);
    assert_eq!(code(&o), 6);
    fs::write(&input, r#"{"kind": "ideal_sampling", "samples": [0.5], "z": [1.0]}"#).unwrap();
    let o = splinv(&["reconstruct", "--method", "tikhonov", "--operator", "D2", "--lambda", "1", "--input", p(&input), "--out", p(dir.path())]);
    assert_eq!(code(&o), 1);
}

#[test]
fn tiny_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[experiment]\nrows = [{ label = \"Strong\", impulses = 4 }]\noperators = [\"D\"]\npulsations = 5\nwindow = 2.0\ngrid_n = 20\ngrid_step = 0.1\ngaussian_step = 0.05\neval_oversampling = 2\n[experiment.gtv_lambdas]\nlo = 1e-3\nhi = 1.0\ncount = 3\n",
    )
    .unwrap();
    let out = dir.path().join("exp");
    let o = splinv(&["--config", p(&cfg), "experiment", "table1", "--realizations", "1", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["table1_noiseless.csv", "table1_noisy.csv", "runs.jsonl", "table1_meta.json", "effective_config.toml"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(out.join("curves").is_dir());
}
