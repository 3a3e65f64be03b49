//! Runs the TV vs L2 comparison and prints both tables.
//!
//! Usage: `cargo run --release --example table1 -- [realizations] [seed] [omega_max]`

use std::time::Instant;

use spline_inverse::experiments::{run_table1, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = ExperimentConfig {
        realizations: 10,
        write_curves: false,
        ..ExperimentConfig::default()
    };
    if let Some(r) = args.first() {
        cfg.realizations = r.parse().expect("realizations");
    }
    if let Some(s) = args.get(1) {
        cfg.seed = s.parse().expect("seed");
    }
    if let Some(w) = args.get(2) {
        cfg.omega_max = w.parse().expect("omega_max");
    }
    let start = Instant::now();
    let res = run_table1(&cfg).expect("experiment failed");
    println!("noiseless\n{}", res.table_csv(None));
    println!("noisy\n{}", res.table_csv(cfg.noisy_snr_db));
    println!("elapsed {:.1} s", start.elapsed().as_secs_f64());
}
