// Seed-locked ensemble with aggregate statistics, written to disk and read back.
//
// `cargo run --release --example ensemble_run -- [n_traj] [workers]`

use stochastic_allen_cahn::config::RunConfig;
use stochastic_allen_cahn::ensemble::{load_run, persist, run_ensemble, EnsembleOptions};

const CONFIG: &str = include_str!("configs/ensemble_1d.json");

pub fn run_with(n_traj: usize, workers: usize) -> Result<(), Box<dyn std::error::Error>> {
    let v: serde_json::Value = serde_json::from_str(CONFIG)?;
    let cfg = RunConfig::from_value(v, &[format!("ensemble.n_traj={n_traj}")])?;
    let run = run_ensemble(&cfg, EnsembleOptions { workers, hypotheses_unverified: false })?;

    let a = &run.report.aggregate;
    let q = &a.delta_min;
    println!("{} trajectories, fingerprint {}", a.n_traj, &run.report.config_fingerprint[..16]);
    println!(
        "delta_min quantiles: min {:.4} q05 {:.4} median {:.4} q95 {:.4} max {:.4}",
        q.min, q.q05, q.median, q.q95, q.max
    );
    for m in &a.exp_moments {
        println!(
            "E exp(q G_s0 mass), q = {}: {:.6e} ± {:.2e}{}",
            m.q,
            m.mean,
            m.stderr,
            if m.overflow { " (overflow)" } else { "" }
        );
    }
    println!(
        "fraction with delta_min >= delta0/2: {:.3}; all separated: {}",
        a.fraction_half_delta0, a.all_separated
    );

    let dir = std::env::temp_dir().join("sac-ensemble-example");
    let (json, csv) = persist(&run, &dir)?;
    println!("wrote {} and {}", json.display(), csv.display());
    let back = load_run(&dir)?;
    println!("read back identical: {}", back == run);
    Ok(())
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    run_with(8, 2)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let n_traj = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100);
    let workers = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    run_with(n_traj, workers)
}
