// Refinement studies: coupled time refinement and the heat-decay grid check.

use stochastic_allen_cahn::config::RunConfig;
use stochastic_allen_cahn::ensemble::convergence_study;

const DT_REFINE: &str = include_str!("configs/dt_refine.json");

pub fn run_with(n_traj: usize) -> Result<(), Box<dyn std::error::Error>> {
    let v: serde_json::Value = serde_json::from_str(DT_REFINE)?;
    let cfg = RunConfig::from_value(v.clone(), &[format!("ensemble.n_traj={n_traj}")])?;
    let study = convergence_study(&cfg, 2)?;
    println!("dt levels {:?}", study.levels);
    let d: Vec<String> = study.distances.iter().map(|x| format!("{x:.4e}")).collect();
    println!("RMS distance between consecutive levels: [{}]", d.join(", "));
    println!("strictly decreasing: {}", study.strictly_decreasing);

    let grid = RunConfig::from_value(
        v,
        &[
            r#"study={"kind":"grid_refine","levels":[15,31,63]}"#.into(),
            "time.T=0.1".into(),
            "time.dt=1e-4".into(),
            "time.stride=1000".into(),
        ],
    )?;
    let study = convergence_study(&grid, 1)?;
    for h in study.heat.iter().flatten() {
        println!(
            "n = {:>3}: e1 decay {:.6e} vs exact {:.6e}, relative error {:.3e}",
            h.n, h.measured, h.exact, h.relative_error
        );
    }
    Ok(())
}

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    run_with(2)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_with(8)
}
