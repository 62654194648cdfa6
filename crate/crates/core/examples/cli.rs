// Drives the `sac` command line in-process: check, simulate, certify.

use stochastic_allen_cahn::cli::main_from;

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("sac-cli-example");
    std::fs::create_dir_all(&dir)?;
    let mut v: serde_json::Value = serde_json::from_str(include_str!("configs/ensemble_1d.json"))?;
    v["output"]["dir"] = serde_json::json!(dir.join("out"));
    v["time"]["T"] = serde_json::json!(0.1);
    let cfg = dir.join("run.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(&v)?)?;
    let cfg = cfg.to_string_lossy().into_owned();

    for args in [
        vec!["sac", "check-hypotheses", "--config", &cfg],
        vec!["sac", "simulate", "--config", &cfg, "--set", "noise.sigma0=0.3"],
        vec!["sac", "certify", "--config", &cfg],
    ] {
        let code = main_from(&args);
        println!("{} -> exit {code}", args[1]);
        if code != 0 {
            return Err(format!("{} failed with {code}", args[1]).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
