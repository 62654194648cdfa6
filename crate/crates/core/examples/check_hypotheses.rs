// Hypothesis reports for a few parameter choices.

use stochastic_allen_cahn::cli::hypothesis_report;
use stochastic_allen_cahn::config::RunConfig;

const CONFIG: &str = include_str!("configs/ensemble_1d.json");

pub fn run() -> Result<(), Box<dyn std::error::Error>> {
    let cases: [&[&str]; 4] = [
        &[],
        &["domain.d=2", "domain.n=15", "noise.s0=1"],
        &["domain.d=3", "domain.n=7", "noise.s0=6"],
        &["domain.d=3", "domain.n=7", "noise.s0=7"],
    ];
    for overrides in cases {
        let v: serde_json::Value = serde_json::from_str(CONFIG)?;
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        let cfg = RunConfig::from_value(v, &o)?;
        let report = hypothesis_report(&cfg)?;
        println!("overrides {overrides:?}: {}", if report.passed() { "pass" } else { "fail" });
        for c in report.failures() {
            println!("  failed: {} ({})", c.name, c.detail);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run()
}
