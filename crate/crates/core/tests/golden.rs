//! Seed-locked regression values.

use serde_json::json;

use stochastic_allen_cahn::brownian::trajectory_seed;
use stochastic_allen_cahn::config::RunConfig;
use stochastic_allen_cahn::discretization::l2_norm;
use stochastic_allen_cahn::ensemble::{run_ensemble, EnsembleOptions};
use stochastic_allen_cahn::solver::{run_trajectory, RunOptions, SchemeConfig};

fn config(overrides: &[&str]) -> RunConfig {
    let v = json!({
        "domain": {"d": 1, "n": 31, "L": 1.0},
        "time": {"T": 0.1, "dt": 1e-3, "stride": 10},
        "potential": {"theta": 1.0, "theta0": 2.0},
        "noise": {"s0": 3, "K": 8, "sigma0": 0.5, "gamma": 1.0},
        "scheme": {"kind": "split_implicit", "lambda": 1e-2, "n_modes": null, "newton_tol": 1e-12},
        "ensemble": {"master_seed": 99, "n_traj": 4},
        "init": {"kind": "eigen_bump", "amplitude": 1.0, "delta0": 0.5},
        "output": {"dir": "out"}
    });
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::from_value(v, &o).unwrap()
}

#[test]
fn splitmix_reference_outputs() {
    // first outputs of the reference splitmix64 generator seeded with 0
    assert_eq!(trajectory_seed(0, 0), 0xE220_A839_7B1D_CDAF);
    assert_eq!(trajectory_seed(0, 1), 0x6E78_9E6A_A1B9_65F4);
    assert_eq!(trajectory_seed(0, 2), 0x06C4_5D18_8009_454F);
}

#[test]
fn noise_off_matches_fine_reference() {
    let cfg = config(&["noise.sigma0=0", "init.delta0=0.5"]);
    let model = cfg.model().unwrap();
    let u0 = cfg.initial_field(&model.spectrum).unwrap();
    let mut errors = Vec::new();
    let reference = {
        let mut o = RunOptions::new(0.1, 0);
        o.stride = 10_000;
        run_trajectory(&u0, &SchemeConfig::split_implicit(1e-5), &model, &o)
            .unwrap()
            .final_state
    };
    for dt in [4e-3, 2e-3, 1e-3] {
        let mut o = RunOptions::new(0.1, 0);
        o.stride = 1000;
        let u = run_trajectory(&u0, &SchemeConfig::split_implicit(dt), &model, &o)
            .unwrap()
            .final_state;
        errors.push(l2_norm(&u.axpy(-1.0, &reference).unwrap()));
    }
    for w in errors.windows(2) {
        let rate = w[0] / w[1];
        assert!(rate > 1.8 && rate < 2.2, "{errors:?}");
    }
}

#[test]
fn seed_locked_ensemble() {
    let run = run_ensemble(&config(&["noise.sigma0=3", "init.delta0=0.05"]), EnsembleOptions::default()).unwrap();
    let finals: Vec<f64> = run.records.iter().map(|r| r.snapshots.last().unwrap().delta).collect();
    let expected = [
        0.37394370001258437,
        0.46046367002909216,
        0.6183074924180613,
        0.6495257152665534,
    ];
    for (a, b) in finals.iter().zip(expected) {
        assert!((a - b).abs() <= 1e-9, "{finals:?}");
    }
    let q1 = run.report.aggregate.exp_moment(1.0).unwrap().mean;
    assert!((q1 / 22.577949430827868 - 1.0).abs() <= 1e-9, "{q1}");
    assert_eq!(
        run.report.config_fingerprint,
        "bc33be16871343013c10169dcdf9bc6c9c65d484f1ad04d09035e7b48e4e5a97"
    );
}
