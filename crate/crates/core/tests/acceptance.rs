//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use stochastic_allen_cahn::brownian::trajectory_seed;
use stochastic_allen_cahn::cli::hypothesis_report;
use stochastic_allen_cahn::config::RunConfig;
use stochastic_allen_cahn::diagnostics::{
    certificate_audit, energy, exp_moment_estimate, separation_certificate, CertificateInput,
};
use stochastic_allen_cahn::discretization::l2_norm;
use stochastic_allen_cahn::ensemble::{
    convergence_study, persist, run_ensemble, EnsembleOptions, EnsembleRun, REPORT_FILE, TIMESERIES_FILE,
};
use stochastic_allen_cahn::potential::{resolvent, LogPotential, PotentialConstants, ResolventConfig};
use stochastic_allen_cahn::solver::{run_trajectory, step_split_implicit, SolverState};
use stochastic_allen_cahn::brownian::BrownianPath;

type Outcome = Result<String, String>;

fn base_config() -> serde_json::Value {
    json!({
        "domain": {"d": 1, "n": 63, "L": 1.0},
        "time": {"T": 1.0, "dt": 1e-3, "stride": 10},
        "potential": {"theta": 1.0, "theta0": 2.0},
        "noise": {"s0": 3, "K": 16, "sigma0": 0.1, "gamma": 1.0},
        "scheme": {"kind": "split_implicit", "lambda": 1e-2, "n_modes": null, "newton_tol": 1e-12},
        "ensemble": {"master_seed": 20240601, "n_traj": 100},
        "init": {"kind": "eigen_bump", "amplitude": 1.0, "delta0": 0.5},
        "output": {"dir": "out"}
    })
}

fn config(overrides: &[&str]) -> RunConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::from_value(base_config(), &o).expect("valid acceptance config")
}

fn ensemble_1d() -> RunConfig {
    config(&[])
}

fn ensemble_2d() -> RunConfig {
    config(&["domain.d=2", "domain.n=31", "ensemble.n_traj=20", "time.stride=50"])
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let e = start.elapsed();
    if e <= budget {
        Ok(())
    } else {
        Err(format!("runtime {e:?} exceeds {budget:?}"))
    }
}

fn c1_resolvent() -> Outcome {
    let start = Instant::now();
    let p = LogPotential::new(1.0, 2.0).unwrap();
    let c = PotentialConstants::natural(&p);
    let cfg = ResolventConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst_res: f64 = 0.0;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..1000 {
        let lambda = 10f64.powf(rng.random_range(-3.0..0.0));
        let x1: f64 = rng.random_range(-5.0..5.0);
        let x2: f64 = rng.random_range(-5.0..5.0);
        let j1 = resolvent(&p, &c, lambda, x1, &cfg).map_err(|e| e.to_string())?;
        let j2 = resolvent(&p, &c, lambda, x2, &cfg).map_err(|e| e.to_string())?;
        for (j, x) in [(j1, x1), (j2, x2)] {
            let f = p.derivative_from_atanh(j.value, j.atanh);
            let res = (j.value + lambda * (f + c.c_f * j.value) - x).abs();
            worst_res = worst_res.max(res);
        }
        if x1 != x2 {
            worst_ratio = worst_ratio.max((j1.value - j2.value).abs() / (x1 - x2).abs());
        }
    }
    within(Duration::from_secs(1), start)?;
    let msg = format!("max residual {worst_res:.2e} (<= 1e-10), max |ΔJ|/|Δx| {worst_ratio:.6} (<= 1)");
    if worst_res <= 1e-10 && worst_ratio <= 1.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c2_yosida() -> Outcome {
    let start = Instant::now();
    let p = LogPotential::new(1.0, 2.0).unwrap();
    let c = PotentialConstants::natural(&p);
    let cfg = ResolventConfig::default();
    let mut worst_final: f64 = 0.0;
    for x in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        let exact = p.derivative(x).unwrap();
        let gaps: Vec<f64> = (1..=6)
            .map(|k| {
                let lambda = 10f64.powi(-k);
                let r = resolvent(&p, &c, lambda, x, &cfg).unwrap();
                (p.derivative_from_atanh(r.value, r.atanh) - exact).abs()
            })
            .collect();
        let identically_zero = gaps.iter().all(|&g| g == 0.0);
        let decreasing = gaps.windows(2).all(|w| w[1] < w[0]);
        if !(identically_zero || decreasing) {
            return Err(format!("x = {x}: gaps {gaps:?} not strictly decreasing"));
        }
        worst_final = worst_final.max(gaps[5]);
    }
    within(Duration::from_secs(1), start)?;
    let msg = format!("gap at lambda = 1e-6: {worst_final:.2e} (<= 1e-4)");
    if worst_final <= 1e-4 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_hypotheses() -> Outcome {
    let start = Instant::now();
    let good = hypothesis_report(&config(&[])).map_err(|e| e.to_string())?;
    if !good.passed() {
        return Err(format!("d = 1, s0 = 3 fails:\n{good}"));
    }
    let bad = hypothesis_report(&config(&["domain.d=3", "domain.n=7", "noise.s0=6"])).map_err(|e| e.to_string())?;
    let fails: Vec<String> = bad.failures().map(|c| c.name.clone()).collect();
    if fails != ["separation: s0 > 6 (d = 3)"] {
        return Err(format!("d = 3, s0 = 6 failures {fails:?}"));
    }
    within(Duration::from_secs(5), start)?;
    Ok(format!("d=1,s0=3 passes {} checks; d=3,s0=6 fails only {:?}", good.checks.len(), fails[0]))
}

fn c4_energy() -> Outcome {
    let start = Instant::now();
    let cfg = config(&["noise.sigma0=0", "init.delta0=0.1"]);
    let model = cfg.model().unwrap();
    let scheme = cfg.scheme_config();
    let u0 = cfg.initial_field(&model.spectrum).unwrap();
    let brownian = BrownianPath::new(1, model.noise.modes(), scheme.dt, 1).unwrap();
    let mut state = SolverState::new(u0, brownian);
    let mut e = energy(&state.u, &model.potential).unwrap();
    let e0 = e;
    let mut worst_increase = f64::NEG_INFINITY;
    for _ in 0..1000 {
        step_split_implicit(&mut state, &scheme, &model).map_err(|e| e.to_string())?;
        let e1 = energy(&state.u, &model.potential).map_err(|e| e.to_string())?;
        worst_increase = worst_increase.max(e1 - e);
        e = e1;
    }
    within(Duration::from_secs(10), start)?;
    let msg = format!("E: {e0:.6} -> {e:.6}, max per-step increase {worst_increase:.2e} (<= 1e-10)");
    if worst_increase <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

struct Shared {
    one: EnsembleRun,
    two: EnsembleRun,
    elapsed: Duration,
}

fn c5_barrier(s: &Shared) -> Outcome {
    if s.elapsed > Duration::from_secs(300) {
        return Err(format!("runtime {:?} exceeds 5 min", s.elapsed));
    }
    for run in [&s.one, &s.two] {
        for t in &run.report.per_trajectory {
            if !(t.delta_min > 0.0) || t.clamp_events != 0 {
                return Err(format!(
                    "trajectory {} (d = {}): delta_min {}, clamp events {}",
                    t.trajectory_id, run.report.config.domain.d, t.delta_min, t.clamp_events
                ));
            }
        }
    }
    Ok(format!(
        "1D: 100 paths, min delta_min {:.4}; 2D: 20 paths, min delta_min {:.4}; no clamps; {:.1?}",
        s.one.report.aggregate.delta_min.min, s.two.report.aggregate.delta_min.min, s.elapsed
    ))
}

fn c6_moments(s: &Shared) -> Outcome {
    let mut parts = Vec::new();
    for run in [&s.one, &s.two] {
        if let Some(t) = run.report.per_trajectory.iter().find(|t| !t.max_g_mass_s0.is_finite()) {
            return Err(format!("trajectory {} has infinite G mass", t.trajectory_id));
        }
        let values: Vec<f64> = run.records.iter().map(|r| r.g_mass_s0p1_time_integral).collect();
        for q in [1.0, 2.0] {
            let m = exp_moment_estimate(&values, q).map_err(|e| e.to_string())?;
            let rel = m.stderr / m.mean;
            if !m.mean.is_finite() || m.overflow || !(rel < 0.5) {
                return Err(format!("q = {q}: mean {}, stderr/mean {rel}", m.mean));
            }
            parts.push(format!("d{} q{q}: {:.4} ± {:.1e}", run.report.config.domain.d, m.mean, m.stderr));
        }
    }
    Ok(parts.join(", "))
}

fn c7_certificate(s: &Shared) -> Outcome {
    let start = Instant::now();
    let mut snapshots = 0;
    let mut min_slack = f64::INFINITY;
    for run in [&s.one, &s.two] {
        for r in &run.records {
            let a = certificate_audit(r).map_err(|e| e.to_string())?;
            if !a.passed {
                return Err(format!("audit failed for trajectory {}", r.trajectory_id));
            }
            snapshots += a.entries.len();
            min_slack = a.entries.iter().map(|e| e.slack).fold(min_slack, f64::min);
        }
    }
    let closed = CertificateInput {
        mass: 8.0,
        holder: 0.0,
        alpha: 0.5,
        s0: 3,
        dim: 1,
        side: 1.0,
    };
    let eps = separation_certificate(&closed).map_err(|e| e.to_string())?;
    if (eps - 0.5).abs() > 1e-8 {
        return Err(format!("closed form: eps* = {eps}, expected 0.5"));
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("{snapshots} snapshots pass (min slack {min_slack:.3e}); closed form eps* = {eps:.12}"))
}

fn c8_refinement() -> Outcome {
    let start = Instant::now();
    let dt_cfg = config(&[
        "ensemble.n_traj=8",
        "time.dt=4e-3",
        "time.stride=250",
        r#"study={"kind": "dt_refine", "levels": [4e-3, 2e-3, 1e-3, 5e-4]}"#,
    ]);
    let dt = convergence_study(&dt_cfg, 4).map_err(|e| e.to_string())?;
    if !dt.strictly_decreasing {
        return Err(format!("dt_refine distances {:?}", dt.distances));
    }
    let lambda_cfg = config(&[
        "ensemble.n_traj=4",
        "time.T=0.1",
        "time.dt=1e-4",
        "time.stride=1000",
        r#"study={"kind": "lambda_refine", "levels": [1e-1, 1e-2, 1e-3]}"#,
    ]);
    let lam = convergence_study(&lambda_cfg, 4).map_err(|e| e.to_string())?;
    if !lam.strictly_decreasing {
        return Err(format!("lambda_refine distances {:?}", lam.distances));
    }
    let grid_cfg = config(&[
        "ensemble.n_traj=1",
        "time.dt=1e-4",
        "time.stride=10000",
        r#"study={"kind": "grid_refine", "levels": [31, 63, 127]}"#,
    ]);
    let grid = convergence_study(&grid_cfg, 3).map_err(|e| e.to_string())?;
    let heat = grid.heat.as_ref().ok_or("missing heat decay data")?;
    let fine = heat.last().unwrap();
    if !(fine.n == 127 && fine.relative_error < 0.02) {
        return Err(format!("n = {}: decay error {}", fine.n, fine.relative_error));
    }
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "dt: {:.2e}; lambda: {:.2e}; n=127 decay error {:.3}%",
        Sci(&dt.distances),
        Sci(&lam.distances),
        100.0 * fine.relative_error
    ))
}

struct Sci<'a>(&'a [f64]);

impl std::fmt::LowerExp for Sci<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|v| match f.precision() {
                Some(p) => format!("{v:.p$e}"),
                None => format!("{v:e}"),
            })
            .collect();
        write!(f, "[{}]", parts.join(" > "))
    }
}

fn files(dir: &Path) -> (Vec<u8>, Vec<u8>) {
    (
        std::fs::read(dir.join(REPORT_FILE)).unwrap(),
        std::fs::read(dir.join(TIMESERIES_FILE)).unwrap(),
    )
}

fn c9_determinism(s: &Shared) -> Outcome {
    let start = Instant::now();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    for (name, cfg, first) in [("1d", ensemble_1d(), &s.one), ("2d", ensemble_2d(), &s.two)] {
        let base = tmp.path().join(format!("{name}-base"));
        persist(first, &base).map_err(|e| e.to_string())?;
        let reference = files(&base);
        for workers in [1, 4, 8] {
            let run = run_ensemble(&cfg, EnsembleOptions { workers, hypotheses_unverified: false })
                .map_err(|e| e.to_string())?;
            let dir = tmp.path().join(format!("{name}-{workers}"));
            persist(&run, &dir).map_err(|e| e.to_string())?;
            if files(&dir) != reference {
                return Err(format!("{name} ensemble differs with {workers} workers"));
            }
        }
    }
    within(Duration::from_secs(900), start)?;
    Ok(format!("1D and 2D report.json and timeseries.csv byte-identical for 1/4/8 workers ({:.1?})", start.elapsed()))
}

fn c10_continuity() -> Outcome {
    let start = Instant::now();
    let cfg = config(&["time.stride=1000"]);
    let model = cfg.model().unwrap();
    let scheme = cfg.scheme_config();
    let u0 = cfg.initial_field(&model.spectrum).unwrap();
    let b = model.spectrum.eigenvector(0).unwrap();
    let b = b.scaled(1.0 / b.sup());
    let mut ratios = Vec::new();
    for id in 0..3u64 {
        let mut o = stochastic_allen_cahn::solver::RunOptions::new(1.0, trajectory_seed(7, id));
        o.stride = 1000;
        let base = run_trajectory(&u0, &scheme, &model, &o).map_err(|e| e.to_string())?;
        let mut r = Vec::new();
        for eps in [1e-2, 1e-3, 1e-4] {
            let pert = run_trajectory(&u0.axpy(eps, &b).unwrap(), &scheme, &model, &o).map_err(|e| e.to_string())?;
            r.push(l2_norm(&pert.final_state.axpy(-1.0, &base.final_state).unwrap()) / eps);
        }
        let hi = r.iter().cloned().fold(0.0, f64::max);
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(lo > 0.0 && hi / lo <= 2.0) {
            return Err(format!("path {id}: ratios {r:?}"));
        }
        ratios.push(r);
    }
    within(Duration::from_secs(60), start)?;
    let shown: Vec<String> = ratios
        .iter()
        .map(|r| r.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join("/"))
        .collect();
    Ok(format!("ratios per path [{}] agree within factor 2", shown.join(", ")))
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "resolvent suite", c1_resolvent()));
    results.push((2, "Yosida consistency", c2_yosida()));
    results.push((3, "hypothesis checker", c3_hypotheses()));
    results.push((4, "energy dissipation", c4_energy()));

    let start = Instant::now();
    let one = run_ensemble(&ensemble_1d(), EnsembleOptions { workers: 4, hypotheses_unverified: false });
    let two = run_ensemble(&ensemble_2d(), EnsembleOptions { workers: 4, hypotheses_unverified: false });
    match (one, two) {
        (Ok(one), Ok(two)) => {
            let shared = Shared {
                one,
                two,
                elapsed: start.elapsed(),
            };
            results.push((5, "barrier invariance", c5_barrier(&shared)));
            results.push((6, "G-mass and exponential moments", c6_moments(&shared)));
            results.push((7, "certificate audit", c7_certificate(&shared)));
            results.push((8, "refinement studies", c8_refinement()));
            results.push((9, "determinism", c9_determinism(&shared)));
        }
        (a, b) => {
            let e = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
            for (k, name) in [(5, "barrier invariance"), (6, "G-mass and exponential moments"), (7, "certificate audit"), (9, "determinism")] {
                results.push((k, name, Err(format!("ensemble failed: {e}"))));
            }
            results.push((8, "refinement studies", c8_refinement()));
        }
    }
    results.push((10, "solution-map continuity", c10_continuity()));
    results.sort_by_key(|r| r.0);

    let mut failed = 0;
    for (k, name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("criterion {k:>2} PASS  {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name}: {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
