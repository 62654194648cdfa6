//! Refinement studies on coupled sample paths.
//!
//! Every level of a study reuses the same trajectory seeds. In `dt_refine`
//! each level draws its increments as ordered sums of the finest level's
//! increments, so all levels see the same Brownian path. The reported
//! distance is the root mean square over trajectories of the L² distance at
//! the final time.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{par_map_ordered, trajectory_options, with_workers, SCHEMA_VERSION};
use crate::config::{RunConfig, StudyKind};
use crate::discretization::{l2_norm, Field, Grid, Spectrum};
use crate::error::{Error, Result};
use crate::noise::NoiseFamily;
use crate::solver::{run_trajectory, Model, SchemeConfig, SchemeKind, TrajectoryRun};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: f64,
    pub mean_delta_min: f64,
    pub min_delta_min: f64,
    #[serde(with = "crate::serde_ext")]
    pub mean_max_g_mass_s0: f64,
    pub clamp_events: u64,
}

/// First-mode decay of the pure heat equation on one grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatDecay {
    pub n: usize,
    /// `⟨u(T), e_1⟩ / ⟨u(0), e_1⟩`.
    pub measured: f64,
    /// `exp(-d π² T / L²)`.
    pub exact: f64,
    pub relative_error: f64,
    /// Backward Euler with the continuous eigenvalue, `(1 + dt λ_1)^(-T/dt)`.
    pub time_discrete: f64,
    /// Error against `time_discrete`: the spatial part of the error.
    pub spatial_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: String,
    pub kind: StudyKind,
    pub levels: Vec<f64>,
    pub config: RunConfig,
    pub config_fingerprint: String,
    /// `dt_refine`: between consecutive levels. `lambda_refine`: to the
    /// `split_implicit` reference. `noise_scale`: to the noise-free run.
    /// `grid_refine`: spatial error of the first-mode decay.
    pub distances: Vec<f64>,
    pub strictly_decreasing: bool,
    pub per_level: Vec<LevelSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat: Option<Vec<HeatDecay>>,
}

struct Setup {
    model: Model,
    scheme: SchemeConfig,
    u0: Field,
    ratio: u64,
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn level_summary(level: f64, runs: &[&TrajectoryRun]) -> LevelSummary {
    let n = runs.len() as f64;
    LevelSummary {
        level,
        mean_delta_min: runs.iter().map(|r| r.record.delta_min).sum::<f64>() / n,
        min_delta_min: runs.iter().map(|r| r.record.delta_min).fold(f64::INFINITY, f64::min),
        mean_max_g_mass_s0: runs.iter().map(|r| r.record.max_g_mass_s0()).sum::<f64>() / n,
        clamp_events: runs.iter().map(|r| r.record.clamp_events).sum(),
    }
}

/// `sqrt(mean_i ‖a_i - b_i‖²)`.
fn rms_distance(a: &[&TrajectoryRun], b: &[&TrajectoryRun]) -> Result<f64> {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = l2_norm(&x.final_state.axpy(-1.0, &y.final_state)?);
        acc += d * d;
    }
    Ok((acc / a.len() as f64).sqrt())
}

fn base_model(cfg: &RunConfig, grid: Grid, noise: NoiseFamily) -> Result<Model> {
    let p = cfg.log_potential()?;
    Ok(Model::new(p, cfg.constants(&p)?, noise, Arc::new(Spectrum::new(grid))))
}

fn setups(cfg: &RunConfig, kind: StudyKind, levels: &[f64]) -> Result<(Vec<Setup>, Option<Setup>)> {
    let grid = cfg.grid()?;
    let scheme = cfg.scheme_config();
    let model = cfg.model()?;
    let u0 = cfg.initial_field(&model.spectrum)?;
    match kind {
        StudyKind::DtRefine => {
            let finest = levels.iter().cloned().fold(f64::INFINITY, f64::min);
            let s = levels
                .iter()
                .map(|&dt| Setup {
                    model: model.clone(),
                    scheme: SchemeConfig { dt, ..scheme },
                    u0: u0.clone(),
                    ratio: (dt / finest).round() as u64,
                })
                .collect();
            Ok((s, None))
        }
        StudyKind::LambdaRefine => {
            let s = levels
                .iter()
                .map(|&lambda| Setup {
                    model: model.clone(),
                    scheme: SchemeConfig {
                        kind: SchemeKind::YosidaGalerkin,
                        lambda,
                        ..scheme
                    },
                    u0: u0.clone(),
                    ratio: 1,
                })
                .collect();
            let reference = Setup {
                model,
                scheme: SchemeConfig {
                    kind: SchemeKind::SplitImplicit,
                    ..scheme
                },
                u0,
                ratio: 1,
            };
            Ok((s, Some(reference)))
        }
        StudyKind::NoiseScale => {
            let n = &cfg.noise;
            let with_sigma = |sigma: f64| -> Result<Setup> {
                Ok(Setup {
                    model: base_model(cfg, grid, NoiseFamily::polynomial(n.s0, n.modes, sigma, n.gamma)?)?,
                    scheme,
                    u0: u0.clone(),
                    ratio: 1,
                })
            };
            let s = levels.iter().map(|&sigma| with_sigma(sigma)).collect::<Result<Vec<_>>>()?;
            Ok((s, Some(with_sigma(0.0)?)))
        }
        StudyKind::GridRefine => {
            let n = &cfg.noise;
            let s = levels
                .iter()
                .map(|&nl| -> Result<Setup> {
                    let g = Grid::new(grid.dim(), nl as usize, grid.length())?;
                    let model = base_model(cfg, g, NoiseFamily::polynomial(n.s0, n.modes, 0.0, n.gamma)?)?;
                    let e = model.spectrum.eigenvector(0)?;
                    let u0 = e.scaled((1.0 - cfg.init.delta0) / e.sup());
                    Ok(Setup {
                        model,
                        scheme: SchemeConfig {
                            kind: SchemeKind::SplitImplicit,
                            reaction: false,
                            n_modes: None,
                            ..scheme
                        },
                        u0,
                        ratio: 1,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((s, None))
        }
    }
}

fn heat_decay(cfg: &RunConfig, setup: &Setup, run: &TrajectoryRun) -> Result<HeatDecay> {
    let spec = &setup.model.spectrum;
    let e1 = spec.eigenvector(0)?;
    let measured = run.final_state.dot(&e1)? / setup.u0.dot(&e1)?;
    let t = cfg.time.final_time;
    let dt = setup.scheme.dt;
    let l = cfg.domain.length;
    let lambda1 = cfg.domain.d as f64 * std::f64::consts::PI.powi(2) / (l * l);
    let exact = (-lambda1 * t).exp();
    let steps = (t / dt).round();
    let time_discrete = (-steps * (lambda1 * dt).ln_1p()).exp();
    Ok(HeatDecay {
        n: spec.grid().n(),
        measured,
        exact,
        relative_error: (measured - exact).abs() / exact,
        time_discrete,
        spatial_error: (measured - time_discrete).abs() / time_discrete,
    })
}

/// Runs the study named in `cfg.study` on `workers` threads.
pub fn convergence_study(cfg: &RunConfig, workers: usize) -> Result<StudyReport> {
    cfg.validate()?;
    let study = cfg
        .study
        .as_ref()
        .ok_or_else(|| Error::Config("convergence study needs a `study` section".into()))?;
    let (levels, reference) = setups(cfg, study.kind, &study.levels)?;
    let all: Vec<&Setup> = levels.iter().chain(reference.as_ref()).collect();
    let n_traj = match study.kind {
        StudyKind::GridRefine => 1,
        _ => cfg.ensemble.n_traj,
    };
    let fingerprint = cfg.fingerprint();
    let n_setups = all.len();
    let runs = with_workers(workers, || {
        par_map_ordered(n_traj * n_setups, |job| {
            let (i, s) = (job / n_setups, all[job % n_setups]);
            let mut o = trajectory_options(cfg, i as u64, &fingerprint)?;
            o.brownian_ratio = s.ratio;
            o.holder_range = cfg.holder_range(s.model.spectrum.grid());
            if study.kind == StudyKind::GridRefine {
                o.delta0 = None;
            }
            run_trajectory(&s.u0, &s.scheme, &s.model, &o).map_err(|e| Error::Trajectory {
                id: o.trajectory_id,
                seed: o.seed,
                source: Box::new(e),
            })
        })
    })??;
    let of_setup = |k: usize| -> Vec<&TrajectoryRun> { (0..n_traj).map(|i| &runs[i * n_setups + k]).collect() };

    let per_level: Vec<LevelSummary> = study
        .levels
        .iter()
        .enumerate()
        .map(|(k, &l)| level_summary(l, &of_setup(k)))
        .collect();
    let mut heat = None;
    let distances = match study.kind {
        StudyKind::DtRefine => (0..levels.len() - 1)
            .map(|k| rms_distance(&of_setup(k), &of_setup(k + 1)))
            .collect::<Result<Vec<_>>>()?,
        StudyKind::LambdaRefine | StudyKind::NoiseScale => {
            let r = of_setup(levels.len());
            (0..levels.len())
                .map(|k| rms_distance(&of_setup(k), &r))
                .collect::<Result<Vec<_>>>()?
        }
        StudyKind::GridRefine => {
            let h = levels
                .iter()
                .enumerate()
                .map(|(k, s)| heat_decay(cfg, s, of_setup(k)[0]))
                .collect::<Result<Vec<_>>>()?;
            let d = h.iter().map(|x| x.spatial_error).collect();
            heat = Some(h);
            d
        }
    };
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION.to_string(),
        kind: study.kind,
        levels: study.levels.clone(),
        config: cfg.clone(),
        config_fingerprint: fingerprint,
        strictly_decreasing: strictly_decreasing(&distances),
        distances,
        per_level,
        heat,
    })
}
