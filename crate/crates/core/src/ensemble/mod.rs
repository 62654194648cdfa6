//! Monte Carlo ensembles, refinement studies and their on-disk formats.
//!
//! Trajectory `i` is driven by [`trajectory_seed`]`(master_seed, i)`, so its
//! path does not depend on the worker count, on scheduling, or on how many
//! other trajectories are run. Results are gathered in trajectory order.

mod persist;
mod study;

pub use persist::{load, load_run, persist, CSV_HEADER, REPORT_FILE, TIMESERIES_FILE};
pub use study::{convergence_study, HeatDecay, LevelSummary, StudyReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brownian::trajectory_seed;
use crate::config::RunConfig;
use crate::diagnostics::{exp_moment_estimate, ExpMoment, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::solver::{run_trajectory, RunOptions};

pub const SCHEMA_VERSION: &str = "1";

/// Exponents of the reported exponential moments.
pub const MOMENT_ORDERS: [f64; 3] = [1.0, 2.0, 4.0];

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T, F>(workers: usize, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    if workers == 0 {
        return Err(Error::InvalidParameter("workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Maps `0..n` in parallel, keeping index order; the first failing index wins.
pub(crate) fn par_map_ordered<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let results: Vec<Result<T>> = (0..n).into_par_iter().map(f).collect();
    results.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub trajectory_id: u64,
    pub seed: u64,
    pub delta_min: f64,
    #[serde(with = "crate::serde_ext")]
    pub max_g_mass_s0: f64,
    #[serde(with = "crate::serde_ext")]
    pub max_g_mass_s0p1: f64,
    pub max_holder_alpha: f64,
    #[serde(with = "crate::serde_ext")]
    pub g_mass_s0p1_time_integral: f64,
    pub clamp_events: u64,
    pub snapshots: usize,
}

impl TrajectorySummary {
    pub fn from_record(r: &TrajectoryRecord) -> Self {
        Self {
            trajectory_id: r.trajectory_id,
            seed: r.seed,
            delta_min: r.delta_min,
            max_g_mass_s0: r.max_g_mass_s0(),
            max_g_mass_s0p1: r.max_g_mass_s0p1(),
            max_holder_alpha: r.max_holder(),
            g_mass_s0p1_time_integral: r.g_mass_s0p1_time_integral,
            clamp_events: r.clamp_events,
            snapshots: r.snapshots.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("quantiles of an empty sample".into()));
        }
        let mut s = values.to_vec();
        s.sort_by(f64::total_cmp);
        Ok(Self {
            min: s[0],
            q05: quantile(&s, 0.05),
            q25: quantile(&s, 0.25),
            median: quantile(&s, 0.5),
            q75: quantile(&s, 0.75),
            q95: quantile(&s, 0.95),
            max: s[s.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n_traj: usize,
    pub delta_min: Quantiles,
    /// Estimates of `E exp(q ∫_0^T ∫_O G_{s0+1}(u))`.
    pub exp_moments: Vec<ExpMoment>,
    /// Fraction of trajectories with `delta_min >= delta0 / 2`.
    pub fraction_half_delta0: f64,
    pub all_separated: bool,
    #[serde(with = "crate::serde_ext")]
    pub max_g_mass_s0: f64,
    pub total_clamp_events: u64,
}

impl Aggregate {
    /// Everything here is a function of the summaries and `delta0`.
    pub fn from_summaries(s: &[TrajectorySummary], delta0: f64) -> Result<Self> {
        let deltas: Vec<f64> = s.iter().map(|t| t.delta_min).collect();
        let integrals: Vec<f64> = s.iter().map(|t| t.g_mass_s0p1_time_integral).collect();
        let exp_moments = if integrals.iter().all(|v| v.is_finite()) {
            MOMENT_ORDERS
                .iter()
                .map(|&q| exp_moment_estimate(&integrals, q))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let half = s.iter().filter(|t| t.delta_min >= 0.5 * delta0).count();
        Ok(Self {
            n_traj: s.len(),
            delta_min: Quantiles::of(&deltas)?,
            exp_moments,
            fraction_half_delta0: half as f64 / s.len() as f64,
            all_separated: deltas.iter().all(|&d| d > 0.0),
            max_g_mass_s0: s.iter().map(|t| t.max_g_mass_s0).fold(0.0, f64::max),
            total_clamp_events: s.iter().map(|t| t.clamp_events).sum(),
        })
    }

    pub fn exp_moment(&self, q: f64) -> Option<&ExpMoment> {
        self.exp_moments.iter().find(|m| m.q == q)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleReport {
    pub schema_version: String,
    pub config: RunConfig,
    pub config_fingerprint: String,
    pub hypotheses_unverified: bool,
    pub per_trajectory: Vec<TrajectorySummary>,
    pub aggregate: Aggregate,
}

/// A report together with the full time series it summarises.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleRun {
    pub report: EnsembleReport,
    pub records: Vec<TrajectoryRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnsembleOptions {
    pub workers: usize,
    pub hypotheses_unverified: bool,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            hypotheses_unverified: false,
        }
    }
}

/// Run options of trajectory `id` under `cfg`.
pub fn trajectory_options(cfg: &RunConfig, id: u64, fingerprint: &str) -> Result<RunOptions> {
    let grid = cfg.grid()?;
    Ok(RunOptions {
        trajectory_id: id,
        seed: trajectory_seed(cfg.ensemble.master_seed, id),
        final_time: cfg.time.final_time,
        stride: cfg.time.stride,
        delta0: Some(cfg.init.delta0),
        alpha: cfg.alpha(),
        holder_range: cfg.holder_range(&grid),
        brownian_ratio: 1,
        fingerprint: fingerprint.to_string(),
    })
}

/// Runs `cfg.ensemble.n_traj` trajectories on `opts.workers` threads.
pub fn run_ensemble(cfg: &RunConfig, opts: EnsembleOptions) -> Result<EnsembleRun> {
    cfg.validate()?;
    let model = cfg.model()?;
    let scheme = cfg.scheme_config();
    let u0 = cfg.initial_field(&model.spectrum)?;
    let fingerprint = cfg.fingerprint();
    let n = cfg.ensemble.n_traj;
    let records = with_workers(opts.workers, || {
        par_map_ordered(n, |i| {
            let o = trajectory_options(cfg, i as u64, &fingerprint)?;
            run_trajectory(&u0, &scheme, &model, &o)
                .map(|r| r.record)
                .map_err(|e| Error::Trajectory {
                    id: o.trajectory_id,
                    seed: o.seed,
                    source: Box::new(e),
                })
        })
    })??;
    let per_trajectory: Vec<TrajectorySummary> = records.iter().map(TrajectorySummary::from_record).collect();
    let aggregate = Aggregate::from_summaries(&per_trajectory, cfg.init.delta0)?;
    Ok(EnsembleRun {
        report: EnsembleReport {
            schema_version: SCHEMA_VERSION.to_string(),
            config: cfg.clone(),
            config_fingerprint: fingerprint,
            hypotheses_unverified: opts.hypotheses_unverified,
            per_trajectory,
            aggregate,
        },
        records,
    })
}
