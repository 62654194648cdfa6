//! Time stepping.
//!
//! [`SchemeKind::SplitImplicit`] is a Lie splitting
//!
//! 1. noise: `v = u + Σ_k h_k(u) Δβ_k`, clamped to `[-1 + ε_g, 1 - ε_g]`;
//! 2. diffusion: `w = (I - dt Δ_h)^{-1} v`;
//! 3. reaction: per node `y + dt θ atanh(y) = w + dt θ0 w`.
//!
//! Step 3 maps ℝ onto (-1, 1), so every state it produces is strictly inside
//! the barrier. It is solved as `tanh z + dt θ z = (1 + dt θ0) w`, `y = tanh z`.
//!
//! [`SchemeKind::YosidaGalerkin`] replaces `F'` by its Yosida approximation
//! `F'_λ = F' ∘ J_λ`, treats it explicitly, and projects drift and noise onto
//! the first `n_modes` eigenmodes:
//!
//! ```text
//! u ← (I - dt Δ_h)^{-1} [u + P_n(-dt F'_λ(u) + H(J_λ u) ΔW)].
//! ```
//!
//! Its states may leave (-1, 1).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::brownian::BrownianPath;
use crate::diagnostics::{energy, g_mass, separation_layer, Snapshot, TrajectoryRecord};
use crate::discretization::{norms, Field, HolderRange, Spectrum};
use crate::error::{Error, Result};
use crate::noise::{noise_increment_into, NoiseFamily};
use crate::potential::{resolvent, LogPotential, PotentialConstants, ResolventConfig};
use crate::roots::solve_tanh_linear;

/// Clamp margin of the noise substep.
pub const NOISE_GUARD: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    SplitImplicit,
    YosidaGalerkin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub kind: SchemeKind,
    /// Yosida parameter, `yosida_galerkin` only.
    pub lambda: f64,
    /// Galerkin cut; `None` keeps every mode.
    pub n_modes: Option<usize>,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// `false` switches the potential off (pure stochastic heat equation).
    pub reaction: bool,
}

impl SchemeConfig {
    pub fn split_implicit(dt: f64) -> Self {
        Self {
            dt,
            kind: SchemeKind::SplitImplicit,
            lambda: 1e-2,
            n_modes: None,
            newton_tol: 1e-12,
            max_newton: 200,
            reaction: true,
        }
    }

    pub fn yosida_galerkin(dt: f64, lambda: f64, n_modes: Option<usize>) -> Self {
        Self {
            kind: SchemeKind::YosidaGalerkin,
            lambda,
            n_modes,
            ..Self::split_implicit(dt)
        }
    }

    pub fn validate(&self, constants: &PotentialConstants) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol <= 1e-10) {
            return Err(Error::InvalidParameter(format!(
                "newton_tol = {} must be in (0, 1e-10]",
                self.newton_tol
            )));
        }
        if self.max_newton < 1 {
            return Err(Error::InvalidParameter("max_newton must be >= 1".into()));
        }
        if self.n_modes == Some(0) {
            return Err(Error::InvalidParameter("n_modes must be >= 1".into()));
        }
        if self.kind == SchemeKind::YosidaGalerkin {
            if !(self.lambda > 0.0 && self.lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "lambda = {} must be positive",
                    self.lambda
                )));
            }
            let product = self.dt * (constants.c_f + 1.0 / self.lambda);
            if !(product < 1.0) {
                return Err(Error::StabilityGuard {
                    dt: self.dt,
                    product,
                });
            }
        }
        Ok(())
    }

    fn resolvent_config(&self) -> ResolventConfig {
        ResolventConfig {
            tol: self.newton_tol,
            max_iter: self.max_newton.max(100),
        }
    }
}

/// Everything a step needs besides the state.
#[derive(Clone, Debug)]
pub struct Model {
    pub potential: LogPotential,
    pub constants: PotentialConstants,
    pub noise: NoiseFamily,
    pub spectrum: Arc<Spectrum>,
}

impl Model {
    pub fn new(
        potential: LogPotential,
        constants: PotentialConstants,
        noise: NoiseFamily,
        spectrum: Arc<Spectrum>,
    ) -> Self {
        Self {
            potential,
            constants,
            noise,
            spectrum,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub step: u64,
    pub u: Field,
    pub brownian: BrownianPath,
    pub clamp_events: u64,
    dw: Vec<f64>,
    scratch: Vec<f64>,
}

impl SolverState {
    pub fn new(u: Field, brownian: BrownianPath) -> Self {
        let n = u.len();
        let k = brownian.modes();
        Self {
            t: 0.0,
            step: 0,
            u,
            brownian,
            clamp_events: 0,
            dw: vec![0.0; k],
            scratch: vec![0.0; n],
        }
    }

    /// Increments used by the last step.
    pub fn last_increments(&self) -> &[f64] {
        &self.dw
    }
}

fn check_model(state: &SolverState, model: &Model) -> Result<()> {
    if state.u.grid() != model.spectrum.grid() {
        return Err(Error::InvalidParameter("state and spectrum live on different grids".into()));
    }
    if state.brownian.modes() != model.noise.modes() {
        return Err(Error::DimensionMismatch {
            expected: model.noise.modes(),
            found: state.brownian.modes(),
        });
    }
    Ok(())
}

/// One step of the barrier-preserving splitting.
pub fn step_split_implicit(state: &mut SolverState, cfg: &SchemeConfig, model: &Model) -> Result<()> {
    check_model(state, model)?;
    let dt = cfg.dt;
    state.brownian.next_increments(&mut state.dw)?;

    if !model.noise.is_zero() {
        noise_increment_into(&model.noise, state.u.values(), &state.dw, &mut state.scratch)?;
        let bound = 1.0 - NOISE_GUARD;
        for (u, du) in state.u.values_mut().iter_mut().zip(&state.scratch) {
            let v = *u + du;
            if v.abs() > bound {
                state.clamp_events += 1;
                *u = v.clamp(-bound, bound);
            } else {
                *u = v;
            }
        }
    }

    let w = model.spectrum.implicit_heat(state.u.values(), dt);

    let p = &model.potential;
    let values = state.u.values_mut();
    if cfg.reaction {
        let b = dt * p.theta();
        let scale = 1.0 + dt * p.theta0();
        for (u, wi) in values.iter_mut().zip(w) {
            let root = solve_tanh_linear(1.0, b, scale * wi, cfg.newton_tol, cfg.max_newton)?;
            *u = root.x.tanh();
        }
    } else {
        values.copy_from_slice(&w);
    }

    state.step += 1;
    state.t = state.step as f64 * dt;
    let sup = state.u.sup();
    if !(sup < 1.0) {
        return Err(Error::BarrierViolation {
            step: state.step,
            sup,
        });
    }
    Ok(())
}

/// One step of the Yosida-regularised Galerkin scheme.
pub fn step_yosida_galerkin(state: &mut SolverState, cfg: &SchemeConfig, model: &Model) -> Result<()> {
    check_model(state, model)?;
    let dt = cfg.dt;
    let spec = &model.spectrum;
    let n_modes = cfg.n_modes.unwrap_or(spec.grid().len());
    if n_modes > spec.grid().len() {
        return Err(Error::InvalidParameter(format!(
            "n_modes = {n_modes} exceeds the {} grid modes",
            spec.grid().len()
        )));
    }
    state.brownian.next_increments(&mut state.dw)?;
    let drive: f64 = model
        .noise
        .coefficients()
        .iter()
        .zip(&state.dw)
        .map(|(s, w)| s * w)
        .sum();
    let rcfg = cfg.resolvent_config();
    let p = &model.potential;
    for (e, &u) in state.scratch.iter_mut().zip(state.u.values()) {
        let j = resolvent(p, &model.constants, cfg.lambda, u, &rcfg)?;
        let drift = if cfg.reaction {
            p.derivative_from_atanh(j.value, j.atanh)
        } else {
            0.0
        };
        *e = -dt * drift + drive * model.noise.profile(j.value);
    }
    let cu = spec.analyze(state.u.values());
    let ce = spec.analyze(&state.scratch);
    let c: Vec<f64> = cu
        .iter()
        .zip(&ce)
        .enumerate()
        .map(|(flat, (a, e))| {
            let kept = if spec.keeps(flat, n_modes) { *e } else { 0.0 };
            (a + kept) / (1.0 + dt * spec.eigenvalue_flat(flat))
        })
        .collect();
    let next = spec.synthesize(c);
    if let Some(bad) = next.iter().find(|v| !v.is_finite()) {
        return Err(Error::Overflow(format!("non-finite state value {bad}")));
    }
    state.u.values_mut().copy_from_slice(&next);
    state.step += 1;
    state.t = state.step as f64 * dt;
    Ok(())
}

pub fn step(state: &mut SolverState, cfg: &SchemeConfig, model: &Model) -> Result<()> {
    match cfg.kind {
        SchemeKind::SplitImplicit => step_split_implicit(state, cfg, model),
        SchemeKind::YosidaGalerkin => step_yosida_galerkin(state, cfg, model),
    }
}

/// Per-trajectory settings of [`run_trajectory`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    pub trajectory_id: u64,
    pub seed: u64,
    pub final_time: f64,
    /// Snapshot every `stride` steps (and at the final step).
    pub stride: usize,
    /// Declared initial separation; checked against `u0` when set.
    pub delta0: Option<f64>,
    pub alpha: f64,
    pub holder_range: HolderRange,
    /// Fine Brownian steps per solver step.
    pub brownian_ratio: u64,
    pub fingerprint: String,
}

impl RunOptions {
    pub fn new(final_time: f64, seed: u64) -> Self {
        Self {
            trajectory_id: 0,
            seed,
            final_time,
            stride: 1,
            delta0: None,
            alpha: 0.45,
            holder_range: HolderRange::AllPairs,
            brownian_ratio: 1,
            fingerprint: String::new(),
        }
    }
}

/// Default Hölder exponent: the certificate needs `α s0 > d`.
pub fn default_alpha(dim: usize) -> f64 {
    if dim == 2 {
        0.9
    } else {
        0.45
    }
}

/// All pairs for grids up to 4096 nodes, pairs within `L/4` beyond.
pub fn default_holder_range(grid: &crate::discretization::Grid) -> HolderRange {
    if grid.len() <= 4096 {
        HolderRange::AllPairs
    } else {
        HolderRange::default_for(grid)
    }
}

/// Number of steps covering `[0, T]` with step `dt`.
pub fn step_count(final_time: f64, dt: f64) -> Result<u64> {
    if !(final_time > 0.0 && final_time.is_finite()) {
        return Err(Error::InvalidParameter(format!("T = {final_time} must be positive")));
    }
    if dt > final_time * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!("dt = {dt} exceeds T = {final_time}")));
    }
    let m = (final_time / dt).round();
    if ((m * dt - final_time) / final_time).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "T = {final_time} is not a multiple of dt = {dt}"
        )));
    }
    Ok(m as u64)
}

fn finite_or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn snapshot(u: &Field, t: f64, model: &Model, opts: &RunOptions) -> Result<Snapshot> {
    let s0 = model.noise.s0() as f64;
    let nm = norms(u, opts.alpha, opts.holder_range);
    Ok(Snapshot {
        t,
        delta: separation_layer(u),
        energy: finite_or_inf(energy(u, &model.potential)),
        g_mass_s0: finite_or_inf(g_mass(u, s0)),
        g_mass_s0p1: finite_or_inf(g_mass(u, s0 + 1.0)),
        l2: nm.l2,
        h1: nm.h1,
        h2_proxy: nm.h2_proxy,
        sup_u: nm.sup,
        holder_alpha: nm.holder,
    })
}

/// Output of [`run_trajectory`].
#[derive(Clone, Debug)]
pub struct TrajectoryRun {
    pub record: TrajectoryRecord,
    pub final_state: Field,
}

/// Integrates one sample path from `u0` to `opts.final_time`.
pub fn run_trajectory(
    u0: &Field,
    cfg: &SchemeConfig,
    model: &Model,
    opts: &RunOptions,
) -> Result<TrajectoryRun> {
    cfg.validate(&model.constants)?;
    if opts.stride == 0 {
        return Err(Error::InvalidParameter("stride must be >= 1".into()));
    }
    if opts.brownian_ratio == 0 {
        return Err(Error::InvalidParameter("brownian_ratio must be >= 1".into()));
    }
    let steps = step_count(opts.final_time, cfg.dt)?;
    let sup0 = u0.sup();
    if !(sup0 < 1.0) {
        return Err(Error::Domain {
            what: "initial datum sup",
            value: sup0,
        });
    }
    if let Some(d0) = opts.delta0 {
        if sup0 > (1.0 - d0) * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "initial datum has sup {sup0} > 1 - delta0 = {}",
                1.0 - d0
            )));
        }
    }
    let fine_dt = cfg.dt / opts.brownian_ratio as f64;
    let brownian = BrownianPath::new(opts.seed, model.noise.modes(), fine_dt, opts.brownian_ratio)?;
    let mut state = SolverState::new(u0.clone(), brownian);
    let s1 = model.noise.s0() as f64 + 1.0;

    let mut snapshots = vec![snapshot(&state.u, 0.0, model, opts)?];
    let mut g_prev = finite_or_inf(g_mass(&state.u, s1));
    let mut g_integral = 0.0;
    for m in 1..=steps {
        step(&mut state, cfg, model)?;
        let g = finite_or_inf(g_mass(&state.u, s1));
        g_integral += 0.5 * cfg.dt * (g_prev + g);
        g_prev = g;
        if m % opts.stride as u64 == 0 || m == steps {
            snapshots.push(snapshot(&state.u, state.t, model, opts)?);
        }
    }
    let delta_min = snapshots.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min);
    if cfg.kind == SchemeKind::SplitImplicit && !(delta_min > 0.0) {
        return Err(Error::BarrierViolation {
            step: state.step,
            sup: 1.0 - delta_min,
        });
    }
    let g = *u0.grid();
    let record = TrajectoryRecord {
        trajectory_id: opts.trajectory_id,
        seed: opts.seed,
        config_fingerprint: opts.fingerprint.clone(),
        scheme: cfg.kind,
        dim: g.dim(),
        n: g.n(),
        length: g.length(),
        s0: model.noise.s0(),
        alpha: opts.alpha,
        snapshots,
        delta_min,
        g_mass_s0p1_time_integral: g_integral,
        clamp_events: state.clamp_events,
    };
    Ok(TrajectoryRun {
        record,
        final_state: state.u,
    })
}
