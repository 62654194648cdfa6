//! Run configuration files.
//!
//! A run is described by one JSON document:
//!
//! ```json
//! {
//!   "domain":    {"d": 1, "n": 63, "L": 1.0},
//!   "time":      {"T": 1.0, "dt": 0.001, "stride": 10},
//!   "potential": {"theta": 1.0, "theta0": 2.0},
//!   "noise":     {"s0": 3, "K": 16, "sigma0": 0.1, "gamma": 1.0},
//!   "scheme":    {"kind": "split_implicit", "lambda": 0.01, "n_modes": null, "newton_tol": 1e-12},
//!   "ensemble":  {"master_seed": 42, "n_traj": 100},
//!   "init":      {"kind": "eigen_bump", "amplitude": 1.0, "delta0": 0.5},
//!   "output":    {"dir": "out"}
//! }
//! ```
//!
//! Optional extras: `potential.c_f`, `potential.s_f`, `scheme.max_newton`,
//! `scheme.reaction`, `init.path`, `study {kind, levels}` and
//! `diagnostics {alpha, holder_radius}`. Unknown keys are rejected.
//!
//! Initial data: `constant` is `u ≡ amplitude`; `eigen_bump` is the first
//! eigenvector scaled to `sup = 1 - delta0`, with the sign of `amplitude`;
//! `file` reads `n^d` node values (row-major, comma- or newline-separated).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::discretization::{Field, Grid, HolderRange, Spectrum};
use crate::error::{Error, Result};
use crate::noise::NoiseFamily;
use crate::potential::{LogPotential, PotentialConstants};
use crate::solver::{default_alpha, default_holder_range, step_count, Model, SchemeConfig, SchemeKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub final_time: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub stride: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub theta: f64,
    pub theta0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_f: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub s0: u32,
    #[serde(rename = "K")]
    pub modes: usize,
    pub sigma0: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub n_modes: Option<usize>,
    #[serde(default = "default_newton_tol")]
    pub newton_tol: f64,
    #[serde(default = "default_max_newton")]
    pub max_newton: usize,
    #[serde(default = "yes")]
    pub reaction: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub master_seed: u64,
    pub n_traj: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Constant,
    EigenBump,
    File,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitConfig {
    pub kind: InitKind,
    #[serde(default)]
    pub amplitude: f64,
    pub delta0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    DtRefine,
    GridRefine,
    LambdaRefine,
    NoiseScale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub kind: StudyKind,
    /// `dt` values, grid sizes `n`, `λ` values or `σ0` values, coarse first.
    pub levels: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Pair radius of the Hölder seminorm; all pairs when absent on small grids.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holder_radius: Option<f64>,
}

impl DiagnosticsConfig {
    fn is_default(&self) -> bool {
        self == &Self::default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub time: TimeConfig,
    pub potential: PotentialConfig,
    pub noise: NoiseConfig,
    pub scheme: SchemeSection,
    pub ensemble: EnsembleConfig,
    pub init: InitConfig,
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<StudyConfig>,
    #[serde(default, skip_serializing_if = "DiagnosticsConfig::is_default")]
    pub diagnostics: DiagnosticsConfig,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_lambda() -> f64 {
    1e-2
}
fn default_newton_tol() -> f64 {
    1e-12
}
fn default_max_newton() -> usize {
    200
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `v` as JSON when possible, otherwise as a string.
fn parse_override_value(v: &str) -> Value {
    serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.to_string()))
}

/// Applies a `section.key=value` override to a JSON tree.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| cfg_err(format!("override {assignment:?} is not of the form key=value")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(cfg_err(format!("override path {path:?} has an empty segment")));
    }
    let mut node = root;
    for k in &keys[..keys.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| cfg_err(format!("override {path:?}: {k:?} is not inside an object")))?;
        node = obj
            .entry(k.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| cfg_err(format!("override {path:?} does not address an object key")))?;
    obj.insert(keys[keys.len() - 1].to_string(), parse_override_value(raw.trim()));
    Ok(())
}

impl RunConfig {
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| cfg_err(e.to_string()))?;
        Self::from_value(value, &[])
    }

    /// Builds a validated config from a JSON tree and dotted overrides.
    pub fn from_value(mut value: Value, overrides: &[String]) -> Result<Self> {
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| cfg_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads, overrides and validates a config file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: Value =
            serde_json::from_str(&text).map_err(|e| cfg_err(format!("{}: {e}", path.display())))?;
        Self::from_value(value, overrides)
    }

    /// Canonical JSON (field order fixed by the type).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::Config(_) => e,
            other => cfg_err(other.to_string()),
        };
        let d = &self.domain;
        if !(1..=3).contains(&d.d) {
            return Err(cfg_err(format!("domain.d = {} must be 1, 2 or 3", d.d)));
        }
        if d.n < 3 {
            return Err(cfg_err(format!("domain.n = {} must be >= 3", d.n)));
        }
        if d.n.checked_pow(d.d as u32).is_none_or(|m| m > 1 << 22) {
            return Err(cfg_err(format!("grid of {}^{} nodes is too large", d.n, d.d)));
        }
        if !(d.length > 0.0 && d.length.is_finite()) {
            return Err(cfg_err(format!("domain.L = {} must be positive", d.length)));
        }
        let t = &self.time;
        if !(t.dt > 0.0) {
            return Err(cfg_err(format!("time.dt = {} must be positive", t.dt)));
        }
        step_count(t.final_time, t.dt).map_err(wrap)?;
        if t.stride == 0 {
            return Err(cfg_err("time.stride must be >= 1"));
        }
        let p = self.log_potential().map_err(wrap)?;
        let c = self.constants(&p).map_err(wrap)?;
        self.noise_family().map_err(wrap)?;
        self.scheme_config().validate(&c).map_err(wrap)?;
        if let Some(m) = self.scheme.n_modes {
            let total = self.grid().map_err(wrap)?.len();
            if m == 0 || m > total {
                return Err(cfg_err(format!("scheme.n_modes = {m} must be in 1..={total}")));
            }
        }
        if self.ensemble.n_traj == 0 {
            return Err(cfg_err("ensemble.n_traj must be >= 1"));
        }
        let i = &self.init;
        if !(i.delta0 > 0.0 && i.delta0 < 1.0) {
            return Err(cfg_err(format!("init.delta0 = {} must be in (0, 1)", i.delta0)));
        }
        match i.kind {
            InitKind::Constant if i.amplitude.abs() > 1.0 - i.delta0 => {
                return Err(cfg_err(format!(
                    "init.amplitude = {} violates |u0| <= 1 - delta0",
                    i.amplitude
                )))
            }
            InitKind::File if i.path.is_none() => {
                return Err(cfg_err("init.kind = \"file\" needs init.path"))
            }
            _ => {}
        }
        if !i.amplitude.is_finite() {
            return Err(cfg_err("init.amplitude must be finite"));
        }
        if let Some(a) = self.diagnostics.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(cfg_err(format!("diagnostics.alpha = {a} must be in (0, 1]")));
            }
        }
        if let Some(r) = self.diagnostics.holder_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(cfg_err(format!("diagnostics.holder_radius = {r} must be positive")));
            }
        }
        if let Some(s) = &self.study {
            self.validate_study(s)?;
        }
        Ok(())
    }

    fn validate_study(&self, s: &StudyConfig) -> Result<()> {
        if s.levels.len() < 3 {
            return Err(cfg_err(format!(
                "study needs at least 3 levels (got {})",
                s.levels.len()
            )));
        }
        if s.levels.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(cfg_err("study levels must be finite and non-negative"));
        }
        match s.kind {
            StudyKind::DtRefine => {
                let finest = s.levels.iter().cloned().fold(f64::INFINITY, f64::min);
                if !(finest > 0.0) {
                    return Err(cfg_err("dt levels must be positive"));
                }
                for l in &s.levels {
                    let r = l / finest;
                    if (r - r.round()).abs() > 1e-9 * r {
                        return Err(cfg_err(format!("dt level {l} is not a multiple of {finest}")));
                    }
                    step_count(self.time.final_time, *l).map_err(|e| cfg_err(e.to_string()))?;
                }
            }
            StudyKind::GridRefine => {
                if s.levels.iter().any(|l| l.fract() != 0.0 || *l < 3.0) {
                    return Err(cfg_err("grid levels must be integers >= 3"));
                }
            }
            StudyKind::LambdaRefine => {
                let c = self.constants(&self.log_potential()?)?;
                for &l in &s.levels {
                    let cfg = SchemeConfig {
                        kind: SchemeKind::YosidaGalerkin,
                        lambda: l,
                        ..self.scheme_config()
                    };
                    cfg.validate(&c).map_err(|e| cfg_err(e.to_string()))?;
                }
            }
            StudyKind::NoiseScale => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.domain.d, self.domain.n, self.domain.length)
    }

    pub fn log_potential(&self) -> Result<LogPotential> {
        LogPotential::new(self.potential.theta, self.potential.theta0)
    }

    pub fn constants(&self, p: &LogPotential) -> Result<PotentialConstants> {
        let natural = PotentialConstants::natural(p);
        PotentialConstants::new(
            self.potential.c_f.unwrap_or(natural.c_f),
            self.potential.s_f.unwrap_or(natural.s_f),
        )
    }

    pub fn noise_family(&self) -> Result<NoiseFamily> {
        let n = &self.noise;
        NoiseFamily::polynomial(n.s0, n.modes, n.sigma0, n.gamma)
    }

    pub fn scheme_config(&self) -> SchemeConfig {
        let s = &self.scheme;
        SchemeConfig {
            dt: self.time.dt,
            kind: s.kind,
            lambda: s.lambda,
            n_modes: s.n_modes,
            newton_tol: s.newton_tol,
            max_newton: s.max_newton,
            reaction: s.reaction,
        }
    }

    pub fn model(&self) -> Result<Model> {
        let p = self.log_potential()?;
        Ok(Model::new(
            p,
            self.constants(&p)?,
            self.noise_family()?,
            Arc::new(Spectrum::new(self.grid()?)),
        ))
    }

    pub fn alpha(&self) -> f64 {
        self.diagnostics.alpha.unwrap_or_else(|| default_alpha(self.domain.d))
    }

    pub fn holder_range(&self, grid: &Grid) -> HolderRange {
        match self.diagnostics.holder_radius {
            Some(r) => HolderRange::Within(r),
            None => default_holder_range(grid),
        }
    }

    /// Initial datum on the spectrum's grid.
    pub fn initial_field(&self, spectrum: &Spectrum) -> Result<Field> {
        let grid = *spectrum.grid();
        let i = &self.init;
        let u = match i.kind {
            InitKind::Constant => Field::constant(grid, i.amplitude),
            InitKind::EigenBump => {
                let e = spectrum.eigenvector(0)?;
                let sign = if i.amplitude < 0.0 { -1.0 } else { 1.0 };
                e.scaled(sign * (1.0 - i.delta0) / e.sup())
            }
            InitKind::File => {
                let path = i.path.as_ref().ok_or_else(|| cfg_err("init.path missing"))?;
                read_field_file(path, grid)?
            }
        };
        if u.sup() > (1.0 - i.delta0) * (1.0 + 1e-12) {
            return Err(cfg_err(format!(
                "initial datum sup {} exceeds 1 - delta0 = {}",
                u.sup(),
                1.0 - i.delta0
            )));
        }
        Ok(u)
    }
}

/// Reads node values separated by commas, whitespace or newlines.
pub fn read_field_file(path: &Path, grid: Grid) -> Result<Field> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|e| Error::format(path, format!("{s:?}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != grid.len() {
        return Err(Error::format(
            path,
            format!("expected {} node values, found {}", grid.len(), values.len()),
        ));
    }
    Field::new(grid, values)
}
