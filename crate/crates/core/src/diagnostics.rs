//! Field and trajectory functionals: separation layer, free energy, barrier
//! masses, the separation certificate and exponential-moment estimators.
//!
//! ## Separation certificate
//!
//! Let `u` satisfy `∫_O G_{s0}(u) <= M` and have Hölder(α) seminorm `<= Λ`,
//! and let `x0` be a point where `ε := 1 - u(x0)²` is smallest. Then for every
//! `x`
//!
//! ```text
//! 1 - u(x)² = ε + (u(x0) - u(x)) (u(x0) + u(x)) <= ε + 2Λ |x - x0|^α,
//! ```
//!
//! hence `M >= ∫_O (ε + 2Λ|x - x0|^α)^(-s0) dx =: I_{x0}(ε)`. `I_{x0}` is
//! decreasing in `ε` and, for a radially decreasing kernel on a box, smallest
//! when `x0` is a corner, so the root `ε*` of `I_corner(ε*) = M` is a lower
//! bound for `1 - u²` everywhere. When `α s0 > d`, `I(0) = ∞` and the root
//! exists.
//!
//! For `d >= 2` the corner integral is bounded below by the exact integral
//! over the ball sector of radius `side` plus the smallest kernel value times
//! the remaining volume; the bound is exact for `Λ = 0`.

use serde::{Deserialize, Serialize};

use crate::discretization::{gradient_energy, integrate, Field};
use crate::error::{Error, Result};
use crate::potential::{BarrierWeight, LogPotential};
use crate::solver::SchemeKind;

/// `δ = 1 - max |u|`.
pub fn separation_layer(u: &Field) -> f64 {
    1.0 - u.sup()
}

/// `½ ‖∇_h u‖² + h^d Σ F(u)`.
pub fn energy(u: &Field, p: &LogPotential) -> Result<f64> {
    let bulk = integrate(u, |v| p.value(v))?;
    Ok(0.5 * gradient_energy(u) + bulk)
}

/// `h^d Σ G_s(u)`.
pub fn g_mass(u: &Field, s: f64) -> Result<f64> {
    let g = BarrierWeight::new(s)?;
    integrate(u, |v| g.value(v))
}

/// Diagnostics of one stored time level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub delta: f64,
    #[serde(with = "crate::serde_ext")]
    pub energy: f64,
    #[serde(with = "crate::serde_ext")]
    pub g_mass_s0: f64,
    #[serde(with = "crate::serde_ext")]
    pub g_mass_s0p1: f64,
    pub l2: f64,
    pub h1: f64,
    pub h2_proxy: f64,
    pub sup_u: f64,
    pub holder_alpha: f64,
}

/// Time series of diagnostics for one sample path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub trajectory_id: u64,
    pub seed: u64,
    pub config_fingerprint: String,
    pub scheme: SchemeKind,
    pub dim: usize,
    pub n: usize,
    pub length: f64,
    pub s0: u32,
    pub alpha: f64,
    pub snapshots: Vec<Snapshot>,
    /// Smallest `delta` over the stored snapshots.
    pub delta_min: f64,
    /// Trapezoidal `∫_0^T ∫_O G_{s0+1}(u)` over every time step.
    #[serde(with = "crate::serde_ext")]
    pub g_mass_s0p1_time_integral: f64,
    pub clamp_events: u64,
}

impl TrajectoryRecord {
    pub fn max_g_mass_s0(&self) -> f64 {
        self.snapshots.iter().map(|s| s.g_mass_s0).fold(0.0, f64::max)
    }

    pub fn max_g_mass_s0p1(&self) -> f64 {
        self.snapshots.iter().map(|s| s.g_mass_s0p1).fold(0.0, f64::max)
    }

    pub fn max_holder(&self) -> f64 {
        self.snapshots.iter().map(|s| s.holder_alpha).fold(0.0, f64::max)
    }

    /// Checks the record invariants: times strictly increasing and
    /// `delta_min` equal to the smallest snapshot `delta`.
    pub fn validate(&self) -> Result<()> {
        if self.snapshots.is_empty() {
            return Err(Error::InvalidParameter("record without snapshots".into()));
        }
        if !self.snapshots.windows(2).all(|w| w[0].t < w[1].t) {
            return Err(Error::InvalidParameter("snapshot times not increasing".into()));
        }
        let m = self.snapshots.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min);
        if m != self.delta_min {
            return Err(Error::InvalidParameter(format!(
                "delta_min {} differs from snapshot minimum {m}",
                self.delta_min
            )));
        }
        Ok(())
    }
}

/// Inputs of [`separation_certificate`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateInput {
    /// Bound `M` on `∫ G_{s0}(u)`.
    pub mass: f64,
    /// Bound `Λ` on the Hölder(α) seminorm.
    pub holder: f64,
    pub alpha: f64,
    pub s0: u32,
    pub dim: usize,
    /// Side of the box over which the mass is measured.
    pub side: f64,
}

impl CertificateInput {
    pub fn measure(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::InvalidParameter(format!("dimension {}", self.dim)));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!("alpha = {} not in (0, 1]", self.alpha)));
        }
        if !(self.alpha * self.s0 as f64 > self.dim as f64) {
            return Err(Error::InvalidParameter(format!(
                "certificate needs alpha * s0 > d (alpha = {}, s0 = {}, d = {})",
                self.alpha, self.s0, self.dim
            )));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass bound {} must be positive", self.mass)));
        }
        if !(self.holder >= 0.0 && self.holder.is_finite()) {
            return Err(Error::InvalidParameter(format!("Hölder bound {} must be >= 0", self.holder)));
        }
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::InvalidParameter(format!("side {} must be positive", self.side)));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Quadrature resolution for the certificate integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertificateQuadrature {
    /// Gauss points per panel.
    pub points: usize,
    /// Geometric panel ratio towards the corner.
    pub ratio: f64,
}

impl Default for CertificateQuadrature {
    fn default() -> Self {
        Self {
            points: 16,
            ratio: 0.5,
        }
    }
}

/// `I(ε)`: lower bound of `∫_O (ε + 2Λ|x - x0|^α)^(-s0) dx` over all `x0`.
pub fn certificate_integral(c: &CertificateInput, eps: f64, quad: CertificateQuadrature) -> f64 {
    let d = c.dim as i32;
    let s0 = c.s0 as i32;
    let kernel = |r: f64| (eps + 2.0 * c.holder * r.powf(c.alpha)).powi(-s0);
    let sector = match c.dim {
        1 => 1.0,
        _ => std::f64::consts::FRAC_PI_2,
    };
    // panels [side q^{m+1}, side q^m] down to below the kernel's length scale
    let scale = if c.holder > 0.0 {
        (eps / (2.0 * c.holder)).powf(1.0 / c.alpha)
    } else {
        c.side
    };
    let r_min = (1e-3 * scale).min(1e-3 * c.side).max(c.side * 1e-280);
    let (nodes, weights) = gauss_legendre(quad.points);
    let panel = |a: f64, b: f64| {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let r = mid + half * x;
            acc += w * kernel(r) * r.powi(d - 1);
        }
        acc * half
    };
    let mut radial = 0.0;
    let mut hi = c.side;
    while hi > r_min {
        let lo = hi * quad.ratio;
        radial += panel(lo, hi);
        hi = lo;
    }
    radial += panel(0.0, hi);

    let volume = c.measure();
    let sector_volume = sector * c.side.powi(d) / d as f64;
    let far = kernel(c.side * (c.dim as f64).sqrt());
    sector * radial + far * (volume - sector_volume).max(0.0)
}

/// Certified lower bound `ε*` on `1 - u²`.
pub fn separation_certificate(c: &CertificateInput) -> Result<f64> {
    separation_certificate_with(c, CertificateQuadrature::default())
}

pub fn separation_certificate_with(c: &CertificateInput, quad: CertificateQuadrature) -> Result<f64> {
    c.validate()?;
    let f = |eps: f64| certificate_integral(c, eps, quad) - c.mass;
    let mut hi = 2.0 * (c.measure() / c.mass).powf(1.0 / c.s0 as f64);
    let mut lo = 0.5 * hi;
    let mut guard = 0;
    while f(lo) <= 0.0 {
        hi = lo;
        lo *= 0.5;
        guard += 1;
        if guard > 1000 || lo == 0.0 {
            return Err(Error::NonConvergence {
                iterations: guard,
                residual: f(lo),
            });
        }
    }
    // geometric bisection: ε* can sit many decades below the upper bound
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-15 {
            break;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub t: f64,
    /// `1 - sup|u|²`.
    pub measured: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub trajectory_id: u64,
    pub epsilon_star: f64,
    pub mass: f64,
    pub holder: f64,
    pub entries: Vec<AuditEntry>,
    pub passed: bool,
}

/// Relative slack for rounding in the audit comparison.
const AUDIT_RTOL: f64 = 1e-9;

/// Certifies each snapshot of a record against its own measured bounds.
pub fn certificate_audit(rec: &TrajectoryRecord) -> Result<AuditReport> {
    let mass = rec.max_g_mass_s0();
    let holder = rec.max_holder();
    audit_with_bounds(rec, mass, holder)
}

/// Audit with externally supplied bounds `M` and `Λ`.
pub fn audit_with_bounds(rec: &TrajectoryRecord, mass: f64, holder: f64) -> Result<AuditReport> {
    let h = rec.length / (rec.n + 1) as f64;
    let input = CertificateInput {
        mass,
        holder,
        alpha: rec.alpha,
        s0: rec.s0,
        dim: rec.dim,
        side: rec.n as f64 * h,
    };
    let eps = separation_certificate(&input)?;
    let entries: Vec<AuditEntry> = rec
        .snapshots
        .iter()
        .map(|s| {
            let measured = 1.0 - s.sup_u * s.sup_u;
            AuditEntry {
                t: s.t,
                measured,
                slack: measured - eps,
                passed: measured >= eps * (1.0 - AUDIT_RTOL),
            }
        })
        .collect();
    let passed = entries.iter().all(|e| e.passed);
    Ok(AuditReport {
        trajectory_id: rec.trajectory_id,
        epsilon_star: eps,
        mass,
        holder,
        entries,
        passed,
    })
}

/// Monte Carlo estimate of `E exp(q X)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpMoment {
    pub q: f64,
    #[serde(with = "crate::serde_ext")]
    pub mean: f64,
    #[serde(with = "crate::serde_ext")]
    pub stderr: f64,
    /// `ln` of the mean, finite even when the mean overflows.
    pub log_mean: f64,
    pub overflow: bool,
}

pub fn exp_moment_estimate(values: &[f64], q: f64) -> Result<ExpMoment> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("no samples".into()));
    }
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 0")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite sample {v}")));
    }
    let n = values.len() as f64;
    let shift = values.iter().map(|v| q * v).fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = values.iter().map(|v| (q * v - shift).exp()).collect();
    let mean_scaled = scaled.iter().sum::<f64>() / n;
    let log_mean = shift + mean_scaled.ln();
    let stderr_scaled = if values.len() > 1 {
        let var = scaled.iter().map(|e| (e - mean_scaled).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    } else {
        0.0
    };
    let mean = log_mean.exp();
    let stderr = if stderr_scaled == 0.0 {
        0.0
    } else {
        (shift + stderr_scaled.ln()).exp()
    };
    Ok(ExpMoment {
        q,
        mean,
        stderr,
        log_mean,
        overflow: !mean.is_finite() || !stderr.is_finite(),
    })
}
