//! Barrier-degenerate noise coefficients.
//!
//! Mode `k` carries an independent scalar Brownian motion `β_k` and the
//! diffusion coefficient
//!
//! ```text
//! h_k(x) = σ_k (1 - x²)^m,   σ_k = σ0 (k + 1)^(-γ),
//! ```
//!
//! with vanishing order `m = s0 + 2` for the standard polynomial family, so
//! every `h_k` and its first `s0 + 1` derivatives vanish at ±1. Since all
//! modes share the profile `(1 - x²)^m`, derivative sup-norms are computed
//! once for the profile and scaled by `σ_k`.

use serde::{Deserialize, Serialize};

use crate::check::{Check, CheckReport};
use crate::discretization::Field;
use crate::error::{Error, Result};
use crate::potential::LogPotential;

/// Dense-grid resolution for derivative sup-norms.
const SUP_GRID: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseFamily {
    s0: u32,
    order: u32,
    sigma0: f64,
    gamma: f64,
    coefficients: Vec<f64>,
}

impl NoiseFamily {
    /// `h_k(x) = σ_k (1 - x²)^(s0 + 2)`.
    pub fn polynomial(s0: u32, modes: usize, sigma0: f64, gamma: f64) -> Result<Self> {
        Self::with_vanishing_order(s0, modes, sigma0, gamma, s0 + 2)
    }

    /// Same coefficients with an arbitrary profile exponent; families with
    /// `order < s0 + 2` are inadmissible and exist to exercise the checks.
    pub fn with_vanishing_order(
        s0: u32,
        modes: usize,
        sigma0: f64,
        gamma: f64,
        order: u32,
    ) -> Result<Self> {
        if s0 < 1 || modes < 1 || order < 1 {
            return Err(Error::InvalidParameter(format!(
                "noise family needs s0 >= 1, K >= 1, order >= 1 (got {s0}, {modes}, {order})"
            )));
        }
        if !(sigma0 >= 0.0 && sigma0.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma0 = {sigma0} must be >= 0")));
        }
        if !(gamma > 0.5 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must exceed 1/2")));
        }
        let coefficients = (0..modes)
            .map(|k| sigma0 * ((k + 1) as f64).powf(-gamma))
            .collect();
        Ok(Self {
            s0,
            order,
            sigma0,
            gamma,
            coefficients,
        })
    }

    pub fn s0(&self) -> u32 {
        self.s0
    }

    pub fn modes(&self) -> usize {
        self.coefficients.len()
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Exponent `m` of the profile `(1 - x²)^m`.
    pub fn vanishing_order(&self) -> u32 {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.sigma0 == 0.0
    }

    /// `(1 - x²)^m` in factored form; zero outside (-1, 1).
    pub fn profile(&self, x: f64) -> f64 {
        let q = (1.0 - x) * (1.0 + x);
        if q <= 0.0 {
            0.0
        } else {
            q.powi(self.order as i32)
        }
    }

    /// `h_k(x)`.
    pub fn h(&self, k: usize, x: f64) -> f64 {
        self.coefficients[k] * self.profile(x)
    }

    fn profile_polynomial(&self) -> Polynomial {
        Polynomial::one_minus_x2_pow(self.order)
    }
}

/// Dense real polynomial, coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub(crate) fn one_minus_x2_pow(m: u32) -> Self {
        let m = m as usize;
        let mut coeffs = vec![0.0; 2 * m + 1];
        let mut binom = 1.0_f64;
        for j in 0..=m {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[2 * j] = sign * binom;
            binom = binom * (m - j) as f64 / (j + 1) as f64;
        }
        Self { coeffs }
    }

    pub(crate) fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub(crate) fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self { coeffs: vec![0.0] };
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c * (i + 1) as f64)
            .collect();
        Self { coeffs }
    }

    pub(crate) fn scale(&self, a: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    pub(crate) fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| self.coeffs.get(i).unwrap_or(&0.0) + other.coeffs.get(i).unwrap_or(&0.0))
            .collect();
        Self { coeffs }
    }

    /// `sup_{[-1,1]} |p|`: dense grid, then golden-section refinement
    /// around the best grid point.
    pub(crate) fn sup_abs(&self) -> f64 {
        let n = SUP_GRID;
        let step = 2.0 / n as f64;
        let mut best_i = 0;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let v = self.eval(-1.0 + step * i as f64).abs();
            if v > best {
                best = v;
                best_i = i;
            }
        }
        let center = -1.0 + step * best_i as f64;
        let (mut a, mut b) = ((center - step).max(-1.0), (center + step).min(1.0));
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let f = |x: f64| self.eval(x).abs();
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        for _ in 0..80 {
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
            c = b - inv_phi * (b - a);
            d = a + inv_phi * (b - a);
        }
        best.max(f(0.5 * (a + b)))
    }
}

/// `C_{1,H}` and `C_{2,H}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConstants {
    pub c1: f64,
    pub c2: f64,
}

/// Sup-norms `sup|p^{(j)}|` of the profile for `j = 0..=max_order`.
fn profile_derivative_sups(f: &NoiseFamily, max_order: u32) -> Vec<f64> {
    let mut p = f.profile_polynomial();
    let mut sups = Vec::with_capacity(max_order as usize + 1);
    for _ in 0..=max_order {
        sups.push(p.sup_abs());
        p = p.derivative();
    }
    sups
}

/// Computes the noise constants.
///
/// ```text
/// C1² = Σ_k ‖h_k‖²_{W^{1,∞}} + ‖F'' h_k²‖_∞
/// C2² = Σ_k ‖h_k‖²_{W^{1+2 s0,∞}}
/// ```
///
/// with `‖h‖_{W^{m,∞}} = Σ_{j<=m} sup|h^{(j)}|`. `F'' h_k²` is handled as the
/// polynomial `σ_k² (θ q^{2m-1} - θ0 q^{2m})`, `q = 1 - x²`, which is where the
/// degeneracy of `h_k` absorbs the `1/(1-x²)` singularity.
pub fn constants(f: &NoiseFamily, p: &LogPotential) -> Result<NoiseConstants> {
    let top = 1 + 2 * f.s0;
    let sups = profile_derivative_sups(f, top);
    let w1: f64 = sups[..2].iter().sum();
    let w_top: f64 = sups.iter().sum();

    let q = Polynomial::one_minus_x2_pow(2 * f.order - 1).scale(p.theta());
    let q2 = Polynomial::one_minus_x2_pow(2 * f.order).scale(-p.theta0());
    let curvature = q.add(&q2).sup_abs();

    let mut c1_sq = 0.0;
    let mut c2_sq = 0.0;
    for (k, &sigma) in f.coefficients.iter().enumerate() {
        let s2 = sigma * sigma;
        let a = s2 * w1 * w1 + s2 * curvature;
        let b = s2 * w_top * w_top;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Overflow(format!("noise mode {k} norms")));
        }
        c1_sq += a;
        c2_sq += b;
    }
    let out = NoiseConstants {
        c1: c1_sq.sqrt(),
        c2: c2_sq.sqrt(),
    };
    if !out.c1.is_finite() || !out.c2.is_finite() {
        return Err(Error::Overflow("noise constants".into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorReport {
    pub mode: usize,
    /// `sup |h_k^{(s0+2)}|`.
    pub derivative_sup: f64,
    /// Largest `|h_k(x)| / bound(x)` observed (0/0 counts as 0).
    pub max_ratio: f64,
    pub worst_x: f64,
    pub passed: bool,
}

/// Checks `|h_k(x)| <= sup|h_k^{(s0+2)}| / (s0+2)! · dist(x, ±1)^{s0+2}`.
pub fn taylor_bound_check(f: &NoiseFamily, k: usize, n_samples: usize) -> Result<TaylorReport> {
    if k >= f.modes() {
        return Err(Error::InvalidParameter(format!("mode {k} >= K = {}", f.modes())));
    }
    if n_samples < 2 {
        return Err(Error::InvalidParameter("taylor check needs at least 2 samples".into()));
    }
    let order = f.s0 + 2;
    let mut p = f.profile_polynomial();
    for _ in 0..order {
        p = p.derivative();
    }
    let sigma = f.coefficients[k];
    let m_k = sigma * p.sup_abs();
    let factorial: f64 = (1..=order).map(|i| i as f64).product();

    let mut max_ratio: f64 = 0.0;
    let mut worst_x = 0.0;
    for i in 0..n_samples {
        let x = -1.0 + 2.0 * i as f64 / (n_samples - 1) as f64;
        let lhs = f.h(k, x).abs();
        let dist = (1.0 - x).min(1.0 + x).max(0.0);
        let rhs = m_k / factorial * dist.powi(order as i32);
        let ratio = if lhs == 0.0 {
            0.0
        } else if rhs == 0.0 {
            f64::INFINITY
        } else {
            lhs / rhs
        };
        if ratio > max_ratio {
            max_ratio = ratio;
            worst_x = x;
        }
    }
    Ok(TaylorReport {
        mode: k,
        derivative_sup: m_k,
        max_ratio,
        worst_x,
        passed: max_ratio <= 1.0 + 1e-12,
    })
}

/// Pointwise `Σ_k h_k(u(x)) dW_k`.
pub fn apply_noise_increment(f: &NoiseFamily, u: &Field, dw: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; u.len()];
    noise_increment_into(f, u.values(), dw, &mut out)?;
    Ok(out)
}

pub(crate) fn noise_increment_into(
    f: &NoiseFamily,
    u: &[f64],
    dw: &[f64],
    out: &mut [f64],
) -> Result<()> {
    if dw.len() != f.modes() {
        return Err(Error::DimensionMismatch {
            expected: f.modes(),
            found: dw.len(),
        });
    }
    if out.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            found: out.len(),
        });
    }
    // all modes share the profile: Σ_k σ_k dW_k is a single scalar
    let drive: f64 = f
        .coefficients
        .iter()
        .zip(dw)
        .map(|(s, w)| s * w)
        .sum();
    for (o, &x) in out.iter_mut().zip(u) {
        *o = drive * f.profile(x);
    }
    Ok(())
}

/// Membership checks of the noise hypotheses for the simulation dimension `dim`.
pub fn check_noise(
    f: &NoiseFamily,
    p: &LogPotential,
    s_f: f64,
    dim: usize,
) -> Result<CheckReport> {
    let mut report = CheckReport::new("H2/H3");
    let vanish = (0..f.modes()).all(|k| f.h(k, 1.0) == 0.0 && f.h(k, -1.0) == 0.0);
    report.push(Check::new(
        "h_k(±1) = 0",
        vanish,
        format!("{} modes", f.modes()),
    ));
    let c = constants(f, p)?;
    report.push(Check::new(
        "C_1H finite",
        c.c1.is_finite(),
        format!("C_1H = {}", c.c1),
    ));
    report.push(Check::new(
        "C_2H finite",
        c.c2.is_finite(),
        format!("C_2H = {}", c.c2),
    ));
    let floor = dim as f64 * s_f - 1.0;
    report.push(Check::new(
        "s0 >= d s_F - 1",
        f.s0 as f64 >= floor,
        format!("s0 = {}, d s_F - 1 = {floor}", f.s0),
    ));
    let mut worst = 0.0_f64;
    let mut taylor_ok = true;
    for k in 0..f.modes() {
        let t = taylor_bound_check(f, k, 2001)?;
        worst = worst.max(t.max_ratio);
        taylor_ok &= t.passed;
    }
    report.push(Check::new(
        "Taylor barrier bound",
        taylor_ok,
        format!("max ratio {worst}"),
    ));
    Ok(report)
}
