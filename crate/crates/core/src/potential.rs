//! # Logarithmic potential
//!
//! ```text
//! F(r)   = θ/2 [(1+r) ln(1+r) + (1-r) ln(1-r)] - θ0/2 r² + shift
//! F'(r)  = θ/2 ln((1+r)/(1-r)) - θ0 r  =  θ atanh(r) - θ0 r
//! F''(r) = θ/(1-r²) - θ0
//! ```
//!
//! with `0 < θ < θ0`. The constant `shift` is fixed at construction so that
//! the minimum of `F` over (-1, 1), attained at the two symmetric wells, is 0.
//!
//! Also in this module: the barrier weights `G_s(x) = (1-x²)^(-s)`, the
//! resolvent `J_λ = (I + λ(F' + C_F id))^(-1)` and the Yosida-type
//! approximation `F'_λ = F' ∘ J_λ`.
//!
//! ## Barrier coordinate
//!
//! Near ±1 the resolvent is solved for `z = atanh(y)` rather than `y`: the
//! map `z ↦ y + λ(F'(y) + C_F y)` is smooth on all of ℝ, and `F'(y) = θz - θ0 y`
//! stays exact even when `tanh z` rounds to ±1 in double precision.

use serde::{Deserialize, Serialize};

use crate::check::{Check, CheckReport};
use crate::error::{check_open_unit, Error, Result};
use crate::roots::{newton_bracketed, solve_tanh_linear};

/// Inputs with `1 - |r|` below this are treated as touching the barrier.
pub const BARRIER_EPS: f64 = 1e-14;

fn check_interior(what: &'static str, r: f64) -> Result<()> {
    check_open_unit(what, r)?;
    if 1.0 - r.abs() < BARRIER_EPS {
        return Err(Error::Domain { what, value: r });
    }
    Ok(())
}

/// Flory-Huggins potential with temperature `theta` below the critical `theta0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPotential {
    theta: f64,
    theta0: f64,
    shift: f64,
    well: f64,
}

/// Value and first two derivatives of the potential at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialValues {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

impl LogPotential {
    pub fn new(theta: f64, theta0: f64) -> Result<Self> {
        if !(theta > 0.0 && theta0 > theta && theta0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "logarithmic potential needs 0 < theta < theta0 (theta = {theta}, theta0 = {theta0})"
            )));
        }
        // Positive well: θ z = θ0 tanh z with z = atanh(r) > 0.
        let g = |z: f64| {
            let t = z.tanh();
            (theta * z - theta0 * t, theta - theta0 * (1.0 - t * t))
        };
        let hi = theta0 / theta + 1.0;
        let lo = 1e-8_f64.min(hi / 2.0);
        let z = newton_bracketed(g, lo, hi, hi, 1e-15, 500)?.x;
        let well = z.tanh();
        let raw = Self::raw_value(theta, theta0, well);
        Ok(Self {
            theta,
            theta0,
            shift: -raw,
            well,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Additive constant making `min F = 0`.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    /// Positive minimiser of `F`; the other one is `-well()`.
    pub fn well(&self) -> f64 {
        self.well
    }

    fn raw_value(theta: f64, theta0: f64, r: f64) -> f64 {
        let entropy = (1.0 + r) * r.ln_1p() + (1.0 - r) * (-r).ln_1p();
        0.5 * theta * entropy - 0.5 * theta0 * r * r
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        check_interior("r", r)?;
        Ok(Self::raw_value(self.theta, self.theta0, r) + self.shift)
    }

    pub fn derivative(&self, r: f64) -> Result<f64> {
        check_interior("r", r)?;
        Ok(self.theta * r.atanh() - self.theta0 * r)
    }

    pub fn second_derivative(&self, r: f64) -> Result<f64> {
        check_interior("r", r)?;
        Ok(self.theta / ((1.0 - r) * (1.0 + r)) - self.theta0)
    }

    pub fn eval(&self, r: f64) -> Result<PotentialValues> {
        Ok(PotentialValues {
            f: self.value(r)?,
            df: self.derivative(r)?,
            d2f: self.second_derivative(r)?,
        })
    }

    /// `F'` written in the barrier coordinate `z = atanh(y)`.
    pub fn derivative_from_atanh(&self, y: f64, z: f64) -> f64 {
        self.theta * z - self.theta0 * y
    }
}

/// Curvature constants `C_F`, `s_F` with `-C_F <= F'' <= C_F (1 + G_{s_F})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialConstants {
    pub c_f: f64,
    pub s_f: f64,
}

impl PotentialConstants {
    pub fn new(c_f: f64, s_f: f64) -> Result<Self> {
        if !(c_f > 0.0 && c_f.is_finite() && s_f >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "curvature constants need C_F > 0 and s_F >= 1 (got {c_f}, {s_f})"
            )));
        }
        Ok(Self { c_f, s_f })
    }

    /// `C_F = max(θ0 - θ, θ)`, `s_F = 1`.
    ///
    /// `θ0 - θ` is the exact lower bound of `F''`; the upper bound
    /// `θ/(1-r²) - θ0 <= C_F (1 + 1/(1-r²))` additionally needs `C_F >= θ`.
    pub fn natural(p: &LogPotential) -> Self {
        Self {
            c_f: (p.theta0 - p.theta).max(p.theta),
            s_f: 1.0,
        }
    }
}

/// Barrier weight `G_s(x) = (1 - x²)^(-s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BarrierWeight {
    s: f64,
}

impl BarrierWeight {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 1.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("barrier exponent s = {s} must be >= 1")));
        }
        Ok(Self { s })
    }

    pub fn exponent(&self) -> f64 {
        self.s
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        check_interior("x", x)?;
        Ok(Self::raw(self.s, x))
    }

    /// Returns `(G_s(x), G_s'(x))` with `G_s' = 2 s x G_{s+1}`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64)> {
        check_interior("x", x)?;
        let g = Self::raw(self.s, x);
        let dg = 2.0 * self.s * x * Self::raw(self.s + 1.0, x);
        Ok((g, dg))
    }

    fn raw(s: f64, x: f64) -> f64 {
        let q = (1.0 - x) * (1.0 + x);
        if s.fract() == 0.0 && s <= 64.0 {
            1.0 / q.powi(s as i32)
        } else {
            q.powf(-s)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

impl ResolventConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iter < 100 {
            return Err(Error::InvalidParameter(format!(
                "resolvent config needs tol > 0 and max_iter >= 100 (got {}, {})",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

/// A resolvent value together with its barrier coordinate `atanh`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolved {
    /// `J_λ(x)`; may round to ±1 in f64 when `|atanh| > ~19`.
    pub value: f64,
    pub atanh: f64,
    pub residual: f64,
}

/// `J_λ(x)`: the unique `y ∈ (-1,1)` with `y + λ(F'(y) + C_F y) = x`.
pub fn resolvent(
    p: &LogPotential,
    c: &PotentialConstants,
    lambda: f64,
    x: f64,
    cfg: &ResolventConfig,
) -> Result<Resolved> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} must be positive")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("resolvent argument {x} is not finite")));
    }
    // y + λ(θ z - θ0 y + C_F y) = x  with y = tanh z
    let a = 1.0 + lambda * (c.c_f - p.theta0);
    let b = lambda * p.theta;
    if !(a + b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "C_F = {} is below theta0 - theta; F' + C_F id is not monotone",
            c.c_f
        )));
    }
    let root = solve_tanh_linear(a, b, x, cfg.tol, cfg.max_iter)?;
    Ok(Resolved {
        value: root.x.tanh(),
        atanh: root.x,
        residual: root.residual,
    })
}

/// `F'_λ(x) = F'(J_λ(x))`, globally Lipschitz with constant `1/λ + C_F`.
pub fn yosida_derivative(
    p: &LogPotential,
    c: &PotentialConstants,
    lambda: f64,
    x: f64,
    cfg: &ResolventConfig,
) -> Result<f64> {
    let j = resolvent(p, c, lambda, x, cfg)?;
    Ok(p.derivative_from_atanh(j.value, j.atanh))
}

/// Samples `n` Chebyshev points of the first kind on (-1, 1).
pub fn chebyshev_points(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos())
}

/// Checks the bullets of the potential hypothesis on a Chebyshev sample.
pub fn check_h1(p: &LogPotential, c: &PotentialConstants, n_samples: usize) -> Result<CheckReport> {
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "check_h1 needs at least 1000 samples (got {n_samples})"
        )));
    }
    let mut min_f = f64::INFINITY;
    let mut lower_slack = f64::INFINITY;
    let mut upper_slack = f64::INFINITY;
    let g = BarrierWeight::new(c.s_f)?;
    for r in chebyshev_points(n_samples).chain([0.0]) {
        let v = p.eval(r)?;
        min_f = min_f.min(v.f);
        lower_slack = lower_slack.min(v.d2f + c.c_f);
        upper_slack = upper_slack.min(c.c_f * (1.0 + g.value(r)?) - v.d2f);
    }
    // F' must diverge logarithmically: each decade closer to ±1 adds about θ ln(10)/2
    let decade = 0.5 * p.theta * std::f64::consts::LN_10;
    let mut growth_left = f64::INFINITY;
    let mut growth_right = f64::INFINITY;
    for k in 2..12 {
        let r0 = 1.0 - 10f64.powi(-k);
        let r1 = 1.0 - 10f64.powi(-k - 1);
        growth_right = growth_right.min(p.derivative(r1)? - p.derivative(r0)?);
        growth_left = growth_left.min(p.derivative(-r0)? - p.derivative(-r1)?);
    }
    let df_left = p.derivative(-(1.0 - 1e-12))?;
    let df_right = p.derivative(1.0 - 1e-12)?;
    let df0 = p.derivative(0.0)?;

    let tiny = 1e-12;
    let mut report = CheckReport::new("H1");
    report.push(Check::new("F >= 0", min_f >= -tiny, format!("min F = {min_f:e}")));
    report.push(Check::new("F'(0) = 0", df0.abs() <= tiny, format!("F'(0) = {df0:e}")));
    report.push(Check::new(
        "F' -> -inf at -1",
        df_left < 0.0 && growth_left >= 0.9 * decade,
        format!("F'(-1+1e-12) = {df_left}, min growth per decade {growth_left}"),
    ));
    report.push(Check::new(
        "F' -> +inf at +1",
        df_right > 0.0 && growth_right >= 0.9 * decade,
        format!("F'(1-1e-12) = {df_right}, min growth per decade {growth_right}"),
    ));
    report.push(Check::new(
        "F'' >= -C_F",
        lower_slack >= -tiny,
        format!("min(F'' + C_F) = {lower_slack:e} with C_F = {}", c.c_f),
    ));
    report.push(Check::new(
        "F'' <= C_F (1 + G_sF)",
        upper_slack >= -tiny,
        format!("min(C_F(1+G) - F'') = {upper_slack:e} with s_F = {}", c.s_f),
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn standard() -> (LogPotential, PotentialConstants) {
        let p = LogPotential::new(1.0, 2.0).unwrap();
        let c = PotentialConstants::natural(&p);
        (p, c)
    }

    #[test]
    fn derivative_values() {
        let (p, _) = standard();
        assert_eq!(p.derivative(0.0).unwrap(), 0.0);
        assert_eq!(p.second_derivative(0.0).unwrap(), -1.0);
        // high-precision oracle: 0.5 ln 3 - 1
        assert_relative_eq!(
            p.derivative(0.5).unwrap(),
            -0.450_693_855_665_945_15,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            p.second_derivative(0.9).unwrap(),
            3.263_157_894_736_842,
            max_relative = 1e-14
        );
    }

    #[test]
    fn shift_puts_minimum_at_zero() {
        let (p, _) = standard();
        assert_relative_eq!(p.well(), 0.957_504_024_077_268_7, max_relative = 1e-13);
        assert_relative_eq!(p.shift(), 0.326_523_887_426_923_87, max_relative = 1e-12);
        let min = chebyshev_points(20_000)
            .map(|r| p.value(r).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 0.0 && min <= 1e-10, "{min}");
        assert!(p.value(p.well()).unwrap().abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let (p, _) = standard();
        for r in [1.0, -1.0, 1.5, f64::NAN, 1.0 - 1e-15] {
            assert!(matches!(p.value(r), Err(Error::Domain { .. })), "{r}");
            assert!(p.derivative(r).is_err());
        }
        let g = BarrierWeight::new(1.0).unwrap();
        assert!(g.eval(-1.0).is_err());
    }

    #[test]
    fn constructor_rejects_supercritical() {
        assert!(LogPotential::new(2.0, 1.0).is_err());
        assert!(LogPotential::new(0.0, 1.0).is_err());
        assert!(LogPotential::new(1.0, 1.0).is_err());
    }

    #[test]
    fn barrier_values() {
        let g1 = BarrierWeight::new(1.0).unwrap();
        assert_eq!(g1.eval(0.0).unwrap(), (1.0, 0.0));
        assert_relative_eq!(g1.value(0.5).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        let g2 = BarrierWeight::new(2.0).unwrap();
        assert_relative_eq!(g2.value(0.9).unwrap(), 27.700_831_024_930_75, max_relative = 1e-13);
        assert!(BarrierWeight::new(0.5).is_err());
    }

    #[test]
    fn barrier_derivative_identity() {
        for s in [1.0, 2.0, 3.0, 4.5] {
            let g = BarrierWeight::new(s).unwrap();
            let g_next = BarrierWeight::new(s + 1.0).unwrap();
            for i in 0..200 {
                let x = -0.999 + 1.998 * i as f64 / 199.0;
                let (_, dg) = g.eval(x).unwrap();
                let expect = 2.0 * s * x * g_next.value(x).unwrap();
                assert!((dg - expect).abs() <= 1e-12 * expect.abs().max(1e-300));
                if x.abs() >= 0.5 {
                    assert!(g_next.value(x).unwrap() <= dg.abs() / s * (1.0 + 1e-14));
                }
            }
        }
    }

    #[test]
    fn resolvent_examples() {
        let (p, c) = standard();
        let cfg = ResolventConfig::default();
        for lambda in [1e-3, 0.1, 1.0, 10.0] {
            assert_eq!(resolvent(&p, &c, lambda, 0.0, &cfg).unwrap().value, 0.0);
        }
        // golden value from a 400-step high-precision bisection on (-1, 1)
        let j = resolvent(&p, &c, 0.1, 2.0, &cfg).unwrap();
        assert!(j.value > 0.0 && j.value < 1.0);
        assert!((1.0 - j.value - 5.578_936_128_157_472e-10).abs() < 3e-16);
        assert!(j.residual.abs() <= 1e-10);

        let j = resolvent(&p, &c, 1e-6, 0.5, &cfg).unwrap();
        assert!((j.value - 0.5).abs() <= 1e-4);
        assert!((j.value - 0.499_999_950_693_872_1).abs() < 1e-12);
    }

    #[test]
    fn yosida_examples() {
        let (p, c) = standard();
        let cfg = ResolventConfig::default();
        assert_eq!(yosida_derivative(&p, &c, 0.3, 0.0, &cfg).unwrap(), 0.0);
        let v = yosida_derivative(&p, &c, 0.01, 0.5, &cfg).unwrap();
        assert!((v - p.derivative(0.5).unwrap()).abs() < 0.05);
        assert_relative_eq!(v, -0.450_366_024_161_897_1, max_relative = 1e-12);
    }

    #[test]
    fn yosida_monotone_composition() {
        let (p, c) = standard();
        let cfg = ResolventConfig::default();
        let lambda = 0.05;
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let x = -5.0 + 10.0 * i as f64 / 400.0;
            let j = resolvent(&p, &c, lambda, x, &cfg).unwrap();
            let v = p.derivative_from_atanh(j.value, j.atanh) + c.c_f * j.value;
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn yosida_is_lipschitz() {
        let (p, c) = standard();
        let cfg = ResolventConfig::default();
        for lambda in [1e-2, 1e-1, 1.0] {
            let bound = 1.0 / lambda + c.c_f;
            let xs: Vec<f64> = (0..=2000).map(|i| -5.0 + 10.0 * i as f64 / 2000.0).collect();
            let vals: Vec<f64> = xs
                .iter()
                .map(|&x| yosida_derivative(&p, &c, lambda, x, &cfg).unwrap())
                .collect();
            for w in 0..xs.len() - 1 {
                let q = (vals[w + 1] - vals[w]).abs() / (xs[w + 1] - xs[w]);
                assert!(q <= bound * (1.0 + 1e-6), "lambda {lambda}: {q} > {bound}");
            }
        }
    }

    #[test]
    fn h1_report_examples() {
        let (p, c) = standard();
        assert_eq!(c.c_f, 1.0);
        let report = check_h1(&p, &c, 2000).unwrap();
        assert!(report.passed(), "{report:?}");

        let weak = PotentialConstants::new(0.5, 1.0).unwrap();
        let report = check_h1(&p, &weak, 2000).unwrap();
        assert!(!report.passed());
        assert!(!report.find("F'' >= -C_F").unwrap().passed);

        assert!(check_h1(&p, &c, 10).is_err());
    }

    #[test]
    fn natural_constant_covers_upper_bound() {
        let p = LogPotential::new(1.0, 1.5).unwrap();
        let c = PotentialConstants::natural(&p);
        assert!(check_h1(&p, &c, 4000).unwrap().passed());
    }
}
