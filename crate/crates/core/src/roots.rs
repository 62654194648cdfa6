//! Safeguarded scalar root finding.
//!
//! Every nonlinear scalar solve in the crate (potential wells, resolvents,
//! the implicit reaction substep) reduces to a strictly increasing function
//! on a known bracket. [`newton_bracketed`] keeps the bracket updated with
//! the sign of every iterate and falls back to bisection whenever a Newton
//! step would leave it or stalls, so it cannot diverge.

use crate::error::{Error, Result};

/// Result of a converged solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Finds a root of an increasing function on `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. Requires `f(lo) <= 0 <= f(hi)`.
/// Convergence is declared when `|value| <= tol`, or when the bracket has
/// collapsed to adjacent floats (the residual is then as small as the
/// representation allows and is reported as is).
pub fn newton_bracketed<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: Fn(f64) -> (f64, f64),
{
    if !(lo < hi) {
        return Err(Error::InvalidParameter(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut x = if x0 > lo && x0 < hi { x0 } else { 0.5 * (lo + hi) };
    let mut best = f64::INFINITY;
    let mut last_abs = f64::INFINITY;

    for it in 1..=max_iter {
        let (g, dg) = f(x);
        if !g.is_finite() {
            return Err(Error::Overflow(format!("root function at x = {x}")));
        }
        best = best.min(g.abs());
        if g.abs() <= tol {
            return Ok(Root {
                x,
                residual: g,
                iterations: it,
            });
        }
        if g < 0.0 {
            lo = x;
        } else {
            hi = x;
        }

        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // bracket exhausted at f64 resolution
            return Ok(Root {
                x,
                residual: g,
                iterations: it,
            });
        }

        // Newton only while it keeps halving the residual inside the bracket.
        let newton = x - g / dg;
        let take_newton = dg > 0.0 && newton > lo && newton < hi && g.abs() <= 0.5 * last_abs;
        last_abs = g.abs();
        x = if take_newton { newton } else { mid };
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual: best,
    })
}

/// Solves `a * tanh(z) + b * z = c` for `z`.
///
/// Requires `b > 0` and `a + b > 0`, which makes the left side strictly
/// increasing with derivative `a * sech(z)^2 + b >= min(a + b, b)`.
pub fn solve_tanh_linear(a: f64, b: f64, c: f64, tol: f64, max_iter: usize) -> Result<Root> {
    if !(b > 0.0) || !(a + b > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tanh-linear equation needs b > 0 and a + b > 0 (a = {a}, b = {b}, c = {c})"
        )));
    }
    let f = |z: f64| {
        let t = z.tanh();
        let sech2 = 1.0 - t * t;
        // 1 - tanh^2 underflows to 0 long before sech^2 does
        let sech2 = if sech2 > 0.0 { sech2 } else { 4.0 * (-2.0 * z.abs()).exp() };
        (a * t + b * z - c, a * sech2 + b)
    };
    let lo = (c - a.abs()) / b - 1.0;
    let hi = (c + a.abs()) / b + 1.0;
    // tanh(z) ~ z near 0 gives a good first guess in the bulk.
    let guess = if a > 0.0 {
        let y = (c / (a + b)).clamp(-0.999, 0.999);
        y.atanh()
    } else {
        c / b
    };
    newton_bracketed(f, lo, hi, guess, tol, max_iter)
}
