//! Finite differences on the Dirichlet box `(0, L)^d`, `d ∈ {1, 2, 3}`.
//!
//! The Laplacian is the standard `(2d+1)`-point stencil with zero ghost
//! values; [`Spectrum`] diagonalises it exactly with sine modes, which gives
//! both the implicit diffusion solve and the Galerkin projection `P_n`.

mod grid;
mod spectrum;

pub use grid::{Field, Grid};
pub use spectrum::Spectrum;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Discrete `Δ_h u` with homogeneous Dirichlet ghosts.
pub fn laplacian_apply(u: &Field) -> Field {
    let g = *u.grid();
    let n = g.n();
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let v = u.values();
    let mut out = vec![0.0; v.len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let idx = g.multi_index(flat);
        let mut acc = -2.0 * g.dim() as f64 * v[flat];
        for a in 0..g.dim() {
            let s = g.stride(a);
            if idx[a] > 0 {
                acc += v[flat - s];
            }
            if idx[a] + 1 < n {
                acc += v[flat + s];
            }
        }
        *o = acc * inv_h2;
    }
    Field::new(g, out).expect("same grid")
}

/// `‖∇_h u‖²`: forward differences over every grid edge, boundary ghost
/// edges included, weighted by `h^d`.
pub fn gradient_energy(u: &Field) -> f64 {
    let g = *u.grid();
    let n = g.n();
    let h = g.spacing();
    let v = u.values();
    let mut acc = 0.0;
    for (flat, &x) in v.iter().enumerate() {
        let idx = g.multi_index(flat);
        for a in 0..g.dim() {
            let s = g.stride(a);
            // edge towards the previous node (or the ghost)
            let prev = if idx[a] > 0 { v[flat - s] } else { 0.0 };
            acc += (x - prev) * (x - prev);
            if idx[a] + 1 == n {
                acc += x * x;
            }
        }
    }
    acc / (h * h) * g.cell_volume()
}

/// Pair range for the Hölder seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HolderRange {
    /// Pairs within Euclidean distance `radius`.
    Within(f64),
    /// Every node pair.
    AllPairs,
}

impl HolderRange {
    /// Pairs within `L / 4`.
    pub fn default_for(grid: &Grid) -> Self {
        HolderRange::Within(grid.length() / 4.0)
    }
}

/// `max |u(x) - u(y)| / |x - y|^α` over interior node pairs.
pub fn holder_seminorm(u: &Field, alpha: f64, range: HolderRange) -> f64 {
    let g = *u.grid();
    let n = g.n() as isize;
    let h = g.spacing();
    let d = g.dim();
    let reach = match range {
        HolderRange::Within(r) => ((r / h) * (1.0 + 1e-12)).floor() as isize,
        HolderRange::AllPairs => n - 1,
    };
    let radius2 = match range {
        HolderRange::Within(r) => (r / h) * (r / h) * (1.0 + 1e-12),
        HolderRange::AllPairs => f64::INFINITY,
    };
    // lexicographically positive offsets, each unordered pair once
    let mut offsets: Vec<([isize; 3], f64)> = Vec::new();
    let span = |a: usize| if a < d { -reach..=reach } else { 0..=0 };
    for i in span(0) {
        for j in span(1) {
            for k in span(2) {
                let off = [i, j, k];
                if off.iter().find(|&&c| c != 0).is_none_or(|&c| c < 0) {
                    continue;
                }
                let r2 = (i * i + j * j + k * k) as f64;
                if r2 > radius2 {
                    continue;
                }
                offsets.push((off, (r2.sqrt() * h).powf(alpha)));
            }
        }
    }
    let v = u.values();
    let mut best: f64 = 0.0;
    for (flat, &x) in v.iter().enumerate() {
        let idx = g.multi_index(flat);
        for (off, denom) in &offsets {
            let mut other = 0isize;
            let mut inside = true;
            for a in 0..d {
                let c = idx[a] as isize + off[a];
                if c < 0 || c >= n {
                    inside = false;
                    break;
                }
                other += c * g.stride(a) as isize;
            }
            if inside {
                best = best.max((x - v[other as usize]).abs() / denom);
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub l2: f64,
    pub h1: f64,
    /// `‖Δ_h u‖_{L²}`.
    pub h2_proxy: f64,
    pub sup: f64,
    pub holder: f64,
}

pub fn l2_norm(u: &Field) -> f64 {
    let s: f64 = u.values().iter().map(|v| v * v).sum();
    (s * u.grid().cell_volume()).sqrt()
}

pub fn norms(u: &Field, alpha: f64, range: HolderRange) -> Norms {
    let l2 = l2_norm(u);
    Norms {
        l2,
        h1: (l2 * l2 + gradient_energy(u)).sqrt(),
        h2_proxy: l2_norm(&laplacian_apply(u)),
        sup: u.sup(),
        holder: holder_seminorm(u, alpha, range),
    }
}

/// Rectangle rule `h^d Σ φ(u(x))` over interior nodes.
pub fn integrate<F>(u: &Field, phi: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for &v in u.values() {
        acc += phi(v)?;
    }
    Ok(acc * u.grid().cell_volume())
}
