use super::{Field, Grid};
use crate::error::{Error, Result};

/// Eigenpairs of the discrete Dirichlet Laplacian on a [`Grid`].
///
/// In one dimension the eigenvectors are the sampled sines
/// `e_j(x_i) = sqrt(2/L) sin(j π x_i / L)`, orthonormal under the
/// `h`-weighted inner product, with eigenvalues of `-Δ_h`
/// `(4/h²) sin²(j π h / (2L))`. In `d` dimensions eigenpairs are tensor
/// products, and modes are ranked by increasing eigenvalue (ties broken by
/// multi-index order).
///
/// Transforms apply the dense `n × n` sine matrix along each axis, which costs
/// `O(d n^{d+1})` per transform and is exact to rounding.
#[derive(Clone, Debug)]
pub struct Spectrum {
    grid: Grid,
    /// Row `j` holds `e_{j+1}` at the `n` nodes.
    sines: Vec<f64>,
    eigen_1d: Vec<f64>,
    /// Eigenvalue of every tensor mode in flat (row-major) order.
    eigenvalues: Vec<f64>,
    /// `rank[flat]` = position of the mode in increasing-eigenvalue order.
    rank: Vec<usize>,
    /// Flat mode indices sorted by eigenvalue.
    order: Vec<usize>,
    n_modes: usize,
}

impl Spectrum {
    /// All `n^d` modes.
    pub fn new(grid: Grid) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let l = grid.length();
        let pi = std::f64::consts::PI;
        let norm = (2.0 / l).sqrt();
        let mut sines = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                sines[j * n + i] = norm * (pi * ((j + 1) * (i + 1)) as f64 / (n + 1) as f64).sin();
            }
        }
        let eigen_1d: Vec<f64> = (1..=n)
            .map(|j| {
                let s = (j as f64 * pi * h / (2.0 * l)).sin();
                4.0 / (h * h) * s * s
            })
            .collect();
        let eigenvalues: Vec<f64> = (0..grid.len())
            .map(|flat| {
                let idx = grid.multi_index(flat);
                (0..grid.dim()).map(|a| eigen_1d[idx[a]]).sum()
            })
            .collect();
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]).then(a.cmp(&b)));
        let mut rank = vec![0; grid.len()];
        for (r, &flat) in order.iter().enumerate() {
            rank[flat] = r;
        }
        Self {
            grid,
            sines,
            eigen_1d,
            eigenvalues,
            rank,
            order,
            n_modes: grid.len(),
        }
    }

    /// The first `n_modes` modes (by eigenvalue).
    pub fn dirichlet(grid: Grid, n_modes: usize) -> Result<Self> {
        if n_modes == 0 || n_modes > grid.len() {
            return Err(Error::InvalidParameter(format!(
                "n_modes = {n_modes} must be in 1..={}",
                grid.len()
            )));
        }
        let mut s = Self::new(grid);
        s.n_modes = n_modes;
        Ok(s)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// Eigenvalues of `-Δ_h` in increasing order (first `n_modes`).
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.order[..self.n_modes]
            .iter()
            .map(|&f| self.eigenvalues[f])
            .collect()
    }

    pub fn eigenvalues_1d(&self) -> &[f64] {
        &self.eigen_1d
    }

    /// Eigenvector of rank `r` (0-based) as a field.
    pub fn eigenvector(&self, r: usize) -> Result<Field> {
        if r >= self.n_modes {
            return Err(Error::InvalidParameter(format!("mode {r} >= {}", self.n_modes)));
        }
        let mut coeffs = vec![0.0; self.grid.len()];
        coeffs[self.order[r]] = 1.0;
        Field::new(self.grid, self.synthesize(coeffs))
    }

    fn apply_axis(&self, data: &mut [f64], axis: usize, transpose: bool, scale: f64) {
        let n = self.grid.n();
        let stride = self.grid.stride(axis);
        let block = stride * n;
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = data[base + i * stride];
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    if transpose {
                        for (i, l) in line.iter().enumerate() {
                            acc += self.sines[i * n + j] * l;
                        }
                    } else {
                        let row = &self.sines[j * n..(j + 1) * n];
                        for (s, l) in row.iter().zip(&line) {
                            acc += s * l;
                        }
                    }
                    *o = scale * acc;
                }
                for (i, o) in out.iter().enumerate() {
                    data[base + i * stride] = *o;
                }
            }
        }
    }

    /// Coefficients `c = ⟨u, e⟩_h` in flat mode order.
    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let mut data = values.to_vec();
        let h = self.grid.spacing();
        for a in 0..self.grid.dim() {
            self.apply_axis(&mut data, a, false, h);
        }
        data
    }

    /// Node values `Σ c e` from flat-ordered coefficients.
    pub fn synthesize(&self, mut coeffs: Vec<f64>) -> Vec<f64> {
        for a in 0..self.grid.dim() {
            self.apply_axis(&mut coeffs, a, true, 1.0);
        }
        coeffs
    }

    /// Whether flat mode `flat` is among the kept modes.
    pub fn keeps(&self, flat: usize, n_modes: usize) -> bool {
        self.rank[flat] < n_modes
    }

    pub fn eigenvalue_flat(&self, flat: usize) -> f64 {
        self.eigenvalues[flat]
    }

    /// Orthogonal projection onto the span of the first `n_modes` modes.
    pub fn project(&self, u: &Field, n_modes: usize) -> Result<Field> {
        if n_modes > self.n_modes {
            return Err(Error::InvalidParameter(format!(
                "projection onto {n_modes} modes, only {} available",
                self.n_modes
            )));
        }
        let mut c = self.analyze(u.values());
        for (flat, v) in c.iter_mut().enumerate() {
            if !self.keeps(flat, n_modes) {
                *v = 0.0;
            }
        }
        Field::new(self.grid, self.synthesize(c))
    }

    /// `Δ_h u` through the eigenbasis.
    pub fn laplacian(&self, u: &Field) -> Result<Field> {
        let mut c = self.analyze(u.values());
        for (flat, v) in c.iter_mut().enumerate() {
            *v *= -self.eigenvalues[flat];
        }
        Field::new(self.grid, self.synthesize(c))
    }

    /// `(I - dt Δ_h)^{-1} u`.
    pub fn implicit_heat(&self, values: &[f64], dt: f64) -> Vec<f64> {
        let mut c = self.analyze(values);
        for (flat, v) in c.iter_mut().enumerate() {
            *v /= 1.0 + dt * self.eigenvalues[flat];
        }
        self.synthesize(c)
    }
}
