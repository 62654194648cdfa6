//! Reproducible Brownian increments.
//!
//! Trajectory `i` of an ensemble with master seed `s` uses the seed
//! `splitmix64(s + (i + 1) * 0x9E3779B97F4A7C15)`, i.e. the `i`-th output of a
//! SplitMix64 counter started at `s`. Mode `k` of that trajectory draws from
//! the ChaCha8 stream number `k` under that seed, so every `(s, i, k, step)`
//! maps to a fixed position of a counter-based cipher, independent of worker
//! scheduling and of how many other trajectories or modes exist.
//!
//! Coarse time steps are built by summing `ratio` consecutive fine
//! increments in a fixed order, which couples runs at different step sizes
//! path by path.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trajectory `id` under `master_seed`.
pub fn trajectory_seed(master_seed: u64, id: u64) -> u64 {
    splitmix64(master_seed.wrapping_add(id.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Per-trajectory source of mode increments `Δβ_k ~ N(0, ratio * fine_dt)`.
#[derive(Clone, Debug)]
pub struct BrownianPath {
    streams: Vec<ChaCha8Rng>,
    sqrt_fine_dt: f64,
    ratio: u64,
}

impl BrownianPath {
    pub fn new(seed: u64, modes: usize, fine_dt: f64, ratio: u64) -> Result<Self> {
        if !(fine_dt > 0.0) || ratio == 0 {
            return Err(Error::InvalidParameter(format!(
                "brownian path needs fine_dt > 0 and ratio >= 1 (got {fine_dt}, {ratio})"
            )));
        }
        let streams = (0..modes)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                rng
            })
            .collect();
        Ok(Self {
            streams,
            sqrt_fine_dt: fine_dt.sqrt(),
            ratio,
        })
    }

    pub fn modes(&self) -> usize {
        self.streams.len()
    }

    pub fn ratio(&self) -> u64 {
        self.ratio
    }

    /// One fine increment per mode.
    pub fn fine_increments(&mut self, out: &mut [f64]) {
        for (o, rng) in out.iter_mut().zip(&mut self.streams) {
            let z: f64 = StandardNormal.sample(rng);
            *o = self.sqrt_fine_dt * z;
        }
    }

    /// Increment over one step of size `ratio * fine_dt`: the ordered sum of
    /// `ratio` fine increments.
    pub fn next_increments(&mut self, out: &mut [f64]) -> Result<()> {
        if out.len() != self.streams.len() {
            return Err(Error::DimensionMismatch {
                expected: self.streams.len(),
                found: out.len(),
            });
        }
        let sqrt_dt = self.sqrt_fine_dt;
        for (o, rng) in out.iter_mut().zip(&mut self.streams) {
            let mut acc = 0.0;
            for _ in 0..self.ratio {
                let z: f64 = StandardNormal.sample(rng);
                acc += sqrt_dt * z;
            }
            *o = acc;
        }
        Ok(())
    }
}
