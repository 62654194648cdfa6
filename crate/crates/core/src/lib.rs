//! Stochastic Allen-Cahn equation with logarithmic potential and
//! barrier-degenerate multiplicative noise on `(0, L)^d`.
//!
//! ```text
//! du - Δu dt + F'(u) dt = Σ_k h_k(u) dβ_k,   u = 0 on ∂O,
//! F(r) = θ/2 [(1+r) ln(1+r) + (1-r) ln(1-r)] - θ0/2 r² + const.
//! ```
//!
//! The crate provides the potential and its Yosida approximation, the
//! noise family and its constants, a sine-diagonalised finite-difference
//! discretisation, two time-stepping schemes, separation diagnostics with a
//! computable certificate, and a deterministic parallel ensemble runner.

pub mod brownian;
pub mod check;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod discretization;
pub mod ensemble;
pub mod error;
pub mod noise;
pub mod potential;
pub mod roots;
mod serde_ext;
pub mod solver;

pub use error::{Error, Result};
