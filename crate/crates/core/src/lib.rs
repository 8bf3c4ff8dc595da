//! Pseudo-spectral simulator and verification suite for the periodic
//! incompressible Phan-Thien–Tanner (PTT) viscoelastic system
//!
//! ```text
//! u_t + u·∇u − μΔu + ∇p = μ₁ div τ,     div u = 0,
//! τ_t + u·∇τ + (a + b tr τ)τ + Q(τ, ∇u) = μ₂ D(u),
//! ```
//!
//! on the torus `[0, 2π)³`, together with the exact oracles used to check it:
//! the Riccati law for `tr τ` along particle paths, the mode-by-mode
//! semigroup of the linearised `(u, ℙdiv τ)` system, and the Leray
//! commutator identities.

pub mod characteristics;
pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod integrator;
pub mod linear;
pub mod model;
pub mod spectral;

pub use error::{PttError, Result};
