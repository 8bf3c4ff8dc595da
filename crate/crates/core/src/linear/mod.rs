//! Exact mode-by-mode semigroup of the linearised `(u, ℙdiv τ)` system
//!
//! ```text
//! û_t = −|k|² û + ŵ,      ŵ_t = −(|k|²/2) û,      w = ℙ div τ,
//! ```
//!
//! i.e. `d/dt (û, ŵ) = A(k)(û, ŵ)` with `A = [[−|k|², 1], [−|k|²/2, 0]]`
//! acting on each vector component (the `I₃` block structure). Coefficients
//! are the preset `μ = μ₁ = μ₂ = 1`.

mod semigroup;

pub use semigroup::{
    duhamel_defect, eigenvalues, evolve_linear, green_blocks, matrix_exponential_oracle, mode_matrix,
    semigroup_table, write_semigroup_csv, GreenBlocks, ModeMatrix, Regime, SemigroupRow, LINEAR_ENVELOPE_C,
};
