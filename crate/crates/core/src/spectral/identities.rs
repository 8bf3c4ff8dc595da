//! Commutator identities between the Leray projection, divergence and the
//! transport / trace-weighting products of the stress equation.

use super::field::SpectralField;
use super::ops::{
    derivative, divergence, from_physical_dealiased, inverse_laplacian_unchecked, leray_project,
    max_spectral_divergence, sobolev_norm_many, to_physical_many, SobolevIndex, VectorField,
};
use super::tensor::{sym_index, SymTensor};
use crate::error::{PttError, Result};

/// Residual norms `‖LHS − RHS‖_{L²}` of the two projection identities, with
/// the LHS norms for scaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityResiduals {
    /// `ℙdiv(u·∇τ)` against its commutator expansion.
    pub transport: f64,
    pub transport_lhs: f64,
    /// `ℙdiv((tr τ)τ)` against its commutator expansion.
    pub trace_weight: f64,
    pub trace_weight_lhs: f64,
}

impl IdentityResiduals {
    /// Residuals divided by their LHS norms (absolute when the LHS vanishes).
    pub fn relative(&self) -> (f64, f64) {
        let rel = |r: f64, l: f64| if l > 0.0 { r / l } else { r };
        (
            rel(self.transport, self.transport_lhs),
            rel(self.trace_weight, self.trace_weight_lhs),
        )
    }
}

fn l2(v: &VectorField) -> f64 {
    sobolev_norm_many(&[&v[0], &v[1], &v[2]], SobolevIndex::L2)
}

fn diff_norm(a: &VectorField, b: &VectorField) -> f64 {
    let d: [SpectralField; 3] = std::array::from_fn(|i| &a[i] - &b[i]);
    l2(&d)
}

/// Evaluates both sides of
///
/// ```text
/// ℙdiv(u·∇τ)     = ℙ(u·∇ℙdivτ) + ℙ(∇u·∇τ) − ℙ(∇u·∇Δ⁻¹divdivτ)
/// ℙdiv((trτ)τ)   = ℙ((trτ)ℙdivτ) + ℙ(τ·∇trτ) − ℙ(∇trτ Δ⁻¹divdivτ)
/// ```
///
/// with every product formed on the grid and truncated.
pub fn projection_identity_residuals(u: &VectorField, tau: &SymTensor) -> Result<IdentityResiduals> {
    let grid = u[0].grid();
    tau.grid().ensure_same(&grid)?;
    let scale = u.iter().map(|c| c.max_abs_coeff()).fold(0.0, f64::max);
    let div = max_spectral_divergence(u);
    if div > 1e-12 * scale.max(1.0) {
        return Err(PttError::precondition(format!(
            "velocity is not solenoidal: max |k·û| = {div:e}"
        )));
    }

    let tr = tau.trace();
    let pdiv = leray_project(&tau.divergence());
    let phi = inverse_laplacian_unchecked(&divergence(&tau.divergence()));

    // physical-space inputs
    let grad_u: Vec<SpectralField> = (0..9).map(|c| derivative(&u[c / 3], c % 3)).collect();
    let grad_tau: Vec<SpectralField> = (0..18).map(|c| derivative(&tau.comps[c / 3], c % 3)).collect();
    let grad_pdiv: Vec<SpectralField> = (0..9).map(|c| derivative(&pdiv[c / 3], c % 3)).collect();
    let grad_tr: Vec<SpectralField> = (0..3).map(|a| derivative(&tr, a)).collect();
    let grad_phi: Vec<SpectralField> = (0..3).map(|a| derivative(&phi, a)).collect();

    let mut inputs: Vec<&SpectralField> = Vec::with_capacity(60);
    inputs.extend(u.iter());
    inputs.extend(grad_u.iter());
    inputs.extend(grad_tau.iter());
    inputs.extend(tau.comps.iter());
    inputs.push(&tr);
    inputs.extend(grad_tr.iter());
    inputs.extend(pdiv.iter());
    inputs.extend(grad_pdiv.iter());
    inputs.extend(grad_phi.iter());
    inputs.push(&phi);
    let phys = to_physical_many(&inputs);
    let (pu, rest) = phys.split_at(3);
    let (pgu, rest) = rest.split_at(9);
    let (pgt, rest) = rest.split_at(18);
    let (ptau, rest) = rest.split_at(6);
    let (ptr, rest) = rest.split_at(1);
    let (pgtr, rest) = rest.split_at(3);
    let (ppdiv, rest) = rest.split_at(3);
    let (pgpdiv, rest) = rest.split_at(9);
    let (pgphi, pphi) = rest.split_at(3);
    let ptr = &ptr[0];
    let pphi = &pphi[0];

    let npts = grid.len();
    let gu = |l: usize, j: usize| &pgu[l * 3 + j]; // ∂_j u_l
    let gt = |slot: usize, l: usize| &pgt[slot * 3 + l]; // ∂_l τ_slot
    let tau_ij = |i: usize, j: usize| &ptau[sym_index(i, j)];

    // u·∇τ as a symmetric tensor
    let transport: Vec<Vec<f64>> = (0..6)
        .map(|slot| {
            (0..npts)
                .map(|p| (0..3).map(|l| pu[l][p] * gt(slot, l)[p]).sum())
                .collect()
        })
        .collect();
    // (trτ)τ
    let weighted: Vec<Vec<f64>> = (0..6)
        .map(|slot| (0..npts).map(|p| ptr[p] * ptau[slot][p]).collect())
        .collect();

    let mut vec_products: Vec<Vec<f64>> = Vec::with_capacity(18);
    for i in 0..3 {
        // u·∇(ℙdivτ)_i
        vec_products.push((0..npts).map(|p| (0..3).map(|l| pu[l][p] * pgpdiv[i * 3 + l][p]).sum()).collect());
    }
    for i in 0..3 {
        // Σ_j Σ_l ∂_j u_l ∂_l τ_ij
        vec_products.push(
            (0..npts)
                .map(|p| {
                    let mut s = 0.0;
                    for j in 0..3 {
                        let slot = sym_index(i, j);
                        for l in 0..3 {
                            s += gu(l, j)[p] * gt(slot, l)[p];
                        }
                    }
                    s
                })
                .collect(),
        );
    }
    for i in 0..3 {
        // Σ_l ∂_i u_l ∂_l φ
        vec_products.push((0..npts).map(|p| (0..3).map(|l| gu(l, i)[p] * pgphi[l][p]).sum()).collect());
    }
    for i in 0..3 {
        // (trτ)(ℙdivτ)_i
        vec_products.push((0..npts).map(|p| ptr[p] * ppdiv[i][p]).collect());
    }
    for i in 0..3 {
        // Σ_j τ_ij ∂_j trτ
        vec_products.push((0..npts).map(|p| (0..3).map(|j| tau_ij(i, j)[p] * pgtr[j][p]).sum()).collect());
    }
    for i in 0..3 {
        // ∂_i trτ · φ
        vec_products.push((0..npts).map(|p| pgtr[i][p] * pphi[p]).collect());
    }

    let mut all = transport;
    all.extend(weighted);
    all.extend(vec_products);
    let spec = from_physical_dealiased(grid, all);
    let transport_t = SymTensor {
        comps: std::array::from_fn(|c| spec[c].clone()),
    };
    let weighted_t = SymTensor {
        comps: std::array::from_fn(|c| spec[6 + c].clone()),
    };
    let v = |block: usize| -> VectorField { std::array::from_fn(|i| spec[12 + 3 * block + i].clone()) };

    let lhs1 = leray_project(&transport_t.divergence());
    let rhs1 = combine(&leray_project(&v(0)), &leray_project(&v(1)), &leray_project(&v(2)));
    let lhs2 = leray_project(&weighted_t.divergence());
    let rhs2 = combine(&leray_project(&v(3)), &leray_project(&v(4)), &leray_project(&v(5)));

    Ok(IdentityResiduals {
        transport: diff_norm(&lhs1, &rhs1),
        transport_lhs: l2(&lhs1),
        trace_weight: diff_norm(&lhs2, &rhs2),
        trace_weight_lhs: l2(&lhs2),
    })
}

/// `a + b − c`.
fn combine(a: &VectorField, b: &VectorField, c: &VectorField) -> VectorField {
    std::array::from_fn(|i| {
        let mut s = &a[i] + &b[i];
        s -= &c[i];
        s
    })
}
