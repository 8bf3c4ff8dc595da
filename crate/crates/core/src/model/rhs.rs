//! Right-hand sides of the PTT system and derived fields.

use nalgebra::Matrix3;
use num_complex::Complex64;
use rayon::prelude::*;

use super::kinematics::{deformation, q_pointwise, sym_matrix, sym_slots, velocity_gradient};
use super::params::ModelParams;
use super::state::FlowState;
use crate::spectral::{
    derivative, divergence, from_physical_dealiased, inverse_laplacian_unchecked, ksq, laplacian, leray_project,
    to_physical_many, SpectralField, SymTensor, VectorField, BOX_VOLUME,
};

/// Time derivative of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub du: VectorField,
    pub dtau: SymTensor,
}

impl Tendency {
    pub fn zeros(grid: crate::spectral::Grid) -> Self {
        let z = FlowState::zeros(grid);
        Tendency { du: z.u, dtau: z.tau }
    }
}

/// Products that have to be formed on the grid: `u·∇u` and the stress
/// source `−u·∇τ − (a + b trτ)τ − Q(τ, ∇u)`, both truncated.
struct GridProducts {
    advection: VectorField,
    stress: SymTensor,
}

fn grid_products(state: &FlowState, p: &ModelParams) -> GridProducts {
    let grid = state.grid();
    let grad_u = velocity_gradient(&state.u);
    let grad_tau: Vec<SpectralField> = (0..18).map(|c| derivative(&state.tau.comps[c / 3], c % 3)).collect();
    let mut inputs: Vec<&SpectralField> = Vec::with_capacity(36);
    inputs.extend(state.u.iter());
    inputs.extend(grad_u.iter());
    inputs.extend(state.tau.comps.iter());
    inputs.extend(grad_tau.iter());
    let phys = to_physical_many(&inputs);
    let (pu, rest) = phys.split_at(3);
    let (pg, rest) = rest.split_at(9);
    let (pt, pgt) = rest.split_at(6);

    let (a, b, lambda) = (p.a, p.b, p.lambda);
    let values: Vec<[f64; 9]> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let u = [pu[0][i], pu[1][i], pu[2][i]];
            let g = Matrix3::from_fn(|r, c| pg[r * 3 + c][i]);
            let tv: [f64; 6] = std::array::from_fn(|s| pt[s][i]);
            let t = sym_matrix(&tv);
            let adv = g * nalgebra::Vector3::from(u);
            let q = sym_slots(&q_pointwise(&t, &g, lambda));
            let damp = a + b * (tv[0] + tv[3] + tv[5]);
            let mut out = [0.0; 9];
            out[0] = adv[0];
            out[1] = adv[1];
            out[2] = adv[2];
            for s in 0..6 {
                let transport = u[0] * pgt[s * 3][i] + u[1] * pgt[s * 3 + 1][i] + u[2] * pgt[s * 3 + 2][i];
                out[3 + s] = -transport - damp * tv[s] - q[s];
            }
            out
        })
        .collect();
    let samples: Vec<Vec<f64>> = (0..9).map(|c| values.iter().map(|v| v[c]).collect()).collect();
    let spec = from_physical_dealiased(grid, samples);
    let mut spec = spec.into_iter();
    let advection = std::array::from_fn(|_| spec.next().expect("nine outputs"));
    let stress = SymTensor {
        comps: std::array::from_fn(|_| spec.next().expect("nine outputs")),
    };
    GridProducts { advection, stress }
}

/// Everything except the viscous term `μΔu`:
/// `du = ℙ(−u·∇u + μ₁ div τ)`, `dτ = −u·∇τ − (a + b trτ)τ − Q + μ₂D(u)`.
pub fn explicit_tendency(state: &FlowState, p: &ModelParams) -> Tendency {
    let products = grid_products(state, p);
    let div_tau = state.tau.divergence();
    let forcing: VectorField = std::array::from_fn(|i| {
        let mut f = div_tau[i].scale(p.mu1);
        f -= &products.advection[i];
        f
    });
    let mut du = leray_project(&forcing);
    for c in du.iter_mut() {
        c.coeffs_mut()[0] = Complex64::default();
    }
    let mut dtau = products.stress;
    if p.mu2 != 0.0 {
        dtau.axpy(p.mu2, &deformation(&state.u));
    }
    Tendency { du, dtau }
}

/// `ℙ(−u·∇u + μ₁ div τ) + μΔu`.
pub fn momentum_rhs(state: &FlowState, p: &ModelParams) -> VectorField {
    let mut du = explicit_tendency(state, p).du;
    for (d, u) in du.iter_mut().zip(&state.u) {
        d.axpy(p.mu, &laplacian(u));
    }
    du
}

/// `−u·∇τ − (a + b trτ)τ − Q(τ, ∇u) + μ₂D(u)`.
pub fn stress_rhs(state: &FlowState, p: &ModelParams) -> SymTensor {
    explicit_tendency(state, p).dtau
}

/// `τ₁₁ + τ₂₂ + τ₃₃`.
pub fn trace_field(tau: &SymTensor) -> SpectralField {
    tau.trace()
}

/// Mean-free pressure `p = Δ⁻¹ div(μ₁ div τ − u·∇u)`.
pub fn pressure(state: &FlowState, p: &ModelParams) -> SpectralField {
    let products = grid_products(state, p);
    let div_tau = state.tau.divergence();
    let forcing: VectorField = std::array::from_fn(|i| {
        let mut f = div_tau[i].scale(p.mu1);
        f -= &products.advection[i];
        f
    });
    inverse_laplacian_unchecked(&divergence(&forcing))
}

/// `u·∇u`, truncated.
pub fn advection(state: &FlowState) -> VectorField {
    grid_products(state, &ModelParams::default()).advection
}

/// `Σ_{m=0}^{2} ∫ (∇^m div τ · ∇^m u + ∇^m D(u) : ∇^m τ) dx` and the sum of
/// the absolute values of its two halves. The first vanishes for symmetric
/// `τ` by integration by parts.
pub fn elastic_exchange(state: &FlowState) -> (f64, f64) {
    let grid = state.grid();
    let div_tau = state.tau.divergence();
    let d = deformation(&state.u);
    let weights = SymTensor::frobenius_weights();
    let mut first = 0.0;
    let mut second = 0.0;
    for idx in 0..grid.len() {
        let q = ksq(grid.wavevector(idx)) as f64;
        let w = 1.0 + q + q * q;
        for i in 0..3 {
            first += w * (div_tau[i].coeffs()[idx] * state.u[i].coeffs()[idx].conj()).re;
        }
        for s in 0..6 {
            second += w * weights[s] * (d.comps[s].coeffs()[idx] * state.tau.comps[s].coeffs()[idx].conj()).re;
        }
    }
    (
        BOX_VOLUME * (first + second),
        BOX_VOLUME * (first.abs() + second.abs()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        dealias, gradient, grid_max_abs, max_spectral_divergence, random_field, random_solenoidal, Grid,
    };

    fn max_phys(f: &SpectralField) -> f64 {
        grid_max_abs(&f.to_physical())
    }

    fn random_state(g: Grid, seed: u64, amp: f64) -> FlowState {
        let u = random_solenoidal(g, 4, seed).map(|c| c.scale(amp));
        let tau = SymTensor::random(g, 4, seed + 1).scale(amp);
        FlowState::new(0.0, u, tau).unwrap()
    }

    #[test]
    fn zero_state_has_zero_tendency() {
        let g = Grid::new(16).unwrap();
        let s = FlowState::zeros(g);
        let t = explicit_tendency(&s, &ModelParams::default());
        assert!(t.du.iter().chain(t.dtau.comps.iter()).all(|c| c.max_abs_coeff() == 0.0));
    }

    #[test]
    fn isotropic_stress_drives_no_flow() {
        let g = Grid::new(16).unwrap();
        let phi = dealias(&random_field(g, 4, 8));
        let s = FlowState::new(0.0, FlowState::zeros(g).u, SymTensor::isotropic(&phi)).unwrap();
        let du = momentum_rhs(&s, &ModelParams::default());
        assert!(du.iter().all(|c| c.max_abs_coeff() < 1e-15));
    }

    #[test]
    fn shear_mode_decays_viscously() {
        let g = Grid::new(16).unwrap();
        let shear = SpectralField::from_fn(g, |x| x[1].sin());
        let z = SpectralField::zeros(g);
        let s = FlowState::new(0.0, [shear.clone(), z.clone(), z], SymTensor::zeros(g)).unwrap();
        let p = ModelParams::default();
        let du = momentum_rhs(&s, &p);
        assert!((&du[0] + &shear).max_abs_coeff() < 1e-14);
        assert!(du[1].max_abs_coeff() < 1e-14 && du[2].max_abs_coeff() < 1e-14);
    }

    #[test]
    fn constant_isotropic_stress_decays_quadratically() {
        let g = Grid::new(8).unwrap();
        let c = 0.7;
        let s = FlowState::new(0.0, FlowState::zeros(g).u, SymTensor::isotropic(&SpectralField::constant(g, c)))
            .unwrap();
        let dtau = stress_rhs(&s, &ModelParams::default());
        for (slot, comp) in dtau.comps.iter().enumerate() {
            let expect = if [0, 3, 5].contains(&slot) { -3.0 * c * c } else { 0.0 };
            assert!((comp.mean().re - expect).abs() < 1e-14);
            assert!(comp.max_abs_coeff() - comp.mean().norm() < 1e-14);
        }
    }

    #[test]
    fn zero_stress_is_driven_by_deformation() {
        let g = Grid::new(16).unwrap();
        let u = random_solenoidal(g, 4, 3);
        let s = FlowState::new(0.0, u, SymTensor::zeros(g)).unwrap();
        let p = ModelParams { mu2: 0.7, ..Default::default() };
        let dtau = stress_rhs(&s, &p);
        let d = deformation(&s.u).scale(0.7);
        for (a, b) in dtau.comps.iter().zip(&d.comps) {
            assert!((a - b).max_abs_coeff() < 1e-14);
        }
    }

    #[test]
    fn trace_of_stress_tendency_follows_riccati_transport() {
        let g = Grid::new(32).unwrap();
        let s = random_state(g, 40, 0.5);
        for p in [ModelParams::default(), ModelParams { a: 0.3, b: 2.0, ..Default::default() }] {
            let lhs = stress_rhs(&s, &p).trace();
            let tr = s.tau.trace();
            let gt = gradient(&tr);
            let uphys: Vec<Vec<f64>> = s.u.iter().map(|c| c.to_physical()).collect();
            let gphys: Vec<Vec<f64>> = gt.iter().map(|c| c.to_physical()).collect();
            let trp = tr.to_physical();
            let rhs: Vec<f64> = (0..g.len())
                .map(|i| {
                    let adv: f64 = (0..3).map(|a| uphys[a][i] * gphys[a][i]).sum();
                    -adv - p.b * trp[i] * trp[i] - p.a * trp[i]
                })
                .collect();
            let rhs = dealias(&SpectralField::from_physical(g, &rhs).unwrap());
            let err = max_phys(&(&lhs - &rhs));
            assert!(err < 1e-10, "trace defect {err}");
        }
    }

    #[test]
    fn tendency_preserves_solenoidality() {
        let g = Grid::new(16).unwrap();
        let s = random_state(g, 12, 1.0);
        let du = momentum_rhs(&s, &ModelParams::default());
        let scale = du.iter().map(|c| c.max_abs_coeff()).fold(0.0, f64::max);
        assert!(max_spectral_divergence(&du) <= 1e-12 * scale);
    }

    #[test]
    fn pressure_cases() {
        let g = Grid::new(16).unwrap();
        let p = ModelParams::default();
        assert!(pressure(&FlowState::zeros(g), &p).max_abs_coeff() == 0.0);

        let phi = dealias(&random_field(g, 4, 30));
        let s = FlowState::new(0.0, FlowState::zeros(g).u, SymTensor::isotropic(&phi)).unwrap();
        assert!((&pressure(&s, &p) - &phi).max_abs_coeff() < 1e-14);

        // ∇p carries exactly the gradient part of the forcing
        let s = random_state(g, 31, 1.0);
        let pr = pressure(&s, &p);
        let adv = advection(&s);
        let div_tau = s.tau.divergence();
        let gp = gradient(&pr);
        let residual: VectorField = std::array::from_fn(|i| {
            let mut f = div_tau[i].clone();
            f -= &adv[i];
            f -= &gp[i];
            f
        });
        let projected = leray_project(&residual);
        for (a, b) in projected.iter().zip(&residual) {
            assert!((a - b).max_abs_coeff() < 1e-10);
        }
    }

    #[test]
    fn elastic_exchange_cancels() {
        let g = Grid::new(16).unwrap();
        let s = random_state(g, 50, 1.0);
        let (sum, scale) = elastic_exchange(&s);
        assert!(scale > 0.0);
        assert!(sum.abs() <= 1e-10 * scale, "{sum} vs {scale}");
    }

    #[test]
    fn symmetric_closure_against_full_tensor() {
        // stress tendency of the six stored slots equals the symmetric part
        // of the nine-entry evaluation
        let g = Grid::new(32).unwrap();
        let s = random_state(g, 60, 0.8);
        let p = ModelParams { lambda: 0.4, a: 0.2, ..Default::default() };
        let dtau = stress_rhs(&s, &p);
        let grad = velocity_gradient(&s.u);
        let gphys: Vec<Vec<f64>> = grad.iter().map(|c| c.to_physical()).collect();
        let tphys: Vec<Vec<f64>> = s.tau.comps.iter().map(|c| c.to_physical()).collect();
        let uphys: Vec<Vec<f64>> = s.u.iter().map(|c| c.to_physical()).collect();
        let dgrad: Vec<Vec<f64>> = (0..18)
            .map(|c| derivative(&s.tau.comps[c / 3], c % 3).to_physical())
            .collect();
        let mut full = vec![vec![0.0; g.len()]; 9];
        for i in 0..g.len() {
            for r in 0..3 {
                for c in 0..3 {
                    let slot = crate::spectral::sym_index(r, c);
                    let mut t = [[0.0; 3]; 3];
                    let mut gm = [[0.0; 3]; 3];
                    for x in 0..3 {
                        for y in 0..3 {
                            t[x][y] = tphys[crate::spectral::sym_index(x, y)][i];
                            gm[x][y] = gphys[x * 3 + y][i];
                        }
                    }
                    let tr = t[0][0] + t[1][1] + t[2][2];
                    let mut q = 0.0;
                    for k in 0..3 {
                        let w_kc = 0.5 * (gm[k][c] - gm[c][k]);
                        let w_rk = 0.5 * (gm[r][k] - gm[k][r]);
                        let d_rk = 0.5 * (gm[r][k] + gm[k][r]);
                        let d_kc = 0.5 * (gm[k][c] + gm[c][k]);
                        q += t[r][k] * w_kc - w_rk * t[k][c] + p.lambda * (d_rk * t[k][c] + t[r][k] * d_kc);
                    }
                    let adv: f64 = (0..3).map(|l| uphys[l][i] * dgrad[slot * 3 + l][i]).sum();
                    full[r * 3 + c][i] = -adv - (p.a + p.b * tr) * t[r][c] - q;
                }
            }
        }
        let d = deformation(&s.u);
        for r in 0..3 {
            for c in 0..3 {
                let mut f = dealias(&SpectralField::from_physical(g, &full[r * 3 + c]).unwrap());
                f.axpy(p.mu2, d.get(r, c));
                let err = max_phys(&(&f - dtau.get(r, c)));
                assert!(err < 1e-12, "entry ({r},{c}) differs by {err}");
            }
        }
    }
}
