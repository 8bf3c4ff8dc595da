use crate::model::{velocity_gradient, FlowState};
use crate::spectral::{
    derivative, derivative_norm_many, leray_project, sobolev_norm_many, SobolevIndex, SpectralField,
};

use crate::model::tensor_norm;

/// Norms of one state. Every norm is an integral (Parseval) norm on the
/// `[0, 2π)³` box; L∞ quantities are grid maxima of pointwise Frobenius norms.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRecord {
    pub t: f64,
    pub l2_u: f64,
    pub h2_u: f64,
    pub h2_tau: f64,
    pub l2_pdivtau: f64,
    pub h1_pdivtau: f64,
    pub min_trtau: f64,
    pub max_trtau: f64,
    pub l2_grad_trtau: f64,
    pub l2_grad2_trtau: f64,
    pub linf_grad_u: f64,
    pub linf_grad2_u: f64,
    /// `‖∇u‖_{H²}`
    pub h2_grad_u: f64,
    /// `‖∇²u‖_{L²}`
    pub l2_grad2_u: f64,
    /// `‖∇³u‖_{L²}`
    pub l2_grad3_u: f64,
    /// `‖∇ℙdiv τ‖_{L²}`
    pub l2_grad_pdivtau: f64,
}

impl EnergyRecord {
    pub const CSV_HEADER: &'static str = "t,l2_u,h2_u,h2_tau,l2_pdivtau,h1_pdivtau,min_trtau,max_trtau,\
l2_grad_trtau,l2_grad2_trtau,linf_grad_u,linf_grad2_u,h2_grad_u,l2_grad2_u,l2_grad3_u,l2_grad_pdivtau";

    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.l2_u,
            self.h2_u,
            self.h2_tau,
            self.l2_pdivtau,
            self.h1_pdivtau,
            self.min_trtau,
            self.max_trtau,
            self.l2_grad_trtau,
            self.l2_grad2_trtau,
            self.linf_grad_u,
            self.linf_grad2_u,
            self.h2_grad_u,
            self.l2_grad2_u,
            self.l2_grad3_u,
            self.l2_grad_pdivtau,
        ]
    }

    /// `h2_u + l2_pdivtau`, the quantity with an algebraic decay bound.
    pub fn decaying_quantity(&self) -> f64 {
        self.h2_u + self.l2_pdivtau
    }
}

fn max_pointwise_frobenius(components: &[Vec<f64>], weights: &[f64]) -> f64 {
    let npts = components.first().map_or(0, |c| c.len());
    (0..npts)
        .map(|p| {
            components
                .iter()
                .zip(weights)
                .map(|(c, w)| w * c[p] * c[p])
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Computes every monitored norm of `state`.
pub fn record(state: &FlowState) -> EnergyRecord {
    let u = [&state.u[0], &state.u[1], &state.u[2]];
    let pdiv = leray_project(&state.tau.divergence());
    let pd = [&pdiv[0], &pdiv[1], &pdiv[2]];
    let tr = state.tau.trace();

    let grad_u = velocity_gradient(&state.u);
    // ∂_a∂_b u_i for a <= b, off-diagonal pairs weighted twice
    let mut second: Vec<SpectralField> = Vec::with_capacity(18);
    let mut second_w: Vec<f64> = Vec::with_capacity(18);
    for i in 0..3 {
        for a in 0..3 {
            for b in a..3 {
                second.push(derivative(&grad_u[i * 3 + a], b));
                second_w.push(if a == b { 1.0 } else { 2.0 });
            }
        }
    }
    let mut inputs: Vec<&SpectralField> = vec![&tr];
    inputs.extend(grad_u.iter());
    inputs.extend(second.iter());
    let phys = crate::spectral::to_physical_many(&inputs);
    let trp = &phys[0];
    let linf_grad_u = max_pointwise_frobenius(&phys[1..10], &[1.0; 9]);
    let linf_grad2_u = max_pointwise_frobenius(&phys[10..], &second_w);

    EnergyRecord {
        t: state.t,
        l2_u: sobolev_norm_many(&u, SobolevIndex::L2),
        h2_u: sobolev_norm_many(&u, SobolevIndex::H2),
        h2_tau: tensor_norm(&state.tau, SobolevIndex::H2),
        l2_pdivtau: sobolev_norm_many(&pd, SobolevIndex::L2),
        h1_pdivtau: sobolev_norm_many(&pd, SobolevIndex::H1),
        min_trtau: trp.iter().copied().fold(f64::INFINITY, f64::min),
        max_trtau: trp.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        l2_grad_trtau: derivative_norm_many(&[&tr], 1),
        l2_grad2_trtau: derivative_norm_many(&[&tr], 2),
        linf_grad_u,
        linf_grad2_u,
        h2_grad_u: h2_of_gradient(&u),
        l2_grad2_u: derivative_norm_many(&u, 2),
        l2_grad3_u: derivative_norm_many(&u, 3),
        l2_grad_pdivtau: derivative_norm_many(&pd, 1),
    }
}

/// `‖∇u‖_{H²} = ((2π)³ Σ_k |k|²(1+|k|²)² |û|²)^{1/2}`.
fn h2_of_gradient(u: &[&SpectralField]) -> f64 {
    let g1 = derivative_norm_many(u, 1).powi(2);
    let g2 = derivative_norm_many(u, 2).powi(2);
    let g3 = derivative_norm_many(u, 3).powi(2);
    (g1 + 2.0 * g2 + g3).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FlowState;
    use crate::spectral::{Grid, SymTensor, BOX_VOLUME};

    #[test]
    fn zero_state_record_is_zero() {
        let g = Grid::new(8).unwrap();
        let r = record(&FlowState::zeros(g));
        assert!(r.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn identity_stress_record() {
        let g = Grid::new(8).unwrap();
        let s = FlowState::new(0.0, FlowState::zeros(g).u, SymTensor::isotropic(&SpectralField::constant(g, 1.0)))
            .unwrap();
        let r = record(&s);
        assert!((r.h2_tau.powi(2) - 3.0 * BOX_VOLUME).abs() < 1e-10);
        assert_eq!(r.l2_pdivtau, 0.0);
        assert!((r.min_trtau - 3.0).abs() < 1e-14 && (r.max_trtau - 3.0).abs() < 1e-14);
    }

    #[test]
    fn gradient_h2_matches_direct_sum() {
        let g = Grid::new(16).unwrap();
        let u = crate::spectral::random_solenoidal(g, 4, 2);
        let grads: Vec<SpectralField> = (0..9).map(|c| derivative(&u[c / 3], c % 3)).collect();
        let refs: Vec<&SpectralField> = grads.iter().collect();
        let direct = sobolev_norm_many(&refs, SobolevIndex::H2);
        let via = h2_of_gradient(&[&u[0], &u[1], &u[2]]);
        assert!((direct - via).abs() < 1e-12 * direct);
    }

    #[test]
    fn shear_mode_linf_gradients() {
        let g = Grid::new(16).unwrap();
        let z = SpectralField::zeros(g);
        let u = [SpectralField::from_fn(g, |x| x[1].sin()), z.clone(), z];
        let s = FlowState::new(0.0, u, SymTensor::zeros(g)).unwrap();
        let r = record(&s);
        assert!((r.linf_grad_u - 1.0).abs() < 1e-12);
        assert!((r.linf_grad2_u - 1.0).abs() < 1e-12);
    }
}
