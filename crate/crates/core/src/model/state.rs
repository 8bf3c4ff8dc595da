use crate::error::{PttError, Result};
use crate::spectral::{
    dealias, dealias_vector, leray_project, max_spectral_divergence, sobolev_norm_many, Grid, SobolevIndex,
    SpectralField, SymTensor, VectorField, BOX_VOLUME,
};

/// Divergence tolerance for the velocity, relative to its largest coefficient.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-12;

/// Velocity and symmetric stress at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub u: VectorField,
    pub tau: SymTensor,
}

impl FlowState {
    pub fn zeros(grid: Grid) -> Self {
        FlowState {
            t: 0.0,
            u: std::array::from_fn(|_| SpectralField::zeros(grid)),
            tau: SymTensor::zeros(grid),
        }
    }

    /// Builds a state, projecting and truncating `u` and truncating `tau`.
    pub fn new(t: f64, u: VectorField, tau: SymTensor) -> Result<Self> {
        let grid = u[0].grid();
        for c in u.iter().skip(1) {
            grid.ensure_same(&c.grid())?;
        }
        grid.ensure_same(&tau.grid())?;
        let mut u = dealias_vector(&leray_project(&u));
        for c in u.iter_mut() {
            c.coeffs_mut()[0] = Default::default();
        }
        let tau = tau.map(dealias);
        Ok(FlowState { t, u, tau })
    }

    pub fn grid(&self) -> Grid {
        self.u[0].grid()
    }

    /// All nine stored components, velocity first.
    pub fn components(&self) -> [&SpectralField; 9] {
        let [u0, u1, u2] = &self.u;
        let [t0, t1, t2, t3, t4, t5] = &self.tau.comps;
        [u0, u1, u2, t0, t1, t2, t3, t4, t5]
    }

    pub fn max_divergence(&self) -> f64 {
        max_spectral_divergence(&self.u)
    }

    pub fn max_velocity_mean(&self) -> f64 {
        self.u.iter().map(|c| c.mean().norm()).fold(0.0, f64::max)
    }

    /// Checks `div u = 0` (relative to the velocity scale) and a zero velocity mean.
    pub fn check_invariants(&self) -> Result<()> {
        let scale = self.u.iter().map(|c| c.max_abs_coeff()).fold(0.0, f64::max).max(1.0);
        let div = self.max_divergence();
        if div > DIVERGENCE_TOLERANCE * scale {
            return Err(PttError::InvariantFailure(format!("max |k·û| = {div:e}")));
        }
        let mean = self.max_velocity_mean();
        if mean > 1e-12 * scale {
            return Err(PttError::InvariantFailure(format!("velocity mean {mean:e}")));
        }
        if self.components().iter().any(|c| c.coeffs().iter().any(|z| !z.is_finite())) {
            return Err(PttError::InvariantFailure("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// `(‖u‖²_{H²} + ‖τ‖²_{H²})^{1/2}` with the Frobenius sum over all nine
    /// stress entries.
    pub fn h2_norm(&self) -> f64 {
        let u = sobolev_norm_many(&[&self.u[0], &self.u[1], &self.u[2]], SobolevIndex::H2);
        let t = tensor_norm(&self.tau, SobolevIndex::H2);
        (u * u + t * t).sqrt()
    }

    /// `h2_norm` divided by `(2π)^{3/2}`, i.e. measured against the volume
    /// average. Initial-data amplitudes are stated in this normalisation.
    pub fn averaged_h2_norm(&self) -> f64 {
        self.h2_norm() / BOX_VOLUME.sqrt()
    }
}

/// Frobenius-summed Sobolev norm of a symmetric tensor (off-diagonal entries
/// counted twice).
pub fn tensor_norm(tau: &SymTensor, s: SobolevIndex) -> f64 {
    let w = SymTensor::frobenius_weights();
    tau.comps
        .iter()
        .zip(w)
        .map(|(c, wi)| wi * sobolev_norm_many(&[c], s).powi(2))
        .sum::<f64>()
        .sqrt()
}
