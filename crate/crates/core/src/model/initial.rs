//! Initial-data builders for the three scenario families.

use std::str::FromStr;

use super::state::{tensor_norm, FlowState};
use crate::error::{PttError, Result};
use crate::spectral::{
    grid_max_abs, random_solenoidal, sobolev_norm_many, Grid, SobolevIndex, SpectralField, SymTensor, BOX_VOLUME,
};

/// Wavenumber radius of the random perturbations.
const RANDOM_KMAX: i64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Small data with trace bounded below by `c₀ > 0`.
    Global,
    /// Trace somewhere negative.
    Blowup,
    /// Mean-free small data for comparison with the linear semigroup.
    Linear,
}

impl FromStr for ScenarioKind {
    type Err = PttError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(ScenarioKind::Global),
            "blowup" => Ok(ScenarioKind::Blowup),
            "linear" => Ok(ScenarioKind::Linear),
            other => Err(PttError::param("kind", format!("unknown initial-data kind `{other}`"))),
        }
    }
}

/// Inputs of [`make_initial_data`].
///
/// `delta0` is measured in the volume-averaged H² norm
/// ([`FlowState::averaged_h2_norm`]). For `Global` it is the total size of
/// `(u₀, τ₀)`; for `Blowup` it is the size of the velocity and traceless
/// stress perturbation on top of the trace profile; for `Linear` it is the
/// total size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub kind: ScenarioKind,
    pub delta0: f64,
    /// Lower bound of `tr τ₀` for `Global`; `None` means `δ₀/2`.
    pub c0: Option<f64>,
    pub eps_tilde0: f64,
    /// `min tr τ₀` for `Blowup`.
    pub trace_min: f64,
    pub seed: u64,
}

impl InitialData {
    pub fn global(delta0: f64, seed: u64) -> Self {
        InitialData {
            kind: ScenarioKind::Global,
            delta0,
            c0: None,
            eps_tilde0: 1.0,
            trace_min: -2.0,
            seed,
        }
    }

    pub fn blowup(trace_min: f64, delta0: f64, seed: u64) -> Self {
        InitialData {
            kind: ScenarioKind::Blowup,
            trace_min,
            ..Self::global(delta0, seed)
        }
    }

    pub fn linear(delta0: f64, seed: u64) -> Self {
        InitialData {
            kind: ScenarioKind::Linear,
            ..Self::global(delta0, seed)
        }
    }

    pub fn effective_c0(&self) -> f64 {
        self.c0.unwrap_or(0.5 * self.delta0)
    }
}

fn averaged(norm: f64) -> f64 {
    norm / BOX_VOLUME.sqrt()
}

fn velocity_norm(u: &[SpectralField; 3]) -> f64 {
    sobolev_norm_many(&[&u[0], &u[1], &u[2]], SobolevIndex::H2)
}

/// Trace profile `3c₀/2 + (c₀²ε̃₀/4) sin x₁ sin x₂ sin x₃`.
pub fn global_trace_profile(grid: Grid, c0: f64, eps_tilde0: f64) -> SpectralField {
    let amp = 0.25 * c0 * c0 * eps_tilde0;
    SpectralField::from_fn(grid, |x| 1.5 * c0 + amp * x[0].sin() * x[1].sin() * x[2].sin())
}

/// Trace profile with minimum `m < 0` at the origin,
/// `m + β(1 − (cos x₁ + cos x₂ + cos x₃)/3)` with `β = ¾|m|`.
pub fn blowup_trace_profile(grid: Grid, m: f64) -> SpectralField {
    let beta = 0.75 * m.abs();
    SpectralField::from_fn(grid, |x| m + beta * (1.0 - (x[0].cos() + x[1].cos() + x[2].cos()) / 3.0))
}

/// Builds `(u₀, τ₀)` for one of the scenario families. Deterministic in `seed`.
pub fn make_initial_data(grid: Grid, spec: &InitialData) -> Result<FlowState> {
    if !(spec.delta0.is_finite() && spec.delta0 >= 0.0) {
        return Err(PttError::param("delta0", format!("must be finite and >= 0, got {}", spec.delta0)));
    }
    let u_raw = random_solenoidal(grid, RANDOM_KMAX, spec.seed);
    match spec.kind {
        ScenarioKind::Global => build_global(grid, spec, u_raw),
        ScenarioKind::Blowup => build_blowup(grid, spec, u_raw),
        ScenarioKind::Linear => {
            let tau = SymTensor::random(grid, RANDOM_KMAX, spec.seed.wrapping_add(1));
            let raw = FlowState::new(0.0, u_raw, tau)?;
            let n = raw.averaged_h2_norm();
            let s = if n > 0.0 { spec.delta0 / n } else { 0.0 };
            FlowState::new(0.0, raw.u.map(|c| c.scale(s)), raw.tau.scale(s))
        }
    }
}

fn build_global(grid: Grid, spec: &InitialData, u_raw: [SpectralField; 3]) -> Result<FlowState> {
    let c0 = spec.effective_c0();
    if !(c0 > 0.0) {
        return Err(PttError::param("c0", format!("global data needs c0 > 0, got {c0}")));
    }
    let trace = global_trace_profile(grid, c0, spec.eps_tilde0);
    let base = SymTensor::isotropic(&trace.scale(1.0 / 3.0));
    let sigma = SymTensor::random_traceless(grid, RANDOM_KMAX, spec.seed.wrapping_add(1));

    // the traceless part is Frobenius-orthogonal to the isotropic base
    let base_sq = averaged(tensor_norm(&base, SobolevIndex::H2)).powi(2);
    let pert_sq = averaged(velocity_norm(&u_raw)).powi(2) + averaged(tensor_norm(&sigma, SobolevIndex::H2)).powi(2);
    let room = spec.delta0 * spec.delta0 - base_sq;
    if room <= 0.0 || pert_sq <= 0.0 {
        return Err(PttError::Construction(format!(
            "trace profile alone has averaged H² norm {:.6e} >= delta0 = {:.6e}",
            base_sq.sqrt(),
            spec.delta0
        )));
    }
    let s = (room / pert_sq).sqrt();
    let mut tau = base;
    tau.axpy(s, &sigma);
    let state = FlowState::new(0.0, u_raw.map(|c| c.scale(s)), tau)?;

    let min_tr = state.tau.trace().to_physical().into_iter().fold(f64::INFINITY, f64::min);
    if min_tr < c0 {
        return Err(PttError::Construction(format!("min tr τ₀ = {min_tr:.6e} below c0 = {c0:.6e}")));
    }
    Ok(state)
}

fn build_blowup(grid: Grid, spec: &InitialData, u_raw: [SpectralField; 3]) -> Result<FlowState> {
    let m = spec.trace_min;
    if !(m < 0.0 && m.is_finite()) {
        return Err(PttError::param("trace_min", format!("blow-up data needs min tr τ₀ < 0, got {m}")));
    }
    let trace = blowup_trace_profile(grid, m);
    let sigma = SymTensor::random_traceless(grid, RANDOM_KMAX, spec.seed.wrapping_add(1));
    let pert = (averaged(velocity_norm(&u_raw)).powi(2) + averaged(tensor_norm(&sigma, SobolevIndex::H2)).powi(2)).sqrt();
    let s = if pert > 0.0 { spec.delta0 / pert } else { 0.0 };
    let mut tau = SymTensor::isotropic(&trace.scale(1.0 / 3.0));
    tau.axpy(s, &sigma);
    let state = FlowState::new(0.0, u_raw.map(|c| c.scale(s)), tau)?;
    let tr = state.tau.trace().to_physical();
    let min_tr = tr.iter().copied().fold(f64::INFINITY, f64::min);
    if (min_tr - m).abs() > 1e-12 * grid_max_abs(&tr).max(1.0) {
        return Err(PttError::Construction(format!("min tr τ₀ = {min_tr} differs from requested {m}")));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn global_data_has_requested_size_and_trace_bound() {
        let g = Grid::new(16).unwrap();
        let spec = InitialData::global(0.01, 7);
        let s = make_initial_data(g, &spec).unwrap();
        assert!((s.averaged_h2_norm() - 0.01).abs() < 1e-10);
        let min_tr = s.tau.trace().to_physical().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min_tr >= 0.005);
        s.check_invariants().unwrap();
    }

    #[test]
    fn global_trace_matches_profile() {
        let g = Grid::new(16).unwrap();
        let spec = InitialData { eps_tilde0: 3.0, ..InitialData::global(0.02, 1) };
        let s = make_initial_data(g, &spec).unwrap();
        let c0 = 0.01;
        let expect = g.sample(|x| 1.5 * c0 + 0.25 * c0 * c0 * 3.0 * x[0].sin() * x[1].sin() * x[2].sin());
        let got = s.tau.trace().to_physical();
        let err = got.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn global_rejects_nonpositive_c0() {
        let g = Grid::new(8).unwrap();
        let spec = InitialData { c0: Some(0.0), ..InitialData::global(0.01, 1) };
        assert!(matches!(make_initial_data(g, &spec), Err(PttError::Parameter { name: "c0", .. })));
    }

    #[test]
    fn global_rejects_oversized_trace() {
        let g = Grid::new(8).unwrap();
        // c0 = 2δ₀ makes the trace profile alone larger than δ₀
        let spec = InitialData { c0: Some(0.02), ..InitialData::global(0.01, 1) };
        assert!(matches!(make_initial_data(g, &spec), Err(PttError::Construction(_))));
    }

    #[test]
    fn blowup_minimum_is_exact() {
        let g = Grid::new(16).unwrap();
        let s = make_initial_data(g, &InitialData::blowup(-2.0, 0.05, 3)).unwrap();
        let tr = s.tau.trace().to_physical();
        let min = tr.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min + 2.0).abs() < 1e-12);
        assert!(tr[0] <= min);
        assert!(make_initial_data(g, &InitialData::blowup(0.5, 0.05, 3)).is_err());
    }

    #[test]
    fn same_seed_same_state() {
        let g = Grid::new(16).unwrap();
        for spec in [InitialData::global(0.02, 9), InitialData::blowup(-2.0, 0.02, 9), InitialData::linear(0.1, 9)] {
            let a = make_initial_data(g, &spec).unwrap();
            let b = make_initial_data(g, &spec).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn linear_data_has_requested_size() {
        let g = Grid::new(16).unwrap();
        let s = make_initial_data(g, &InitialData::linear(0.1, 4)).unwrap();
        assert!((s.averaged_h2_norm() - 0.1).abs() < 1e-12);
        assert!(s.tau.comps.iter().all(|c| c.mean().norm() < 1e-15));
    }
}
