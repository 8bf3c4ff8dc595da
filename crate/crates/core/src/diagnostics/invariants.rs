//! Structural invariants monitored during a run.

use crate::error::{PttError, Result};
use crate::integrator::RunObserver;
use crate::model::{deformation, q_bilinear, velocity_gradient, FlowState};
use crate::spectral::{derivative, grid_max_abs, to_physical_many, SpectralField, SYM_PAIRS};

use super::EnergyRecord;

pub const DIVERGENCE_LIMIT: f64 = 1e-11;
pub const MEAN_LIMIT: f64 = 1e-12;
pub const TRACE_Q_LIMIT: f64 = 1e-12;
pub const I3_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantReport {
    pub t: f64,
    /// `max_k |k·û(k)|`, relative to `max(1, max|û|)`.
    pub divergence: f64,
    pub velocity_mean: f64,
    /// `‖tr Q(τ, ∇u)‖_∞` relative to `max(1, ‖τ‖_∞‖∇u‖_∞)`, with slip `0`.
    pub trace_q: f64,
    /// `|I₃|` relative to its Cauchy–Schwarz scale.
    pub i3: f64,
}

impl InvariantReport {
    pub fn within_limits(&self) -> bool {
        self.divergence <= DIVERGENCE_LIMIT
            && self.velocity_mean <= MEAN_LIMIT
            && self.trace_q <= TRACE_Q_LIMIT
            && self.i3 <= I3_LIMIT
    }

    /// Componentwise maximum.
    pub fn worst(&self, other: &InvariantReport) -> InvariantReport {
        InvariantReport {
            t: self.t.max(other.t),
            divergence: self.divergence.max(other.divergence),
            velocity_mean: self.velocity_mean.max(other.velocity_mean),
            trace_q: self.trace_q.max(other.trace_q),
            i3: self.i3.max(other.i3),
        }
    }
}

fn ordered_derivative(f: &SpectralField, axes: &[usize]) -> SpectralField {
    axes.iter().fold(f.clone(), |g, &a| derivative(&g, a))
}

/// `I₃ = Σ_{m≤2} Σ_{|α|=m} ∫ ∂^α div τ · ∂^α u + ∂^α D(u) : ∂^α τ dx`,
/// evaluated by grid quadrature. Returns `(I₃, scale)`.
pub fn i3_cancellation(state: &FlowState) -> (f64, f64) {
    let grid = state.grid();
    let div_tau = state.tau.divergence();
    let d = deformation(&state.u);
    let mut multi: Vec<Vec<usize>> = vec![vec![]];
    for a in 0..3 {
        multi.push(vec![a]);
    }
    for a in 0..3 {
        for b in 0..3 {
            multi.push(vec![a, b]);
        }
    }
    let weight = grid.spacing().powi(3);
    let (mut total, mut scale) = (0.0, 0.0);
    for alpha in &multi {
        let mut fields: Vec<SpectralField> = Vec::with_capacity(18);
        for i in 0..3 {
            fields.push(ordered_derivative(&div_tau[i], alpha));
            fields.push(ordered_derivative(&state.u[i], alpha));
        }
        for s in 0..6 {
            fields.push(ordered_derivative(&d.comps[s], alpha));
            fields.push(ordered_derivative(&state.tau.comps[s], alpha));
        }
        let refs: Vec<&SpectralField> = fields.iter().collect();
        let phys = to_physical_many(&refs);
        let dot = |a: &[f64], b: &[f64], w: f64| -> (f64, f64, f64) {
            let mut s = 0.0;
            let (mut na, mut nb) = (0.0, 0.0);
            for (x, y) in a.iter().zip(b) {
                s += x * y;
                na += x * x;
                nb += y * y;
            }
            (w * s * weight, w * w * na * weight, nb * weight)
        };
        let (mut a_sq, mut b_sq) = (0.0, 0.0);
        for i in 0..3 {
            let (s, na, nb) = dot(&phys[2 * i], &phys[2 * i + 1], 1.0);
            total += s;
            a_sq += na;
            b_sq += nb;
        }
        let (mut c_sq, mut e_sq) = (0.0, 0.0);
        for (s, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            let w = if i == j { 1.0 } else { 2.0 };
            let (v, na, nb) = dot(&phys[6 + 2 * s], &phys[7 + 2 * s], w);
            total += v;
            c_sq += na / w;
            e_sq += nb * w;
        }
        scale += (a_sq * b_sq).sqrt() + (c_sq * e_sq).sqrt();
    }
    (total, scale)
}

/// Evaluates every structural invariant of `state`.
pub fn structural_invariants(state: &FlowState) -> InvariantReport {
    let vel_scale = state.u.iter().map(|c| c.max_abs_coeff()).fold(0.0, f64::max).max(1.0);
    let grad = velocity_gradient(&state.u);
    let mut fields: Vec<&SpectralField> = grad.iter().collect();
    fields.extend(state.tau.comps.iter());
    let phys = to_physical_many(&fields);
    let grad_max = phys[..9].iter().map(|p| grid_max_abs(p)).fold(0.0, f64::max);
    let tau_max = phys[9..].iter().map(|p| grid_max_abs(p)).fold(0.0, f64::max);
    let tr_q = q_bilinear(&state.tau, &state.u, 0.0).trace().to_physical();
    let (i3, i3_scale) = i3_cancellation(state);
    InvariantReport {
        t: state.t,
        divergence: state.max_divergence() / vel_scale,
        velocity_mean: state.max_velocity_mean() / vel_scale,
        trace_q: grid_max_abs(&tr_q) / (tau_max * grad_max).max(1.0),
        i3: if i3_scale > 0.0 { i3.abs() / i3_scale } else { i3.abs() },
    }
}

/// Checks the structural invariants at every record; fails the run on the
/// first violation.
#[derive(Debug, Clone, Default)]
pub struct InvariantMonitor {
    pub checks: usize,
    pub worst: Option<InvariantReport>,
}

impl InvariantMonitor {
    pub fn observe(&mut self, state: &FlowState) -> Result<InvariantReport> {
        let rep = structural_invariants(state);
        self.checks += 1;
        self.worst = Some(self.worst.map_or(rep, |w| w.worst(&rep)));
        if !rep.within_limits() {
            return Err(PttError::InvariantFailure(format!("structural invariants at t={}: {rep:?}", state.t)));
        }
        Ok(rep)
    }
}

impl RunObserver for InvariantMonitor {
    fn on_record(&mut self, state: &FlowState, _rec: &EnergyRecord) -> Result<()> {
        self.observe(state).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_solenoidal, Grid, SymTensor};

    #[test]
    fn random_state_satisfies_invariants() {
        let g = Grid::new(16).unwrap();
        let s = FlowState::new(0.0, random_solenoidal(g, 4, 3), SymTensor::random(g, 4, 4)).unwrap();
        let rep = structural_invariants(&s);
        assert!(rep.within_limits(), "{rep:?}");
        let (i3, scale) = i3_cancellation(&s);
        assert!(scale > 1.0);
        assert!(i3.abs() < 1e-10 * scale);
    }

    #[test]
    fn zero_state_is_clean() {
        let rep = structural_invariants(&FlowState::zeros(Grid::new(8).unwrap()));
        assert_eq!(rep.i3, 0.0);
        assert!(rep.within_limits());
    }

    #[test]
    fn monitor_rejects_divergent_velocity() {
        let g = Grid::new(8).unwrap();
        let mut s = FlowState::zeros(g);
        s.u[0] = SpectralField::from_fn(g, |x| x[0].sin());
        let mut m = InvariantMonitor::default();
        assert!(matches!(m.observe(&s), Err(PttError::InvariantFailure(_))));
        assert_eq!(m.checks, 1);
    }
}
