//! Run observer that carries particles along the flow.

use super::particles::{
    advect, flow_bound_check, predict_blowup_time, sample_trajectories, velocity_interpolant, FlowBoundReport,
    ParticleSet, TrajectorySample, VNorm,
};
use crate::diagnostics::EnergyRecord;
use crate::error::{PttError, Result};
use crate::integrator::RunObserver;
use crate::model::{velocity_gradient, FlowState};
use crate::spectral::{derivative, to_physical_many, FourierInterpolant, SpectralField, VectorField};

/// Allowed `|det ∇q − 1|`.
pub const DET_TOLERANCE: f64 = 1e-6;

/// `(‖∇u‖_∞, ‖∇²u‖_∞)` on the grid: the pointwise operator norm of `∇u`
/// and the pointwise Frobenius norm of `∇²u`.
pub fn gradient_maxima(u: &VectorField) -> (f64, f64) {
    let grad = velocity_gradient(u);
    let mut second: Vec<SpectralField> = Vec::with_capacity(18);
    let mut weight = Vec::with_capacity(18);
    for comp in u {
        for a in 0..3 {
            let da = derivative(comp, a);
            for b in a..3 {
                second.push(derivative(&da, b));
                weight.push(if a == b { 1.0 } else { 2.0 });
            }
        }
    }
    let mut refs: Vec<&SpectralField> = grad.iter().collect();
    refs.extend(second.iter());
    let phys = to_physical_many(&refs);
    let mut g1: f64 = 0.0;
    let mut g2: f64 = 0.0;
    for pt in 0..phys[0].len() {
        let m: [f64; 9] = std::array::from_fn(|k| phys[k][pt]);
        g1 = g1.max(operator_norm3(&m));
        let h: f64 = (0..18).map(|k| weight[k] * phys[9 + k][pt] * phys[9 + k][pt]).sum();
        g2 = g2.max(h.sqrt());
    }
    (g1, g2)
}

/// Largest singular value of a row-major 3×3 matrix.
fn operator_norm3(m: &[f64; 9]) -> f64 {
    let s = |i: usize, j: usize| (0..3).map(|k| m[3 * k + i] * m[3 * k + j]).sum::<f64>();
    let (a11, a22, a33, a12, a13, a23) = (s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2));
    let off = a12 * a12 + a13 * a13 + a23 * a23;
    let q = (a11 + a22 + a33) / 3.0;
    if off == 0.0 {
        return a11.max(a22).max(a33).sqrt();
    }
    let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * off;
    let p = (p2 / 6.0).sqrt();
    let (b11, b22, b33) = ((a11 - q) / p, (a22 - q) / p, (a33 - q) / p);
    let (b12, b13, b23) = (a12 / p, a13 / p, a23 / p);
    let det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) + b13 * (b12 * b23 - b22 * b13);
    let phi = (det / 2.0).clamp(-1.0, 1.0).acos() / 3.0;
    (q + 2.0 * p * phi.cos()).max(0.0).sqrt()
}

/// Advects a [`ParticleSet`] with every accepted step, accumulates `V` and
/// `W`, and samples the trace along trajectories at every record.
pub struct ParticleTracker {
    pub set: ParticleSet,
    pub vnorm: VNorm,
    pub a: f64,
    pub b: f64,
    pub samples: Vec<TrajectorySample>,
    pub flow_reports: Vec<FlowBoundReport>,
    pub max_det_defect: f64,
    cache: Option<(f64, FourierInterpolant, (f64, f64))>,
}

impl ParticleTracker {
    /// `count` particles seeded from the trace of `initial`; the minimiser is
    /// refined when a blow-up is predicted.
    pub fn new(initial: &FlowState, a: f64, b: f64, count: usize, seed: u64) -> Result<Self> {
        let tr = initial.tau.trace();
        let phys = tr.to_physical();
        let imin = (0..phys.len())
            .min_by(|&i, &j| phys[i].total_cmp(&phys[j]))
            .ok_or_else(|| PttError::precondition("empty grid"))?;
        let minimiser = if b > 0.0 {
            predict_blowup_time(&tr, a, b)?.map_or(initial.grid().point(imin), |p| p.x_star)
        } else {
            initial.grid().point(imin)
        };
        let mut set = ParticleSet::seeded(&tr, minimiser, count, seed);
        set.t = initial.t;
        Ok(ParticleTracker {
            set,
            vnorm: VNorm::default(),
            a,
            b,
            samples: Vec::new(),
            flow_reports: Vec::new(),
            max_det_defect: 0.0,
            cache: None,
        })
    }

    fn endpoint(&mut self, state: &FlowState) -> (FourierInterpolant, (f64, f64)) {
        match self.cache.take() {
            Some((t, it, m)) if t == state.t => (it, m),
            _ => (velocity_interpolant(&state.u), gradient_maxima(&state.u)),
        }
    }

    /// Trajectory samples with `t ≤ t_limit` as `(t, id, deviation)`.
    pub fn deviations(&self, t_limit: f64) -> impl Iterator<Item = (f64, usize, f64)> + '_ {
        self.samples
            .iter()
            .filter(move |s| s.t <= t_limit)
            .filter_map(|s| s.deviation().map(|d| (s.t, s.id, d)))
    }
}

impl RunObserver for ParticleTracker {
    fn on_record(&mut self, state: &FlowState, _rec: &EnergyRecord) -> Result<()> {
        let samples = sample_trajectories(&self.set, &state.tau.trace(), self.a, self.b);
        self.samples.extend(samples);
        self.flow_reports.push(flow_bound_check(&self.set, &self.vnorm)?);
        Ok(())
    }

    fn on_step(&mut self, before: &FlowState, after: &FlowState) -> Result<()> {
        let dt = after.t - before.t;
        let (start, m0) = self.endpoint(before);
        let end = velocity_interpolant(&after.u);
        let m1 = gradient_maxima(&after.u);
        let mid = start.blend(&end, 0.5);
        advect(&mut self.set, &start, &mid, &end, dt);
        self.set.t = after.t;
        self.vnorm.accumulate(dt, (m0.0, m1.0), (m0.1, m1.1));
        let det = self.set.max_det_defect();
        self.max_det_defect = self.max_det_defect.max(det);
        if det > DET_TOLERANCE {
            return Err(PttError::InvariantFailure(format!("|det ∇q − 1| = {det:e} at t={}", after.t)));
        }
        flow_bound_check(&self.set, &self.vnorm)?;
        self.cache = Some((after.t, end, m1));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrator::{run, StepControl};
    use crate::model::{make_initial_data, InitialData, ModelParams};
    use crate::spectral::Grid;

    #[test]
    fn shear_gradient_maxima() {
        let g = Grid::new(16).unwrap();
        let u = [
            SpectralField::from_fn(g, |x| (2.0 * x[1]).sin()),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ];
        let (g1, g2) = gradient_maxima(&u);
        assert!((g1 - 2.0).abs() < 1e-12);
        assert!((g2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_matches_singular_values() {
        let m = [0.3, -1.2, 0.5, 2.0, 0.1, -0.7, 0.0, 0.4, 1.1];
        let svd = nalgebra::Matrix3::from_row_slice(&m).singular_values().max();
        assert!((operator_norm3(&m) - svd).abs() < 1e-12);
        assert!((operator_norm3(&[0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tracker_follows_short_blowup_run() {
        let g = Grid::new(16).unwrap();
        let s = make_initial_data(g, &InitialData::blowup(-2.0, 0.02, 5)).unwrap();
        let p = ModelParams::default();
        let mut tr = ParticleTracker::new(&s, p.a, p.b, 16, 1).unwrap();
        let ctl = StepControl {
            record_interval: 0.05,
            ..StepControl::new(2e-3, 0.1)
        };
        run(&s, &p, &ctl, &mut tr).unwrap();
        assert_eq!(tr.samples.len(), 16 * 3);
        assert!(tr.max_det_defect < DET_TOLERANCE);
        let worst = tr.deviations(0.1).map(|d| d.2).fold(0.0, f64::max);
        assert!(worst < 1e-2, "{worst}");
        assert!(tr.vnorm.v > 0.0);
    }
}
