//! Lagrangian particles, the flow gradient `∇q`, and its exponential bounds.

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use super::riccati::{riccati_blowup_time, riccati_trace};
use crate::error::{PttError, Result};
use crate::spectral::{FourierInterpolant, SpectralField, VectorField};

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub id: usize,
    pub x0: [f64; 3],
    /// Current position, wrapped into `[0, 2π)³`.
    pub q: [f64; 3],
    pub grad_q: Matrix3<f64>,
    pub tr0: f64,
}

impl Particle {
    pub fn new(id: usize, x0: [f64; 3], tr0: f64) -> Self {
        let x0 = x0.map(|v| v.rem_euclid(TAU));
        Particle {
            id,
            x0,
            q: x0,
            grad_q: Matrix3::identity(),
            tr0,
        }
    }
}

/// `V(t) = ∫‖∇u‖_{L∞}` and `W(t) = ∫‖∇²u‖_{L∞} e^{V}`, trapezoid rule.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VNorm {
    pub v: f64,
    pub w: f64,
}

impl VNorm {
    /// Adds the interval `[t, t + dt]` given the grid maxima at both ends.
    pub fn accumulate(&mut self, dt: f64, grad: (f64, f64), grad2: (f64, f64)) {
        let v0 = self.v;
        let v1 = v0 + 0.5 * dt * (grad.0 + grad.1);
        self.w += 0.5 * dt * (grad2.0 * v0.exp() + grad2.1 * v1.exp());
        self.v = v1;
    }
}

/// Velocity and its gradient at a point.
pub trait VelocitySource {
    fn velocity(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>);
}

impl VelocitySource for FourierInterpolant {
    fn velocity(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
        let (v, g) = self.value_and_gradient(x);
        (
            Vector3::new(v[0], v[1], v[2]),
            Matrix3::from_fn(|i, j| g[i][j]),
        )
    }
}

/// Velocity given by a closure, e.g. an analytic flow.
pub struct AnalyticVelocity<F>(pub F);

impl<F: Fn([f64; 3]) -> (Vector3<f64>, Matrix3<f64>)> VelocitySource for AnalyticVelocity<F> {
    fn velocity(&self, x: [f64; 3]) -> (Vector3<f64>, Matrix3<f64>) {
        (self.0)(x)
    }
}

pub fn velocity_interpolant(u: &VectorField) -> FourierInterpolant {
    FourierInterpolant::new(&[&u[0], &u[1], &u[2]])
}

/// Default particle count.
pub const DEFAULT_PARTICLES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    pub t: f64,
    pub particles: Vec<Particle>,
}

impl ParticleSet {
    /// `count` particles: a 3×3×3 lattice, the trace minimiser, then uniform
    /// random points (ChaCha8 with `seed`).
    pub fn seeded(tr0: &SpectralField, minimiser: [f64; 3], count: usize, seed: u64) -> Self {
        let it = FourierInterpolant::new(&[tr0]);
        let mut xs: Vec<[f64; 3]> = Vec::with_capacity(count);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    xs.push([i, j, k].map(|m| (m as f64 + 0.5) * TAU / 3.0));
                }
            }
        }
        xs.truncate(count);
        if xs.len() < count {
            xs.push(minimiser);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while xs.len() < count {
            xs.push(std::array::from_fn(|_| rng.random_range(0.0..TAU)));
        }
        let particles = xs
            .into_iter()
            .enumerate()
            .map(|(id, x)| Particle::new(id, x, it.value(x)[0]))
            .collect();
        ParticleSet { t: 0.0, particles }
    }

    pub fn from_points(points: &[[f64; 3]], tr0: &SpectralField) -> Self {
        let it = FourierInterpolant::new(&[tr0]);
        ParticleSet {
            t: 0.0,
            particles: points
                .iter()
                .enumerate()
                .map(|(id, &x)| Particle::new(id, x, it.value(x)[0]))
                .collect(),
        }
    }

    pub fn max_det_defect(&self) -> f64 {
        self.particles
            .iter()
            .map(|p| (p.grad_q.determinant() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// One RK4 step of `q' = u(q)`, `(∇q)' = ∇u(q)∇q` with the velocity at the
/// start, middle and end of the step.
pub fn advect<V: VelocitySource + Sync>(
    set: &mut ParticleSet,
    start: &V,
    mid: &V,
    end: &V,
    dt: f64,
) {
    use rayon::prelude::*;
    set.particles.par_iter_mut().for_each(|p| {
        let x = Vector3::from(p.q);
        let g = p.grad_q;
        let rhs = |src: &V, x: &Vector3<f64>, g: &Matrix3<f64>| {
            let (u, du) = src.velocity([x[0], x[1], x[2]]);
            (u, du * g)
        };
        let (k1x, k1g) = rhs(start, &x, &g);
        let (k2x, k2g) = rhs(mid, &(x + k1x * (0.5 * dt)), &(g + k1g * (0.5 * dt)));
        let (k3x, k3g) = rhs(mid, &(x + k2x * (0.5 * dt)), &(g + k2g * (0.5 * dt)));
        let (k4x, k4g) = rhs(end, &(x + k3x * dt), &(g + k3g * dt));
        let nx = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (dt / 6.0);
        p.grad_q = g + (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (dt / 6.0);
        p.q = [nx[0].rem_euclid(TAU), nx[1].rem_euclid(TAU), nx[2].rem_euclid(TAU)];
    });
    set.t += dt;
}

/// Riccati prediction from the initial trace field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupPrediction {
    pub t_star: f64,
    pub x_star: [f64; 3],
    pub min_trace: f64,
}

/// Locates `min trτ₀` (grid scan, then one parabolic refinement per axis
/// evaluated spectrally) and returns the Riccati blow-up time, or `None`
/// when the minimum is above the threshold.
pub fn predict_blowup_time(tr0: &SpectralField, a: f64, b: f64) -> Result<Option<BlowupPrediction>> {
    if !(b > 0.0) {
        return Err(PttError::precondition(format!("blow-up prediction needs b > 0, got {b}")));
    }
    let grid = tr0.grid();
    let n = grid.n();
    let h = grid.spacing();
    let phys = tr0.to_physical();
    let (imin, &m_grid) = phys
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is nonempty");
    let base = [imin / (n * n), (imin / n) % n, imin % n];
    let mut x_star = grid.point(imin);
    for axis in 0..3 {
        let at = |d: isize| {
            let mut i = base;
            i[axis] = (i[axis] as isize + d).rem_euclid(n as isize) as usize;
            phys[grid.flat_index(i)]
        };
        let (fm, f0, fp) = (at(-1), at(0), at(1));
        let curv = fm - 2.0 * f0 + fp;
        if curv > 0.0 {
            let off = (0.5 * h * (fm - fp) / curv).clamp(-0.5 * h, 0.5 * h);
            x_star[axis] = (x_star[axis] + off).rem_euclid(TAU);
        }
    }
    let refined = FourierInterpolant::new(&[tr0]).value(x_star)[0];
    let (min_trace, x_star) = if refined <= m_grid {
        (refined, x_star)
    } else {
        (m_grid, grid.point(imin))
    };
    Ok(riccati_blowup_time(min_trace, a, b).map(|t_star| BlowupPrediction {
        t_star,
        x_star,
        min_trace,
    }))
}

/// One row of the trajectory output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub id: usize,
    pub q: [f64; 3],
    pub tr_interp: f64,
    /// `None` past the particle's own Riccati singularity.
    pub tr_riccati: Option<f64>,
    pub det_grad_q: f64,
    /// `‖trτ(t)‖_{L∞}` on the grid, the deviation scale.
    pub trace_scale: f64,
}

impl TrajectorySample {
    pub fn deviation(&self) -> Option<f64> {
        self.tr_riccati
            .map(|r| (self.tr_interp - r).abs() / self.trace_scale.max(f64::MIN_POSITIVE))
    }
}

pub const TRAJECTORY_CSV_HEADER: &str = "t,particle_id,q1,q2,q3,tr_interp,tr_riccati,det_grad_q";

/// Samples every particle against the trace field at the set's time.
pub fn sample_trajectories(set: &ParticleSet, trace: &SpectralField, a: f64, b: f64) -> Vec<TrajectorySample> {
    let it = FourierInterpolant::new(&[trace]);
    let trace_scale = crate::spectral::grid_max_abs(&trace.to_physical());
    set.particles
        .iter()
        .map(|p| TrajectorySample {
            t: set.t,
            id: p.id,
            q: p.q,
            tr_interp: it.value(p.q)[0],
            tr_riccati: riccati_trace(p.tr0, set.t, a, b).ok(),
            det_grad_q: p.grad_q.determinant(),
            trace_scale,
        })
        .collect()
}

/// Largest deviation `|trτ(t, q(t,x₀)) − riccati(trτ₀(x₀), t)| / ‖trτ(t)‖_∞`
/// over samples with `t ≤ t_limit`.
pub fn trace_transport_check(samples: &[TrajectorySample], t_limit: f64) -> f64 {
    samples
        .iter()
        .filter(|s| s.t <= t_limit)
        .filter_map(TrajectorySample::deviation)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowBoundReport {
    pub t: f64,
    pub max_grad_norm: f64,
    /// `exp V(t)`
    pub bound: f64,
    /// `bound − max_grad_norm`
    pub margin: f64,
    /// `max ‖∇q − I‖` against `exp V − 1`.
    pub max_deviation: f64,
    pub max_det_defect: f64,
}

fn operator_norm(m: &Matrix3<f64>) -> f64 {
    m.singular_values().max()
}

/// Checks `‖∇q‖ ≤ e^{V}` and `‖∇q − I‖ ≤ e^{V} − 1` for every particle.
pub fn flow_bound_check(set: &ParticleSet, vnorm: &VNorm) -> Result<FlowBoundReport> {
    let bound = vnorm.v.exp();
    let mut max_grad_norm: f64 = 0.0;
    let mut max_deviation: f64 = 0.0;
    for p in &set.particles {
        let g = operator_norm(&p.grad_q);
        let d = operator_norm(&(p.grad_q - Matrix3::identity()));
        if g > bound * (1.0 + 1e-6) || d > vnorm.v.exp_m1() + 1e-6 {
            return Err(PttError::InvariantFailure(format!(
                "particle {} at t={}: |∇q| = {g}, |∇q − I| = {d}, exp V = {bound}",
                p.id, set.t
            )));
        }
        max_grad_norm = max_grad_norm.max(g);
        max_deviation = max_deviation.max(d);
    }
    Ok(FlowBoundReport {
        t: set.t,
        max_grad_norm,
        bound,
        margin: bound - max_grad_norm,
        max_deviation,
        max_det_defect: set.max_det_defect(),
    })
}
