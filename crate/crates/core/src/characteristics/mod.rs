//! Characteristics: particle paths, the Riccati trace law along them, and
//! flow-map bounds.

mod particles;
mod riccati;
mod tracker;

pub use particles::{
    advect, flow_bound_check, predict_blowup_time, sample_trajectories, trace_transport_check, velocity_interpolant,
    AnalyticVelocity, BlowupPrediction, FlowBoundReport, Particle, ParticleSet, TrajectorySample, VNorm,
    VelocitySource, DEFAULT_PARTICLES, TRAJECTORY_CSV_HEADER,
};
pub use riccati::{riccati_blowup_time, riccati_rk4, riccati_trace};
pub use tracker::{gradient_maxima, ParticleTracker, DET_TOLERANCE};
