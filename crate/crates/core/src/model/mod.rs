//! State, parameters and right-hand sides of the PTT system.

mod initial;
mod kinematics;
mod params;
mod rhs;
mod state;

pub use initial::{make_initial_data, InitialData, ScenarioKind};
pub use kinematics::{deformation, q_bilinear, velocity_gradient, vorticity_tensor, AntiSymTensor};
pub use params::ModelParams;
pub use rhs::{
    advection, elastic_exchange, explicit_tendency, momentum_rhs, pressure, stress_rhs, trace_field, Tendency,
};
pub use state::{tensor_norm, FlowState, DIVERGENCE_TOLERANCE};
