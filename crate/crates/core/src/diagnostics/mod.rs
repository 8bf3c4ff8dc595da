//! Energy records, weighted energy functionals and decay checks.

mod checks;
mod invariants;
mod record;
mod weighted;

pub use checks::{
    adaptive_simpson, decay_envelope_check, heat_linf_check, time_weight_check, time_weight_early_bound,
    time_weight_late_bound, EnvelopeReport, HeatReport, HeatRow, TimeWeightReport, TimeWeightRow, HEAT_TIMES,
    TIME_WEIGHT_EPS, TIME_WEIGHT_TIMES, TIME_WEIGHT_TOL,
};
pub use invariants::{
    i3_cancellation, structural_invariants, InvariantMonitor, InvariantReport, DIVERGENCE_LIMIT, I3_LIMIT, MEAN_LIMIT,
    TRACE_Q_LIMIT,
};
pub use record::{record, EnergyRecord};
pub use weighted::WeightedEnergies;
