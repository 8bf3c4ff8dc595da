use super::{admissible_dt, extrapolate_blowup_time, probe_state, step_with_dt, StateProbe, StepControl};
use crate::characteristics::riccati_blowup_time;
use crate::diagnostics::{record, EnergyRecord};
use crate::error::{PttError, Result};
use crate::model::{FlowState, ModelParams};

/// Receives the run as it progresses. Records arrive in time order.
pub trait RunObserver {
    fn on_record(&mut self, _state: &FlowState, _rec: &EnergyRecord) -> Result<()> {
        Ok(())
    }

    /// Called after every accepted step with the states at both ends.
    fn on_step(&mut self, _before: &FlowState, _after: &FlowState) -> Result<()> {
        Ok(())
    }
}

pub struct NullObserver;

impl RunObserver for NullObserver {}

/// Forwards every event to each observer in order.
pub struct ObserverChain<'a>(pub Vec<&'a mut dyn RunObserver>);

impl RunObserver for ObserverChain<'_> {
    fn on_record(&mut self, state: &FlowState, rec: &EnergyRecord) -> Result<()> {
        self.0.iter_mut().try_for_each(|o| o.on_record(state, rec))
    }

    fn on_step(&mut self, before: &FlowState, after: &FlowState) -> Result<()> {
        self.0.iter_mut().try_for_each(|o| o.on_step(before, after))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    StepCollapse,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::BlowupDetected => "blowup_detected",
            RunStatus::StepCollapse => "step_collapse",
        }
    }
}

/// Grid minimum of `tr τ` after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub t: f64,
    pub min_trace: f64,
    pub max_trace: f64,
    pub location: [f64; 3],
    pub trace_tail: f64,
}

impl TraceSample {
    fn new(t: f64, p: &StateProbe) -> Self {
        TraceSample {
            t,
            min_trace: p.min_trace,
            max_trace: p.max_trace,
            location: p.argmin,
            trace_tail: p.trace_tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub detection_time: f64,
    /// Riccati time from the initial minimum, `−1/(b min trτ₀)` for `a = 0`.
    pub predicted_time: Option<f64>,
    /// Zero of the linear fit of `1/min trτ` over the resolved part of the run.
    pub extrapolated_time: Option<f64>,
    pub location: [f64; 3],
    /// Last time at which `trace_tail` stayed below the resolution tolerance.
    pub resolved_until: f64,
    pub min_trace: Vec<TraceSample>,
}

impl BlowupReport {
    /// Samples up to `resolved_until`.
    pub fn resolved_history(&self) -> Vec<(f64, f64)> {
        self.min_trace
            .iter()
            .filter(|s| s.t <= self.resolved_until)
            .map(|s| (s.t, s.min_trace))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t_end: f64,
    pub steps: usize,
    pub halvings: u64,
    pub records: Vec<EnergyRecord>,
    pub final_state: FlowState,
    pub trace_history: Vec<TraceSample>,
    pub blowup_report: Option<BlowupReport>,
}

/// Trace spectra with more than this share in the outer third of the band
/// are treated as under-resolved.
pub const RESOLUTION_TOLERANCE: f64 = 1e-3;

fn emit(state: &FlowState, records: &mut Vec<EnergyRecord>, obs: &mut dyn RunObserver) -> Result<()> {
    let rec = record(state);
    obs.on_record(state, &rec)?;
    records.push(rec);
    Ok(())
}

/// Advances `initial` to `ctl.t_max`, stopping early on blow-up (`|trτ|∞`
/// above the threshold or non-finite values) or step collapse.
pub fn run(initial: &FlowState, p: &ModelParams, ctl: &StepControl, obs: &mut dyn RunObserver) -> Result<RunOutcome> {
    ctl.validate()?;
    p.validate()?;
    initial.check_invariants()?;
    let spacing = initial.grid().spacing();
    let t0 = initial.t;
    let t_end_target = t0 + ctl.t_max;
    let time_eps = 1e-12 * t_end_target.abs().max(1.0);

    let mut state = initial.clone();
    let mut probe = probe_state(&state);
    let initial_min = probe.min_trace;
    let mut history = vec![TraceSample::new(t0, &probe)];
    let mut records = Vec::new();
    emit(&state, &mut records, obs)?;
    let mut n_record = 1u64;
    let mut steps = 0usize;
    let mut halvings = 0u64;
    let mut status = RunStatus::Completed;

    while state.t < t_end_target - time_eps {
        let next_record = (t0 + n_record as f64 * ctl.record_interval).min(t_end_target);
        let request = ctl.dt.min(next_record - state.t);
        let dt = match admissible_dt(&probe, p, ctl, request, spacing, state.t) {
            Ok((dt, h)) => {
                halvings += h as u64;
                dt
            }
            Err(PttError::StepCollapse { .. }) => {
                status = RunStatus::StepCollapse;
                break;
            }
            Err(e) => return Err(e),
        };
        let mut next = step_with_dt(&state, p, dt, ctl.scheme);
        if (next.t - next_record).abs() <= time_eps {
            next.t = next_record;
        }
        steps += 1;
        probe = probe_state(&next);
        history.push(TraceSample::new(next.t, &probe));
        if !probe.finite || probe.max_abs_trace() > ctl.blowup_threshold {
            state = next;
            status = RunStatus::BlowupDetected;
            break;
        }
        if ctl.check_invariants {
            next.check_invariants()?;
        }
        obs.on_step(&state, &next)?;
        state = next;
        if state.t >= next_record - time_eps {
            emit(&state, &mut records, obs)?;
            n_record += 1;
        }
    }
    if status == RunStatus::StepCollapse && records.last().map_or(true, |r| r.t < state.t) {
        emit(&state, &mut records, obs)?;
    }

    let blowup_report = if status == RunStatus::Completed {
        None
    } else {
        let resolved_until = history
            .iter()
            .take_while(|s| s.trace_tail <= RESOLUTION_TOLERANCE)
            .last()
            .map_or(t0, |s| s.t);
        let resolved: Vec<(f64, f64)> = history
            .iter()
            .filter(|s| s.t <= resolved_until)
            .map(|s| (s.t, s.min_trace))
            .collect();
        Some(BlowupReport {
            detection_time: state.t,
            predicted_time: riccati_blowup_time(initial_min, p.a, p.b).map(|t| t0 + t),
            extrapolated_time: extrapolate_blowup_time(&resolved).ok(),
            location: history.last().map_or([0.0; 3], |s| s.location),
            resolved_until,
            min_trace: history.clone(),
        })
    };
    Ok(RunOutcome {
        status,
        t_end: state.t,
        steps,
        halvings,
        records,
        final_state: state,
        trace_history: history,
        blowup_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, SpectralField, SymTensor};

    #[test]
    fn zero_horizon_gives_one_record() {
        let g = Grid::new(8).unwrap();
        let out = run(&FlowState::zeros(g), &ModelParams::default(), &StepControl::new(0.01, 0.0), &mut NullObserver)
            .unwrap();
        assert_eq!(out.status, RunStatus::Completed);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.steps, 0);
    }

    #[test]
    fn records_land_on_interval() {
        let g = Grid::new(8).unwrap();
        let ctl = StepControl {
            record_interval: 0.1,
            ..StepControl::new(0.03, 0.5)
        };
        let out = run(&FlowState::zeros(g), &ModelParams::default(), &ctl, &mut NullObserver).unwrap();
        let ts: Vec<f64> = out.records.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 6);
        for (i, t) in ts.iter().enumerate() {
            assert!((t - 0.1 * i as f64).abs() < 1e-12, "{ts:?}");
        }
    }

    #[test]
    fn uniform_negative_trace_blows_up_on_time() {
        let g = Grid::new(8).unwrap();
        let tau = SymTensor::isotropic(&SpectralField::constant(g, -2.0 / 3.0));
        let s = FlowState::new(0.0, FlowState::zeros(g).u, tau).unwrap();
        let ctl = StepControl::new(1e-3, 1.0);
        let out = run(&s, &ModelParams::default(), &ctl, &mut NullObserver).unwrap();
        assert_eq!(out.status, RunStatus::BlowupDetected);
        let rep = out.blowup_report.unwrap();
        assert_eq!(rep.predicted_time, Some(0.5));
        assert!((rep.detection_time - 0.5).abs() < 1e-3, "{}", rep.detection_time);
        assert!((rep.extrapolated_time.unwrap() - 0.5).abs() < 1e-3, "{:?}", rep.extrapolated_time);
    }
}
