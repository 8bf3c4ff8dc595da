//! Time stepping: integrating-factor SSP-RK2 (default) and IMEX Euler,
//! CFL control, and the run driver with blow-up detection.

mod probe;
mod run;

pub use probe::{blowup_rate_probe, extrapolate_blowup_time, RateFit};
pub use run::{run, BlowupReport, NullObserver, ObserverChain, RunObserver, RunOutcome, RunStatus, TraceSample};

use crate::error::{PttError, Result};
use crate::model::{explicit_tendency, FlowState, ModelParams};
use crate::spectral::{ksq, to_physical_many, SpectralField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// `e^{μΔdt}` on the velocity, Heun (SSP-RK2) on everything else.
    #[default]
    IfSsprk2,
    /// Implicit viscous term, explicit rest; first order.
    ImexEuler,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::IfSsprk2 => "if-ssprk2",
            Scheme::ImexEuler => "imex-euler",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = PttError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "if-ssprk2" | "ssprk2" => Ok(Scheme::IfSsprk2),
            "imex-euler" | "euler" => Ok(Scheme::ImexEuler),
            _ => Err(PttError::param("scheme", format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub dt: f64,
    pub t_max: f64,
    pub cfl_target: f64,
    pub blowup_threshold: f64,
    pub dt_min: f64,
    pub record_interval: f64,
    pub scheme: Scheme,
    /// Check `div u = 0` and the velocity mean after every step.
    pub check_invariants: bool,
}

impl StepControl {
    pub fn new(dt: f64, t_max: f64) -> Self {
        StepControl {
            dt,
            t_max,
            cfl_target: 0.4,
            blowup_threshold: 1e6,
            dt_min: dt * 1e-7,
            record_interval: 0.05,
            scheme: Scheme::IfSsprk2,
            check_invariants: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(PttError::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.dt_min > 0.0 && self.dt_min < self.dt) {
            return Err(PttError::param("dt_min", format!("must lie in (0, dt), got {}", self.dt_min)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(PttError::param("t_max", format!("must be finite and >= 0, got {}", self.t_max)));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(PttError::param("blowup_threshold", "must be positive"));
        }
        if !(self.cfl_target > 0.0) {
            return Err(PttError::param("cfl_target", "must be positive"));
        }
        if !(self.record_interval > 0.0) {
            return Err(PttError::param("record_interval", "must be positive"));
        }
        Ok(())
    }
}

/// Grid quantities that drive step-size control and blow-up detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateProbe {
    pub max_speed: f64,
    pub min_trace: f64,
    pub max_trace: f64,
    /// Grid point of `min tr τ`.
    pub argmin: [f64; 3],
    /// Share of the (mean-free) trace spectrum in the outer third of the
    /// retained band, `‖P_tail trτ‖/‖trτ − mean‖`.
    pub trace_tail: f64,
    pub finite: bool,
}

impl StateProbe {
    pub fn max_abs_trace(&self) -> f64 {
        self.min_trace.abs().max(self.max_trace.abs())
    }
}

pub fn probe_state(state: &FlowState) -> StateProbe {
    let grid = state.grid();
    let tr = state.tau.trace();
    let phys = to_physical_many(&[&state.u[0], &state.u[1], &state.u[2], &tr]);
    let mut max_speed: f64 = 0.0;
    let mut finite = true;
    for i in 0..grid.len() {
        let s = phys[0][i] * phys[0][i] + phys[1][i] * phys[1][i] + phys[2][i] * phys[2][i];
        finite &= s.is_finite();
        max_speed = max_speed.max(s.sqrt());
    }
    let (mut imin, mut min_trace, mut max_trace) = (0, f64::INFINITY, f64::NEG_INFINITY);
    for (i, &v) in phys[3].iter().enumerate() {
        finite &= v.is_finite();
        if v < min_trace {
            min_trace = v;
            imin = i;
        }
        max_trace = max_trace.max(v);
    }
    StateProbe {
        max_speed,
        min_trace,
        max_trace,
        argmin: grid.point(imin),
        trace_tail: spectral_tail(&tr),
        finite,
    }
}

fn spectral_tail(f: &SpectralField) -> f64 {
    let grid = f.grid();
    let edge = 2 * grid.dealias_cut() as i64 / 3;
    let (mut tail, mut total) = (0.0, 0.0);
    for (idx, c) in f.coeffs().iter().enumerate().skip(1) {
        let k = grid.wavevector(idx);
        let e = c.norm_sqr();
        total += e;
        if k.iter().any(|ki| ki.abs() > edge) {
            tail += e;
        }
    }
    if total > 0.0 {
        (tail / total).sqrt()
    } else {
        0.0
    }
}

/// Largest `dt_request / 2^j` with `dt |u|∞ ≤ cfl Δx` and `b |trτ|∞ dt ≤ 1/2`.
/// Returns the step and the number of halvings.
pub fn admissible_dt(
    probe: &StateProbe,
    p: &ModelParams,
    ctl: &StepControl,
    dt_request: f64,
    spacing: f64,
    t: f64,
) -> Result<(f64, u32)> {
    let mut dt = dt_request;
    let mut halvings = 0;
    loop {
        let cfl_ok = probe.max_speed * dt <= ctl.cfl_target * spacing;
        let stiff_ok = p.b * probe.max_abs_trace() * dt <= 0.5;
        if cfl_ok && stiff_ok {
            return Ok((dt, halvings));
        }
        dt *= 0.5;
        halvings += 1;
        if dt < ctl.dt_min {
            return Err(PttError::StepCollapse {
                t,
                dt,
                dt_min: ctl.dt_min,
            });
        }
    }
}

fn viscous_factor(u: &VectorField, mu: f64, dt: f64) -> VectorField {
    std::array::from_fn(|i| u[i].apply_symbol(|k| (-mu * ksq(k) as f64 * dt).exp()))
}

/// One step of size `dt` with no step-size control.
pub fn step_with_dt(state: &FlowState, p: &ModelParams, dt: f64, scheme: Scheme) -> FlowState {
    let n0 = explicit_tendency(state, p);
    match scheme {
        Scheme::ImexEuler => {
            let u = std::array::from_fn(|i| {
                let mut v = state.u[i].clone();
                v.axpy(dt, &n0.du[i]);
                v.apply_symbol(|k| 1.0 / (1.0 + p.mu * ksq(k) as f64 * dt))
            });
            let mut tau = state.tau.clone();
            tau.axpy(dt, &n0.dtau);
            FlowState { t: state.t + dt, u, tau }
        }
        Scheme::IfSsprk2 => {
            let mut pred_u = state.u.clone();
            for (v, d) in pred_u.iter_mut().zip(&n0.du) {
                v.axpy(dt, d);
            }
            let mut pred_tau = state.tau.clone();
            pred_tau.axpy(dt, &n0.dtau);
            let v1 = FlowState {
                t: state.t + dt,
                u: viscous_factor(&pred_u, p.mu, dt),
                tau: pred_tau,
            };
            let n1 = explicit_tendency(&v1, p);
            let carried = viscous_factor(&state.u, p.mu, dt);
            let u = std::array::from_fn(|i| {
                let mut v = carried[i].scale(0.5);
                v.axpy(0.5, &v1.u[i]);
                v.axpy(0.5 * dt, &n1.du[i]);
                v
            });
            let mut tau = state.tau.scale(0.5);
            tau.axpy(0.5, &v1.tau);
            tau.axpy(0.5 * dt, &n1.dtau);
            FlowState { t: state.t + dt, u, tau }
        }
    }
}

/// Outcome of a controlled step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub state: FlowState,
    pub dt: f64,
    pub halvings: u32,
}

/// One step of at most `ctl.dt`, halved until the CFL and stiffness limits hold.
pub fn step(state: &FlowState, p: &ModelParams, ctl: &StepControl) -> Result<Step> {
    let probe = probe_state(state);
    let (dt, halvings) = admissible_dt(&probe, p, ctl, ctl.dt, state.grid().spacing(), state.t)?;
    Ok(Step {
        state: step_with_dt(state, p, dt, ctl.scheme),
        dt,
        halvings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Grid, SymTensor};
    use num_complex::Complex64;

    fn shear(g: Grid) -> FlowState {
        let u = [
            SpectralField::from_fn(g, |x| x[1].sin()),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ];
        FlowState::new(0.0, u, SymTensor::zeros(g)).unwrap()
    }

    #[test]
    fn shear_mode_decays_like_heat() {
        let g = Grid::new(16).unwrap();
        let p = ModelParams { mu2: 0.0, ..Default::default() };
        let mut s = shear(g);
        for _ in 0..100 {
            s = step_with_dt(&s, &p, 0.01, Scheme::IfSsprk2);
        }
        let c = s.u[0].coeff([0, 1, 0]);
        let expect = Complex64::new(0.0, -0.5) * (-1.0f64).exp();
        assert!((c - expect).norm() < 1e-12, "{c} vs {expect}");
        assert!(s.tau.comps.iter().all(|t| t.max_abs_coeff() == 0.0));
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = Grid::new(8).unwrap();
        let z = FlowState::zeros(g);
        for scheme in [Scheme::IfSsprk2, Scheme::ImexEuler] {
            let s = step_with_dt(&z, &ModelParams::default(), 0.1, scheme);
            assert!(s.components().iter().all(|c| c.max_abs_coeff() == 0.0));
        }
    }

    #[test]
    fn halving_is_recorded() {
        let g = Grid::new(8).unwrap();
        let tau = SymTensor::isotropic(&SpectralField::constant(g, 10.0));
        let s = FlowState::new(0.0, FlowState::zeros(g).u, tau).unwrap();
        let ctl = StepControl::new(0.1, 1.0);
        let st = step(&s, &ModelParams::default(), &ctl).unwrap();
        // |trτ| = 30 needs dt <= 1/60
        assert_eq!(st.halvings, 3);
        assert_eq!(st.dt, 0.0125);
    }

    #[test]
    fn collapse_below_dt_min() {
        let g = Grid::new(8).unwrap();
        let tau = SymTensor::isotropic(&SpectralField::constant(g, 1e9));
        let s = FlowState::new(0.0, FlowState::zeros(g).u, tau).unwrap();
        let ctl = StepControl { dt_min: 1e-3, ..StepControl::new(0.1, 1.0) };
        assert!(matches!(step(&s, &ModelParams::default(), &ctl), Err(PttError::StepCollapse { .. })));
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!("if-ssprk2".parse::<Scheme>().unwrap(), Scheme::IfSsprk2);
        assert_eq!("imex-euler".parse::<Scheme>().unwrap(), Scheme::ImexEuler);
        assert!("rk4".parse::<Scheme>().is_err());
    }
}
