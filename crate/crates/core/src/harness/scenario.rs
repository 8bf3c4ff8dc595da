//! Scenario orchestration and artifacts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{Scenario, ScenarioConfig};
use super::output::{fmt_num, provenance, CsvFile};
use super::snapshot::save_snapshot;
use super::suite::{self, Check};
use crate::characteristics::{
    predict_blowup_time, trace_transport_check, ParticleTracker, DET_TOLERANCE, TRAJECTORY_CSV_HEADER,
};
use crate::diagnostics::{decay_envelope_check, EnergyRecord, InvariantMonitor, WeightedEnergies};
use crate::error::{PttError, Result};
use crate::integrator::{blowup_rate_probe, run, ObserverChain, RunOutcome, RunStatus, StepControl};
use crate::linear::{semigroup_table, write_semigroup_csv};
use crate::model::{make_initial_data, FlowState, InitialData, ScenarioKind};
use crate::spectral::{Grid, BOX_VOLUME};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Relative band around the Riccati time accepted for the detected blow-up.
pub const DETECTION_BAND: f64 = 0.1;
/// Fraction of `T*` up to which trajectories are compared with the Riccati law.
pub const TRANSPORT_HORIZON: f64 = 0.8;
pub const TRANSPORT_TOLERANCE: f64 = 1e-2;
/// Bound on `(‖u‖²_{H²} + ‖τ‖²_{H²})` in units of `δ₀²` (averaged norms).
pub const GLOBAL_ENERGY_FACTOR: f64 = 25.0;
/// Seeds used by the linear decay check.
const LINEAR_SEEDS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub checks: Vec<Check>,
    pub artifacts: Vec<PathBuf>,
    /// `key=value` facts written to `summary.txt` before the checks.
    pub facts: Vec<(String, String)>,
}

impl ScenarioReport {
    fn new(scenario: Scenario) -> Self {
        ScenarioReport {
            scenario,
            checks: Vec::new(),
            artifacts: Vec::new(),
            facts: Vec::new(),
        }
    }

    fn fact(&mut self, key: &str, value: impl ToString) {
        self.facts.push((key.to_string(), value.to_string()));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_CHECK_FAILED
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn summary_text(&self, cfg: &ScenarioConfig) -> String {
        let mut s = provenance(cfg);
        for (k, v) in &self.facts {
            let _ = writeln!(s, "{k}={v}");
        }
        for c in &self.checks {
            let _ = writeln!(s, "{}", c.line());
        }
        let _ = writeln!(s, "result={}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

/// Maps an error to the process exit code.
pub fn error_exit_code(e: &PttError) -> i32 {
    match e {
        PttError::Config { .. } | PttError::Parameter { .. } | PttError::InvalidGrid(_) => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

/// Runs one scenario, writing artifacts and `summary.txt` into
/// `cfg.output_dir`.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioReport> {
    cfg.validate()?;
    let dir = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| PttError::io(&dir, e))?;
    let mut report = ScenarioReport::new(cfg.scenario);
    match cfg.scenario {
        Scenario::Blowup => blowup(cfg, &dir, &mut report)?,
        Scenario::Global => global(cfg, &dir, &mut report)?,
        Scenario::Linear => linear(cfg, &dir, &mut report)?,
        Scenario::Verify => verify(cfg, &mut report),
    }
    let path = dir.join("summary.txt");
    std::fs::write(&path, report.summary_text(cfg)).map_err(|e| PttError::io(&path, e))?;
    report.artifacts.push(path);
    Ok(report)
}

fn step_control(cfg: &ScenarioConfig) -> StepControl {
    StepControl {
        cfl_target: cfg.cfl,
        record_interval: cfg.record_interval,
        scheme: cfg.scheme,
        ..StepControl::new(cfg.dt, cfg.t_max)
    }
}

struct Tracked {
    outcome: Option<RunOutcome>,
    tracker: ParticleTracker,
    monitor: InvariantMonitor,
    failure: Option<String>,
}

/// Runs with particle tracking and invariant monitoring. Invariant failures
/// end the run and are reported rather than propagated.
fn tracked_run(cfg: &ScenarioConfig, initial: &FlowState) -> Result<Tracked> {
    let p = cfg.params;
    let mut tracker = ParticleTracker::new(initial, p.a, p.b, cfg.particles, cfg.seed)?;
    let mut monitor = InvariantMonitor::default();
    let result = run(initial, &p, &step_control(cfg), &mut ObserverChain(vec![&mut tracker, &mut monitor]));
    let (outcome, failure) = match result {
        Ok(o) => (Some(o), None),
        Err(PttError::InvariantFailure(msg)) => (None, Some(msg)),
        Err(e) => return Err(e),
    };
    Ok(Tracked {
        outcome,
        tracker,
        monitor,
        failure,
    })
}

/// `energies.csv` plus one two-column `plots/<quantity>.csv` per field.
fn write_energies(cfg: &ScenarioConfig, dir: &Path, records: &[EnergyRecord]) -> Result<Vec<PathBuf>> {
    let mut csv = CsvFile::create(&dir.join("energies.csv"), cfg, EnergyRecord::CSV_HEADER)?;
    for r in records {
        csv.row(&r.values())?;
    }
    let mut paths = vec![csv.finish()?];
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| PttError::io(&plots, e))?;
    for (col, name) in EnergyRecord::CSV_HEADER.split(',').enumerate().skip(1) {
        let mut csv = CsvFile::create(&plots.join(format!("{name}.csv")), cfg, &format!("t,{name}"))?;
        for r in records {
            let v = r.values();
            csv.row(&[v[0], v[col]])?;
        }
        paths.push(csv.finish()?);
    }
    Ok(paths)
}

fn write_trajectories(cfg: &ScenarioConfig, dir: &Path, tracker: &ParticleTracker) -> Result<PathBuf> {
    let mut csv = CsvFile::create(&dir.join("trajectories.csv"), cfg, TRAJECTORY_CSV_HEADER)?;
    for s in &tracker.samples {
        csv.fields(&[
            fmt_num(s.t),
            s.id.to_string(),
            fmt_num(s.q[0]),
            fmt_num(s.q[1]),
            fmt_num(s.q[2]),
            fmt_num(s.tr_interp),
            s.tr_riccati.map_or_else(|| "nan".to_string(), fmt_num),
            fmt_num(s.det_grad_q),
        ])?;
    }
    csv.finish()
}

fn invariant_checks(report: &mut ScenarioReport, t: &Tracked) {
    let worst = t.monitor.worst;
    let detail = match (&t.failure, worst) {
        (Some(msg), _) => msg.clone(),
        (None, Some(w)) => format!(
            "records={} divergence={:.3e} mean={:.3e} trace_q={:.3e} i3={:.3e}",
            t.monitor.checks, w.divergence, w.velocity_mean, w.trace_q, w.i3
        ),
        (None, None) => "no records".into(),
    };
    let pass = t.failure.is_none() && worst.is_some_and(|w| w.within_limits());
    report.checks.push(Check::new("structural_invariants", pass, detail));
    let det = t.tracker.max_det_defect;
    let margin = t.tracker.flow_reports.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
    report.checks.push(Check::new(
        "flow_map",
        t.failure.is_none() && det <= DET_TOLERANCE,
        format!(
            "particles={} max_det_defect={det:.3e} min_flow_bound_margin={margin:.3e} V={:.6e} W={:.6e}",
            t.tracker.set.particles.len(),
            t.tracker.vnorm.v,
            t.tracker.vnorm.w
        ),
    ));
}

fn blowup(cfg: &ScenarioConfig, dir: &Path, report: &mut ScenarioReport) -> Result<()> {
    let grid = Grid::new(cfg.n)?;
    let spec = InitialData {
        c0: cfg.c0,
        eps_tilde0: cfg.eps_tilde0,
        ..InitialData::blowup(cfg.trace_min, cfg.delta0, cfg.seed)
    };
    let initial = make_initial_data(grid, &spec)?;
    let p = cfg.params;
    let init_path = dir.join("initial.pttf");
    save_snapshot(&initial, &p, &init_path)?;
    report.artifacts.push(init_path);

    let prediction = predict_blowup_time(&initial.tau.trace(), p.a, p.b)?;
    let t_star = prediction.map(|pr| pr.t_star);
    report.fact("predicted_time", t_star.map_or("none".into(), fmt_num));
    if let Some(pr) = prediction {
        report.fact("predicted_location", format!("{:.6} {:.6} {:.6}", pr.x_star[0], pr.x_star[1], pr.x_star[2]));
    }

    let tracked = tracked_run(cfg, &initial)?;
    invariant_checks(report, &tracked);
    report.artifacts.push(write_trajectories(cfg, dir, &tracked.tracker)?);
    let Some(out) = &tracked.outcome else {
        return Ok(());
    };
    report.fact("status", out.status.as_str());
    report.fact("t_end", fmt_num(out.t_end));
    report.fact("steps", out.steps);
    report.fact("halvings", out.halvings);
    report.artifacts.extend(write_energies(cfg, dir, &out.records)?);

    let m = cfg.trace_min;
    let mut csv = CsvFile::create(&dir.join("riccati.csv"), cfg, "t,min_trace,riccati_trace,trace_tail")?;
    for s in &out.trace_history {
        let ric = crate::characteristics::riccati_trace(m, s.t - initial.t, p.a, p.b).unwrap_or(f64::NAN);
        csv.row(&[s.t, s.min_trace, ric, s.trace_tail])?;
    }
    report.artifacts.push(csv.finish()?);

    if out.final_state.components().iter().all(|c| c.coeffs().iter().all(|z| z.is_finite())) {
        let path = dir.join("final.pttf");
        save_snapshot(&out.final_state, &p, &path)?;
        report.artifacts.push(path);
    }

    report.checks.push(Check::new(
        "blowup_detected",
        out.status == RunStatus::BlowupDetected,
        format!("status={} t_end={:.6}", out.status.as_str(), out.t_end),
    ));
    let Some(ts) = t_star else {
        report.checks.push(Check::new("riccati_prediction", false, "no blow-up predicted from tr τ₀"));
        return Ok(());
    };
    if let Some(rep) = &out.blowup_report {
        report.fact("detection_time", fmt_num(rep.detection_time));
        report.fact("extrapolated_time", rep.extrapolated_time.map_or("none".into(), fmt_num));
        report.fact("resolved_until", fmt_num(rep.resolved_until));
        report.fact("location", format!("{:.6} {:.6} {:.6}", rep.location[0], rep.location[1], rep.location[2]));
        let t_det = rep.detection_time - initial.t;
        report.checks.push(Check::new(
            "detection_time",
            (t_det - ts).abs() <= DETECTION_BAND * ts,
            format!("detected={t_det:.6} predicted={ts:.6} band={DETECTION_BAND}"),
        ));
        match blowup_rate_probe(&rep.resolved_history(), rep.detection_time) {
            Ok(fit) => {
                report.fact("rate_constant", fmt_num(fit.constant));
                report.checks.push(Check::new(
                    "blowup_rate",
                    (-1.1..=-0.9).contains(&fit.constant),
                    format!(
                        "constant={:.6} samples={} window=[{:.4},{:.4}]",
                        fit.constant, fit.samples, fit.window.0, fit.window.1
                    ),
                ));
            }
            Err(e) => report.checks.push(Check::error("blowup_rate", &e)),
        }
    }
    let horizon = initial.t + TRANSPORT_HORIZON * ts;
    let dev = trace_transport_check(&tracked.tracker.samples, horizon);
    report.checks.push(Check::new(
        "riccati_transport",
        dev <= TRANSPORT_TOLERANCE && tracked.tracker.samples.iter().any(|s| s.t >= horizon - 1e-9),
        format!("max_deviation={dev:.3e} until t={horizon:.4}"),
    ));
    Ok(())
}

fn global(cfg: &ScenarioConfig, dir: &Path, report: &mut ScenarioReport) -> Result<()> {
    let grid = Grid::new(cfg.n)?;
    let spec = InitialData {
        kind: ScenarioKind::Global,
        c0: cfg.c0,
        eps_tilde0: cfg.eps_tilde0,
        ..InitialData::global(cfg.delta0, cfg.seed)
    };
    let initial = make_initial_data(grid, &spec)?;
    let p = cfg.params;
    let init_path = dir.join("initial.pttf");
    save_snapshot(&initial, &p, &init_path)?;
    report.artifacts.push(init_path);

    let tracked = tracked_run(cfg, &initial)?;
    invariant_checks(report, &tracked);
    report.artifacts.push(write_trajectories(cfg, dir, &tracked.tracker)?);
    let Some(out) = &tracked.outcome else {
        return Ok(());
    };
    report.fact("status", out.status.as_str());
    report.fact("t_end", fmt_num(out.t_end));
    report.fact("steps", out.steps);
    report.fact("halvings", out.halvings);
    report.artifacts.extend(write_energies(cfg, dir, &out.records)?);
    if out.final_state.components().iter().all(|c| c.coeffs().iter().all(|z| z.is_finite())) {
        let path = dir.join("final.pttf");
        save_snapshot(&out.final_state, &p, &path)?;
        report.artifacts.push(path);
    }

    report.checks.push(Check::new(
        "completed",
        out.status == RunStatus::Completed,
        format!("status={} t_end={:.6}", out.status.as_str(), out.t_end),
    ));
    let d2 = cfg.delta0 * cfg.delta0;
    let energy = out
        .records
        .iter()
        .map(|r| (r.h2_u * r.h2_u + r.h2_tau * r.h2_tau) / BOX_VOLUME)
        .fold(0.0, f64::max);
    report.checks.push(Check::new(
        "energy_bound",
        energy <= GLOBAL_ENERGY_FACTOR * d2,
        format!("max_energy_over_delta0_sq={:.6}", energy / d2),
    ));
    let min_tr = out.trace_history.iter().map(|s| s.min_trace).fold(f64::INFINITY, f64::min);
    report.checks.push(Check::new("positive_trace", min_tr > 0.0, format!("min_trace={min_tr:.6e}")));
    match decay_envelope_check(&out.records, cfg.eps) {
        Ok(env) => report.checks.push(Check::new(
            "decay_envelope",
            env.pass,
            format!(
                "exponent={:.4} target={:.4} worst_ratio={:.4} constant={:.4e}",
                env.exponent, env.target_exponent, env.worst_ratio, env.constant
            ),
        )),
        Err(e) => report.checks.push(Check::error("decay_envelope", &e)),
    }
    match weighted(cfg, &out.records) {
        Ok(w) => {
            for (k, v) in [
                ("E0", w.e0),
                ("E0_tilde", w.e0_tilde),
                ("E1", w.e1()),
                ("E2", w.e2()),
                ("E3", w.e3),
                ("E4", w.e4),
                ("E5", w.e5),
            ] {
                report.fact(k, fmt_num(v));
            }
        }
        Err(e) => report.fact("weighted_energies", format!("unavailable: {e}")),
    }
    Ok(())
}

fn weighted(cfg: &ScenarioConfig, records: &[EnergyRecord]) -> Result<WeightedEnergies> {
    let first = records.first().ok_or_else(|| PttError::InsufficientData("no records".into()))?;
    let mut w = WeightedEnergies::new(cfg.eps, cfg.c0(), first)?;
    for r in &records[1..] {
        w.accumulate(r)?;
    }
    Ok(w)
}

fn linear(cfg: &ScenarioConfig, dir: &Path, report: &mut ScenarioReport) -> Result<()> {
    let ksqs: Vec<u64> = (1..=suite::GREEN_KSQ_MAX).collect();
    let mut times = suite::GREEN_TIMES.to_vec();
    if cfg.t_max > 0.0 && !times.contains(&cfg.t_max) {
        times.push(cfg.t_max);
    }
    let rows = semigroup_table(&ksqs, &times)?;
    let path = dir.join("semigroup.csv");
    let mut csv = CsvFile::create(&path, cfg, "")?;
    write_semigroup_csv(csv.writer(), &rows).map_err(|e| PttError::io(&path, e))?;
    report.artifacts.push(csv.finish()?);

    report.checks.push(suite::green_exactness());
    report.checks.push(suite::linear_decay(cfg.n, cfg.delta0, cfg.seed..cfg.seed + LINEAR_SEEDS));
    let duhamel = suite::duhamel_rows(cfg.n, &[cfg.delta0, 0.5 * cfg.delta0], cfg.dt, cfg.seed)?;
    let mut csv = CsvFile::create(&dir.join("duhamel.csv"), cfg, "delta,defect")?;
    for &(d, e) in &duhamel {
        csv.row(&[d, e])?;
    }
    report.artifacts.push(csv.finish()?);
    let ratio = duhamel[0].1 / duhamel[1].1;
    report.checks.push(Check::new(
        "duhamel_scaling",
        (3.2..=4.8).contains(&ratio),
        format!("defect={:.6e} half_delta_defect={:.6e} ratio={ratio:.4}", duhamel[0].1, duhamel[1].1),
    ));
    Ok(())
}

fn verify(cfg: &ScenarioConfig, report: &mut ScenarioReport) {
    use rayon::prelude::*;
    let n = cfg.n;
    let seed = cfg.seed;
    let suites: Vec<Box<dyn Fn() -> Check + Sync>> = vec![
        Box::new(suite::green_exactness),
        Box::new(move || suite::projection_identities(n, 20, seed)),
        Box::new(move || suite::riccati_oracle(seed)),
        Box::new(suite::time_weight_suite),
        Box::new(move || suite::heat_estimate(n, seed)),
        Box::new(move || suite::linear_decay(n, 0.01, seed..seed + LINEAR_SEEDS)),
        Box::new(move || suite::self_convergence(16, 0.5, seed)),
    ];
    report.checks = suites.par_iter().map(|f| f()).collect();
}
