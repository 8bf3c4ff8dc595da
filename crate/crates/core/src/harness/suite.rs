//! Oracle and property checks shared by the `verify` scenario and the
//! acceptance target.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::characteristics::{riccati_blowup_time, riccati_rk4, riccati_trace};
use crate::diagnostics::{heat_linf_check, time_weight_check};
use crate::error::Result;
use crate::integrator::{run, step_with_dt, NullObserver, Scheme, StepControl};
use crate::linear::{
    duhamel_defect, eigenvalues, evolve_linear, green_blocks, matrix_exponential_oracle, LINEAR_ENVELOPE_C,
};
use crate::model::{make_initial_data, FlowState, InitialData, ModelParams};
use crate::spectral::{
    leray_project, projection_identity_residuals, random_solenoidal, sobolev_norm_many, Grid, SobolevIndex,
    SpectralField, SymTensor, VectorField,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }

    /// A check that could not be evaluated.
    pub fn error(name: &str, err: &crate::error::PttError) -> Self {
        Check::new(name, false, format!("error: {err}"))
    }

    pub fn line(&self) -> String {
        format!("{} {} {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn or_error(name: &str, r: Result<Check>) -> Check {
    r.unwrap_or_else(|e| Check::error(name, &e))
}

pub const GREEN_KSQ_MAX: u64 = 64;
pub const GREEN_TIMES: [f64; 3] = [0.1, 1.0, 5.0];

/// Closed-form Green's blocks against the matrix exponential, and the
/// `|k|² = 1` eigenvalues.
pub fn green_exactness() -> Check {
    or_error(
        "green_exactness",
        (|| {
            let mut worst: f64 = 0.0;
            for q in 1..=GREEN_KSQ_MAX {
                for t in GREEN_TIMES {
                    let m = green_blocks(t, q)?.as_matrix();
                    let o = matrix_exponential_oracle(t, q);
                    for i in 0..2 {
                        for j in 0..2 {
                            worst = worst.max((m[i][j] - o[i][j]).abs());
                        }
                    }
                }
            }
            let (l1, l2) = eigenvalues(1)?;
            let eig = (l1 - Complex64::new(-0.5, 0.5)).norm().max((l2 - Complex64::new(-0.5, -0.5)).norm());
            Ok(Check::new(
                "green_exactness",
                worst <= 1e-10 && eig <= 1e-14,
                format!("max_block_deviation={worst:.3e} eigenvalue_deviation={eig:.3e}"),
            ))
        })(),
    )
}

/// Both projection identities on `pairs` random dealiased `(u, τ)` pairs.
pub fn projection_identities(n: usize, pairs: usize, seed: u64) -> Check {
    or_error(
        "projection_identities",
        (|| {
            let grid = Grid::new(n)?;
            let mut worst: (f64, f64) = (0.0, 0.0);
            for i in 0..pairs as u64 {
                let u = random_solenoidal(grid, 4, seed.wrapping_add(2 * i));
                let tau = SymTensor::random(grid, 4, seed.wrapping_add(2 * i + 1));
                let (a, b) = projection_identity_residuals(&u, &tau)?.relative();
                worst = (worst.0.max(a), worst.1.max(b));
            }
            Ok(Check::new(
                "projection_identities",
                worst.0 <= 1e-10 && worst.1 <= 1e-10,
                format!("pairs={pairs} n={n} transport={:.3e} trace_weight={:.3e}", worst.0, worst.1),
            ))
        })(),
    )
}

pub const RICCATI_CASES: usize = 100;
const RICCATI_RK4_STEPS: usize = 20_000;

/// Closed-form Riccati trace against RK4 on random `(tr₀, a, b)`, plus
/// relaxation-dominated cases `−a/b < tr₀ < 0` that stay regular on `[0, 50]`.
pub fn riccati_oracle(seed: u64) -> Check {
    or_error(
        "riccati_oracle",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..RICCATI_CASES {
                let tr0 = rng.random_range(-3.0..3.0);
                let a = rng.random_range(-1.0..1.0);
                let b = rng.random_range(0.1..2.0);
                let t = match riccati_blowup_time(tr0, a, b) {
                    Some(ts) => (0.5 * ts).min(2.0),
                    None => 2.0,
                };
                let exact = riccati_trace(tr0, t, a, b)?;
                let rk = riccati_rk4(tr0, t, a, b, RICCATI_RK4_STEPS);
                worst = worst.max((exact - rk).abs() / exact.abs().max(1.0));
            }
            let mut threshold_ok = true;
            let mut threshold_worst: f64 = 0.0;
            for _ in 0..20 {
                let a = rng.random_range(0.1..2.0);
                let b = rng.random_range(0.1..2.0);
                let tr0 = -(a / b) * rng.random_range(0.05..0.95);
                threshold_ok &= riccati_blowup_time(tr0, a, b).is_none();
                let mut rk = tr0;
                for i in 1..=50 {
                    let exact = riccati_trace(tr0, i as f64, a, b)?;
                    threshold_ok &= exact.is_finite() && exact.abs() <= tr0.abs();
                    rk = riccati_rk4(rk, 1.0, a, b, 1000);
                    threshold_worst = threshold_worst.max((exact - rk).abs());
                }
            }
            Ok(Check::new(
                "riccati_oracle",
                worst <= 1e-10 && threshold_ok && threshold_worst <= 1e-10,
                format!(
                    "cases={RICCATI_CASES} max_rel_deviation={worst:.3e} threshold_regular={threshold_ok} \
threshold_deviation={threshold_worst:.3e}"
                ),
            ))
        })(),
    )
}

pub const LINEAR_DECAY_TIMES: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const LINEAR_DECAY_ANCHOR: f64 = 0.5;
/// Allowed growth of the running maximum between the last two times.
pub const LINEAR_DECAY_GROWTH: f64 = 1.05;

fn l2_pair(u: &VectorField, w: &VectorField) -> f64 {
    let v: Vec<&SpectralField> = u.iter().chain(w.iter()).collect();
    sobolev_norm_many(&v, SobolevIndex::L2)
}

/// Ratios `‖(u, ℙdiv τ)(t)‖ / (C e^{−t/2} ‖(u₀, ℙdiv τ₀)‖)` with `C` measured at
/// `t = 1/2`. Passes when every ratio stays below the envelope constant over
/// `C` and the running maximum has settled by `t = 4`.
pub fn linear_decay(n: usize, delta: f64, seeds: std::ops::Range<u64>) -> Check {
    or_error(
        "linear_decay",
        (|| {
            let grid = Grid::new(n)?;
            let mut pass = true;
            let mut worst_ratio: f64 = 0.0;
            let mut worst_growth: f64 = 0.0;
            for seed in seeds.clone() {
                let s = make_initial_data(grid, &InitialData::linear(delta, seed))?;
                let w = leray_project(&s.tau.divergence());
                let n0 = l2_pair(&s.u, &w);
                let rho = |t: f64| -> Result<f64> {
                    let (a, b) = evolve_linear(&s.u, &w, t)?;
                    Ok(l2_pair(&a, &b) * (0.5 * t).exp() / n0)
                };
                let c = rho(LINEAR_DECAY_ANCHOR)?;
                let mut running = 1.0f64;
                let mut maxima = Vec::new();
                for t in LINEAR_DECAY_TIMES {
                    let r = rho(t)? / c;
                    worst_ratio = worst_ratio.max(r);
                    running = running.max(r);
                    maxima.push(running);
                    pass &= r * c <= LINEAR_ENVELOPE_C;
                }
                let growth = maxima[maxima.len() - 1] / maxima[maxima.len() - 2];
                worst_growth = worst_growth.max(growth);
                pass &= growth <= LINEAR_DECAY_GROWTH;
            }
            Ok(Check::new(
                "linear_decay",
                pass,
                format!(
                    "seeds={}..{} max_ratio={worst_ratio:.4} final_running_max_growth={worst_growth:.4}",
                    seeds.start, seeds.end
                ),
            ))
        })(),
    )
}

/// Defect between the nonlinear and linear velocity at `t = 1` for `δ` and
/// `δ/2`; the ratio should be close to 4.
pub fn duhamel_scaling(n: usize, delta: f64, dt: f64, seed: u64) -> Check {
    or_error(
        "duhamel_scaling",
        (|| {
            let rows = duhamel_rows(n, &[delta, 0.5 * delta], dt, seed)?;
            let ratio = rows[0].1 / rows[1].1;
            Ok(Check::new(
                "duhamel_scaling",
                (3.2..=4.8).contains(&ratio),
                format!(
                    "delta={delta} defect={:.6e} half_delta_defect={:.6e} ratio={ratio:.4}",
                    rows[0].1, rows[1].1
                ),
            ))
        })(),
    )
}

/// `(δ, ‖u_nl(1) − u_lin(1)‖_{L²})` for each amplitude.
pub fn duhamel_rows(n: usize, deltas: &[f64], dt: f64, seed: u64) -> Result<Vec<(f64, f64)>> {
    let grid = Grid::new(n)?;
    let p = ModelParams::default();
    let mut rows = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let s = make_initial_data(grid, &InitialData::linear(d, seed))?;
        let w = leray_project(&s.tau.divergence());
        let (ul, _) = evolve_linear(&s.u, &w, 1.0)?;
        let ctl = StepControl {
            record_interval: 1.0,
            ..StepControl::new(dt, 1.0)
        };
        let out = run(&s, &p, &ctl, &mut NullObserver)?;
        rows.push((d, duhamel_defect(&out.final_state.u, &ul)?));
    }
    Ok(rows)
}

pub const TIME_WEIGHT_RS: [f64; 3] = [0.5, 1.0, 2.0];
pub const TIME_WEIGHT_C0S: [f64; 2] = [0.01, 1.0];

/// Time-weight integral quadratures for every `(r, c₀)` over `t = 1, …, 32`.
pub fn time_weight_suite() -> Check {
    or_error(
        "time_weight_integrals",
        (|| {
            let times: Vec<f64> = (1..=32).map(f64::from).collect();
            let mut pass = true;
            let mut detail = Vec::new();
            for r in TIME_WEIGHT_RS {
                for c0 in TIME_WEIGHT_C0S {
                    let rep = time_weight_check(r, c0, &times)?;
                    pass &= rep.pass;
                    detail.push(format!(
                        "r={r},c0={c0}:{:.3}/{:.3}{}",
                        rep.max_early_ratio,
                        rep.max_late_ratio,
                        if rep.pass { "" } else { "!" }
                    ));
                }
            }
            Ok(Check::new("time_weight_integrals", pass, detail.join(" ")))
        })(),
    )
}

/// Heat-semigroup L∞ estimate on a random solenoidal field.
pub fn heat_estimate(n: usize, seed: u64) -> Check {
    or_error(
        "heat_linf",
        (|| {
            let u = random_solenoidal(Grid::new(n)?, 4, seed);
            let rep = heat_linf_check(&u, &crate::diagnostics::HEAT_TIMES)?;
            let worst = rep.rows.iter().map(|r| r.grid_max / r.bound).fold(0.0, f64::max);
            Ok(Check::new(
                "heat_linf",
                rep.pass,
                format!("C={:.4e} max_grid_to_bound={worst:.4}", rep.constant),
            ))
        })(),
    )
}

fn state_difference(a: &FlowState, b: &FlowState) -> f64 {
    let d: Vec<SpectralField> = a.components().iter().zip(b.components()).map(|(x, y)| *x - y).collect();
    let refs: Vec<&SpectralField> = d.iter().collect();
    sobolev_norm_many(&refs, SobolevIndex::L2)
}

pub const CONVERGENCE_DTS: [f64; 3] = [0.02, 0.01, 0.005];
pub const CONVERGENCE_T: f64 = 0.5;

/// Richardson self-convergence order of the default scheme over three dt
/// levels on smooth data.
pub fn self_convergence(n: usize, delta: f64, seed: u64) -> Check {
    or_error(
        "self_convergence",
        (|| {
            let (order, ratio) = convergence_order(n, delta, seed, Scheme::IfSsprk2)?;
            Ok(Check::new(
                "self_convergence",
                order >= 1.9,
                format!("order={order:.4} error_ratio={ratio:.4} dts={CONVERGENCE_DTS:?}"),
            ))
        })(),
    )
}

/// `(order, ratio)` from the three-level Richardson differences.
pub fn convergence_order(n: usize, delta: f64, seed: u64, scheme: Scheme) -> Result<(f64, f64)> {
    let grid = Grid::new(n)?;
    let p = ModelParams::default();
    let s0 = make_initial_data(grid, &InitialData::linear(delta, seed))?;
    let finals: Vec<FlowState> = CONVERGENCE_DTS
        .iter()
        .map(|&dt| {
            let steps = (CONVERGENCE_T / dt).round() as usize;
            (0..steps).fold(s0.clone(), |s, _| step_with_dt(&s, &p, dt, scheme))
        })
        .collect();
    let e1 = state_difference(&finals[0], &finals[1]);
    let e2 = state_difference(&finals[1], &finals[2]);
    let ratio = e1 / e2;
    Ok((ratio.log2(), ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        for c in [green_exactness(), riccati_oracle(1), time_weight_suite(), heat_estimate(8, 2)] {
            assert!(c.pass, "{}", c.line());
        }
    }

    #[test]
    fn check_line_format() {
        assert_eq!(Check::new("x", false, "y=1").line(), "FAIL x y=1");
    }
}
