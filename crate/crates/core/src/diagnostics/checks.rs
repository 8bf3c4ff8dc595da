//! Envelope and bound checks on run histories and model integrals.

use super::record::EnergyRecord;
use crate::error::{PttError, Result};
use crate::spectral::{derivative, to_physical_many, SpectralField};

/// Result of fitting `h2_u + l2_pdivtau` against `(1+t)^{-3/2+ε/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    pub exponent: f64,
    pub target_exponent: f64,
    /// Envelope constant `C` in `C(1+t)^{target}`.
    pub constant: f64,
    /// Largest `q(t) / (C(1+t)^{target})` over the window.
    pub worst_ratio: f64,
    pub pass: bool,
}

const ENVELOPE_T0: f64 = 2.0;
const ENVELOPE_MIN_SPAN: f64 = 10.0;
const ENVELOPE_FACTOR: f64 = 3.0;
const EXPONENT_SLACK: f64 = 0.05;

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Checks the algebraic decay envelope over `t ∈ [2, t_max]`.
///
/// The envelope passes through `3 q(2)` at `t = 2`. The fitted log-log
/// exponent must also be no slower than the target (with slack 0.05).
pub fn decay_envelope_check(history: &[EnergyRecord], eps: f64) -> Result<EnvelopeReport> {
    let t_max = history.last().map_or(0.0, |r| r.t);
    if t_max < ENVELOPE_MIN_SPAN {
        return Err(PttError::InsufficientData(format!(
            "envelope check needs a history reaching t >= {ENVELOPE_MIN_SPAN}, got t_max = {t_max}"
        )));
    }
    let window: Vec<&EnergyRecord> = history.iter().filter(|r| r.t >= ENVELOPE_T0).collect();
    if window.len() < 3 {
        return Err(PttError::InsufficientData(format!(
            "only {} records in [2, {t_max}]",
            window.len()
        )));
    }
    let target = -1.5 + 0.5 * eps;
    let anchor = window[0];
    let constant = ENVELOPE_FACTOR * anchor.decaying_quantity() / (1.0 + anchor.t).powf(target);

    let mut xs = Vec::with_capacity(window.len());
    let mut ys = Vec::with_capacity(window.len());
    let mut worst_ratio: f64 = 0.0;
    for r in &window {
        let q = r.decaying_quantity();
        worst_ratio = worst_ratio.max(q / (constant * (1.0 + r.t).powf(target)));
        if q > 0.0 {
            xs.push((1.0 + r.t).ln());
            ys.push(q.ln());
        }
    }
    let exponent = if xs.len() >= 3 {
        least_squares_slope(&xs, &ys)
    } else {
        f64::NEG_INFINITY
    };
    let pass = worst_ratio <= 1.0 && exponent <= target + EXPONENT_SLACK;
    Ok(EnvelopeReport {
        exponent,
        target_exponent: target,
        constant,
        worst_ratio,
        pass,
    })
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_DEPTH: u32 = 60;
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(PttError::Numeric(format!(
                "adaptive Simpson did not converge on [{a}, {b}] (error estimate {})",
                delta.abs() / 15.0
            )));
        }
        Ok(recurse(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?)
    }
    if b == a {
        return Ok(0.0);
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, MAX_DEPTH)
}

pub const TIME_WEIGHT_TIMES: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
pub const TIME_WEIGHT_TOL: f64 = 1e-12;
/// Exponent used in the bound for the borderline `r = 1` branch.
pub const TIME_WEIGHT_EPS: f64 = 0.1;
const TIME_WEIGHT_GROWTH: f64 = 1.05;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWeightRow {
    pub t: f64,
    pub early: f64,
    pub early_bound: f64,
    pub late: f64,
    pub late_bound: f64,
}

impl TimeWeightRow {
    pub fn early_ratio(&self) -> f64 {
        self.early / self.early_bound
    }

    pub fn late_ratio(&self) -> f64 {
        self.late / self.late_bound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeWeightReport {
    pub r: f64,
    pub c0: f64,
    pub rows: Vec<TimeWeightRow>,
    pub max_early_ratio: f64,
    pub max_late_ratio: f64,
    pub pass: bool,
}

/// Bound for `∫₀^{t/2} e^{−(t−s)}(1+c₀s)^{−r} ds`.
pub fn time_weight_early_bound(r: f64, c0: f64, t: f64) -> f64 {
    let base = (-0.5 * t).exp() / c0;
    if r > 1.0 {
        base
    } else if r < 1.0 {
        base * (1.0 + c0 * t).powf(1.0 - r)
    } else {
        base * (1.0 + c0 * t).powf(TIME_WEIGHT_EPS)
    }
}

/// Bound for `∫_{t/2}^t e^{−(t−s)}(1+c₀s)^{−r} ds`.
pub fn time_weight_late_bound(r: f64, c0: f64, t: f64) -> f64 {
    (1.0 + c0 * t).powf(-r)
}

/// `true` when the running maximum of `ratios` stops growing (by more than
/// 5% per grid step) over the second half of the grid.
fn running_max_settles(ratios: &[f64]) -> bool {
    let mut running = Vec::with_capacity(ratios.len());
    let mut m = f64::NEG_INFINITY;
    for &x in ratios {
        m = m.max(x);
        running.push(m);
    }
    let start = ratios.len() / 2;
    (start.max(1)..running.len()).all(|i| running[i] <= TIME_WEIGHT_GROWTH * running[i - 1])
}

/// Quadrature of both time-weight integrals over `times` and ratio analysis.
pub fn time_weight_check(r: f64, c0: f64, times: &[f64]) -> Result<TimeWeightReport> {
    if !(r > 0.0) {
        return Err(PttError::param("r", format!("must be positive, got {r}")));
    }
    if !(c0 > 0.0) {
        return Err(PttError::param("c0", format!("must be positive, got {c0}")));
    }
    if times.iter().any(|t| !(*t > 0.0)) {
        return Err(PttError::precondition("time-weight sample times must be positive"));
    }
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let f = |s: f64| (-(t - s)).exp() * (1.0 + c0 * s).powf(-r);
        rows.push(TimeWeightRow {
            t,
            early: adaptive_simpson(&f, 0.0, 0.5 * t, TIME_WEIGHT_TOL)?,
            early_bound: time_weight_early_bound(r, c0, t),
            late: adaptive_simpson(&f, 0.5 * t, t, TIME_WEIGHT_TOL)?,
            late_bound: time_weight_late_bound(r, c0, t),
        });
    }
    let early: Vec<f64> = rows.iter().map(TimeWeightRow::early_ratio).collect();
    let late: Vec<f64> = rows.iter().map(TimeWeightRow::late_ratio).collect();
    let pass = running_max_settles(&early) && running_max_settles(&late);
    Ok(TimeWeightReport {
        r,
        c0,
        max_early_ratio: early.iter().copied().fold(0.0, f64::max),
        max_late_ratio: late.iter().copied().fold(0.0, f64::max),
        rows,
        pass,
    })
}

pub const HEAT_TIMES: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

#[derive(Debug, Clone, PartialEq)]
pub struct HeatRow {
    pub t: f64,
    /// Grid maximum of `|∂_a∂_b (e^{tΔ}u₀)_m|` over all `m, a, b`.
    pub grid_max: f64,
    /// `max_m Σ_k e^{−|k|²t}|k|²|û₀_m(k)|`
    pub mode_sum: f64,
    /// `C e^{−t}‖u₀‖_{L²}`
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    pub l2_u0: f64,
    /// Constant measured at the first time.
    pub constant: f64,
    pub rows: Vec<HeatRow>,
    pub pass: bool,
}

/// Heat-semigroup L∞ estimate for the second derivatives of `u0`.
pub fn heat_linf_check(u0: &[SpectralField], times: &[f64]) -> Result<HeatReport> {
    let first = u0.first().ok_or_else(|| PttError::precondition("heat check needs at least one field"))?;
    let grid = first.grid();
    for f in u0 {
        grid.ensure_same(&f.grid())?;
        if f.mean().norm() > crate::spectral::MEAN_TOLERANCE {
            return Err(PttError::precondition(format!(
                "heat check needs mean-free data, mean = {}",
                f.mean().norm()
            )));
        }
    }
    if times.is_empty() || times.iter().any(|t| !(*t > 0.0)) {
        return Err(PttError::precondition("heat check times must be positive"));
    }
    let refs: Vec<&SpectralField> = u0.iter().collect();
    let l2 = crate::spectral::sobolev_norm_many(&refs, crate::spectral::SobolevIndex::L2);
    let ks = grid.wavevectors();

    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        let mut grid_max: f64 = 0.0;
        let mut mode_sum: f64 = 0.0;
        for f in u0 {
            let evolved = f.apply_symbol(|k| (-(crate::spectral::ksq(k) as f64) * t).exp());
            let s: f64 = ks
                .iter()
                .zip(f.coeffs())
                .map(|(k, c)| {
                    let q = crate::spectral::ksq(*k) as f64;
                    (-q * t).exp() * q * c.norm()
                })
                .sum();
            mode_sum = mode_sum.max(s);
            let mut second = Vec::with_capacity(6);
            for a in 0..3 {
                let da = derivative(&evolved, a);
                for b in a..3 {
                    second.push(derivative(&da, b));
                }
            }
            let second_refs: Vec<&SpectralField> = second.iter().collect();
            for p in to_physical_many(&second_refs) {
                grid_max = grid_max.max(crate::spectral::grid_max_abs(&p));
            }
        }
        rows.push(HeatRow {
            t,
            grid_max,
            mode_sum,
            bound: 0.0,
        });
    }
    let constant = if l2 > 0.0 {
        rows[0].mode_sum * rows[0].t.exp() / l2
    } else {
        0.0
    };
    let tol = 1e-12;
    let mut pass = true;
    let mut prev_scaled = f64::INFINITY;
    for row in &mut rows {
        row.bound = constant * (-row.t).exp() * l2;
        let scaled = row.mode_sum * row.t.exp();
        pass &= row.grid_max <= row.mode_sum * (1.0 + tol) + tol;
        pass &= row.grid_max <= row.bound * (1.0 + tol) + tol;
        pass &= scaled <= prev_scaled * (1.0 + tol) + tol;
        prev_scaled = scaled;
    }
    Ok(HeatReport {
        l2_u0: l2,
        constant,
        rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{random_solenoidal, Grid};

    fn synthetic(exponent: f64, t_max: f64) -> Vec<EnergyRecord> {
        (0..=(t_max / 0.05) as usize)
            .map(|i| {
                let t = i as f64 * 0.05;
                EnergyRecord {
                    t,
                    h2_u: (1.0 + t).powf(exponent),
                    ..Default::default()
                }
            })
            .collect()
    }

    #[test]
    fn envelope_fits_synthetic_rate() {
        let r = decay_envelope_check(&synthetic(-1.45, 20.0), 0.1).unwrap();
        assert!((r.exponent + 1.45).abs() < 0.01, "{}", r.exponent);
        assert!(r.pass);
    }

    #[test]
    fn envelope_rejects_slow_decay() {
        let r = decay_envelope_check(&synthetic(-1.0, 20.0), 0.1).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn envelope_needs_long_history() {
        assert!(matches!(
            decay_envelope_check(&synthetic(-1.45, 5.0), 0.1),
            Err(PttError::InsufficientData(_))
        ));
    }

    #[test]
    fn simpson_integrates_exponential() {
        let v = adaptive_simpson(&|x: f64| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        assert_eq!(adaptive_simpson(&|x: f64| x, 2.0, 2.0, 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn simpson_reports_nonconvergence() {
        let f = |x: f64| if x < 0.3 { 0.0 } else { 1.0 / (x - 0.3).sqrt() };
        assert!(matches!(adaptive_simpson(&f, 0.0, 1.0, 1e-14), Err(PttError::Numeric(_))));
    }

    #[test]
    fn time_weight_early_closed_form_for_zero_c0_limit() {
        // c0 → 0 turns both integrands into e^{−(t−s)}
        let rep = time_weight_check(2.0, 1e-12, &[4.0]).unwrap();
        let t: f64 = 4.0;
        let early = (-t / 2.0).exp() - (-t).exp();
        assert!((rep.rows[0].early - early).abs() < 1e-11);
        assert!((rep.rows[0].late - (1.0 - (-t / 2.0).exp())).abs() < 1e-11);
    }

    #[test]
    fn time_weight_r2_ratio_at_8_below_ratio_at_4() {
        let rep = time_weight_check(2.0, 1.0, &TIME_WEIGHT_TIMES).unwrap();
        let r4 = rep.rows[2].early_ratio();
        let r8 = rep.rows[3].early_ratio();
        assert!(r8 <= r4 * 1.05, "{r8} vs {r4}");
        assert!(rep.pass);
    }

    #[test]
    fn time_weight_small_t_integrals_vanish() {
        let rep = time_weight_check(1.0, 1.0, &[1e-8]).unwrap();
        assert!(rep.rows[0].early < 1e-8 && rep.rows[0].late < 1e-8);
    }

    #[test]
    fn heat_single_mode_is_exact() {
        let g = Grid::new(16).unwrap();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let rep = heat_linf_check(&[f], &HEAT_TIMES).unwrap();
        for row in &rep.rows {
            assert!((row.grid_max - (-row.t).exp()).abs() < 1e-12, "{row:?}");
        }
        assert!(rep.pass);
    }

    #[test]
    fn heat_random_envelope() {
        let g = Grid::new(16).unwrap();
        let u = random_solenoidal(g, 4, 7);
        let rep = heat_linf_check(&u, &HEAT_TIMES).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn heat_rejects_mean() {
        let g = Grid::new(8).unwrap();
        let f = SpectralField::constant(g, 1.0);
        assert!(heat_linf_check(&[f], &HEAT_TIMES).is_err());
    }
}
