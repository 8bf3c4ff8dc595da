//! Blow-up rate and time estimates from a trace history.

use crate::error::{PttError, Result};

/// Linear fit `1/trτ ≈ slope·t + intercept` near the singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Limit of `trτ(t)(T − t)`, i.e. `−1/slope`.
    pub constant: f64,
    pub slope: f64,
    /// Time where the fitted `1/trτ` vanishes.
    pub singular_time: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_RATE_SAMPLES: usize = 10;

fn fit_inverse(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| 1.0 / p.1).sum::<f64>() / n;
    let stt: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sty: f64 = points.iter().map(|p| (p.0 - mt) * (1.0 / p.1 - my)).sum();
    if stt <= 0.0 {
        return Err(PttError::InsufficientData("window has a single time".into()));
    }
    let slope = sty / stt;
    Ok((slope, my - slope * mt))
}

fn negative_before(history: &[(f64, f64)], t_limit: f64) -> Vec<(f64, f64)> {
    history
        .iter()
        .copied()
        .filter(|(t, v)| *t < t_limit && *v < 0.0 && v.is_finite())
        .collect()
}

/// Fits `trτ(t)(T − t)` over the last decade of `T − t` before `t_detect`.
///
/// `history` holds `(t, min trτ)`. The decade is `T − t ∈ [g, 10g]` with
/// `g = t_detect − t_last`. The fit regresses `1/trτ` on `t`, so the
/// constant does not depend on how accurately `t_detect` locates `T`.
pub fn blowup_rate_probe(history: &[(f64, f64)], t_detect: f64) -> Result<RateFit> {
    let neg = negative_before(history, t_detect);
    let last = neg
        .last()
        .ok_or_else(|| PttError::InsufficientData("no negative trace samples before detection".into()))?;
    let gap = t_detect - last.0;
    let window: Vec<(f64, f64)> = neg.iter().copied().filter(|(t, _)| t_detect - t <= 10.0 * gap).collect();
    if window.len() < MIN_RATE_SAMPLES {
        return Err(PttError::InsufficientData(format!(
            "{} samples in the last decade before t = {t_detect}, need {MIN_RATE_SAMPLES}",
            window.len()
        )));
    }
    let (slope, intercept) = fit_inverse(&window)?;
    if !(slope > 0.0) {
        return Err(PttError::Numeric(format!("1/trτ is not increasing toward a singularity (slope {slope})")));
    }
    Ok(RateFit {
        constant: -1.0 / slope,
        slope,
        singular_time: -intercept / slope,
        window: (window[0].0, window[window.len() - 1].0),
        samples: window.len(),
    })
}

/// Zero of the linear fit of `1/trτ` over the last quarter of the negative
/// part of `history`.
pub fn extrapolate_blowup_time(history: &[(f64, f64)]) -> Result<f64> {
    let neg = negative_before(history, f64::INFINITY);
    if neg.len() < MIN_RATE_SAMPLES {
        return Err(PttError::InsufficientData(format!("{} negative samples", neg.len())));
    }
    let (t_first, t_last) = (neg[0].0, neg[neg.len() - 1].0);
    let start = t_last - 0.25 * (t_last - t_first);
    let window: Vec<(f64, f64)> = neg.into_iter().filter(|p| p.0 >= start).collect();
    if window.len() < 3 {
        return Err(PttError::InsufficientData("too few samples near the end".into()));
    }
    let (slope, intercept) = fit_inverse(&window)?;
    if !(slope > 0.0) {
        return Err(PttError::Numeric(format!("no approaching singularity (slope {slope})")));
    }
    Ok(-intercept / slope)
}
