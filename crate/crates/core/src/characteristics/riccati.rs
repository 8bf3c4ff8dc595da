//! Closed-form solution of `y' = −b y² − a y`, the trace equation along a
//! characteristic.

use crate::error::{PttError, Result};

/// First time at which the Riccati solution from `tr0` becomes singular, or
/// `None` when it exists for all `t ≥ 0`.
///
/// For `a = 0` this is `−1/(b tr0)` when `tr0 < 0`. Otherwise
/// `T = −ln(1 + a/(b tr0))/a`, finite iff `tr0 < 0` and (`a < 0` or
/// `tr0 < −a/b`).
pub fn riccati_blowup_time(tr0: f64, a: f64, b: f64) -> Option<f64> {
    if !(tr0 < 0.0) || b <= 0.0 {
        return None;
    }
    if a == 0.0 {
        return Some(-1.0 / (b * tr0));
    }
    let z = a / (b * tr0);
    if a > 0.0 && z <= -1.0 {
        return None;
    }
    Some(-z.ln_1p() / a)
}

/// `tr τ(t, q(t, x))` for initial value `tr0`:
/// `tr0/(1 + b tr0 t)` if `a = 0`, else `a tr0 e^{−at}/(a + b tr0(1 − e^{−at}))`.
pub fn riccati_trace(tr0: f64, t: f64, a: f64, b: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(PttError::precondition(format!("riccati_trace needs t >= 0, got {t}")));
    }
    if let Some(blowup_time) = riccati_blowup_time(tr0, a, b) {
        if t >= blowup_time {
            return Err(PttError::Singularity {
                blowup_time,
                requested: t,
            });
        }
    }
    if a == 0.0 {
        return Ok(tr0 / (1.0 + b * tr0 * t));
    }
    let decay = (-a * t).exp();
    Ok(a * tr0 * decay / (a - b * tr0 * (-a * t).exp_m1()))
}

/// Classical RK4 for `y' = −b y² − a y` with `steps` equal steps.
pub fn riccati_rk4(tr0: f64, t: f64, a: f64, b: f64, steps: usize) -> f64 {
    let f = |y: f64| -b * y * y - a * y;
    let h = t / steps as f64;
    let mut y = tr0;
    for _ in 0..steps {
        let k1 = f(y);
        let k2 = f(y + 0.5 * h * k1);
        let k3 = f(y + 0.5 * h * k2);
        let k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_preset_values() {
        assert_eq!(riccati_trace(-2.0, 0.25, 0.0, 1.0).unwrap(), -4.0);
        let c: f64 = 0.3;
        assert!((riccati_trace(c, 10.0, 0.0, 1.0).unwrap() - c / (1.0 + 10.0 * c)).abs() < 1e-15);
        assert_eq!(riccati_blowup_time(-2.0, 0.0, 1.0), Some(0.5));
    }

    #[test]
    fn singularity_carries_blowup_time() {
        match riccati_trace(-2.0, 0.5, 0.0, 1.0) {
            Err(PttError::Singularity { blowup_time, requested }) => {
                assert_eq!(blowup_time, 0.5);
                assert_eq!(requested, 0.5);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn relaxation_threshold() {
        assert_eq!(riccati_blowup_time(-0.5, 1.0, 1.0), None);
        assert_eq!(riccati_blowup_time(-1.0, 1.0, 1.0), None);
        assert!(riccati_blowup_time(-3.0, 1.0, 1.0).is_some());
        // a < 0 amplifies: any negative start blows up
        assert!(riccati_blowup_time(-0.01, -1.0, 1.0).is_some());
        assert_eq!(riccati_blowup_time(1.0, 1.0, 1.0), None);
    }

    #[test]
    fn general_formula_matches_rk4() {
        let (a, b, y0) = (1.0, 1.0, -3.0);
        let t_star = riccati_blowup_time(y0, a, b).unwrap();
        let t = 0.5 * t_star;
        let exact = riccati_trace(y0, t, a, b).unwrap();
        let rk = riccati_rk4(y0, t, a, b, 20000);
        assert!((exact - rk).abs() < 1e-10 * exact.abs(), "{exact} vs {rk}");
    }
}
