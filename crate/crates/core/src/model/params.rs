use crate::error::{PttError, Result};

/// Physical constants of the PTT system.
///
/// `a` is the linear relaxation rate, `b` the trace-proportional destruction
/// rate, `lambda` the slip parameter of `Q`, `mu` the solvent viscosity,
/// `mu1` the elastic coupling in the momentum equation and `mu2` the
/// stretching coefficient of `D(u)` in the stress equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    pub mu: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for ModelParams {
    /// `a = λ = 0`, `b = μ = μ₁ = μ₂ = 1`.
    fn default() -> Self {
        ModelParams {
            a: 0.0,
            b: 1.0,
            lambda: 0.0,
            mu: 1.0,
            mu1: 1.0,
            mu2: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.lambda, self.mu, self.mu1, self.mu2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(PttError::param("params", "all constants must be finite"));
        }
        if self.mu <= 0.0 {
            return Err(PttError::param("mu", format!("viscosity must be positive, got {}", self.mu)));
        }
        if !(-1.0..=1.0).contains(&self.lambda) {
            return Err(PttError::param(
                "lambda",
                format!("slip parameter must lie in [-1, 1], got {}", self.lambda),
            ));
        }
        if self.b < 0.0 {
            return Err(PttError::param("b", format!("must be nonnegative, got {}", self.b)));
        }
        Ok(())
    }

    /// Order used by the snapshot header.
    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.lambda, self.mu, self.mu1, self.mu2]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        ModelParams {
            a: v[0],
            b: v[1],
            lambda: v[2],
            mu: v[3],
            mu1: v[4],
            mu2: v[5],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_is_valid() {
        let p = ModelParams::default();
        assert!(p.validate().is_ok());
        assert_eq!(p.to_array(), [0.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn range_checks() {
        let bad_lambda = ModelParams { lambda: 2.0, ..Default::default() };
        assert!(matches!(bad_lambda.validate(), Err(PttError::Parameter { name: "lambda", .. })));
        let bad_mu = ModelParams { mu: 0.0, ..Default::default() };
        assert!(bad_mu.validate().is_err());
        let bad_b = ModelParams { b: -1.0, ..Default::default() };
        assert!(bad_b.validate().is_err());
    }
}
