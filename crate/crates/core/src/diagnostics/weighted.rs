//! Time-weighted energy functionals built from a stream of records.

use super::record::EnergyRecord;
use crate::error::{PttError, Result};

/// Running values of the weighted energies
///
/// ```text
/// E₁ = sup(‖u‖²_{H²} + ‖τ‖²_{H²}) + ∫‖∇u‖²_{H²} + ∫‖ℙdivτ‖²_{H¹}
/// E₂ = sup w_c(‖∇²u‖² + ‖∇ℙdivτ‖²) + ∫w_c‖∇³u‖² + ∫w_c‖∇ℙdivτ‖²
/// E₃ = sup (1+s)^{3−ε}(‖u‖²_{H²} + ‖ℙdivτ‖²)
/// E₄ = c₀⁻¹∫w_c‖∇trτ‖²,   E₅ = c₀⁻¹∫w_c‖∇²trτ‖²
/// ```
///
/// with `w_c = (1 + c₀s)^{3−ε}`. Integrals use the trapezoid rule at the
/// record cadence.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEnergies {
    pub eps: f64,
    pub c0: f64,
    pub e0: f64,
    pub e0_tilde: f64,
    pub e1_sup: f64,
    pub e1_int: f64,
    pub e2_sup: f64,
    pub e2_int: f64,
    pub e3: f64,
    pub e4: f64,
    pub e5: f64,
    last: EnergyRecord,
}

struct Integrands {
    e1: f64,
    e2: f64,
    e4: f64,
    e5: f64,
}

impl WeightedEnergies {
    pub fn new(eps: f64, c0: f64, first: &EnergyRecord) -> Result<Self> {
        if !(c0 > 0.0) {
            return Err(PttError::param("c0", format!("weights need c0 > 0, got {c0}")));
        }
        if !(eps > 0.0 && eps < 3.0) {
            return Err(PttError::param("eps", format!("weight exponent must be in (0, 3), got {eps}")));
        }
        let mut w = WeightedEnergies {
            eps,
            c0,
            e0: first.h2_u.powi(2) + first.h2_tau.powi(2),
            e0_tilde: (first.l2_grad2_trtau / c0).powi(2),
            e1_sup: 0.0,
            e1_int: 0.0,
            e2_sup: 0.0,
            e2_int: 0.0,
            e3: 0.0,
            e4: 0.0,
            e5: 0.0,
            last: *first,
        };
        w.update_sups(first);
        Ok(w)
    }

    fn weight_c(&self, t: f64) -> f64 {
        (1.0 + self.c0 * t).powf(3.0 - self.eps)
    }

    fn integrands(&self, r: &EnergyRecord) -> Integrands {
        let w = self.weight_c(r.t);
        Integrands {
            e1: r.h2_grad_u.powi(2) + r.h1_pdivtau.powi(2),
            e2: w * (r.l2_grad3_u.powi(2) + r.l2_grad_pdivtau.powi(2)),
            e4: w * r.l2_grad_trtau.powi(2) / self.c0,
            e5: w * r.l2_grad2_trtau.powi(2) / self.c0,
        }
    }

    fn update_sups(&mut self, r: &EnergyRecord) {
        let w = self.weight_c(r.t);
        self.e1_sup = self.e1_sup.max(r.h2_u.powi(2) + r.h2_tau.powi(2));
        self.e2_sup = self.e2_sup.max(w * (r.l2_grad2_u.powi(2) + r.l2_grad_pdivtau.powi(2)));
        let w1 = (1.0 + r.t).powf(3.0 - self.eps);
        self.e3 = self.e3.max(w1 * (r.h2_u.powi(2) + r.l2_pdivtau.powi(2)));
    }

    /// Folds in the next record (must not be earlier than the previous one).
    pub fn accumulate(&mut self, rec: &EnergyRecord) -> Result<()> {
        if rec.t < self.last.t {
            return Err(PttError::Sequencing {
                last: self.last.t,
                got: rec.t,
            });
        }
        let dt = rec.t - self.last.t;
        let a = self.integrands(&self.last);
        let b = self.integrands(rec);
        self.e1_int += 0.5 * dt * (a.e1 + b.e1);
        self.e2_int += 0.5 * dt * (a.e2 + b.e2);
        self.e4 += 0.5 * dt * (a.e4 + b.e4);
        self.e5 += 0.5 * dt * (a.e5 + b.e5);
        self.update_sups(rec);
        self.last = *rec;
        Ok(())
    }

    pub fn e1(&self) -> f64 {
        self.e1_sup + self.e1_int
    }

    pub fn e2(&self) -> f64 {
        self.e2_sup + self.e2_int
    }

    pub fn t(&self) -> f64 {
        self.last.t
    }
}
