//! Velocity-gradient decompositions and the bilinear stress term `Q`.

use nalgebra::Matrix3;
use rayon::prelude::*;

use crate::spectral::{
    derivative, from_physical_dealiased, to_physical_many, SpectralField, SymTensor, VectorField, SYM_PAIRS,
};

/// `∇u` with entries `G_ij = ∂_j u_i`, stored row-major.
pub fn velocity_gradient(u: &VectorField) -> [SpectralField; 9] {
    std::array::from_fn(|c| derivative(&u[c / 3], c % 3))
}

/// `D(u) = ½(∇u + ∇uᵀ)`.
pub fn deformation(u: &VectorField) -> SymTensor {
    SymTensor {
        comps: SYM_PAIRS.map(|(i, j)| {
            if i == j {
                derivative(&u[i], i)
            } else {
                let mut s = derivative(&u[i], j);
                s += &derivative(&u[j], i);
                s.scale(0.5)
            }
        }),
    }
}

/// Antisymmetric tensor field stored by its upper triangle `(12, 13, 23)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntiSymTensor {
    pub upper: [SpectralField; 3],
}

impl AntiSymTensor {
    /// Entry `(i, j)`; diagonal entries are zero.
    pub fn get(&self, i: usize, j: usize) -> SpectralField {
        let slot = |a: usize, b: usize| match (a, b) {
            (0, 1) => 0,
            (0, 2) => 1,
            _ => 2,
        };
        if i == j {
            SpectralField::zeros(self.upper[0].grid())
        } else if i < j {
            self.upper[slot(i, j)].clone()
        } else {
            self.upper[slot(j, i)].scale(-1.0)
        }
    }
}

/// `Ω(u) = ½(∇u − ∇uᵀ)`.
pub fn vorticity_tensor(u: &VectorField) -> AntiSymTensor {
    let entry = |i: usize, j: usize| {
        let mut s = derivative(&u[i], j);
        s -= &derivative(&u[j], i);
        s.scale(0.5)
    };
    AntiSymTensor {
        upper: [entry(0, 1), entry(0, 2), entry(1, 2)],
    }
}

#[inline]
pub(crate) fn sym_matrix(t: &[f64; 6]) -> Matrix3<f64> {
    Matrix3::new(t[0], t[1], t[2], t[1], t[3], t[4], t[2], t[4], t[5])
}

#[inline]
pub(crate) fn sym_slots(m: &Matrix3<f64>) -> [f64; 6] {
    SYM_PAIRS.map(|(i, j)| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// `Q = τΩ − Ωτ + λ(Dτ + τD)` at one point, given `τ` and `G = ∇u`.
#[inline]
pub(crate) fn q_pointwise(tau: &Matrix3<f64>, grad_u: &Matrix3<f64>, lambda: f64) -> Matrix3<f64> {
    let d = (grad_u + grad_u.transpose()) * 0.5;
    let w = (grad_u - grad_u.transpose()) * 0.5;
    tau * w - w * tau + (d * tau + tau * d) * lambda
}

/// `Q(τ, ∇u)`, formed on the grid and truncated.
pub fn q_bilinear(tau: &SymTensor, u: &VectorField, lambda: f64) -> SymTensor {
    let grid = u[0].grid();
    let grad = velocity_gradient(u);
    let mut inputs: Vec<&SpectralField> = grad.iter().collect();
    inputs.extend(tau.comps.iter());
    let phys = to_physical_many(&inputs);
    let npts = grid.len();
    let values: Vec<[f64; 6]> = (0..npts)
        .into_par_iter()
        .map(|p| {
            let g = Matrix3::from_fn(|i, j| phys[i * 3 + j][p]);
            let t = sym_matrix(&std::array::from_fn(|s| phys[9 + s][p]));
            sym_slots(&q_pointwise(&t, &g, lambda))
        })
        .collect();
    let samples: Vec<Vec<f64>> = (0..6).map(|s| values.iter().map(|v| v[s]).collect()).collect();
    let spec = from_physical_dealiased(grid, samples);
    SymTensor {
        comps: std::array::from_fn(|s| spec[s].clone()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{gradient, random_solenoidal, random_vector, Grid};

    fn max_phys(f: &SpectralField) -> f64 {
        f.to_physical().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn shear_mode_deformation_and_vorticity() {
        let g = Grid::new(16).unwrap();
        let u = [
            SpectralField::from_fn(g, |x| x[1].sin()),
            SpectralField::zeros(g),
            SpectralField::zeros(g),
        ];
        let half_cos = SpectralField::from_fn(g, |x| 0.5 * x[1].cos());
        let d = deformation(&u);
        assert!((d.get(0, 1) - &half_cos).max_abs_coeff() < 1e-15);
        for i in 0..3 {
            assert!(d.get(i, i).max_abs_coeff() < 1e-15);
        }
        let w = vorticity_tensor(&u);
        assert!((&w.get(0, 1) - &half_cos).max_abs_coeff() < 1e-15);
        assert!((&w.get(1, 0) + &half_cos).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn zero_velocity_has_zero_deformation() {
        let g = Grid::new(8).unwrap();
        let u: VectorField = std::array::from_fn(|_| SpectralField::zeros(g));
        assert!(deformation(&u).comps.iter().all(|c| c.max_abs_coeff() == 0.0));
    }

    #[test]
    fn deformation_is_traceless_for_solenoidal_velocity() {
        let g = Grid::new(16).unwrap();
        let u = random_solenoidal(g, 4, 9);
        assert!(max_phys(&deformation(&u).trace()) < 1e-12);
    }

    #[test]
    fn irrotational_flow_has_no_vorticity() {
        let g = Grid::new(16).unwrap();
        let phi = SpectralField::from_fn(g, |x| (x[0] + x[1]).sin() * x[2].cos());
        let w = vorticity_tensor(&gradient(&phi));
        for c in &w.upper {
            assert!(c.max_abs_coeff() < 1e-15);
        }
    }

    #[test]
    fn deformation_plus_vorticity_is_gradient() {
        let g = Grid::new(16).unwrap();
        let u = random_vector(g, 4, 2);
        let d = deformation(&u);
        let w = vorticity_tensor(&u);
        let grad = velocity_gradient(&u);
        for i in 0..3 {
            for j in 0..3 {
                let mut sum = d.get(i, j).clone();
                sum += &w.get(i, j);
                assert!((&sum - &grad[i * 3 + j]).max_abs_coeff() < 1e-15);
            }
        }
    }

    #[test]
    fn identity_stress_q() {
        let g = Grid::new(16).unwrap();
        let u = random_solenoidal(g, 3, 4);
        let id = SymTensor::isotropic(&SpectralField::constant(g, 1.0));
        let q0 = q_bilinear(&id, &u, 0.0);
        assert!(q0.comps.iter().all(|c| c.max_abs_coeff() < 1e-14));
        let q1 = q_bilinear(&id, &u, 1.0);
        let d2 = deformation(&u).scale(2.0);
        for (a, b) in q1.comps.iter().zip(&d2.comps) {
            assert!((a - b).max_abs_coeff() < 1e-14);
        }
    }

    /// Dense 3×3 arithmetic with explicit index loops on the grid samples.
    #[test]
    fn q_matches_dense_oracle() {
        let g = Grid::new(32).unwrap();
        let u = random_solenoidal(g, 4, 21);
        let tau = SymTensor::random(g, 4, 22);
        let lambda = 0.5;
        let q = q_bilinear(&tau, &u, lambda);

        let grad: Vec<Vec<f64>> = velocity_gradient(&u).iter().map(|f| f.to_physical()).collect();
        let tp: Vec<Vec<f64>> = tau.comps.iter().map(|f| f.to_physical()).collect();
        let qp: Vec<Vec<f64>> = q.comps.iter().map(|f| f.to_physical()).collect();
        let mut worst: f64 = 0.0;
        for p in 0..g.len() {
            let mut t = [[0.0; 3]; 3];
            let mut gm = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    t[i][j] = tp[crate::spectral::sym_index(i, j)][p];
                    gm[i][j] = grad[i * 3 + j][p];
                }
            }
            let mut d = [[0.0; 3]; 3];
            let mut w = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    d[i][j] = 0.5 * (gm[i][j] + gm[j][i]);
                    w[i][j] = 0.5 * (gm[i][j] - gm[j][i]);
                }
            }
            for (slot, &(i, j)) in SYM_PAIRS.iter().enumerate() {
                let mut v = 0.0;
                for k in 0..3 {
                    v += t[i][k] * w[k][j] - w[i][k] * t[k][j] + lambda * (d[i][k] * t[k][j] + t[i][k] * d[k][j]);
                }
                worst = worst.max((v - qp[slot][p]).abs());
            }
        }
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn q_trace_vanishes_without_slip() {
        let g = Grid::new(16).unwrap();
        let u = random_solenoidal(g, 4, 5);
        let tau = SymTensor::random(g, 4, 6);
        let tr = q_bilinear(&tau, &u, 0.0).trace();
        assert!(max_phys(&tr) < 1e-12 * (1.0 + max_phys(&tau.comps[0])));
    }
}
