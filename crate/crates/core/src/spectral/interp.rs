//! Off-grid evaluation by direct summation of the retained Fourier modes.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::Grid;

/// Band-limited evaluator for one or more fields on the same grid.
#[derive(Debug, Clone)]
pub struct FourierInterpolant {
    grid: Grid,
    comps: usize,
    cut: i64,
    modes: Vec<[i64; 3]>,
    /// `coeffs[m * comps + c]`
    coeffs: Vec<Complex64>,
}

impl FourierInterpolant {
    /// Keeps every retained mode where some component is nonzero.
    pub fn new(fields: &[&SpectralField]) -> Self {
        let grid = fields[0].grid();
        let comps = fields.len();
        let cut = grid.dealias_cut() as i64;
        let mut modes = Vec::new();
        let mut coeffs = Vec::new();
        for (idx, k) in grid.modes().enumerate() {
            if !grid.is_retained(k) {
                continue;
            }
            if fields.iter().all(|f| f.coeffs()[idx] == Complex64::default()) {
                continue;
            }
            modes.push(k);
            coeffs.extend(fields.iter().map(|f| f.coeffs()[idx]));
        }
        FourierInterpolant {
            grid,
            comps,
            cut,
            modes,
            coeffs,
        }
    }

    /// `(1 − s)·self + s·other`, mode by mode. Both must hold the same fields
    /// layout; modes missing from one side count as zero.
    pub fn blend(&self, other: &FourierInterpolant, s: f64) -> FourierInterpolant {
        let mut map = std::collections::BTreeMap::new();
        for (w, src) in [(1.0 - s, self), (s, other)] {
            for (m, k) in src.modes.iter().enumerate() {
                let e = map.entry(*k).or_insert_with(|| vec![Complex64::default(); src.comps]);
                for c in 0..src.comps {
                    e[c] += src.coeffs[m * src.comps + c] * w;
                }
            }
        }
        let mut modes = Vec::with_capacity(map.len());
        let mut coeffs = Vec::with_capacity(map.len() * self.comps);
        for (k, v) in map {
            modes.push(k);
            coeffs.extend(v);
        }
        FourierInterpolant {
            grid: self.grid,
            comps: self.comps,
            cut: self.cut,
            modes,
            coeffs,
        }
    }

    pub fn components(&self) -> usize {
        self.comps
    }

    fn phase_tables(&self, x: [f64; 3]) -> [Vec<Complex64>; 3] {
        std::array::from_fn(|a| {
            (-self.cut..=self.cut)
                .map(|k| Complex64::from_polar(1.0, k as f64 * x[a]))
                .collect()
        })
    }

    /// Values of every component at `x`.
    pub fn value(&self, x: [f64; 3]) -> Vec<f64> {
        let e = self.phase_tables(x);
        let mut out = vec![0.0; self.comps];
        for (m, k) in self.modes.iter().enumerate() {
            let c = self.cut;
            let p = e[0][(k[0] + c) as usize] * e[1][(k[1] + c) as usize] * e[2][(k[2] + c) as usize];
            for (o, coeff) in out.iter_mut().zip(&self.coeffs[m * self.comps..(m + 1) * self.comps]) {
                *o += (coeff * p).re;
            }
        }
        out
    }

    /// Values and gradients `∂_j f_c` of every component at `x`.
    pub fn value_and_gradient(&self, x: [f64; 3]) -> (Vec<f64>, Vec<[f64; 3]>) {
        let e = self.phase_tables(x);
        let mut val = vec![0.0; self.comps];
        let mut grad = vec![[0.0; 3]; self.comps];
        let c = self.cut;
        for (m, k) in self.modes.iter().enumerate() {
            let p = e[0][(k[0] + c) as usize] * e[1][(k[1] + c) as usize] * e[2][(k[2] + c) as usize];
            let kf = [k[0] as f64, k[1] as f64, k[2] as f64];
            for j in 0..self.comps {
                let v = self.coeffs[m * self.comps + j] * p;
                val[j] += v.re;
                // ∂_a (c e^{ik·x}) = i k_a c e^{ik·x}
                grad[j][0] -= kf[0] * v.im;
                grad[j][1] -= kf[1] * v.im;
                grad[j][2] -= kf[2] * v.im;
            }
        }
        (val, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::random_field;

    #[test]
    fn reproduces_grid_values_and_analytic_off_grid() {
        let g = Grid::new(16).unwrap();
        let f = random_field(g, 4, 3);
        let it = FourierInterpolant::new(&[&f]);
        let phys = f.to_physical();
        for idx in [0, 17, 300, 4095] {
            assert!((it.value(g.point(idx))[0] - phys[idx]).abs() < 1e-12);
        }
        let s = SpectralField::from_fn(g, |x| x[0].sin() * x[1].cos());
        let it = FourierInterpolant::new(&[&s]);
        let x = [0.3, 1.7, 2.2];
        let (v, d) = it.value_and_gradient(x);
        assert!((v[0] - 0.3f64.sin() * 1.7f64.cos()).abs() < 1e-13);
        assert!((d[0][0] - 0.3f64.cos() * 1.7f64.cos()).abs() < 1e-13);
        assert!((d[0][1] + 0.3f64.sin() * 1.7f64.sin()).abs() < 1e-13);
        assert!(d[0][2].abs() < 1e-13);
    }

    #[test]
    fn blend_is_linear() {
        let g = Grid::new(8).unwrap();
        let a = random_field(g, 2, 1);
        let b = random_field(g, 2, 2);
        let ia = FourierInterpolant::new(&[&a]);
        let ib = FourierInterpolant::new(&[&b]);
        let x = [0.1, 0.2, 0.3];
        let mid = ia.blend(&ib, 0.25).value(x)[0];
        let expect = 0.75 * ia.value(x)[0] + 0.25 * ib.value(x)[0];
        assert!((mid - expect).abs() < 1e-13);
    }
}
