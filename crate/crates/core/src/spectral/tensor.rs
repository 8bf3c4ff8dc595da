use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::field::SpectralField;
use super::grid::Grid;
use super::ops::{derivative, VectorField};
use super::random::random_field_with;

/// Storage slot of entry `(i, j)` in the order `11, 12, 13, 22, 23, 33`.
#[inline]
pub const fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Entry pairs `(i, j)` for the six stored components.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Symmetric 3×3 tensor field stored as its six independent components.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    pub comps: [SpectralField; 6],
}

impl SymTensor {
    pub fn zeros(grid: Grid) -> Self {
        SymTensor {
            comps: std::array::from_fn(|_| SpectralField::zeros(grid)),
        }
    }

    /// `φ·I`.
    pub fn isotropic(phi: &SpectralField) -> Self {
        let z = SpectralField::zeros(phi.grid());
        SymTensor {
            comps: [
                phi.clone(),
                z.clone(),
                z.clone(),
                phi.clone(),
                z.clone(),
                phi.clone(),
            ],
        }
    }

    pub fn grid(&self) -> Grid {
        self.comps[0].grid()
    }

    pub fn get(&self, i: usize, j: usize) -> &SpectralField {
        &self.comps[sym_index(i, j)]
    }

    pub fn trace(&self) -> SpectralField {
        let mut t = self.comps[0].clone();
        t += &self.comps[3];
        t += &self.comps[5];
        t
    }

    /// `(div τ)_i = Σ_j ∂_j τ_ij`.
    pub fn divergence(&self) -> VectorField {
        std::array::from_fn(|i| {
            let mut acc = derivative(self.get(i, 0), 0);
            acc += &derivative(self.get(i, 1), 1);
            acc += &derivative(self.get(i, 2), 2);
            acc
        })
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        SymTensor {
            comps: std::array::from_fn(|c| f(&self.comps[c])),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn axpy(&mut self, s: f64, other: &SymTensor) {
        for (a, b) in self.comps.iter_mut().zip(&other.comps) {
            a.axpy(s, b);
        }
    }

    /// Components weighted for Frobenius sums: off-diagonal entries appear twice.
    pub fn frobenius_weights() -> [f64; 6] {
        [1.0, 2.0, 2.0, 1.0, 2.0, 1.0]
    }

    /// Random symmetric tensor with zero-mean components.
    pub fn random(grid: Grid, kmax: i64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SymTensor {
            comps: std::array::from_fn(|_| random_field_with(grid, kmax, &mut rng)),
        }
    }

    /// Random symmetric tensor whose trace vanishes identically.
    pub fn random_traceless(grid: Grid, kmax: i64, seed: u64) -> Self {
        let mut t = Self::random(grid, kmax, seed);
        let third = t.trace().scale(1.0 / 3.0);
        for d in [0, 3, 5] {
            t.comps[d] -= &third;
        }
        t
    }
}
