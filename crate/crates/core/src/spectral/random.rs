//! Seeded smooth random fields for initial data and property tests.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::SpectralField;
use super::grid::{ksq, Grid};
use super::ops::{leray_project, VectorField};

/// Real, mean-free field with modes `1 <= |k| <= kmax` and amplitudes `(1+|k|²)⁻²`.
pub fn random_field(grid: Grid, kmax: i64, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_field_with(grid, kmax, &mut rng)
}

pub(crate) fn random_field_with(grid: Grid, kmax: i64, rng: &mut ChaCha8Rng) -> SpectralField {
    let kmax = kmax.min(grid.n() as i64 / 2 - 1);
    let mut f = SpectralField::zeros(grid);
    let lim = kmax * kmax;
    for k1 in -kmax..=kmax {
        for k2 in -kmax..=kmax {
            for k3 in -kmax..=kmax {
                let k = [k1, k2, k3];
                let q = ksq(k);
                if q == 0 || q > lim {
                    continue;
                }
                let amp = (1.0 + q as f64).powi(-2);
                let re: f64 = rng.random_range(-1.0..1.0);
                let im: f64 = rng.random_range(-1.0..1.0);
                f.coeffs_mut()[grid.mode_index(k)] = Complex64::new(re, im) * amp;
            }
        }
    }
    symmetrize(&f)
}

/// Real part in physical space, i.e. `(c_k + conj(c_{-k})) / 2`.
fn symmetrize(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let src = f.coeffs();
    let coeffs = (0..grid.len())
        .map(|i| {
            let k = grid.wavevector(i);
            let j = grid.mode_index(k.map(|x| -x));
            (src[i] + src[j].conj()) * 0.5
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).expect("same grid")
}

/// Divergence-free, mean-free random vector field.
pub fn random_solenoidal(grid: Grid, kmax: i64, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = [
        random_field_with(grid, kmax, &mut rng),
        random_field_with(grid, kmax, &mut rng),
        random_field_with(grid, kmax, &mut rng),
    ];
    leray_project(&v)
}

/// Random vector field without any structural constraint besides a zero mean.
pub fn random_vector(grid: Grid, kmax: i64, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [
        random_field_with(grid, kmax, &mut rng),
        random_field_with(grid, kmax, &mut rng),
        random_field_with(grid, kmax, &mut rng),
    ]
}
