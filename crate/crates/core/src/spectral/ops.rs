//! Spectral differential operators, projection, truncation and norms.

use num_complex::Complex64;
use rayon::prelude::*;

use super::field::SpectralField;
use super::grid::{ksq, Grid};
use crate::error::{PttError, Result};

/// Three scalar components of a vector field.
pub type VectorField = [SpectralField; 3];

/// Mean-mode tolerance for operators that require zero-mean input.
pub const MEAN_TOLERANCE: f64 = 1e-12;

/// Sobolev order `s ∈ {0, 1, 2, 3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SobolevIndex(u8);

impl SobolevIndex {
    pub const L2: SobolevIndex = SobolevIndex(0);
    pub const H1: SobolevIndex = SobolevIndex(1);
    pub const H2: SobolevIndex = SobolevIndex(2);
    pub const H3: SobolevIndex = SobolevIndex(3);

    pub fn new(s: u8) -> Result<Self> {
        if s > 3 {
            return Err(PttError::param("s", format!("Sobolev order {s} not in 0..=3")));
        }
        Ok(SobolevIndex(s))
    }

    pub fn order(self) -> u8 {
        self.0
    }
}

pub fn transform_forward(grid: Grid, samples: &[f64]) -> Result<SpectralField> {
    SpectralField::from_physical(grid, samples)
}

pub fn transform_backward(f: &SpectralField) -> Vec<f64> {
    f.to_physical()
}

/// Inverse transforms of several real fields, two per complex FFT, run in
/// parallel.
pub fn to_physical_many(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    fields
        .par_chunks(2)
        .flat_map_iter(|pair| match pair {
            [a, b] => {
                let (x, y) = SpectralField::to_physical_pair(a, b);
                vec![x, y]
            }
            [a] => vec![a.to_physical()],
            _ => unreachable!(),
        })
        .collect()
}

/// Forward transforms (two per complex FFT) followed by truncation.
pub fn from_physical_dealiased(grid: Grid, samples: Vec<Vec<f64>>) -> Vec<SpectralField> {
    assert!(samples.iter().all(|s| s.len() == grid.len()), "sample count matches grid");
    samples
        .par_chunks(2)
        .flat_map_iter(|pair| match pair {
            [a, b] => {
                let (x, y) = SpectralField::from_physical_pair(grid, a, b);
                vec![dealias(&x), dealias(&y)]
            }
            [a] => vec![dealias(&SpectralField::from_physical(grid, a).expect("sample count matches grid"))],
            _ => unreachable!(),
        })
        .collect()
}

/// `∂/∂x_axis` with `axis ∈ {0, 1, 2}`; the Nyquist plane along `axis` is zeroed.
pub fn derivative(f: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 3, "axis {axis} out of range");
    let grid = f.grid();
    let n = grid.n();
    let factor: Vec<f64> = (0..n)
        .map(|j| if j == n / 2 { 0.0 } else { grid.wavenumber(j) as f64 })
        .collect();
    let src = f.coeffs();
    let mut out = vec![Complex64::default(); src.len()];
    let line = |o: &mut [Complex64], s: &[Complex64], k: f64| {
        for (a, b) in o.iter_mut().zip(s) {
            *a = Complex64::new(-k * b.im, k * b.re);
        }
    };
    match axis {
        0 => {
            for (i1, (o, s)) in out.chunks_exact_mut(n * n).zip(src.chunks_exact(n * n)).enumerate() {
                line(o, s, factor[i1]);
            }
        }
        1 => {
            for (r, (o, s)) in out.chunks_exact_mut(n).zip(src.chunks_exact(n)).enumerate() {
                line(o, s, factor[r % n]);
            }
        }
        _ => {
            for (o, s) in out.chunks_exact_mut(n).zip(src.chunks_exact(n)) {
                for ((a, b), k) in o.iter_mut().zip(s).zip(&factor) {
                    *a = Complex64::new(-k * b.im, k * b.re);
                }
            }
        }
    }
    SpectralField::from_coeffs(grid, out).expect("same length")
}

pub fn gradient(f: &SpectralField) -> VectorField {
    [derivative(f, 0), derivative(f, 1), derivative(f, 2)]
}

pub fn divergence(v: &VectorField) -> SpectralField {
    let mut out = derivative(&v[0], 0);
    out += &derivative(&v[1], 1);
    out += &derivative(&v[2], 2);
    out
}

pub fn laplacian(f: &SpectralField) -> SpectralField {
    f.apply_symbol(|k| -(ksq(k) as f64))
}

/// `Δ⁻¹` on mean-free fields: multiplies mode `k ≠ 0` by `-1/|k|²`.
pub fn inverse_laplacian(f: &SpectralField) -> Result<SpectralField> {
    let mean = f.mean();
    if mean.norm() > MEAN_TOLERANCE {
        return Err(PttError::precondition(format!(
            "inverse Laplacian needs a mean-free field, mean coefficient is {mean}"
        )));
    }
    Ok(inverse_laplacian_unchecked(f))
}

/// `Δ⁻¹` that discards the mean mode.
pub(crate) fn inverse_laplacian_unchecked(f: &SpectralField) -> SpectralField {
    f.apply_symbol(|k| {
        let q = ksq(k);
        if q == 0 {
            0.0
        } else {
            -1.0 / q as f64
        }
    })
}

/// Leray projection `ℙ = I - ∇Δ⁻¹div`; the mean mode passes through.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v[0].grid();
    let mut out = [v[0].clone(), v[1].clone(), v[2].clone()];
    let [a, b, c] = &mut out;
    let (a, b, c) = (a.coeffs_mut(), b.coeffs_mut(), c.coeffs_mut());
    for (idx, k) in grid.modes().enumerate() {
        let q = ksq(k);
        if q == 0 {
            continue;
        }
        let kf = k.map(|x| x as f64);
        let dot = a[idx] * kf[0] + b[idx] * kf[1] + c[idx] * kf[2];
        let s = dot / q as f64;
        a[idx] -= s * kf[0];
        b[idx] -= s * kf[1];
        c[idx] -= s * kf[2];
    }
    out
}

/// Largest `|k·v̂(k)|` over the lattice.
pub fn max_spectral_divergence(v: &VectorField) -> f64 {
    let grid = v[0].grid();
    let (a, b, c) = (v[0].coeffs(), v[1].coeffs(), v[2].coeffs());
    grid.modes()
        .enumerate()
        .map(|(idx, k)| {
            (a[idx] * k[0] as f64 + b[idx] * k[1] as f64 + c[idx] * k[2] as f64).norm()
        })
        .fold(0.0, f64::max)
}

/// 2/3-rule truncation: zeroes every mode with some `|k_i| > cut`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let keep: Vec<bool> = (0..n)
        .map(|j| grid.wavenumber(j).unsigned_abs() as usize <= grid.dealias_cut())
        .collect();
    let src = f.coeffs();
    let mut out = vec![Complex64::default(); src.len()];
    for (r, (o, s)) in out.chunks_exact_mut(n).zip(src.chunks_exact(n)).enumerate() {
        if keep[r / n] && keep[r % n] {
            for ((a, b), k) in o.iter_mut().zip(s).zip(&keep) {
                if *k {
                    *a = *b;
                }
            }
        }
    }
    SpectralField::from_coeffs(grid, out).expect("same length")
}

pub fn dealias_vector(v: &VectorField) -> VectorField {
    [dealias(&v[0]), dealias(&v[1]), dealias(&v[2])]
}

/// Number of lattice modes that survive truncation, `(2·cut + 1)³`.
pub fn retained_mode_count(grid: Grid) -> usize {
    let w = 2 * grid.dealias_cut() + 1;
    w * w * w
}

/// `‖f‖_{H^s} = ((2π)³ Σ_k (1+|k|²)^s |f̂(k)|²)^{1/2}`; `s = 0` is the L² integral norm.
pub fn sobolev_norm(f: &SpectralField, s: SobolevIndex) -> f64 {
    sobolev_norm_many(&[f], s)
}

/// Sobolev norm of a collection of fields, `(Σ_i ‖f_i‖²_{H^s})^{1/2}`.
pub fn sobolev_norm_many(fields: &[&SpectralField], s: SobolevIndex) -> f64 {
    let p = s.order() as i32;
    fields
        .iter()
        .map(|f| f.weighted_energy(|q| (1.0 + q as f64).powi(p)))
        .sum::<f64>()
        .sqrt()
}

/// Homogeneous seminorm `‖∇^m f‖_{L²} = ((2π)³ Σ_k |k|^{2m} |f̂(k)|²)^{1/2}`.
pub fn derivative_norm_many(fields: &[&SpectralField], m: u32) -> f64 {
    fields
        .iter()
        .map(|f| f.weighted_energy(|q| (q as f64).powi(m as i32)))
        .sum::<f64>()
        .sqrt()
}

/// Grid quadrature `(2π/n)³ Σ_x |f(x)|²`.
pub fn quadrature_l2_squared(grid: Grid, samples: &[f64]) -> f64 {
    grid.spacing().powi(3) * samples.iter().map(|v| v * v).sum::<f64>()
}

/// Largest absolute grid value.
pub fn grid_max_abs(samples: &[f64]) -> f64 {
    samples.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Pointwise product of two fields, truncated.
pub fn product(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let phys = to_physical_many(&[a, b]);
    let prod: Vec<f64> = phys[0].iter().zip(&phys[1]).map(|(x, y)| x * y).collect();
    dealias(&SpectralField::from_physical(a.grid(), &prod).expect("grid sizes agree"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::field::BOX_VOLUME;
    use crate::spectral::random::random_field;

    fn grid() -> Grid {
        Grid::new(16).unwrap()
    }

    #[test]
    fn zero_field_transforms_to_zero() {
        let g = grid();
        let f = transform_forward(g, &vec![0.0; g.len()]).unwrap();
        assert_eq!(f.max_abs_coeff(), 0.0);
    }

    #[test]
    fn sine_has_two_imaginary_modes() {
        let g = grid();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        assert!((f.coeff([1, 0, 0]) - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        assert!((f.coeff([-1, 0, 0]) - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        let others: f64 = f
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let k = g.wavevector(*i);
                k != [1, 0, 0] && k != [-1, 0, 0]
            })
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        assert!(others < 1e-15);
    }

    #[test]
    fn size_mismatch_is_a_dimension_error() {
        let err = transform_forward(grid(), &[1.0, 2.0]).unwrap_err();
        assert!(matches!(err, PttError::Dimension { .. }));
    }

    #[test]
    fn random_real_field_is_conjugate_symmetric() {
        let g = grid();
        let samples = g.sample(|x| (x[0] + 2.0 * x[1]).sin() * (3.0 * x[2]).cos() + x[1].cos().exp());
        let f = transform_forward(g, &samples).unwrap();
        assert!(f.conjugate_symmetry_defect() < 1e-14);
        let back = transform_backward(&f);
        let err = back
            .iter()
            .zip(&samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * grid_max_abs(&samples));
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let d1 = transform_backward(&derivative(&f, 0));
        let expect = g.sample(|x| x[0].cos());
        let err = d1.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        assert!(derivative(&f, 1).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn mixed_derivatives_commute() {
        let f = dealias(&random_field(grid(), 4, 11));
        let a = derivative(&derivative(&f, 0), 1);
        let b = derivative(&derivative(&f, 1), 0);
        assert!((&a - &b).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn inverse_laplacian_of_sine() {
        let g = grid();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let back = inverse_laplacian(&laplacian(&f)).unwrap();
        assert!((&back - &f).max_abs_coeff() < 1e-15);
        let minus = inverse_laplacian(&f.scale(-1.0)).unwrap();
        assert!((&minus - &f).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn inverse_laplacian_rejects_mean() {
        let g = grid();
        let f = SpectralField::constant(g, 0.25);
        let err = inverse_laplacian(&f).unwrap_err();
        assert!(err.to_string().contains("0.25"), "{err}");
    }

    #[test]
    fn inverse_laplacian_round_trip_on_random() {
        let mut f = random_field(grid(), 4, 3);
        f.coeffs_mut()[0] = Complex64::default();
        let r = laplacian(&inverse_laplacian(&f).unwrap());
        assert!((&r - &f).max_abs_coeff() <= 1e-12 * f.max_abs_coeff());
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal() {
        let g = grid();
        let phi = SpectralField::from_fn(g, |x| x[0].sin() * x[1].sin());
        let p = leray_project(&gradient(&phi));
        for c in &p {
            assert!(c.max_abs_coeff() < 1e-15);
        }
        let u = [
            SpectralField::from_fn(g, |x| x[1].sin()),
            SpectralField::from_fn(g, |x| x[2].cos()),
            SpectralField::zeros(g),
        ];
        let pu = leray_project(&u);
        for (a, b) in pu.iter().zip(&u) {
            assert!((a - b).max_abs_coeff() < 1e-15);
        }
    }

    #[test]
    fn sobolev_norms_of_sine() {
        let g = grid();
        let f = SpectralField::from_fn(g, |x| x[0].sin());
        let l2 = sobolev_norm(&f, SobolevIndex::L2).powi(2);
        let h1 = sobolev_norm(&f, SobolevIndex::H1).powi(2);
        let four_pi3 = BOX_VOLUME / 2.0;
        assert!((l2 - four_pi3).abs() < 1e-12 * four_pi3);
        assert!((h1 - 2.0 * four_pi3).abs() < 1e-12 * four_pi3);
        assert!(SobolevIndex::new(4).is_err());
    }

    #[test]
    fn dealias_counts_and_truncates() {
        let g = grid();
        let f = random_field(g, 8, 5);
        let kept = dealias(&f);
        let nonzero = kept.coeffs().iter().filter(|c| c.norm() > 0.0).count();
        assert!(nonzero <= retained_mode_count(g));
        assert_eq!(retained_mode_count(g), 11 * 11 * 11);
        assert_eq!(dealias(&kept), kept);

        let cut = g.dealias_cut() as f64;
        let s = SpectralField::from_fn(g, |x| (cut * x[0]).sin());
        let sq = product(&s, &s);
        for (i, c) in sq.coeffs().iter().enumerate() {
            if !g.is_retained(g.wavevector(i)) {
                assert_eq!(c.norm(), 0.0);
            }
        }
    }
}
