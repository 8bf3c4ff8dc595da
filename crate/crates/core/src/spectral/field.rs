use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::fft;
use super::grid::{ksq, Grid};
use crate::error::{PttError, Result};

/// Volume of the periodic box `[0, 2π)³`.
pub const BOX_VOLUME: f64 = 8.0 * PI * PI * PI;

/// Fourier coefficients of a periodic scalar field on the grid.
///
/// `coeffs[idx]` is the amplitude `c_k` of `e^{ik·x}` for `k = grid.wavevector(idx)`,
/// so the physical field is `Σ_k c_k e^{ik·x}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(PttError::Dimension {
                expected: grid.len(),
                actual: coeffs.len(),
            });
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Forward transform of real samples given in storage order.
    pub fn from_physical(grid: Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(PttError::Dimension {
                expected: grid.len(),
                actual: samples.len(),
            });
        }
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::plan(grid.n()).forward(&mut coeffs);
        Ok(SpectralField { grid, coeffs })
    }

    /// Samples `f` on the grid and transforms.
    pub fn from_fn<F: Fn([f64; 3]) -> f64>(grid: Grid, f: F) -> Self {
        Self::from_physical(grid, &grid.sample(f)).expect("sample count matches grid")
    }

    /// Field whose only nonzero coefficient is `c` at mode `k`.
    pub fn single_mode(grid: Grid, k: [i64; 3], c: Complex64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[grid.mode_index(k)] = c;
        f
    }

    /// Constant field.
    pub fn constant(grid: Grid, value: f64) -> Self {
        Self::single_mode(grid, [0, 0, 0], Complex64::new(value, 0.0))
    }

    /// Inverse transform; returns the real part of the grid samples.
    pub fn to_physical(&self) -> Vec<f64> {
        let mut data = self.coeffs.clone();
        fft::plan(self.grid.n()).inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Inverse transforms of two real fields with one complex FFT.
    pub(crate) fn to_physical_pair(a: &SpectralField, b: &SpectralField) -> (Vec<f64>, Vec<f64>) {
        let i = Complex64::new(0.0, 1.0);
        let mut data: Vec<Complex64> = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + i * y).collect();
        fft::plan(a.grid.n()).inverse(&mut data);
        data.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    /// Forward transforms of two real sample sets with one complex FFT.
    pub(crate) fn from_physical_pair(grid: Grid, a: &[f64], b: &[f64]) -> (SpectralField, SpectralField) {
        let mut h: Vec<Complex64> = a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect();
        fft::plan(grid.n()).forward(&mut h);
        let n = grid.n();
        let neg = |j: usize| (n - j) % n;
        let mut fa = Vec::with_capacity(h.len());
        let mut fb = Vec::with_capacity(h.len());
        for i1 in 0..n {
            for i2 in 0..n {
                let base = (i1 * n + i2) * n;
                let mbase = (neg(i1) * n + neg(i2)) * n;
                for i3 in 0..n {
                    let hk = h[base + i3];
                    let hm = h[mbase + neg(i3)].conj();
                    fa.push(0.5 * (hk + hm));
                    fb.push(Complex64::new(0.0, -0.5) * (hk - hm));
                }
            }
        }
        (SpectralField { grid, coeffs: fa }, SpectralField { grid, coeffs: fb })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.coeffs[self.grid.mode_index(k)]
    }

    /// Mean value over the box (the `k = 0` coefficient).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Applies `g(k, c)` to every coefficient.
    pub fn map_modes<F: Fn([i64; 3], Complex64) -> Complex64>(&self, g: F) -> Self {
        let grid = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .zip(grid.modes())
            .map(|(&c, k)| g(k, c))
            .collect();
        SpectralField { grid, coeffs }
    }

    /// Multiplies every coefficient by a real symbol `σ(k)`.
    pub fn apply_symbol<F: Fn([i64; 3]) -> f64>(&self, symbol: F) -> Self {
        self.map_modes(|k, c| c * symbol(k))
    }

    pub fn scale(&self, s: f64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &SpectralField) {
        debug_assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += *b * s;
        }
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest `|c_k - conj(c_{-k})|` over the lattice.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = self.grid;
        let half = (g.n() / 2) as i64;
        let mut worst: f64 = 0.0;
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = g.wavevector(i);
            // the Nyquist plane maps onto itself
            let neg = k.map(|ki| if ki == half { ki } else { -ki });
            let partner = self.coeffs[g.mode_index(neg)];
            worst = worst.max((c - partner.conj()).norm());
        }
        worst
    }

    /// `(2π)³ Σ_k w(k) |c_k|²`.
    pub(crate) fn weighted_energy<F: Fn(i64) -> f64>(&self, weight: F) -> f64 {
        let g = self.grid;
        BOX_VOLUME
            * self
                .coeffs
                .iter()
                .zip(g.modes())
                .map(|(c, k)| weight(ksq(k)) * c.norm_sqr())
                .sum::<f64>()
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&SpectralField> for SpectralField {
    fn add_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += *b;
        }
    }
}

impl SubAssign<&SpectralField> for SpectralField {
    fn sub_assign(&mut self, rhs: &SpectralField) {
        debug_assert_eq!(self.grid, rhs.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= *b;
        }
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.scale(s)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}
