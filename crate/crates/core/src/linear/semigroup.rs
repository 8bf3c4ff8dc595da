use std::io::Write;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{PttError, Result};
use crate::spectral::{ksq, max_spectral_divergence, sobolev_norm_many, SobolevIndex, SpectralField, VectorField};

/// Envelope constant for `‖(u, w)(t)‖ ≤ C e^{−t/2} ‖(u₀, w₀)‖`.
pub const LINEAR_ENVELOPE_C: f64 = 4.0;

const IMAG_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `|k|² = 1`, `λ = −½ ± i/2`.
    ComplexPair,
    /// `|k|² = 2`, double root `−1`.
    Degenerate,
    /// `|k|² ≥ 3`.
    RealPair,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeMatrix {
    pub ksq: u64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub regime: Regime,
}

/// Scalar factors of the Green's function: `e^{tA} = [[n_uu, n_utau], [m_uu, m_utau]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenBlocks {
    pub n_uu: f64,
    pub n_utau: f64,
    pub m_uu: f64,
    pub m_utau: f64,
}

impl GreenBlocks {
    pub fn as_matrix(&self) -> [[f64; 2]; 2] {
        [[self.n_uu, self.n_utau], [self.m_uu, self.m_utau]]
    }

    pub fn max_abs(&self) -> f64 {
        [self.n_uu, self.n_utau, self.m_uu, self.m_utau]
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Roots of `λ² + qλ + q/2 = 0`, ordered by real part then imaginary part,
/// descending.
pub fn eigenvalues(q: u64) -> Result<(Complex64, Complex64)> {
    if q == 0 {
        return Err(PttError::precondition("the mean mode k = 0 has no linear dynamics"));
    }
    let qf = q as f64;
    Ok(match q {
        1 => (Complex64::new(-0.5, 0.5), Complex64::new(-0.5, -0.5)),
        2 => (Complex64::new(-1.0, 0.0), Complex64::new(-1.0, 0.0)),
        _ => {
            let lower = -0.5 * qf - 0.5 * (qf * qf - 2.0 * qf).sqrt();
            // product of the roots is q/2
            let upper = 0.5 * qf / lower;
            (Complex64::new(upper, 0.0), Complex64::new(lower, 0.0))
        }
    })
}

pub fn mode_matrix(q: u64) -> Result<ModeMatrix> {
    let (lambda1, lambda2) = eigenvalues(q)?;
    let regime = match q {
        1 => Regime::ComplexPair,
        2 => Regime::Degenerate,
        _ => Regime::RealPair,
    };
    Ok(ModeMatrix {
        ksq: q,
        lambda1,
        lambda2,
        regime,
    })
}

fn real_part_checked(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOLERANCE * z.norm().max(1.0) {
        return Err(PttError::Numeric(format!("Green's function entry {z} is not real")));
    }
    Ok(z.re)
}

/// Closed-form `e^{tA(k)}` for `|k|² = q`.
pub fn green_blocks(t: f64, q: u64) -> Result<GreenBlocks> {
    if !(t >= 0.0) {
        return Err(PttError::precondition(format!("green_blocks needs t >= 0, got {t}")));
    }
    let m = mode_matrix(q)?;
    // f1 = (e^{λ₁t} − e^{λ₂t})/(λ₁ − λ₂), f0 = (λ₁e^{λ₂t} − λ₂e^{λ₁t})/(λ₁ − λ₂)
    let (f0, f1) = match m.regime {
        Regime::Degenerate => {
            let l = m.lambda1.re;
            let e = (l * t).exp();
            ((1.0 - l * t) * e, t * e)
        }
        Regime::ComplexPair | Regime::RealPair => {
            let (l1, l2) = (m.lambda1, m.lambda2);
            let (e1, e2) = ((l1 * t).exp(), (l2 * t).exp());
            let d = l1 - l2;
            (real_part_checked((l1 * e2 - l2 * e1) / d)?, real_part_checked((e1 - e2) / d)?)
        }
    };
    let qf = q as f64;
    Ok(GreenBlocks {
        n_uu: f0 - qf * f1,
        n_utau: f1,
        m_uu: -0.5 * qf * f1,
        m_utau: f0,
    })
}

/// `exp(t A)` by Taylor scaling and squaring, independent of the
/// eigenvalue formulas.
pub fn matrix_exponential_oracle(t: f64, q: u64) -> [[f64; 2]; 2] {
    let qf = q as f64;
    let a = Matrix2::new(-qf, 1.0, -0.5 * qf, 0.0) * t;
    let norm = a.abs().row_sum().max();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as u32 } else { 0 };
    let b = a / f64::from(2u32).powi(squarings as i32);
    let mut term = Matrix2::identity();
    let mut sum = Matrix2::identity();
    for j in 1..=24 {
        term = term * b / j as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    [[sum[(0, 0)], sum[(0, 1)]], [sum[(1, 0)], sum[(1, 1)]]]
}

fn pair_norm(u: &VectorField, w: &VectorField) -> f64 {
    let all: Vec<&SpectralField> = u.iter().chain(w.iter()).collect();
    sobolev_norm_many(&all, SobolevIndex::L2)
}

fn check_linear_input(v: &VectorField, name: &str) -> Result<()> {
    for c in v {
        if c.mean().norm() > crate::spectral::MEAN_TOLERANCE {
            return Err(PttError::precondition(format!(
                "{name} has nonzero mean {}",
                c.mean().norm()
            )));
        }
    }
    let scale = v.iter().map(|c| c.max_abs_coeff()).fold(0.0, f64::max).max(1.0);
    let div = max_spectral_divergence(v);
    if div > 1e-12 * scale {
        return Err(PttError::precondition(format!("{name} is not divergence-free (|k·v̂| = {div:e})")));
    }
    Ok(())
}

/// Applies the Green's function to `(u₀, w₀)` with `w₀ = ℙ div τ₀`.
///
/// Fails with [`PttError::EnvelopeViolation`] if the output breaks
/// `‖(u, w)(t)‖ ≤ C e^{−t/2}‖(u₀, w₀)‖`.
pub fn evolve_linear(u0: &VectorField, w0: &VectorField, t: f64) -> Result<(VectorField, VectorField)> {
    let grid = u0[0].grid();
    for c in u0.iter().chain(w0.iter()) {
        grid.ensure_same(&c.grid())?;
    }
    check_linear_input(u0, "u0")?;
    check_linear_input(w0, "pdivtau0")?;
    if t == 0.0 {
        return Ok((u0.clone(), w0.clone()));
    }
    // blocks depend only on |k|²
    let qmax = grid.modes().map(ksq).max().unwrap_or(0) as usize;
    let mut table = vec![None; qmax + 1];
    for (q, slot) in table.iter_mut().enumerate().skip(1) {
        *slot = Some(green_blocks(t, q as u64)?);
    }
    let mut u: VectorField = u0.clone();
    let mut w: VectorField = w0.clone();
    for c in 0..3 {
        let (uc, wc) = (u[c].coeffs_mut(), w[c].coeffs_mut());
        for (idx, k) in grid.modes().enumerate() {
            let Some(b) = table[ksq(k) as usize] else { continue };
            let (a, s) = (uc[idx], wc[idx]);
            uc[idx] = a * b.n_uu + s * b.n_utau;
            wc[idx] = a * b.m_uu + s * b.m_utau;
        }
    }
    let before = pair_norm(u0, w0);
    let after = pair_norm(&u, &w);
    let bound = LINEAR_ENVELOPE_C * (-0.5 * t).exp() * before;
    if after > bound * (1.0 + 1e-12) {
        return Err(PttError::EnvelopeViolation {
            t,
            ratio: after / (before * (-0.5 * t).exp()),
            bound: LINEAR_ENVELOPE_C,
        });
    }
    Ok((u, w))
}

/// `‖u_nl(t) − u_lin(t)‖_{L²}`.
pub fn duhamel_defect(nonlinear: &VectorField, linear: &VectorField) -> Result<f64> {
    let mut diff: Vec<SpectralField> = Vec::with_capacity(3);
    for (a, b) in nonlinear.iter().zip(linear) {
        a.grid().ensure_same(&b.grid())?;
        diff.push(a - b);
    }
    let refs: Vec<&SpectralField> = diff.iter().collect();
    Ok(sobolev_norm_many(&refs, SobolevIndex::L2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemigroupRow {
    pub ksq: u64,
    pub t: f64,
    pub blocks: GreenBlocks,
    /// Largest entrywise deviation from the matrix-exponential oracle.
    pub oracle_deviation: f64,
}

pub fn semigroup_table(ksqs: &[u64], times: &[f64]) -> Result<Vec<SemigroupRow>> {
    let mut rows = Vec::with_capacity(ksqs.len() * times.len());
    for &q in ksqs {
        for &t in times {
            let blocks = green_blocks(t, q)?;
            let oracle = matrix_exponential_oracle(t, q);
            let closed = blocks.as_matrix();
            let mut dev: f64 = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    dev = dev.max((closed[i][j] - oracle[i][j]).abs());
                }
            }
            rows.push(SemigroupRow {
                ksq: q,
                t,
                blocks,
                oracle_deviation: dev,
            });
        }
    }
    Ok(rows)
}

pub fn write_semigroup_csv<W: Write>(out: &mut W, rows: &[SemigroupRow]) -> std::io::Result<()> {
    writeln!(out, "ksq,t,n_uu,n_utau,m_uu,m_utau,oracle_deviation")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.ksq, r.t, r.blocks.n_uu, r.blocks.n_utau, r.blocks.m_uu, r.blocks.m_utau, r.oracle_deviation
        )?;
    }
    Ok(())
}
