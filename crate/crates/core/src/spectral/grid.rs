use std::f64::consts::PI;

use crate::error::{PttError, Result};

/// Uniform periodic grid on `[0, 2π)³` with `n` points per axis.
///
/// Lattice wavenumbers per axis are the integers `-n/2+1 ..= n/2`; storage
/// index `j` maps to `k = j` for `j <= n/2` and `k = j - n` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
    cut: usize,
}

impl Grid {
    /// Grid with the default 2/3-rule truncation.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_cut(n, Self::default_cut(n))
    }

    pub fn with_cut(n: usize, cut: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(PttError::InvalidGrid(format!(
                "points per axis must be even and >= 8, got {n}"
            )));
        }
        if cut + 1 > n / 2 {
            return Err(PttError::InvalidGrid(format!(
                "dealias cut {cut} exceeds n/2 - 1 = {}",
                n / 2 - 1
            )));
        }
        Ok(Grid { n, cut })
    }

    /// Largest cut for which a product of two truncated fields does not alias
    /// back into the retained band (`3 * cut < n`).
    pub fn default_cut(n: usize) -> usize {
        n.saturating_sub(1) / 3
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dealias_cut(&self) -> usize {
        self.cut
    }

    /// Total number of grid points `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Signed wavenumber for storage index `j` along one axis.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        if j <= self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Storage index along one axis for wavenumber `k` (taken mod n).
    #[inline]
    pub fn axis_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    #[inline]
    pub fn flat_index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.n + i[1]) * self.n + i[2]
    }

    /// Flat storage index of lattice mode `k`.
    pub fn mode_index(&self, k: [i64; 3]) -> usize {
        self.flat_index([
            self.axis_index(k[0]),
            self.axis_index(k[1]),
            self.axis_index(k[2]),
        ])
    }

    /// Wavevector at a flat storage index.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let n = self.n;
        [
            self.wavenumber(idx / (n * n)),
            self.wavenumber((idx / n) % n),
            self.wavenumber(idx % n),
        ]
    }

    /// Wavevectors of every storage slot, in storage order.
    pub fn wavevectors(&self) -> Vec<[i64; 3]> {
        self.modes().collect()
    }

    /// Iterator over the wavevectors in storage order.
    pub fn modes(&self) -> ModeIter {
        ModeIter {
            n: self.n as i64,
            idx: [0; 3],
            done: self.n == 0,
        }
    }

    /// True when every component satisfies `|k_i| <= cut`.
    #[inline]
    pub fn is_retained(&self, k: [i64; 3]) -> bool {
        let c = self.cut as i64;
        k.iter().all(|ki| ki.abs() <= c)
    }

    /// Physical coordinates of the grid point with flat index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        let h = self.spacing();
        [
            (idx / (n * n)) as f64 * h,
            ((idx / n) % n) as f64 * h,
            (idx % n) as f64 * h,
        ]
    }

    /// Samples `f` at every grid point, in storage order.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(PttError::GridMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

#[inline]
pub fn ksq(k: [i64; 3]) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

/// Storage-order walk over the lattice, see [`Grid::modes`].
pub struct ModeIter {
    n: i64,
    idx: [i64; 3],
    done: bool,
}

impl Iterator for ModeIter {
    type Item = [i64; 3];

    #[inline]
    fn next(&mut self) -> Option<[i64; 3]> {
        if self.done {
            return None;
        }
        let half = self.n / 2;
        let k = self.idx.map(|j| if j <= half { j } else { j - self.n });
        self.idx[2] += 1;
        if self.idx[2] == self.n {
            self.idx[2] = 0;
            self.idx[1] += 1;
            if self.idx[1] == self.n {
                self.idx[1] = 0;
                self.idx[0] += 1;
                self.done = self.idx[0] == self.n;
            }
        }
        Some(k)
    }
}
