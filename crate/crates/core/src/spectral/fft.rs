//! Three-dimensional complex FFT built from 1-D `rustfft` plans.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

static PLANS: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();

pub(crate) fn plan(n: usize) -> Arc<Fft3> {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    /// `c_k = n⁻³ Σ_x f(x) e^{-ik·x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// `f(x) = Σ_k c_k e^{ik·x}`.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
    }

    fn apply(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let n2 = n * n;
        debug_assert_eq!(data.len(), n2 * n);
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];

        // axis 3 is contiguous
        fft.process_with_scratch(data, &mut scratch);

        // axis 2, one (i2, i3) plane at a time
        let mut plane = vec![Complex64::default(); n2];
        for block in data.chunks_exact_mut(n2) {
            for i2 in 0..n {
                for i3 in 0..n {
                    plane[i3 * n + i2] = block[i2 * n + i3];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for i2 in 0..n {
                for i3 in 0..n {
                    block[i2 * n + i3] = plane[i3 * n + i2];
                }
            }
        }

        // axis 1
        let mut lines = vec![Complex64::default(); n2 * n];
        for i1 in 0..n {
            for j in 0..n2 {
                lines[j * n + i1] = data[i1 * n2 + j];
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        for i1 in 0..n {
            for j in 0..n2 {
                data[i1 * n2 + j] = lines[j * n + i1];
            }
        }
    }
}
