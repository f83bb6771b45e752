use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform periodic grid on the torus `[0, 2π)^dim`.
///
/// Cloning is cheap: wavenumber tables and FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    total: usize,
    /// Signed integer wavenumber per mode, `k_j ∈ [-n/2, n/2)`. Unused axes are 0.
    kvec: Vec<[i32; 3]>,
    /// `|k|^2` as an exact integer.
    k2: Vec<u32>,
    /// Retained by the 2/3 rule: every `|k_j| <= n/3`.
    in_band: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Grid {
    pub fn new(dim: usize, points_per_axis: usize) -> Result<Self> {
        let n = points_per_axis;
        if !(dim == 2 || dim == 3) || n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid { dim, points: n });
        }
        let total = n.pow(dim as u32);
        let mut kvec = Vec::with_capacity(total);
        let mut k2 = Vec::with_capacity(total);
        let mut in_band = Vec::with_capacity(total);
        let signed = |i: usize| -> i32 {
            if i < n / 2 {
                i as i32
            } else {
                i as i32 - n as i32
            }
        };
        for idx in 0..total {
            let mut k = [0i32; 3];
            let mut rem = idx;
            for axis in (0..dim).rev() {
                k[axis] = signed(rem % n);
                rem /= n;
            }
            let sq: i64 = k.iter().map(|&c| (c as i64) * (c as i64)).sum();
            k2.push(sq as u32);
            in_band.push(k.iter().all(|&c| 3 * (c.unsigned_abs() as usize) <= n));
            kvec.push(k);
        }
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                n,
                total,
                kvec,
                k2,
                in_band,
                fwd,
                inv,
            }),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    #[inline]
    pub fn points_per_axis(&self) -> usize {
        self.inner.n
    }

    /// Number of samples (and of Fourier modes).
    #[inline]
    pub fn len(&self) -> usize {
        self.inner.total
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.inner.total == 0
    }

    pub fn domain_length(&self) -> f64 {
        2.0 * std::f64::consts::PI
    }

    #[inline]
    pub fn wavenumber(&self, mode: usize) -> [i32; 3] {
        self.inner.kvec[mode]
    }

    /// Wavenumber used by odd multipliers (derivatives, Riesz transforms,
    /// Leray): the unpaired Nyquist component is mapped to zero so that
    /// real fields stay real.
    #[inline]
    pub fn deriv_wavenumber(&self, mode: usize) -> [f64; 3] {
        let k = self.inner.kvec[mode];
        let half = -(self.inner.n as i32 / 2);
        let mut out = [0.0; 3];
        for j in 0..3 {
            out[j] = if k[j] == half { 0.0 } else { k[j] as f64 };
        }
        out
    }

    #[inline]
    pub fn k2(&self, mode: usize) -> u32 {
        self.inner.k2[mode]
    }

    #[inline]
    pub fn k_abs(&self, mode: usize) -> f64 {
        (self.inner.k2[mode] as f64).sqrt()
    }

    pub fn k2_table(&self) -> &[u32] {
        &self.inner.k2
    }

    pub fn max_k2(&self) -> u32 {
        self.inner.k2.iter().copied().max().unwrap_or(0)
    }

    #[inline]
    pub fn in_band(&self, mode: usize) -> bool {
        self.inner.in_band[mode]
    }

    /// Largest retained `|k_j|` under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        self.inner.n / 3
    }

    /// Flat index of a signed wavenumber, if it lies on the grid.
    pub fn mode_index(&self, k: [i32; 3]) -> Option<usize> {
        let n = self.inner.n as i32;
        let mut idx = 0usize;
        for axis in 0..3 {
            if axis >= self.inner.dim {
                if k[axis] != 0 {
                    return None;
                }
                continue;
            }
            let c = k[axis];
            if c < -n / 2 || c >= n / 2 {
                return None;
            }
            let i = if c < 0 { c + n } else { c } as usize;
            idx = idx * self.inner.n + i;
        }
        Some(idx)
    }

    /// Index of the mode `-k` (the Nyquist plane pairs with itself).
    #[inline]
    pub fn partner(&self, mode: usize) -> usize {
        let n = self.inner.n;
        let mut rem = mode;
        let mut idx = 0;
        let mut mul = 1;
        for _ in 0..self.inner.dim {
            let i = rem % n;
            rem /= n;
            idx += ((n - i) % n) * mul;
            mul *= n;
        }
        idx
    }

    /// Physical coordinates of sample `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let n = self.inner.n;
        let h = self.domain_length() / n as f64;
        let mut out = [0.0; 3];
        let mut rem = idx;
        for axis in (0..self.inner.dim).rev() {
            out[axis] = (rem % n) as f64 * h;
            rem /= n;
        }
        out
    }

    /// Samples a function of position on the grid.
    pub fn sample<F: Fn([f64; 3]) -> f64>(&self, f: F) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.coords(i))).collect()
    }

    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft_nd(data, &self.inner.fwd);
    }

    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft_nd(data, &self.inner.inv);
    }

    fn fft_nd(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.inner.n;
        let dim = self.inner.dim;
        debug_assert_eq!(data.len(), self.inner.total);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // contiguous last axis: rustfft batches consecutive transforms
        plan.process_with_scratch(data, &mut scratch);
        if dim == 1 {
            return;
        }
        let mut line = vec![Complex64::new(0.0, 0.0); self.inner.total / n * n];
        for axis in (0..dim - 1).rev() {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = n * stride;
            let buf = &mut line[..block];
            for chunk in data.chunks_exact_mut(block) {
                for j in 0..n {
                    let row = &chunk[j * stride..(j + 1) * stride];
                    for (s, &z) in row.iter().enumerate() {
                        buf[s * n + j] = z;
                    }
                }
                plan.process_with_scratch(buf, &mut scratch);
                for j in 0..n {
                    let row = &mut chunk[j * stride..(j + 1) * stride];
                    for (s, z) in row.iter_mut().enumerate() {
                        *z = buf[s * n + j];
                    }
                }
            }
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || (self.inner.dim == other.inner.dim && self.inner.n == other.inner.n)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({}^{})", self.inner.n, self.inner.dim)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.inner.n, self.inner.dim)
    }
}
