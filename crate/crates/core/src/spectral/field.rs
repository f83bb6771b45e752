use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficients of a scalar field on a periodic grid.
///
/// Normalization: the forward transform carries `1/len`, so the
/// coefficient of `e^{i k·x}` in `f` is exactly `coeffs[k]`, and
/// `mean(|f|^2) = Σ_k |coeffs[k]|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
    real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            grid: grid.clone(),
            coeffs: vec![ZERO; grid.len()],
            real: true,
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>, real: bool) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::SizeMismatch {
                dim: grid.dim(),
                points: grid.points_per_axis(),
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
            real,
        })
    }

    /// Forward transform of real samples (row-major, last axis fastest).
    pub fn from_real(grid: &Grid, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch {
                dim: grid.dim(),
                points: grid.points_per_axis(),
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        grid.fft_forward(&mut coeffs);
        let scale = 1.0 / grid.len() as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
            real: true,
        })
    }

    /// Forward transform of complex samples; the result is not assumed Hermitian.
    pub fn from_complex(grid: &Grid, samples: &[Complex64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SizeMismatch {
                dim: grid.dim(),
                points: grid.points_per_axis(),
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut coeffs = samples.to_vec();
        grid.fft_forward(&mut coeffs);
        let scale = 1.0 / grid.len() as f64;
        for c in coeffs.iter_mut() {
            *c *= scale;
        }
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
            real: false,
        })
    }

    /// A single real Fourier pair `amp·e^{ik·x} + conj`, or a constant for `k = 0`.
    pub fn single_mode(grid: &Grid, k: [i32; 3], amp: Complex64) -> Result<Self> {
        let mut f = SpectralField::zeros(grid);
        let idx = grid
            .mode_index(k)
            .ok_or_else(|| Error::InvalidParameter(format!("wavenumber {k:?} not on grid {grid}")))?;
        let p = grid.partner(idx);
        if p == idx {
            f.coeffs[idx] = Complex64::new(amp.re, 0.0);
        } else {
            f.coeffs[idx] = amp;
            f.coeffs[p] = amp.conj();
        }
        Ok(f)
    }

    /// Inverse transform to real samples (imaginary parts are discarded).
    pub fn to_real(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        let mut buf = self.coeffs.clone();
        self.grid.fft_inverse(&mut buf);
        buf
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real(&mut self, real: bool) {
        self.real = real;
    }

    /// Coefficient of the k=0 mode.
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn zero_mean(&mut self) {
        self.coeffs[0] = ZERO;
    }

    /// Largest violation of `c(-k) = conj(c(k))` over the lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for m in 0..self.coeffs.len() {
            let p = self.grid.partner(m);
            worst = worst.max((self.coeffs[m] - self.coeffs[p].conj()).norm());
        }
        worst
    }

    /// Root-mean-square value, computed from the coefficients.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch {
                left: self.grid.to_string(),
                right: other.grid.to_string(),
            });
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.coeffs.iter_mut() {
            *c *= a;
        }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.grid == other.grid);
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
        self.real &= other.real;
    }

    pub fn add(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        out.axpy(1.0, other);
        Ok(out)
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    /// Applies a real multiplier depending on the mode index.
    pub fn map_modes<F: Fn(usize) -> Complex64>(&self, f: F) -> SpectralField {
        let coeffs = self.coeffs.iter().enumerate().map(|(m, &c)| c * f(m)).collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
            real: self.real,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// `N` scalar components on one grid (velocity, `c`, forcing).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: Vec<SpectralField>,
}

impl VectorField {
    pub fn zeros(grid: &Grid) -> Self {
        VectorField {
            comps: (0..grid.dim()).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(comps: Vec<SpectralField>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| Error::InvalidParameter("vector field needs components".into()))?
            .grid()
            .clone();
        if comps.len() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "vector field on a {}-d grid needs {} components, got {}",
                grid.dim(),
                grid.dim(),
                comps.len()
            )));
        }
        for c in &comps {
            if *c.grid() != grid {
                return Err(Error::GridMismatch {
                    left: grid.to_string(),
                    right: c.grid().to_string(),
                });
            }
        }
        Ok(VectorField { comps })
    }

    pub fn from_real(grid: &Grid, samples: &[Vec<f64>]) -> Result<Self> {
        let comps = samples
            .iter()
            .map(|s| SpectralField::from_real(grid, s))
            .collect::<Result<Vec<_>>>()?;
        VectorField::from_components(comps)
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comp(&self, i: usize) -> &SpectralField {
        &self.comps[i]
    }

    pub fn comp_mut(&mut self, i: usize) -> &mut SpectralField {
        &mut self.comps[i]
    }

    pub fn comps(&self) -> &[SpectralField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [SpectralField] {
        &mut self.comps
    }

    pub fn to_real(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| c.to_real()).collect()
    }

    /// `sqrt(Σ_i ‖f_i‖²)`.
    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &VectorField) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            x.axpy(a, y);
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.comps[0].check_same_grid(&other.comps[0])?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    pub fn zero_mean(&mut self) {
        self.comps.iter_mut().for_each(|c| c.zero_mean());
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }
}

/// `N×N` components stored row-major: `comp(i, j)` is `E_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    n: usize,
    comps: Vec<SpectralField>,
}

impl TensorField {
    pub fn zeros(grid: &Grid) -> Self {
        let n = grid.dim();
        TensorField {
            n,
            comps: (0..n * n).map(|_| SpectralField::zeros(grid)).collect(),
        }
    }

    pub fn from_components(comps: Vec<SpectralField>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| Error::InvalidParameter("tensor field needs components".into()))?
            .grid()
            .clone();
        let n = grid.dim();
        if comps.len() != n * n {
            return Err(Error::InvalidParameter(format!(
                "tensor field on a {n}-d grid needs {} components, got {}",
                n * n,
                comps.len()
            )));
        }
        for c in &comps {
            if *c.grid() != grid {
                return Err(Error::GridMismatch {
                    left: grid.to_string(),
                    right: c.grid().to_string(),
                });
            }
        }
        Ok(TensorField { n, comps })
    }

    pub fn from_real(grid: &Grid, samples: &[Vec<f64>]) -> Result<Self> {
        let comps = samples
            .iter()
            .map(|s| SpectralField::from_real(grid, s))
            .collect::<Result<Vec<_>>>()?;
        TensorField::from_components(comps)
    }

    pub fn grid(&self) -> &Grid {
        self.comps[0].grid()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn comp(&self, i: usize, j: usize) -> &SpectralField {
        &self.comps[i * self.n + j]
    }

    pub fn comp_mut(&mut self, i: usize, j: usize) -> &mut SpectralField {
        &mut self.comps[i * self.n + j]
    }

    pub fn comps(&self) -> &[SpectralField] {
        &self.comps
    }

    pub fn comps_mut(&mut self) -> &mut [SpectralField] {
        &mut self.comps
    }

    pub fn to_real(&self) -> Vec<Vec<f64>> {
        self.comps.iter().map(|c| c.to_real()).collect()
    }

    pub fn transpose(&self) -> TensorField {
        let n = self.n;
        let mut comps = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                comps.push(self.comps[j * n + i].clone());
            }
        }
        TensorField { n, comps }
    }

    /// Frobenius RMS: `sqrt(Σ_ij ‖E_ij‖²)`.
    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(|c| c.l2_norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        self.comps.iter_mut().for_each(|c| c.scale(a));
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn axpy(&mut self, a: f64, other: &TensorField) {
        for (x, y) in self.comps.iter_mut().zip(&other.comps) {
            x.axpy(a, y);
        }
    }

    pub fn sub(&self, other: &TensorField) -> Result<TensorField> {
        self.comps[0].check_same_grid(&other.comps[0])?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    pub fn zero_mean(&mut self) {
        self.comps.iter_mut().for_each(|c| c.zero_mean());
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }
}

/// Uniform access to the scalar components of scalar, vector and tensor fields.
pub trait Components {
    fn components(&self) -> &[SpectralField];
}

impl Components for SpectralField {
    fn components(&self) -> &[SpectralField] {
        std::slice::from_ref(self)
    }
}

impl Components for VectorField {
    fn components(&self) -> &[SpectralField] {
        &self.comps
    }
}

impl Components for TensorField {
    fn components(&self) -> &[SpectralField] {
        &self.comps
    }
}
