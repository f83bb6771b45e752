//! Fourier multipliers, projection and dealiased products.
//!
//! Zero-mode convention (the "mean-zero gauge"): operators that would divide
//! by `|k|` set the `k = 0` output to zero, and fields handed to negative
//! powers of `Λ` must already have zero mean.

use num_complex::Complex64;

use super::field::{SpectralField, TensorField, VectorField};
use super::grid::Grid;
use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative size below which a mean is treated as round-off.
const MEAN_TOL: f64 = 1e-12;

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.dim() {
        return Err(Error::AxisOutOfRange { axis, dim: grid.dim() });
    }
    Ok(())
}

/// `∂_j f`: multiplies each mode by `i k_j`.
pub fn partial_derivative(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = f.grid();
    check_axis(grid, axis)?;
    Ok(f.map_modes(|m| I * grid.deriv_wavenumber(m)[axis]))
}

/// `Λ^s f` with `Λ = |D|`.
///
/// For `s > 0` the mean is mapped to zero; `s = 0` is the identity; `s < 0`
/// requires a mean-zero input.
pub fn lambda_power(f: &SpectralField, s: f64) -> Result<SpectralField> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    if s < 0.0 {
        check_mean_zero(f, s)?;
    }
    let grid = f.grid();
    let mut out = f.map_modes(|m| {
        let k2 = grid.k2(m);
        if k2 == 0 {
            ZERO
        } else {
            Complex64::new((k2 as f64).powf(0.5 * s), 0.0)
        }
    });
    out.coeffs_mut()[0] = ZERO;
    Ok(out)
}

fn check_mean_zero(f: &SpectralField, s: f64) -> Result<()> {
    let mean = f.mean().norm();
    if mean > MEAN_TOL * f.l2_norm().max(f64::MIN_POSITIVE) && mean > 0.0 {
        return Err(Error::NonzeroMean { s, mean });
    }
    Ok(())
}

/// `Λ^{-1} ∂_j f`, the Riesz-type transform `i k_j / |k|`; mean goes to zero.
pub fn riesz(f: &SpectralField, axis: usize) -> Result<SpectralField> {
    let grid = f.grid();
    check_axis(grid, axis)?;
    Ok(f.map_modes(|m| {
        let k2 = grid.k2(m);
        if k2 == 0 {
            ZERO
        } else {
            I * (grid.deriv_wavenumber(m)[axis] / (k2 as f64).sqrt())
        }
    }))
}

/// `Δ f = -|k|^2 f`.
pub fn laplacian(f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    f.map_modes(|m| Complex64::new(-(grid.k2(m) as f64), 0.0))
}

/// Leray projector `I - k k^T / |k|^2`. The mean passes unchanged.
pub fn leray_project(u: &VectorField) -> VectorField {
    let grid = u.grid().clone();
    let n = grid.dim();
    let mut out = u.clone();
    for m in 0..grid.len() {
        let k = grid.deriv_wavenumber(m);
        let kk: f64 = k[..n].iter().map(|x| x * x).sum();
        if kk == 0.0 {
            continue;
        }
        let mut dot = ZERO;
        for j in 0..n {
            dot += u.comp(j).coeffs()[m] * k[j];
        }
        let dot = dot / kk;
        for j in 0..n {
            out.comp_mut(j).coeffs_mut()[m] -= dot * k[j];
        }
    }
    out
}

/// `∇·u`.
pub fn divergence(u: &VectorField) -> SpectralField {
    let grid = u.grid().clone();
    let mut out = SpectralField::zeros(&grid);
    for m in 0..grid.len() {
        let k = grid.deriv_wavenumber(m);
        let mut acc = ZERO;
        for j in 0..grid.dim() {
            acc += u.comp(j).coeffs()[m] * k[j];
        }
        out.coeffs_mut()[m] = I * acc;
    }
    out.set_real(u.comps().iter().all(|c| c.is_real()));
    out
}

/// `∇f` as a vector field.
pub fn gradient(f: &SpectralField) -> VectorField {
    let comps = (0..f.grid().dim())
        .map(|j| partial_derivative(f, j).expect("axis in range"))
        .collect();
    VectorField::from_components(comps).expect("components share the grid")
}

/// Velocity gradient `(∇v)_{ij} = ∂_j v_i`.
pub fn velocity_gradient(v: &VectorField) -> TensorField {
    let n = v.dim();
    let mut comps = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            comps.push(partial_derivative(v.comp(i), j).expect("axis in range"));
        }
    }
    TensorField::from_components(comps).expect("components share the grid")
}

/// Row divergence `(∇·E)_i = ∂_j E_{ij}`.
pub fn row_divergence(e: &TensorField) -> VectorField {
    let n = e.dim();
    let comps = (0..n)
        .map(|i| {
            let mut acc = partial_derivative(e.comp(i, 0), 0).expect("axis in range");
            for j in 1..n {
                acc.axpy(1.0, &partial_derivative(e.comp(i, j), j).expect("axis in range"));
            }
            acc
        })
        .collect();
    VectorField::from_components(comps).expect("components share the grid")
}

/// `(∇·E^T)_j = ∂_i E_{ij}`.
pub fn column_divergence(e: &TensorField) -> VectorField {
    row_divergence(&e.transpose())
}

/// Zeroes every mode outside the 2/3-rule band.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub fn dealias_in_place(f: &mut SpectralField) {
    let grid = f.grid().clone();
    for (m, c) in f.coeffs_mut().iter_mut().enumerate() {
        if !grid.in_band(m) {
            *c = ZERO;
        }
    }
}

/// Transforms real samples and applies the 2/3 rule.
pub fn from_physical_dealiased(grid: &Grid, samples: &[f64]) -> SpectralField {
    let mut f = SpectralField::from_real(grid, samples).expect("sample count matches grid");
    dealias_in_place(&mut f);
    f
}

/// Product `f g` formed in real space, then dealiased.
pub fn pointwise_product(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let a = f.to_real();
    let b = g.to_real();
    let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
    Ok(from_physical_dealiased(f.grid(), &prod))
}

/// Pointwise `det(I + E(x))` on the sample grid.
pub fn det_i_plus_e(e: &TensorField) -> Vec<f64> {
    let n = e.dim();
    let samples = e.to_real();
    let len = e.grid().len();
    let at = |i: usize, j: usize, x: usize| -> f64 { samples[i * n + j][x] + if i == j { 1.0 } else { 0.0 } };
    (0..len)
        .map(|x| {
            if n == 2 {
                at(0, 0, x) * at(1, 1, x) - at(0, 1, x) * at(1, 0, x)
            } else {
                at(0, 0, x) * (at(1, 1, x) * at(2, 2, x) - at(1, 2, x) * at(2, 1, x))
                    - at(0, 1, x) * (at(1, 0, x) * at(2, 2, x) - at(1, 2, x) * at(2, 0, x))
                    + at(0, 2, x) * (at(1, 0, x) * at(2, 1, x) - at(1, 1, x) * at(2, 0, x))
            }
        })
        .collect()
}

/// Exact lattice dilation `f(x) -> f(l x)`: the coefficient at `k` moves to `l k`.
///
/// Fails if a mode above round-off would leave the representable lattice;
/// round-off-level coefficients that would leave it are dropped.
pub fn dilate(f: &SpectralField, l: u32) -> Result<SpectralField> {
    if l == 0 {
        return Err(Error::InvalidParameter("dilation factor must be positive".into()));
    }
    let grid = f.grid();
    let peak = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = SpectralField::zeros(grid);
    out.set_real(f.is_real());
    for (m, &c) in f.coeffs().iter().enumerate() {
        if c == ZERO {
            continue;
        }
        let negligible = c.norm() <= 1e-13 * peak;
        let k = grid.wavenumber(m);
        let target = [k[0] * l as i32, k[1] * l as i32, k[2] * l as i32];
        match grid.mode_index(target) {
            Some(t)
                if 2 * target.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) < grid.points_per_axis() as u32 =>
            {
                out.coeffs_mut()[t] = c;
            }
            _ if negligible => {}
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "mode {k:?} leaves the lattice under dilation by {l}"
                )))
            }
        }
    }
    Ok(out)
}
