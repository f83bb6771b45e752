use crate::error::Result;
use crate::spectral::ops::{from_physical_dealiased, partial_derivative, riesz};
use crate::spectral::{SpectralField, TensorField, VectorField};

/// Row-wise commutator `[Λ^{-1}∇·, u·]∇E`:
///
/// `out_i = Σ_j Λ^{-1}∂_j(u_k ∂_k E_ij) - u_k ∂_k(Σ_j Λ^{-1}∂_j E_ij)`.
///
/// Only the mean-free part of `u` enters; a spatially constant `u` commutes
/// with every multiplier and yields exactly zero.
pub fn commutator(u: &VectorField, e: &TensorField) -> Result<VectorField> {
    u.comp(0).check_same_grid(e.comp(0, 0))?;
    let grid = u.grid().clone();
    let n = grid.dim();
    let len = grid.len();
    let mut u0 = u.clone();
    u0.zero_mean();
    let ur = u0.to_real();

    let advect = |f: &SpectralField| -> Vec<f64> {
        let mut acc = vec![0.0; len];
        for k in 0..n {
            let d = partial_derivative(f, k).expect("axis in range").to_real();
            for ((a, x), y) in acc.iter_mut().zip(&ur[k]).zip(&d) {
                *a += x * y;
            }
        }
        acc
    };

    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut lhs = SpectralField::zeros(&grid);
        let mut c_i = SpectralField::zeros(&grid);
        for j in 0..n {
            let w = from_physical_dealiased(&grid, &advect(e.comp(i, j)));
            lhs.axpy(1.0, &riesz(&w, j)?);
            c_i.axpy(1.0, &riesz(e.comp(i, j), j)?);
        }
        let rhs = from_physical_dealiased(&grid, &advect(&c_i));
        lhs.axpy(-1.0, &rhs);
        out.push(lhs);
    }
    VectorField::from_components(out)
}
