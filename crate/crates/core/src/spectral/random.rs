use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::field::SpectralField;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Random real, mean-zero field whose modes satisfy `k_lo <= |k| <= k_hi`
/// and the 2/3 rule, with amplitudes `~ |k|^{-slope}` times Gaussian noise.
pub fn random_bandlimited<R: Rng + ?Sized>(
    grid: &Grid,
    rng: &mut R,
    k_lo: f64,
    k_hi: f64,
    slope: f64,
) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    let mut any = false;
    for m in 0..grid.len() {
        let r = grid.k_abs(m);
        // draw for every mode so the stream does not depend on the band
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        if m == 0 || r < k_lo || r > k_hi || !grid.in_band(m) {
            continue;
        }
        any = true;
        f.coeffs_mut()[m] = Complex64::new(a, b) * r.powf(-slope);
    }
    if !any {
        return Err(Error::EmptyBand { lo: k_lo, hi: k_hi });
    }
    let raw = f.coeffs().to_vec();
    for m in 0..grid.len() {
        let p = grid.partner(m);
        f.coeffs_mut()[m] = 0.5 * (raw[m] + raw[p].conj());
    }
    Ok(f)
}
