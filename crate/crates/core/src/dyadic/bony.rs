//! Bony decomposition `u f = T_u f + T_f u + R(u, f)`.
//!
//! The mean acts as an extra block below every shell: `S_q` includes it, and
//! `R` carries the mean-times-mean product, so the identity holds exactly.
//! All products are accumulated in real space and dealiased once.

use super::bank::DyadicFilterBank;
use crate::error::Result;
use crate::spectral::ops::from_physical_dealiased;
use crate::spectral::SpectralField;

struct Blocks {
    mean: f64,
    /// Real-space `Δ_q` for every shell of the bank.
    blocks: Vec<Vec<f64>>,
}

fn blocks(bank: &DyadicFilterBank, f: &SpectralField) -> Blocks {
    Blocks {
        mean: f.mean().re,
        blocks: bank.shells().map(|q| bank.block(f, q).to_real()).collect(),
    }
}

/// `Σ_q S_{q-1}a · Δ_q b` in real space.
fn para(a: &Blocks, b: &Blocks, len: usize) -> Vec<f64> {
    let mut low = vec![a.mean; len];
    let mut acc = vec![0.0; len];
    for q in 0..b.blocks.len() {
        // S_{q-1} a = mean + Σ_{p <= q-2} Δ_p a
        if q >= 2 {
            for (l, x) in low.iter_mut().zip(&a.blocks[q - 2]) {
                *l += x;
            }
        }
        for ((s, l), x) in acc.iter_mut().zip(&low).zip(&b.blocks[q]) {
            *s += l * x;
        }
    }
    acc
}

fn rem(a: &Blocks, b: &Blocks, len: usize) -> Vec<f64> {
    let nq = a.blocks.len();
    let mut acc = vec![a.mean * b.mean; len];
    for q in 0..nq {
        let lo = q.saturating_sub(1);
        let hi = (q + 1).min(nq - 1);
        for p in lo..=hi {
            for ((s, x), y) in acc.iter_mut().zip(&a.blocks[q]).zip(&b.blocks[p]) {
                *s += x * y;
            }
        }
    }
    acc
}

/// `T_u f = Σ_q S_{q-1}u Δ_q f`.
pub fn paraproduct(bank: &DyadicFilterBank, u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    u.check_same_grid(f)?;
    let len = u.grid().len();
    Ok(from_physical_dealiased(
        u.grid(),
        &para(&blocks(bank, u), &blocks(bank, f), len),
    ))
}

/// `R(u, f) = mean(u) mean(f) + Σ_q Δ_q u (Δ_{q-1} + Δ_q + Δ_{q+1}) f`.
pub fn remainder(bank: &DyadicFilterBank, u: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    u.check_same_grid(f)?;
    let len = u.grid().len();
    Ok(from_physical_dealiased(
        u.grid(),
        &rem(&blocks(bank, u), &blocks(bank, f), len),
    ))
}

/// `(T_u f, T_f u, R(u, f))`, sharing the block transforms.
pub fn bony_decomposition(
    bank: &DyadicFilterBank,
    u: &SpectralField,
    f: &SpectralField,
) -> Result<(SpectralField, SpectralField, SpectralField)> {
    u.check_same_grid(f)?;
    let grid = u.grid();
    let len = grid.len();
    let bu = blocks(bank, u);
    let bf = blocks(bank, f);
    Ok((
        from_physical_dealiased(grid, &para(&bu, &bf, len)),
        from_physical_dealiased(grid, &para(&bf, &bu, len)),
        from_physical_dealiased(grid, &rem(&bu, &bf, len)),
    ))
}
