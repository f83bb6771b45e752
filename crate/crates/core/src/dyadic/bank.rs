use std::ops::RangeInclusive;

use num_complex::Complex64;

use super::profile::phi;
use super::spectrum::ShellSpectrum;
use crate::spectral::{Components, Grid, SpectralField};

/// Lowest shell kept on every grid; one shell sits below the first lattice
/// frequency so that `2^{-q}` hybrid weights above 1 are exercised.
pub const Q_MIN: i32 = -2;

/// Dyadic blocks `Δ_q = φ(2^{-q}|D|)` on a periodic grid.
///
/// Multipliers depend on `|k|^2` only and are cached per integer `|k|^2`:
/// each lattice radius touches at most two shells.
#[derive(Clone, Debug)]
pub struct DyadicFilterBank {
    grid: Grid,
    q_min: i32,
    q_max: i32,
    /// Per `|k|^2`: up to two `(shell offset, multiplier)` pairs.
    by_k2: Vec<[(usize, f64); 2]>,
}

impl DyadicFilterBank {
    pub fn new(grid: &Grid) -> Self {
        let q_min = Q_MIN;
        let top = grid.points_per_axis() as f64 / 3.0 * 8.0 / 3.0;
        let q_max = top.log2().ceil() as i32;
        let max_k2 = grid.max_k2() as usize;
        let mut by_k2 = vec![[(0usize, 0.0f64); 2]; max_k2 + 1];
        for (k2, slot) in by_k2.iter_mut().enumerate() {
            let r = (k2 as f64).sqrt();
            let mut n = 0;
            for q in q_min..=q_max {
                let w = phi(r * 2f64.powi(-q));
                if w > 0.0 {
                    assert!(n < 2, "a lattice radius met three shells");
                    slot[n] = ((q - q_min) as usize, w);
                    n += 1;
                }
            }
        }
        let bank = DyadicFilterBank {
            grid: grid.clone(),
            q_min,
            q_max,
            by_k2,
        };
        let dev = bank.partition_deviation();
        assert!(dev <= 1e-12, "partition of unity off by {dev:e}");
        bank
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    pub fn shells(&self) -> RangeInclusive<i32> {
        self.q_min..=self.q_max
    }

    pub fn shell_count(&self) -> usize {
        (self.q_max - self.q_min + 1) as usize
    }

    /// `φ(2^{-q}|k|)` for a lattice radius given by its integer square;
    /// shells outside `[q_min, q_max]` are identically zero.
    pub fn multiplier(&self, q: i32, k2: u32) -> f64 {
        if q < self.q_min || q > self.q_max {
            return 0.0;
        }
        let off = (q - self.q_min) as usize;
        let slot = &self.by_k2[k2 as usize];
        slot.iter()
            .find(|(o, w)| *o == off && *w > 0.0)
            .map_or(0.0, |(_, w)| *w)
    }

    /// Largest `|Σ_q φ(2^{-q}|k|) - 1|` over lattice points of the resolved
    /// annulus `3/4·2^{q_min} <= |k| <= 2^{q_max}`.
    pub fn partition_deviation(&self) -> f64 {
        let lo = 0.75 * 2f64.powi(self.q_min);
        let hi = 2f64.powi(self.q_max);
        let mut worst = 0.0f64;
        for (k2, slot) in self.by_k2.iter().enumerate() {
            let r = (k2 as f64).sqrt();
            if k2 == 0 || r < lo || r > hi {
                continue;
            }
            let s: f64 = slot.iter().map(|(_, w)| w).sum();
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// `Δ_q f`.
    pub fn block(&self, f: &SpectralField, q: i32) -> SpectralField {
        let grid = &self.grid;
        f.map_modes(|m| Complex64::new(self.multiplier(q, grid.k2(m)), 0.0))
    }

    /// `S_q f = mean(f) + Σ_{p <= q-1} Δ_p f`.
    pub fn low_pass(&self, f: &SpectralField, q: i32) -> SpectralField {
        let grid = &self.grid;
        f.map_modes(|m| {
            let k2 = grid.k2(m);
            if k2 == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let w: f64 = self.by_k2[k2 as usize]
                .iter()
                .filter(|(o, w)| *w > 0.0 && (*o as i32 + self.q_min) < q)
                .map(|(_, w)| w)
                .sum();
            Complex64::new(w, 0.0)
        })
    }

    /// `(Δ_{q-1} + Δ_q + Δ_{q+1}) f`.
    pub fn widened_block(&self, f: &SpectralField, q: i32) -> SpectralField {
        let grid = &self.grid;
        f.map_modes(|m| {
            let k2 = grid.k2(m);
            let w = self.multiplier(q - 1, k2) + self.multiplier(q, k2) + self.multiplier(q + 1, k2);
            Complex64::new(w, 0.0)
        })
    }

    /// Squared `L^2` mass of every shell, summed over components.
    pub fn shell_energies<C: Components + ?Sized>(&self, f: &C) -> Vec<f64> {
        let mut radial = vec![0.0; self.by_k2.len()];
        for comp in f.components() {
            debug_assert!(*comp.grid() == self.grid);
            for (m, c) in comp.coeffs().iter().enumerate() {
                radial[self.grid.k2(m) as usize] += c.norm_sqr();
            }
        }
        let mut out = vec![0.0; self.shell_count()];
        for (k2, e) in radial.iter().enumerate().skip(1) {
            if *e == 0.0 {
                continue;
            }
            for &(o, w) in &self.by_k2[k2] {
                if w > 0.0 {
                    out[o] += w * w * e;
                }
            }
        }
        out
    }

    /// Per-shell `‖Δ_q f‖_{L^2}` (root of the summed component energies).
    pub fn spectrum<C: Components + ?Sized>(&self, f: &C) -> ShellSpectrum {
        ShellSpectrum::new(self.q_min, self.shell_energies(f).into_iter().map(f64::sqrt).collect())
    }
}
