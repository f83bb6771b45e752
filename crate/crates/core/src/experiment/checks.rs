//! Exactness checks of the dyadic toolkit and of the two formulations.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{admissible_pair, random_solenoidal, DataSpec};
use crate::dyadic::{bony_decomposition, DyadicFilterBank};
use crate::error::Result;
use crate::spectral::ops::{dilate, pointwise_product};
use crate::spectral::random::random_bandlimited;
use crate::spectral::{Grid, SpectralField, TensorField, VectorField};
use crate::system::{rhs_vc, rhs_ve, riesz_row_divergence, to_c, State};

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Largest `‖uv - (T_u v + T_v u + R(u,v))‖ / ‖uv‖` over `samples` random
/// pairs with spectra in `|k| <= n/6`, so that `uv` itself is resolved.
pub fn bony_exactness(grid: &Grid, samples: usize, seed: u64) -> Result<f64> {
    let bank = DyadicFilterBank::new(grid);
    let k_hi = grid.points_per_axis() as f64 / 6.0;
    let mut worst = 0.0f64;
    for i in 0..samples {
        let mut r = rng(seed, i as u64);
        let slope = r.random_range(0.0..2.0);
        let u = random_bandlimited(grid, &mut r, 1.0, k_hi, slope)?;
        let v = random_bandlimited(grid, &mut r, 1.0, k_hi, slope)?;
        let uv = pointwise_product(&u, &v)?;
        let (tuv, tvu, rem) = bony_decomposition(&bank, &u, &v)?;
        let mut diff = uv.clone();
        diff.axpy(-1.0, &tuv);
        diff.axpy(-1.0, &tvu);
        diff.axpy(-1.0, &rem);
        worst = worst.max(diff.l2_norm() / uv.l2_norm());
    }
    Ok(worst)
}

/// Product by direct convolution of Fourier coefficients. Contributions that
/// would leave the lattice are reported through the returned flag.
pub fn convolve(f: &SpectralField, g: &SpectralField) -> Result<(SpectralField, bool)> {
    f.check_same_grid(g)?;
    let grid = f.grid().clone();
    let nz = |h: &SpectralField| -> Vec<(usize, Complex64)> {
        h.coeffs()
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, z)| *z != Complex64::new(0.0, 0.0))
            .collect()
    };
    let (a, b) = (nz(f), nz(g));
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut lost = false;
    for &(ma, za) in &a {
        let ka = grid.wavenumber(ma);
        for &(mb, zb) in &b {
            let kb = grid.wavenumber(mb);
            let k = [ka[0] + kb[0], ka[1] + kb[1], ka[2] + kb[2]];
            match grid.mode_index(k) {
                Some(m) => out[m] += za * zb,
                None => lost = true,
            }
        }
    }
    Ok((
        SpectralField::from_coeffs(&grid, out, f.is_real() && g.is_real())?,
        lost,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionCheck {
    /// `max |Σ_q φ(2^{-q}k) - 1|` on the resolved annulus.
    pub partition_deviation: f64,
    /// `max ‖Δ_pΔ_q f‖` over `|p - q| >= 2`; zero when exact.
    pub disjoint_blocks: f64,
    /// `max ‖Δ_q(S_{p-1}f·Δ_p g)‖` over `|p - q| >= 5`, product by convolution.
    pub product_localization: f64,
    /// Some convolution term fell off the lattice.
    pub truncated: bool,
}

pub fn partition_checks(grid: &Grid, seed: u64) -> Result<PartitionCheck> {
    let bank = DyadicFilterBank::new(grid);
    let mut r = rng(seed, 0);
    let k_hi = grid.points_per_axis() as f64 / 6.0;
    let f = random_bandlimited(grid, &mut r, 1.0, k_hi, 0.5)?;
    let g = random_bandlimited(grid, &mut r, 1.0, k_hi, 0.5)?;
    let shells: Vec<i32> = bank.shells().collect();
    let blocks_f: Vec<SpectralField> = shells.iter().map(|&q| bank.block(&f, q)).collect();
    let blocks_g: Vec<SpectralField> = shells.iter().map(|&q| bank.block(&g, q)).collect();

    let mut disjoint = 0.0f64;
    for (i, &p) in shells.iter().enumerate() {
        for &q in &shells {
            if (p - q).abs() >= 2 {
                disjoint = disjoint.max(bank.block(&blocks_f[i], q).l2_norm());
            }
        }
    }

    let mut local = 0.0f64;
    let mut truncated = false;
    for (i, &p) in shells.iter().enumerate() {
        let low = bank.low_pass(&f, p - 1);
        let (prod, lost) = convolve(&low, &blocks_g[i])?;
        truncated |= lost;
        for &q in &shells {
            if (p - q).abs() >= 5 {
                local = local.max(bank.block(&prod, q).l2_norm());
            }
        }
    }
    Ok(PartitionCheck {
        partition_deviation: bank.partition_deviation(),
        disjoint_blocks: disjoint,
        product_localization: local,
        truncated,
    })
}

/// Critical norm `‖v‖_{B^{N/2-1}} + ‖E‖_{B^{N/2}}` measured on one period
/// cell of side `period`: box-averaged norms times `period^{N/2}`.
pub fn cell_critical_norm(bank: &DyadicFilterBank, v: &VectorField, e: &TensorField, period: f64) -> f64 {
    let half = bank.grid().dim() as f64 / 2.0;
    let avg = bank.spectrum(v).besov1(half - 1.0) + bank.spectrum(e).besov1(half);
    avg * period.powf(half)
}

/// Relative change of the critical norm under `(v, E)(x) -> (l v(lx), E(lx))`
/// for random data with `|k| <= n/(6l)`.
pub fn scaling_invariance(grid: &Grid, l: u32, seed: u64) -> Result<f64> {
    let bank = DyadicFilterBank::new(grid);
    let mut r = rng(seed, 0);
    let k_hi = grid.points_per_axis() as f64 / (6.0 * l as f64);
    let v = random_solenoidal(grid, &mut r, 1.0, k_hi, 1.0)?;
    let mut e = TensorField::zeros(grid);
    for c in e.comps_mut() {
        *c = random_bandlimited(grid, &mut r, 1.0, k_hi, 1.0)?;
    }
    let lv = VectorField::from_components(
        v.comps()
            .iter()
            .map(|c| dilate(c, l).map(|d| d.scaled(l as f64)))
            .collect::<Result<_>>()?,
    )?;
    let le = TensorField::from_components(e.comps().iter().map(|c| dilate(c, l)).collect::<Result<_>>()?)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let before = cell_critical_norm(&bank, &v, &e, two_pi);
    let after = cell_critical_norm(&bank, &lv, &le, two_pi / l as f64);
    Ok((after - before).abs() / before)
}

/// Largest `‖Λ^{-1}∇·(dE) - dc‖ / ‖dc‖` over `samples` random admissible
/// states, `dE` from the strain form and `dc` from the `(v, c)` form.
pub fn formulation_consistency(grid: &Grid, samples: usize, seed: u64, mu: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut r = rng(seed, 0);
    for i in 0..samples {
        let spec = DataSpec {
            amplitude: r.random_range(1e-3..1e-2),
            band: [1.0, (grid.dealias_cutoff() as f64 / 2.0).max(2.0)],
            warmup_time: 0.5,
            seed: seed.wrapping_add(i as u64),
            ..Default::default()
        };
        let (v, e) = admissible_pair(grid, &spec)?;
        let state = State::new(v, e, 0.0)?;
        let (_, de) = rhs_ve(&state, mu);
        let via_strain = riesz_row_divergence(&de);
        let c = to_c(&state.e)?;
        let (_, dc) = rhs_vc(&state.v, &c, &state.e, mu)?;
        let diff = via_strain.sub(&dc)?;
        worst = worst.max(diff.l2_norm() / dc.l2_norm());
    }
    Ok(worst)
}
