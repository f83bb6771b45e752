//! Initial data: divergence-free velocities, admissible strains built by a
//! warm-up transport run, and deliberately inadmissible strains.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicFilterBank;
use crate::error::{Error, Result};
use crate::linear::check_solenoidal;
use crate::spectral::ops::{from_physical_dealiased, leray_project, partial_derivative, velocity_gradient};
use crate::spectral::random::random_bandlimited;
use crate::spectral::{Grid, SpectralField, TensorField, VectorField};
use crate::system::{strain_residuals, ConstraintResiduals};

/// Largest residuals accepted from [`make_strain_by_warmup`].
pub const WARMUP_TOLERANCE: ConstraintResiduals = ConstraintResiduals {
    det_drift: 1e-8,
    div_et: 1e-10,
    curl_compat: 1e-8,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    RandomBandlimited,
    /// Shear `amplitude·(sin k x₂, 0[, 0])` with `k = band[0]`.
    SingleMode,
    /// Cellular flow at wavenumber `band[0]`.
    TaylorGreenLike,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSpec {
    pub kind: DataKind,
    /// Target `‖v0‖_{B^{N/2-1}}`, and the scale of `E0` in `B^{N/2}`. Zero gives rest data.
    pub amplitude: f64,
    /// `[k_lo, k_hi]` in units of `|k|`.
    pub band: [f64; 2],
    pub warmup_time: f64,
    pub seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            kind: DataKind::RandomBandlimited,
            amplitude: 1e-2,
            band: [1.0, 4.0],
            warmup_time: 0.5,
            seed: 7,
        }
    }
}

impl DataSpec {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        let [lo, hi] = self.band;
        if !(lo >= 1.0 && hi >= lo) {
            return Err(Error::InvalidParameter(format!(
                "band [{lo}, {hi}] needs 1 <= k_lo <= k_hi"
            )));
        }
        if hi > grid.dealias_cutoff() as f64 {
            return Err(Error::InvalidParameter(format!(
                "k_hi = {hi} exceeds the dealias cutoff {} of {grid}",
                grid.dealias_cutoff()
            )));
        }
        if !(self.warmup_time >= 0.0) {
            return Err(Error::InvalidParameter("warmup_time must be >= 0".into()));
        }
        Ok(())
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }
}

const VELOCITY_STREAM: u64 = 0;
const CARRIER_STREAM: u64 = 1;
const INADMISSIBLE_STREAM: u64 = 2;

fn critical_v(bank: &DyadicFilterBank, v: &VectorField) -> f64 {
    bank.spectrum(v).besov1(bank.grid().dim() as f64 / 2.0 - 1.0)
}

/// Random band-limited, mean-zero, divergence-free field (unnormalized).
pub fn random_solenoidal<R: rand::Rng + ?Sized>(
    grid: &Grid,
    rng: &mut R,
    k_lo: f64,
    k_hi: f64,
    slope: f64,
) -> Result<VectorField> {
    let comps = (0..grid.dim())
        .map(|_| random_bandlimited(grid, rng, k_lo, k_hi, slope))
        .collect::<Result<Vec<_>>>()?;
    let v = leray_project(&VectorField::from_components(comps)?);
    if v.l2_norm() == 0.0 {
        return Err(Error::EmptyBand { lo: k_lo, hi: k_hi });
    }
    Ok(v)
}

fn shape(grid: &Grid, spec: &DataSpec, stream: u64) -> Result<VectorField> {
    let [lo, hi] = spec.band;
    let n = grid.dim();
    match spec.kind {
        DataKind::RandomBandlimited => random_solenoidal(grid, &mut spec.rng(stream), lo, hi, 1.0),
        DataKind::SingleMode => {
            let k = lo.round();
            let mut comps = vec![SpectralField::zeros(grid); n];
            comps[0] = SpectralField::from_real(grid, &grid.sample(|x| (k * x[1]).sin()))?;
            VectorField::from_components(comps)
        }
        DataKind::TaylorGreenLike => {
            let k = lo.round();
            let mut comps = vec![SpectralField::zeros(grid); n];
            let cz = |x: [f64; 3]| if n == 3 { (k * x[2]).cos() } else { 1.0 };
            comps[0] = SpectralField::from_real(grid, &grid.sample(|x| (k * x[0]).sin() * (k * x[1]).cos() * cz(x)))?;
            comps[1] = SpectralField::from_real(grid, &grid.sample(|x| -(k * x[0]).cos() * (k * x[1]).sin() * cz(x)))?;
            VectorField::from_components(comps)
        }
    }
}

fn velocity_with_stream(grid: &Grid, spec: &DataSpec, stream: u64) -> Result<VectorField> {
    spec.validate(grid)?;
    let mut v = shape(grid, spec, stream)?;
    v.zero_mean();
    let bank = DyadicFilterBank::new(grid);
    let norm = critical_v(&bank, &v);
    v.scale(spec.amplitude / norm);
    Ok(v)
}

/// Divergence-free, mean-zero velocity with `‖v0‖_{B^{N/2-1}} = amplitude`.
pub fn make_velocity(grid: &Grid, spec: &DataSpec) -> Result<VectorField> {
    velocity_with_stream(grid, spec, VELOCITY_STREAM)
}

/// `-v·∇E + ∇v E + ∇v`, dealiased.
fn warmup_rhs(v_real: &[Vec<f64>], grad_v: &TensorField, grad_v_real: &[Vec<f64>], e: &TensorField) -> TensorField {
    let grid = e.grid().clone();
    let n = grid.dim();
    let er = e.to_real();
    let mut out = TensorField::zeros(&grid);
    for i in 0..n {
        for j in 0..n {
            let mut acc = vec![0.0; grid.len()];
            for k in 0..n {
                let d = partial_derivative(e.comp(i, j), k).expect("axis in range").to_real();
                for p in 0..acc.len() {
                    acc[p] += grad_v_real[i * n + k][p] * er[k * n + j][p] - v_real[k][p] * d[p];
                }
            }
            *out.comp_mut(i, j) = from_physical_dealiased(&grid, &acc);
        }
    }
    out.axpy(1.0, grad_v);
    out
}

/// Evolves `E_t + v·∇E = ∇v E + ∇v` from `E = 0` with the frozen carrier
/// `v` for `time`, using `steps` classical Runge–Kutta steps.
pub fn warmup_strain(carrier: &VectorField, time: f64, steps: usize) -> Result<TensorField> {
    check_solenoidal(carrier)?;
    let grid = carrier.grid().clone();
    let mut e = TensorField::zeros(&grid);
    if time == 0.0 || steps == 0 {
        return Ok(e);
    }
    let h = time / steps as f64;
    let vr = carrier.to_real();
    let gv = velocity_gradient(carrier);
    let gvr = gv.to_real();
    let f = |x: &TensorField| warmup_rhs(&vr, &gv, &gvr, x);
    for _ in 0..steps {
        let k1 = f(&e);
        let k2 = f(&shifted(&e, 0.5 * h, &k1));
        let k3 = f(&shifted(&e, 0.5 * h, &k2));
        let k4 = f(&shifted(&e, h, &k3));
        e.axpy(h / 6.0, &k1);
        e.axpy(h / 3.0, &k2);
        e.axpy(h / 3.0, &k3);
        e.axpy(h / 6.0, &k4);
    }
    if !e.is_finite() {
        return Err(Error::NonFinite {
            t: time,
            last_good_t: 0.0,
        });
    }
    Ok(e)
}

fn shifted(e: &TensorField, a: f64, k: &TensorField) -> TensorField {
    let mut out = e.clone();
    out.axpy(a, k);
    out
}

/// Step count for a warm-up of length `time`: `h·‖v‖_∞·|k|_max <= 0.2`, `h <= 0.01`.
fn warmup_steps(carrier: &VectorField, time: f64) -> usize {
    let r = carrier.to_real();
    let speed = (0..r[0].len())
        .map(|p| r.iter().map(|c| c[p] * c[p]).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    let grid = carrier.grid();
    let kmax = grid.dealias_cutoff() as f64 * (grid.dim() as f64).sqrt();
    let h = (0.2 / (speed * kmax).max(f64::MIN_POSITIVE)).min(0.01);
    (time / h).ceil().max(1.0) as usize
}

/// Admissible strain from a warm-up run with `carrier` over `spec.warmup_time`.
/// Fails with the measured residuals if any exceeds [`WARMUP_TOLERANCE`].
pub fn make_strain_by_warmup(spec: &DataSpec, carrier: &VectorField) -> Result<TensorField> {
    if !(spec.warmup_time >= 0.0) {
        return Err(Error::InvalidParameter("warmup_time must be >= 0".into()));
    }
    let e = warmup_strain(carrier, spec.warmup_time, warmup_steps(carrier, spec.warmup_time))?;
    let r = strain_residuals(&e);
    if !r.within(&WARMUP_TOLERANCE) {
        return Err(Error::WarmupResiduals {
            det_drift: r.det_drift,
            div_et: r.div_et,
            curl_compat: r.curl_compat,
        });
    }
    Ok(e)
}

/// Velocity and admissible strain for `spec`. The strain comes from a
/// warm-up whose carrier is an independent draw scaled so that
/// `warmup_time·‖∇carrier‖_{B^{N/2}} = amplitude`, which makes
/// `‖E0‖_{B^{N/2}} ≈ amplitude` to leading order.
pub fn admissible_pair(grid: &Grid, spec: &DataSpec) -> Result<(VectorField, TensorField)> {
    let v = make_velocity(grid, spec)?;
    if spec.warmup_time == 0.0 || spec.amplitude == 0.0 {
        return Ok((v, TensorField::zeros(grid)));
    }
    let mut carrier = velocity_with_stream(grid, spec, CARRIER_STREAM)?;
    let bank = DyadicFilterBank::new(grid);
    let g = bank
        .spectrum(&velocity_gradient(&carrier))
        .besov1(grid.dim() as f64 / 2.0);
    carrier.scale(spec.amplitude / (spec.warmup_time * g));
    let e = make_strain_by_warmup(spec, &carrier)?;
    Ok((v, e))
}

/// Random symmetric strain, mean-zero, with `‖E‖_{B^{N/2}} = amplitude`.
/// It has a nonzero trace, row divergence and curl, so every monitor fires.
pub fn make_strain_inadmissible(grid: &Grid, spec: &DataSpec) -> Result<TensorField> {
    spec.validate(grid)?;
    let n = grid.dim();
    let mut rng = spec.rng(INADMISSIBLE_STREAM);
    let [lo, hi] = spec.band;
    let mut e = TensorField::zeros(grid);
    for i in 0..n {
        for j in i..n {
            let f = random_bandlimited(grid, &mut rng, lo, hi, 1.0)?;
            *e.comp_mut(i, j) = f.clone();
            *e.comp_mut(j, i) = f;
        }
    }
    let bank = DyadicFilterBank::new(grid);
    let norm = bank.spectrum(&e).besov1(n as f64 / 2.0);
    e.scale(spec.amplitude / norm);
    Ok(e)
}

/// `E = εI`: constant, so divergence and curl vanish but `det(I+E) = (1+ε)^N`.
pub fn scaled_identity_strain(grid: &Grid, eps: f64) -> TensorField {
    let n = grid.dim();
    let mut e = TensorField::zeros(grid);
    for i in 0..n {
        e.comp_mut(i, i).coeffs_mut()[0] = eps.into();
    }
    e
}
