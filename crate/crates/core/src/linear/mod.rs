//! Linear building blocks: heat flow, convected transport, convected Stokes
//! and the mixed parabolic–hyperbolic `(v, c)` system with its dispersion
//! relation.

mod dispersion;
mod estimates;
mod mixed;
mod propagator;

pub use dispersion::{
    dispersion_table, evolve_mode, format_dispersion_table, log_spaced, DispersionRecord, MixedModeMatrix,
};
pub use estimates::{prop42_estimate_check, prop43_estimate_check, Prop42Report, Prop43Report};
pub use mixed::{mixed_system_evolve, MixedOptions, MixedTrajectory};
pub use propagator::{Coupling, LinearPropagator, ModeCoefficients, Scheme};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::ops::{divergence, from_physical_dealiased, leray_project, partial_derivative};
use crate::spectral::{SpectralField, VectorField};
use propagator::phi_scalar;

/// Relative divergence accepted as "solenoidal".
pub(crate) const SOLENOIDAL_TOL: f64 = 1e-10;

pub(crate) fn check_solenoidal(v: &VectorField) -> Result<()> {
    let d = divergence(v).l2_norm();
    let grad: f64 = v
        .comps()
        .iter()
        .map(|c| {
            let g = c.grid();
            c.coeffs()
                .iter()
                .enumerate()
                .map(|(m, z)| g.k2(m) as f64 * z.norm_sqr())
                .sum::<f64>()
        })
        .sum::<f64>()
        .sqrt();
    if d > SOLENOIDAL_TOL * grad.max(f64::MIN_POSITIVE) && d > 0.0 {
        return Err(Error::NotSolenoidal {
            residual: d / grad.max(f64::MIN_POSITIVE),
        });
    }
    Ok(())
}

/// Free heat flow `e^{μtΔ} v0`.
pub fn heat_flow(v0: &VectorField, mu: f64, t: f64) -> Result<VectorField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("heat flow time must be >= 0, got {t}")));
    }
    let grid = v0.grid().clone();
    let comps = v0
        .comps()
        .iter()
        .map(|c| c.map_modes(|m| Complex64::new((-mu * grid.k2(m) as f64 * t).exp(), 0.0)))
        .collect();
    VectorField::from_components(comps)
}

/// `-u·∇f`, dealiased, from precomputed real samples of `u`.
pub(crate) fn advect(u_real: &[Vec<f64>], f: &SpectralField) -> SpectralField {
    let grid = f.grid();
    let mut acc = vec![0.0; grid.len()];
    for (k, uk) in u_real.iter().enumerate() {
        let d = partial_derivative(f, k).expect("axis in range").to_real();
        for ((o, a), b) in acc.iter_mut().zip(uk).zip(&d) {
            *o -= a * b;
        }
    }
    from_physical_dealiased(grid, &acc)
}

/// One classical Runge–Kutta step of `f_t + ∇·(v f) = g` with `v` and `g`
/// frozen over the step (`∇·v = 0` is required).
pub fn transport_step(f: &SpectralField, v: &VectorField, g: &SpectralField, dt: f64) -> Result<SpectralField> {
    check_solenoidal(v)?;
    f.check_same_grid(g)?;
    let vr = v.to_real();
    let rhs = |x: &SpectralField| -> SpectralField {
        let mut r = advect(&vr, x);
        r.axpy(1.0, g);
        r
    };
    let k1 = rhs(f);
    let mut y = f.clone();
    y.axpy(0.5 * dt, &k1);
    let k2 = rhs(&y);
    let mut y = f.clone();
    y.axpy(0.5 * dt, &k2);
    let k3 = rhs(&y);
    let mut y = f.clone();
    y.axpy(dt, &k3);
    let k4 = rhs(&y);
    let mut out = f.clone();
    out.axpy(dt / 6.0, &k1);
    out.axpy(dt / 3.0, &k2);
    out.axpy(dt / 3.0, &k3);
    out.axpy(dt / 6.0, &k4);
    Ok(out)
}

/// One exponential-Euler step of `u_t + v·∇u - μΔu + ∇Π = f`: diffusion
/// exact, convection and forcing explicit and projected.
pub fn stokes_convection_step(
    u: &VectorField,
    v_conv: &VectorField,
    f: &VectorField,
    mu: f64,
    dt: f64,
) -> Result<VectorField> {
    check_solenoidal(v_conv)?;
    let vr = v_conv.to_real();
    let mut forcing = f.clone();
    for i in 0..u.dim() {
        forcing.comp_mut(i).axpy(1.0, &advect(&vr, u.comp(i)));
    }
    let forcing = leray_project(&forcing);
    let grid = u.grid().clone();
    let mut out = u.clone();
    for i in 0..u.dim() {
        let fi = forcing.comp(i).coeffs();
        let ui = u.comp(i).coeffs();
        let oc = out.comp_mut(i).coeffs_mut();
        for m in 0..grid.len() {
            if m == 0 || !grid.in_band(m) {
                oc[m] = Complex64::new(0.0, 0.0);
                continue;
            }
            let (e, p1, _) = phi_scalar(-mu * grid.k2(m) as f64 * dt);
            oc[m] = ui[m] * e + fi[m] * (dt * p1);
        }
    }
    Ok(leray_project(&out))
}
