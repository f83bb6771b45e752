//! Shape checks for the linear a-priori estimates. The constants are
//! existential, so these report ratios and never assert a value of `C`.

use super::mixed::MixedTrajectory;
use super::stokes_convection_step;
use crate::dyadic::{DyadicFilterBank, TimeNormAccumulator};
use crate::error::{Error, Result};
use crate::spectral::VectorField;

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// `‖(v,c)‖_{X^ρ_T}` against the data/forcing side of the mixed-system estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Prop43Report {
    pub rho: f64,
    pub mu: f64,
    pub t_end: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// `∫_0^T ‖u‖_{B^{N/2+1}}`, the exponent of the omitted growth factor.
    pub convection_integral: f64,
}

/// Evaluates
///
/// `‖v‖_{L^∞_T(B^{ρ-1})} + μ‖v‖_{L^1_T(B^{ρ+1})} + ‖c‖_{L^∞_T(B̃^{ρ,∞}_μ)} + μ‖c‖_{L^1_T(B̃^{ρ,1}_μ)}`
///
/// against `‖c0‖_{B̃^{ρ,∞}_μ} + ‖v0‖_{B^{ρ-1}} + ∫(‖L‖_{B̃^{ρ,∞}_μ} + ‖G‖_{B^{ρ-1}})`.
/// Time integrals use the left-endpoint rule on the stored steps.
pub fn prop43_estimate_check(traj: &MixedTrajectory, rho: f64, mu: f64) -> Result<Prop43Report> {
    let half = traj.dim as f64 / 2.0;
    let (lo, hi) = (1.0 - half, 1.0 + half);
    if !(rho > lo && rho <= hi) {
        return Err(Error::IndexOutOfRange { rho, lo, hi });
    }
    if traj.v_spectra.len() != traj.times.len() {
        return Err(Error::InvalidParameter(
            "trajectory was run without per-step spectra".into(),
        ));
    }
    let inf = f64::INFINITY;
    let steps = traj.times.len().saturating_sub(1);
    let dt = traj.dt;
    let mut sup_v = 0.0f64;
    let mut sup_c = 0.0f64;
    let mut int_v = 0.0;
    let mut int_c = 0.0;
    for (i, (sv, sc)) in traj.v_spectra.iter().zip(&traj.c_spectra).enumerate() {
        sup_v = sup_v.max(sv.besov1(rho - 1.0));
        sup_c = sup_c.max(sc.hybrid(rho, inf, mu));
        if i < steps {
            int_v += dt * sv.besov1(rho + 1.0);
            int_c += dt * sc.hybrid(rho, 1.0, mu);
        }
    }
    let lhs = sup_v + mu * int_v + sup_c + mu * int_c;
    let t_end = traj.t_end();
    let mut rhs = traj.c_spectra[0].hybrid(rho, inf, mu) + traj.v_spectra[0].besov1(rho - 1.0);
    if let Some(l) = &traj.l_spectrum {
        rhs += t_end * l.hybrid(rho, inf, mu);
    }
    if let Some(g) = &traj.g_spectrum {
        rhs += t_end * g.besov1(rho - 1.0);
    }
    let convection_integral = traj.u_spectrum.as_ref().map_or(0.0, |u| t_end * u.besov1(half + 1.0));
    Ok(Prop43Report {
        rho,
        mu,
        t_end,
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
        convection_integral,
    })
}

/// Convected-Stokes estimate shape over a run of [`stokes_convection_step`].
#[derive(Clone, Debug, PartialEq)]
pub struct Prop42Report {
    pub s: f64,
    pub mu: f64,
    pub t_end: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub convection_integral: f64,
}

/// Runs `u_t + v·∇u - μΔu + ∇Π = f` with frozen `v`, `f` and compares
/// `‖u‖_{L̃^∞_t(B^{s-1})} + μ‖u‖_{L̃^1_t(B^{s+1})}` with
/// `‖u0‖_{B^{s-1}} + ‖f‖_{L̃^1_t(B^{s-1})}`.
pub fn prop42_estimate_check(
    u0: &VectorField,
    v_conv: &VectorField,
    f: &VectorField,
    mu: f64,
    s: f64,
    dt: f64,
    t_end: f64,
) -> Result<Prop42Report> {
    let half = u0.grid().dim() as f64 / 2.0;
    if !(s > -half && s < 2.0 + half) {
        return Err(Error::IndexOutOfRange {
            rho: s,
            lo: -half,
            hi: 2.0 + half,
        });
    }
    let bank = DyadicFilterBank::new(u0.grid());
    let mut sup = TimeNormAccumulator::new(&bank, s - 1.0, 1.0, f64::INFINITY);
    let mut int = TimeNormAccumulator::new(&bank, s + 1.0, 1.0, 1.0);
    let mut forcing = TimeNormAccumulator::new(&bank, s - 1.0, 1.0, 1.0);
    let steps = (t_end / dt).round() as usize;
    let mut u = u0.clone();
    u.zero_mean();
    let f_spec = bank.spectrum(f);
    for _ in 0..steps {
        let sp = bank.spectrum(&u);
        sup.accumulate_shells(sp.norms(), dt)?;
        int.accumulate_shells(sp.norms(), dt)?;
        forcing.accumulate_shells(f_spec.norms(), dt)?;
        u = stokes_convection_step(&u, v_conv, f, mu, dt)?;
    }
    sup.accumulate_shells(bank.spectrum(&u).norms(), dt)?;
    let lhs = sup.value() + mu * int.value();
    let rhs = bank.spectrum(u0).besov1(s - 1.0) + forcing.value();
    let t = steps as f64 * dt;
    Ok(Prop42Report {
        s,
        mu,
        t_end: t,
        lhs,
        rhs,
        ratio: ratio(lhs, rhs),
        convection_integral: t * bank.spectrum(&crate::spectral::velocity_gradient(v_conv)).besov1(half),
    })
}
