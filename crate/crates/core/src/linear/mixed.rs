use super::propagator::{Coupling, LinearPropagator, Scheme};
use super::{advect, check_solenoidal};
use crate::dyadic::{DyadicFilterBank, ShellSpectrum};
use crate::error::{Error, Result};
use crate::spectral::ops::leray_project;
use crate::spectral::VectorField;

/// Knobs of [`mixed_system_evolve`] beyond the data.
#[derive(Clone, Debug)]
pub struct MixedOptions {
    pub scheme: Scheme,
    /// Keep full `(t, v, c)` snapshots every `cadence` steps (0 = none).
    pub cadence: usize,
    /// Store shell spectra at every step (needed by the estimate checks).
    pub record: bool,
}

impl Default for MixedOptions {
    fn default() -> Self {
        MixedOptions {
            scheme: Scheme::ImexEtdAb2,
            cadence: 0,
            record: true,
        }
    }
}

/// Output of [`mixed_system_evolve`]: per-step shell spectra plus the final
/// fields and any requested snapshots.
#[derive(Clone, Debug)]
pub struct MixedTrajectory {
    pub dim: usize,
    pub mu: f64,
    pub dt: f64,
    /// `t_0 = 0, ..., t_M = T`.
    pub times: Vec<f64>,
    /// Per-step spectra; only the initial one unless `record` was set.
    pub v_spectra: Vec<ShellSpectrum>,
    pub c_spectra: Vec<ShellSpectrum>,
    pub g_spectrum: Option<ShellSpectrum>,
    pub l_spectrum: Option<ShellSpectrum>,
    /// Spectrum of the frozen convecting field.
    pub u_spectrum: Option<ShellSpectrum>,
    pub v_final: VectorField,
    pub c_final: VectorField,
    pub snapshots: Vec<(f64, VectorField, VectorField)>,
}

impl MixedTrajectory {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }
}

/// Integrates
///
/// ```text
/// v_t + u·∇v + ∇p - μΔv - Λc = G,   c_t + u·∇c + Λv = L,   ∇·v = ∇·c = 0
/// ```
///
/// with frozen `u`, `G`, `L`, using the production propagator (linear part
/// exact per mode, convection and forcing explicit). The `c` forcing is
/// projected so that `∇·c = 0` is kept.
#[allow(clippy::too_many_arguments)]
pub fn mixed_system_evolve(
    v0: &VectorField,
    c0: &VectorField,
    u: Option<&VectorField>,
    g: Option<&VectorField>,
    l: Option<&VectorField>,
    mu: f64,
    t_end: f64,
    dt: f64,
    opts: &MixedOptions,
) -> Result<MixedTrajectory> {
    if !(dt > 0.0) || !(t_end >= 0.0) || !(mu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need dt > 0, T >= 0, mu > 0 (got dt={dt}, T={t_end}, mu={mu})"
        )));
    }
    check_solenoidal(v0)?;
    check_solenoidal(c0)?;
    if let Some(u) = u {
        check_solenoidal(u)?;
    }
    let grid = v0.grid().clone();
    let bank = DyadicFilterBank::new(&grid);
    let prop = LinearPropagator::new(&grid, opts.scheme, Coupling::Exponential, mu, dt);
    let steps = (t_end / dt).round() as usize;
    let u_real = u.map(|u| u.to_real());
    let g = g.map(leray_project);
    let l = l.map(leray_project);

    let forcing = |x: &VectorField, extra: &Option<VectorField>| -> VectorField {
        let mut out = match extra {
            Some(f) => f.clone(),
            None => VectorField::zeros(&grid),
        };
        if let Some(ur) = &u_real {
            for i in 0..x.dim() {
                out.comp_mut(i).axpy(1.0, &advect(ur, x.comp(i)));
            }
            out = leray_project(&out);
        }
        out
    };

    let mut v = v0.clone();
    let mut c = c0.clone();
    v.zero_mean();
    c.zero_mean();
    let mut times = vec![0.0];
    let mut v_spectra = vec![bank.spectrum(&v)];
    let mut c_spectra = vec![bank.spectrum(&c)];
    let mut snapshots = Vec::new();
    if opts.cadence > 0 {
        snapshots.push((0.0, v.clone(), c.clone()));
    }
    let mut prev: Option<(VectorField, VectorField)> = None;
    for n in 0..steps {
        let nv = forcing(&v, &g);
        let nc = forcing(&c, &l);
        prop.advance_pair(&mut v, &mut c, &nv, &nc, prev.as_ref().map(|(a, b)| (a, b)));
        prev = Some((nv, nc));
        let t = (n + 1) as f64 * dt;
        times.push(t);
        if opts.record {
            v_spectra.push(bank.spectrum(&v));
            c_spectra.push(bank.spectrum(&c));
        }
        if opts.cadence > 0 && (n + 1) % opts.cadence == 0 {
            snapshots.push((t, v.clone(), c.clone()));
        }
        if !v.is_finite() || !c.is_finite() {
            return Err(Error::NonFinite { t, last_good_t: t - dt });
        }
    }
    Ok(MixedTrajectory {
        dim: grid.dim(),
        mu,
        dt,
        times,
        v_spectra,
        c_spectra,
        g_spectrum: g.as_ref().map(|f| bank.spectrum(f)),
        l_spectrum: l.as_ref().map(|f| bank.spectrum(f)),
        u_spectrum: u.map(|f| bank.spectrum(f)),
        v_final: v,
        c_final: c,
        snapshots,
    })
}
