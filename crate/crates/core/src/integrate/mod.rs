//! Time advancement of the nonlinear `(v, E)` system.

mod picard;
mod uniqueness;

pub use picard::{picard_solve, PicardDiagnostics, PicardRun};
pub use uniqueness::{uniqueness_probe, UniquenessReport};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicFilterBank;
use crate::error::{Error, Result};
use crate::linear::{Coupling, LinearPropagator, Scheme};
use crate::spectral::ops::{leray_project, row_divergence, velocity_gradient};
use crate::spectral::snapshot::{save_snapshot, write_sidecar};
use crate::spectral::{Grid, SpectralField, TensorField, VectorField};
use crate::system::{explicit_terms, State};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardConfig {
    pub max_iters: usize,
    /// Stop once `d_n` falls below this fraction of the iterate's size.
    pub contraction_tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        PicardConfig {
            max_iters: 40,
            contraction_tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub mu: f64,
    pub scheme: Scheme,
    pub coupling: Coupling,
    /// Quadratic terms on or off (off leaves the linear system).
    pub nonlinear: bool,
    pub picard: Option<PicardConfig>,
    pub dealias: bool,
    /// Advective CFL bound `dt·‖v‖_∞·|k|_max`.
    pub cfl: f64,
    /// Halt once `‖v‖_{B^{N/2-1}}` exceeds this multiple of the data size.
    pub blowup_factor: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1e-3,
            t_end: 1.0,
            mu: 1.0,
            scheme: Scheme::ImexEtdAb2,
            coupling: Coupling::Exponential,
            nonlinear: true,
            picard: None,
            dealias: true,
            cfl: 0.5,
            blowup_factor: 1e3,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be >= 0");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu must be positive");
        }
        if !(self.cfl > 0.0) {
            return bad("cfl must be positive");
        }
        if !(self.blowup_factor > 1.0) {
            return bad("blowup_factor must exceed 1");
        }
        if let Some(p) = &self.picard {
            if p.max_iters == 0 || !(p.contraction_tol >= 0.0) {
                return bad("picard needs max_iters >= 1 and contraction_tol >= 0");
            }
        }
        Ok(())
    }

    /// Number of steps of size `dt` covering `[0, t_end]`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// `max(‖v‖_{B^{N/2-1}}, ‖E‖_{B^{N/2}})`, the size the blow-up guard is measured against.
pub fn critical_size(bank: &DyadicFilterBank, v: &VectorField, e: &TensorField) -> (f64, f64) {
    let half = bank.grid().dim() as f64 / 2.0;
    (bank.spectrum(v).besov1(half - 1.0), bank.spectrum(e).besov1(half))
}

fn sup_speed(v: &VectorField) -> f64 {
    let r = v.to_real();
    (0..r[0].len())
        .map(|p| r.iter().map(|c| c[p] * c[p]).sum::<f64>())
        .fold(0.0f64, f64::max)
        .sqrt()
}

fn max_wavenumber(grid: &Grid) -> f64 {
    let kc = grid.dealias_cutoff() as f64;
    kc * (grid.dim() as f64).sqrt()
}

/// Stateful IMEX stepper: keeps the previous explicit terms for the
/// multistep correction and the blow-up reference.
#[derive(Clone, Debug)]
pub struct Integrator {
    cfg: IntegratorConfig,
    prop: LinearPropagator,
    bank: DyadicFilterBank,
    prev: Option<(VectorField, TensorField)>,
    limit: f64,
    reduced_steps: usize,
}

impl Integrator {
    /// Builds a stepper for trajectories starting at `initial`.
    pub fn new(cfg: &IntegratorConfig, initial: &State) -> Result<Self> {
        cfg.validate()?;
        let grid = initial.grid().clone();
        let bank = DyadicFilterBank::new(&grid);
        let (a, b) = critical_size(&bank, &initial.v, &initial.e);
        Ok(Integrator {
            prop: Self::propagator(cfg, &grid, cfg.dt),
            cfg: cfg.clone(),
            bank,
            prev: None,
            limit: cfg.blowup_factor * a.max(b),
            reduced_steps: 0,
        })
    }

    fn propagator(cfg: &IntegratorConfig, grid: &Grid, h: f64) -> LinearPropagator {
        let p = LinearPropagator::new(grid, cfg.scheme, cfg.coupling, cfg.mu, h);
        if cfg.dealias {
            p
        } else {
            p.without_dealiasing()
        }
    }

    pub fn config(&self) -> &IntegratorConfig {
        &self.cfg
    }

    pub fn bank(&self) -> &DyadicFilterBank {
        &self.bank
    }

    /// Steps taken with a CFL-reduced `dt`.
    /// Replaces the blow-up threshold on `‖v‖_{B^{N/2-1}}`; 0 disables the guard.
    pub fn with_blowup_limit(mut self, limit: f64) -> Self {
        self.limit = limit;
        self
    }

    pub fn reduced_steps(&self) -> usize {
        self.reduced_steps
    }

    /// Forget the multistep history; the next step is first order.
    pub fn reset_history(&mut self) {
        self.prev = None;
    }

    fn forcing(&self, v: &VectorField, e: &TensorField) -> (VectorField, TensorField) {
        let explicit_coupling = self.cfg.coupling == Coupling::Explicit;
        if self.cfg.nonlinear {
            return explicit_terms(v, e, explicit_coupling, self.cfg.dealias);
        }
        if explicit_coupling {
            (leray_project(&row_divergence(e)), velocity_gradient(v))
        } else {
            (VectorField::zeros(v.grid()), TensorField::zeros(v.grid()))
        }
    }

    /// Advances `state` by one step and returns the step size used. On
    /// failure `state` is left at its last good value.
    pub fn step(&mut self, state: &mut State) -> Result<f64> {
        let (nv, ne) = self.forcing(&state.v, &state.e);
        let speed = sup_speed(&state.v);
        let kmax = max_wavenumber(state.grid());
        let mut h = self.cfg.dt;
        let mut v = state.v.clone();
        let mut e = state.e.clone();
        if h * speed * kmax > self.cfg.cfl {
            h = self.cfg.cfl / (speed * kmax);
            let prop = Self::propagator(&self.cfg, state.grid(), h);
            prop.advance_strain(&mut v, &mut e, &nv, &ne, None);
            self.prev = None;
            self.reduced_steps += 1;
        } else {
            let prev = self.prev.as_ref().map(|(a, b)| (a, b));
            self.prop.advance_strain(&mut v, &mut e, &nv, &ne, prev);
            self.prev = Some((nv, ne));
        }
        v.zero_mean();
        e.zero_mean();
        let v = leray_project(&v);
        let t = state.t + h;
        if !v.is_finite() || !e.is_finite() {
            return Err(Error::NonFinite {
                t,
                last_good_t: state.t,
            });
        }
        if self.limit > 0.0 {
            let half = state.grid().dim() as f64 / 2.0;
            let norm = self.bank.spectrum(&v).besov1(half - 1.0);
            if norm > self.limit {
                return Err(Error::BlowUp {
                    t,
                    norm,
                    limit: self.limit,
                });
            }
        }
        state.v = v;
        state.e = e;
        state.t = t;
        Ok(h)
    }

    /// Steps until `t_end`, calling `observe` on the initial state and after
    /// every step.
    pub fn run<F>(&mut self, state: &mut State, mut observe: F) -> Result<()>
    where
        F: FnMut(&State, &DyadicFilterBank) -> Result<()>,
    {
        observe(state, &self.bank)?;
        let t_end = self.cfg.t_end;
        let slack = 1e-9 * self.cfg.dt;
        while state.t < t_end - slack {
            let remaining = t_end - state.t;
            if self.cfg.dt > remaining + slack {
                // shorten the final step; the multistep history does not carry over
                let mut short = self.clone();
                short.cfg.dt = remaining;
                short.prop = Self::propagator(&short.cfg, state.grid(), remaining);
                short.prev = None;
                let h = short.step(state)?;
                self.reduced_steps = short.reduced_steps;
                self.prev = None;
                if h == remaining {
                    state.t = t_end;
                }
            } else {
                self.step(state)?;
            }
            if (state.t - t_end).abs() <= slack {
                // land on t_end exactly rather than a rounding of it
                state.t = t_end;
            }
            observe(state, &self.bank)?;
        }
        Ok(())
    }
}

/// One first-order step of `state` under `cfg`.
pub fn step(state: &State, cfg: &IntegratorConfig) -> Result<State> {
    let mut it = Integrator::new(cfg, state)?;
    let mut out = state.clone();
    it.step(&mut out)?;
    Ok(out)
}

/// Runs `cfg` from `initial` and returns the final state.
pub fn integrate(initial: &State, cfg: &IntegratorConfig) -> Result<State> {
    let mut it = Integrator::new(cfg, initial)?;
    let mut s = initial.clone();
    it.run(&mut s, |_, _| Ok(()))?;
    Ok(s)
}

/// Writes `state` as a VSF1 snapshot (`v` components, then `E` row-major)
/// with a sidecar holding `t`, `dt`, the scheme and any extra entries.
pub fn save_checkpoint(
    path: &Path,
    state: &State,
    cfg: &IntegratorConfig,
    extra: &BTreeMap<String, String>,
) -> Result<()> {
    let mut comps: Vec<&SpectralField> = state.v.comps().iter().collect();
    comps.extend(state.e.comps().iter());
    save_snapshot(path, &comps)?;
    let mut side = extra.clone();
    side.insert("t".into(), format!("{:.17e}", state.t));
    side.insert("dt".into(), format!("{:.17e}", cfg.dt));
    side.insert("mu".into(), format!("{:.17e}", cfg.mu));
    side.insert("scheme".into(), format!("{:?}", cfg.scheme));
    side.insert("coupling".into(), format!("{:?}", cfg.coupling));
    write_sidecar(&path.with_extension("txt"), &side)
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> Result<State> {
    let (grid, comps) = crate::spectral::snapshot::load_snapshot(path)?;
    let n = grid.dim();
    if comps.len() != n + n * n {
        return Err(Error::Snapshot(format!(
            "expected {} components for a {n}D state, found {}",
            n + n * n,
            comps.len()
        )));
    }
    let mut comps = comps;
    let e = TensorField::from_components(comps.split_off(n))?;
    let v = VectorField::from_components(comps)?;
    let side = crate::spectral::snapshot::read_sidecar(&path.with_extension("txt"))?;
    let t = side
        .get("t")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Snapshot("sidecar lacks t".into()))?;
    State::new(v, e, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_stays_at_rest() {
        let g = Grid::new(2, 16).unwrap();
        let s = State::rest(&g);
        let cfg = IntegratorConfig {
            t_end: 0.01,
            ..Default::default()
        };
        let out = integrate(&s, &cfg).unwrap();
        assert_eq!(out.v.l2_norm(), 0.0);
        assert_eq!(out.e.l2_norm(), 0.0);
        assert!((out.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn config_rejects_nonsense() {
        let c = IntegratorConfig {
            dt: 0.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = IntegratorConfig {
            mu: -1.0,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }
}
