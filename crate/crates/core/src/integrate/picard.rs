//! Iterative construction of approximate solutions on a whole interval.
//!
//! With `v̄ = e^{μtΔ}v0` and `u = v - v̄`, iterate `n → n+1` solves, with
//! `w = uⁿ + v̄` frozen,
//!
//! ```text
//! E_t + w·∇E = ∇w Eⁿ + ∇w
//! u_t + w·∇u - μΔu + ∇p = -w·∇v̄ + E_jk ∂_j E_ik + ∂_j E_ij     (E = Eⁿ⁺¹)
//! ```
//!
//! Each linear problem is discretized with the step size and multistep
//! scheme of the direct integrator, so a converged iteration reproduces the
//! direct run with explicit elastic coupling.

use super::IntegratorConfig;
use crate::dyadic::DyadicFilterBank;
use crate::error::{Error, Result};
use crate::linear::{heat_flow, Coupling, LinearPropagator};
use crate::spectral::ops::{from_physical_dealiased, leray_project, partial_derivative, velocity_gradient};
use crate::spectral::{Grid, SpectralField, TensorField, VectorField};
use crate::system::State;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct PicardDiagnostics {
    /// `d_n = sup_t‖u^{n+1}-uⁿ‖_{B^{N/2-1}} + sup_t‖E^{n+1}-Eⁿ‖_{B^{N/2}}`, from `n = 0`.
    pub differences: Vec<f64>,
    /// `d_{n+1}/d_n`, one entry per consecutive pair.
    pub ratios: Vec<f64>,
    pub converged: bool,
    /// `d_n` grew three times in a row, or an iterate overflowed.
    pub diverged: bool,
    pub iterations: usize,
}

impl PicardDiagnostics {
    /// Largest ratio `d_{n+1}/d_n` over `n >= from`.
    pub fn max_ratio_from(&self, from: usize) -> f64 {
        self.ratios.iter().skip(from).fold(0.0f64, |m, r| m.max(*r))
    }
}

#[derive(Clone, Debug)]
pub struct PicardRun {
    /// States at `t_m = m·dt`, `m = 0..=M`, of the last iterate.
    pub trajectory: Vec<State>,
    pub diagnostics: PicardDiagnostics,
}

type Iterate = Vec<(VectorField, TensorField)>;

fn derivatives(f: &SpectralField, dim: usize) -> Vec<Vec<f64>> {
    (0..dim)
        .map(|k| partial_derivative(f, k).expect("axis in range").to_real())
        .collect()
}

fn transform(grid: &Grid, samples: &[f64], dealias: bool) -> SpectralField {
    if dealias {
        from_physical_dealiased(grid, samples)
    } else {
        SpectralField::from_real(grid, samples).expect("sample count matches grid")
    }
}

/// Explicit terms of both linear problems at one time level; `u_old` is the
/// frozen carrier part, `u` and `e_new` the unknowns being advanced.
fn forcing(
    u_old: &VectorField,
    u: &VectorField,
    e_new: &TensorField,
    e_old: &TensorField,
    vbar: &VectorField,
    dealias: bool,
) -> (VectorField, TensorField) {
    let grid = u.grid().clone();
    let n = grid.dim();
    let len = grid.len();
    let mut w = u_old.clone();
    w.axpy(1.0, vbar);
    let wr = w.to_real();
    let grad_w = velocity_gradient(&w);
    let grad_w_r = grad_w.to_real();
    let e_new_r = e_new.to_real();
    let e_old_r = e_old.to_real();
    // d_e[(i*n + j)*n + k] = ∂_k E_ij (new iterate)
    let d_e: Vec<Vec<f64>> = e_new.comps().iter().flat_map(|c| derivatives(c, n)).collect();

    let mut ne = TensorField::zeros(&grid);
    for i in 0..n {
        for j in 0..n {
            let mut acc = vec![0.0; len];
            for k in 0..n {
                let d = &d_e[(i * n + j) * n + k];
                for p in 0..len {
                    acc[p] += grad_w_r[i * n + k][p] * e_old_r[k * n + j][p] - wr[k][p] * d[p];
                }
            }
            *ne.comp_mut(i, j) = transform(&grid, &acc, dealias);
        }
    }
    ne.axpy(1.0, &grad_w);

    let mut nu = VectorField::zeros(&grid);
    for i in 0..n {
        let mut acc = vec![0.0; len];
        let du = derivatives(u.comp(i), n);
        let dvb = derivatives(vbar.comp(i), n);
        for k in 0..n {
            for p in 0..len {
                acc[p] -= wr[k][p] * (du[k][p] + dvb[k][p]);
            }
        }
        for j in 0..n {
            for k in 0..n {
                let d = &d_e[(i * n + k) * n + j];
                let ejk = &e_new_r[j * n + k];
                for p in 0..len {
                    acc[p] += ejk[p] * d[p];
                }
            }
        }
        let mut f = transform(&grid, &acc, dealias);
        for j in 0..n {
            f.axpy(1.0, &partial_derivative(e_new.comp(i, j), j).expect("axis in range"));
        }
        *nu.comp_mut(i) = f;
    }
    (leray_project(&nu), ne)
}

fn sweep(
    prop: &LinearPropagator,
    previous: &Iterate,
    vbar: &[VectorField],
    e0: &TensorField,
    dealias: bool,
    dt: f64,
) -> Result<Iterate> {
    let grid = e0.grid().clone();
    let mut out: Iterate = Vec::with_capacity(previous.len());
    let mut u = VectorField::zeros(&grid);
    let mut e = e0.clone();
    out.push((u.clone(), e.clone()));
    let mut hist: Option<(VectorField, TensorField)> = None;
    for m in 0..previous.len() - 1 {
        let (u_old, e_old) = &previous[m];
        let (nu, ne) = forcing(u_old, &u, &e, e_old, &vbar[m], dealias);
        prop.advance_strain(&mut u, &mut e, &nu, &ne, hist.as_ref().map(|(a, b)| (a, b)));
        hist = Some((nu, ne));
        u.zero_mean();
        e.zero_mean();
        u = leray_project(&u);
        if !u.is_finite() || !e.is_finite() {
            return Err(Error::NonFinite {
                t: (m + 1) as f64 * dt,
                last_good_t: m as f64 * dt,
            });
        }
        out.push((u.clone(), e.clone()));
    }
    Ok(out)
}

/// Runs the iteration over `[0, cfg.t_end]` from `data`.
pub fn picard_solve(data: &State, cfg: &IntegratorConfig) -> Result<PicardRun> {
    cfg.validate()?;
    let pc = cfg.picard.unwrap_or_default();
    let grid = data.grid().clone();
    let bank = DyadicFilterBank::new(&grid);
    let half = grid.dim() as f64 / 2.0;
    let steps = cfg.steps();
    let dt = cfg.dt;

    let mut v0 = data.v.clone();
    v0.zero_mean();
    let mut e0 = data.e.clone();
    e0.zero_mean();
    let mut vbar = Vec::with_capacity(steps + 1);
    vbar.push(v0.clone());
    for m in 0..steps {
        let next = heat_flow(&vbar[m], cfg.mu, dt)?;
        vbar.push(next);
    }

    let mut prop = LinearPropagator::new(&grid, cfg.scheme, Coupling::Off, cfg.mu, dt);
    if !cfg.dealias {
        prop = prop.without_dealiasing();
    }

    let mut current: Iterate = vec![(VectorField::zeros(&grid), e0.clone()); steps + 1];
    let mut diag = PicardDiagnostics::default();
    let mut rising = 0;
    for _ in 0..pc.max_iters {
        // an overflowing iterate counts as divergence; keep the last finite one
        let next = match sweep(&prop, &current, &vbar, &e0, cfg.dealias, dt) {
            Err(Error::NonFinite { .. }) => {
                diag.diverged = true;
                break;
            }
            other => other?,
        };
        let mut du = 0.0f64;
        let mut de = 0.0f64;
        let mut size_v = 0.0f64;
        let mut size_e = 0.0f64;
        for (m, ((un, en), (uo, eo))) in next.iter().zip(&current).enumerate() {
            du = du.max(bank.spectrum(&un.sub(uo)?).besov1(half - 1.0));
            de = de.max(bank.spectrum(&en.sub(eo)?).besov1(half));
            let mut v = un.clone();
            v.axpy(1.0, &vbar[m]);
            size_v = size_v.max(bank.spectrum(&v).besov1(half - 1.0));
            size_e = size_e.max(bank.spectrum(en).besov1(half));
        }
        let d = du + de;
        if let Some(&last) = diag.differences.last() {
            diag.ratios.push(if last > 0.0 { d / last } else { 0.0 });
            rising = if d > last { rising + 1 } else { 0 };
        }
        diag.differences.push(d);
        diag.iterations += 1;
        current = next;
        if d <= pc.contraction_tol * (size_v + size_e) {
            diag.converged = true;
            break;
        }
        if rising >= 3 {
            diag.diverged = true;
            break;
        }
    }

    let trajectory = current
        .into_iter()
        .zip(vbar)
        .enumerate()
        .map(|(m, ((mut u, e), vb))| {
            u.axpy(1.0, &vb);
            State {
                v: u,
                e,
                t: m as f64 * dt,
            }
        })
        .collect();
    Ok(PicardRun {
        trajectory,
        diagnostics: diag,
    })
}
