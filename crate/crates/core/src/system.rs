//! Right-hand sides of the viscoelastic system in the `(v, E)` and `(v, c)`
//! formulations, pressure recovery, constraint monitors and energy.
//!
//! Pressure never appears explicitly: the momentum forcing is Leray-projected.
//! The identity part of `F = I + E` is never stored.

use crate::dyadic::commutator;
use crate::error::{Error, Result};
use crate::spectral::ops::{
    divergence, from_physical_dealiased, laplacian, leray_project, partial_derivative, riesz, row_divergence,
    velocity_gradient,
};
use crate::spectral::{det_i_plus_e, Grid, SpectralField, TensorField, VectorField};

const GAUGE_TOL: f64 = 1e-12;

/// Velocity and strain at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub v: VectorField,
    pub e: TensorField,
    pub t: f64,
}

impl State {
    pub fn new(v: VectorField, e: TensorField, t: f64) -> Result<Self> {
        v.comp(0).check_same_grid(e.comp(0, 0))?;
        Ok(State { v, e, t })
    }

    pub fn rest(grid: &Grid) -> Self {
        State {
            v: VectorField::zeros(grid),
            e: TensorField::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.v.grid()
    }

    /// `‖∇·v‖ / ‖v‖` (0 for the zero field).
    pub fn divergence_ratio(&self) -> f64 {
        let d = divergence(&self.v).l2_norm();
        let n = self.v.l2_norm();
        if n == 0.0 {
            d
        } else {
            d / n
        }
    }

    /// Checks the solenoidal and mean-zero invariants of `v`.
    pub fn check_invariants(&self) -> Result<()> {
        let r = self.divergence_ratio();
        if r > 1e-10 {
            return Err(Error::NotSolenoidal { residual: r });
        }
        let scale = self.v.l2_norm().max(f64::MIN_POSITIVE);
        for c in self.v.comps() {
            if c.mean().norm() > GAUGE_TOL * scale {
                return Err(Error::InvalidParameter(format!(
                    "velocity mean {:e} is not zero",
                    c.mean().norm()
                )));
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite() && self.e.is_finite() && self.t.is_finite()
    }
}

/// Real-space samples needed by the quadratic terms.
struct Samples {
    n: usize,
    v: Vec<Vec<f64>>,
    /// `grad_v[i*n + j] = ∂_j v_i`
    grad_v: Vec<Vec<f64>>,
    e: Vec<Vec<f64>>,
    /// `grad_e[(i*n + j)*n + k] = ∂_k E_ij`
    grad_e: Vec<Vec<f64>>,
}

impl Samples {
    fn new(v: &VectorField, e: &TensorField) -> Self {
        let n = v.dim();
        let mut grad_e = Vec::with_capacity(n * n * n);
        for c in e.comps() {
            for k in 0..n {
                grad_e.push(partial_derivative(c, k).expect("axis in range").to_real());
            }
        }
        Samples {
            n,
            v: v.to_real(),
            grad_v: velocity_gradient(v).to_real(),
            e: e.to_real(),
            grad_e,
        }
    }

    /// `-v·∇v_i + E_jk ∂_j E_ik`.
    fn momentum(&self, i: usize) -> Vec<f64> {
        let n = self.n;
        let len = self.v[0].len();
        let mut out = vec![0.0; len];
        for k in 0..n {
            for ((o, a), b) in out.iter_mut().zip(&self.v[k]).zip(&self.grad_v[i * n + k]) {
                *o -= a * b;
            }
        }
        for j in 0..n {
            for k in 0..n {
                let ejk = &self.e[j * n + k];
                let d = &self.grad_e[(i * n + k) * n + j];
                for ((o, a), b) in out.iter_mut().zip(ejk).zip(d) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `-v·∇E_ij + ∂_k v_i E_kj`.
    fn strain(&self, i: usize, j: usize) -> Vec<f64> {
        let n = self.n;
        let len = self.v[0].len();
        let mut out = vec![0.0; len];
        for k in 0..n {
            let d = &self.grad_e[(i * n + j) * n + k];
            for ((o, a), b) in out.iter_mut().zip(&self.v[k]).zip(d) {
                *o -= a * b;
            }
            let g = &self.grad_v[i * n + k];
            let ekj = &self.e[k * n + j];
            for ((o, a), b) in out.iter_mut().zip(g).zip(ekj) {
                *o += a * b;
            }
        }
        out
    }
}

fn transform(grid: &Grid, samples: &[f64], dealias: bool) -> SpectralField {
    if dealias {
        from_physical_dealiased(grid, samples)
    } else {
        SpectralField::from_real(grid, samples).expect("sample count matches grid")
    }
}

/// Explicit terms of the `(v, E)` system.
///
/// `nv = P[-v·∇v + E_jk∂_jE_ik (+ ∂_jE_ij)]` and
/// `nE = -v·∇E + ∇v E (+ ∇v)`; the bracketed linear coupling is included
/// when `with_coupling` is set. Quadratic terms are dealiased when `dealias`.
pub fn explicit_terms(
    v: &VectorField,
    e: &TensorField,
    with_coupling: bool,
    dealias: bool,
) -> (VectorField, TensorField) {
    let grid = v.grid().clone();
    let n = grid.dim();
    let s = Samples::new(v, e);
    let mut mom = VectorField::from_components((0..n).map(|i| transform(&grid, &s.momentum(i), dealias)).collect())
        .expect("same grid");
    let mut strain = TensorField::zeros(&grid);
    for i in 0..n {
        for j in 0..n {
            *strain.comp_mut(i, j) = transform(&grid, &s.strain(i, j), dealias);
        }
    }
    if with_coupling {
        mom.axpy(1.0, &row_divergence(e));
        strain.axpy(1.0, &velocity_gradient(v));
    }
    (leray_project(&mom), strain)
}

/// Unprojected momentum forcing `-v·∇v + E_jk∂_jE_ik + ∂_jE_ij`.
fn momentum_forcing(state: &State) -> VectorField {
    let grid = state.grid().clone();
    let n = grid.dim();
    let s = Samples::new(&state.v, &state.e);
    let mut mom =
        VectorField::from_components((0..n).map(|i| from_physical_dealiased(&grid, &s.momentum(i))).collect())
            .expect("same grid");
    mom.axpy(1.0, &row_divergence(&state.e));
    mom
}

fn viscous(v: &VectorField, mu: f64) -> VectorField {
    VectorField::from_components(v.comps().iter().map(|c| laplacian(c).scaled(mu)).collect()).expect("same grid")
}

/// Full right-hand side of the `(v, E)` system:
/// `dv = P[-v·∇v + E_jk∂_jE_ik + ∂_jE_ij] + μΔv`, `dE = -v·∇E + ∇vE + ∇v`.
pub fn rhs_ve(state: &State, mu: f64) -> (VectorField, TensorField) {
    let (mut dv, de) = explicit_terms(&state.v, &state.e, true, true);
    dv.axpy(1.0, &viscous(&state.v, mu));
    (dv, de)
}

/// Mean-zero pressure with `∇p = (I - P)` of the momentum forcing.
pub fn pressure_recover(state: &State) -> SpectralField {
    let f = momentum_forcing(state);
    let div = divergence(&f);
    let grid = div.grid().clone();
    let mut p = div.map_modes(|m| {
        let k2 = grid.k2(m);
        if k2 == 0 {
            num_complex::Complex64::new(0.0, 0.0)
        } else {
            num_complex::Complex64::new(-1.0 / k2 as f64, 0.0)
        }
    });
    p.zero_mean();
    p
}

/// Residual `F - P F - ∇p` of the pressure reassembly, relative to `‖F‖`.
pub fn pressure_reassembly_residual(state: &State) -> f64 {
    let f = momentum_forcing(state);
    let pf = leray_project(&f);
    let p = pressure_recover(state);
    let mut r = f.clone();
    r.axpy(-1.0, &pf);
    for j in 0..r.dim() {
        let d = partial_derivative(&p, j).expect("axis in range");
        r.comp_mut(j).axpy(-1.0, &d);
    }
    let scale = f.l2_norm();
    if scale == 0.0 {
        r.l2_norm()
    } else {
        r.l2_norm() / scale
    }
}

fn check_gauge(e: &TensorField) -> Result<()> {
    let scale = e.l2_norm().max(f64::MIN_POSITIVE);
    let n = e.dim();
    for i in 0..n {
        for j in 0..n {
            let mean = e.comp(i, j).mean().norm();
            if mean > GAUGE_TOL * scale {
                return Err(Error::StrainGauge { row: i, col: j, mean });
            }
        }
    }
    Ok(())
}

/// Row-wise `Λ^{-1}∇·` of a tensor: `out_i = Σ_j Λ^{-1}∂_j T_ij`.
pub fn riesz_row_divergence(t: &TensorField) -> VectorField {
    let n = t.dim();
    let comps = (0..n)
        .map(|i| {
            let mut acc = riesz(t.comp(i, 0), 0).expect("axis in range");
            for j in 1..n {
                acc.axpy(1.0, &riesz(t.comp(i, j), j).expect("axis in range"));
            }
            acc
        })
        .collect();
    VectorField::from_components(comps).expect("same grid")
}

/// `c = Λ^{-1}∇·E`, row-wise. Requires the mean-zero gauge on `E`.
pub fn to_c(e: &TensorField) -> Result<VectorField> {
    check_gauge(e)?;
    Ok(riesz_row_divergence(e))
}

fn lambda_vec(v: &VectorField) -> VectorField {
    let grid = v.grid().clone();
    VectorField::from_components(
        v.comps()
            .iter()
            .map(|c| c.map_modes(|m| num_complex::Complex64::new(grid.k_abs(m), 0.0)))
            .collect(),
    )
    .expect("same grid")
}

/// Right-hand side of the `(v, c)` formulation:
///
/// `dc = -v·∇c - [Λ^{-1}∇·, v·]∇E + Λ^{-1}∇·(∇vE) - Λv`,
/// `dv = P[-v·∇v + E_jk∂_jE_ik + Λc] + μΔv`.
pub fn rhs_vc(v: &VectorField, c: &VectorField, e: &TensorField, mu: f64) -> Result<(VectorField, VectorField)> {
    check_gauge(e)?;
    let grid = v.grid().clone();
    let n = grid.dim();
    let s = Samples::new(v, e);

    let mut mom =
        VectorField::from_components((0..n).map(|i| from_physical_dealiased(&grid, &s.momentum(i))).collect())?;
    mom.axpy(1.0, &lambda_vec(c));
    let mut dv = leray_project(&mom);
    dv.axpy(1.0, &viscous(v, mu));

    let vr = &s.v;
    let mut adv = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = vec![0.0; grid.len()];
        for k in 0..n {
            let d = partial_derivative(c.comp(i), k)?.to_real();
            for ((o, a), b) in acc.iter_mut().zip(&vr[k]).zip(&d) {
                *o -= a * b;
            }
        }
        adv.push(from_physical_dealiased(&grid, &acc));
    }
    let mut dc = VectorField::from_components(adv)?;
    dc.axpy(-1.0, &commutator(v, e)?);

    let mut stretch = TensorField::zeros(&grid);
    for i in 0..n {
        for j in 0..n {
            let mut acc = vec![0.0; grid.len()];
            for k in 0..n {
                for ((o, a), b) in acc.iter_mut().zip(&s.grad_v[i * n + k]).zip(&s.e[k * n + j]) {
                    *o += a * b;
                }
            }
            *stretch.comp_mut(i, j) = from_physical_dealiased(&grid, &acc);
        }
    }
    dc.axpy(1.0, &riesz_row_divergence(&stretch));
    dc.axpy(-1.0, &lambda_vec(v));
    Ok((dv, dc))
}

/// The three constraint monitors.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ConstraintResiduals {
    /// `max_x |det(I + E) - 1|`
    pub det_drift: f64,
    /// `‖∇·Eᵀ‖_{L²}`
    pub div_et: f64,
    /// `L²` norm over `(i, j, m)` of `∂_m E_ij - ∂_j E_im - ∂_l(E_lj E_im - E_lm E_ij)`
    pub curl_compat: f64,
}

impl ConstraintResiduals {
    pub fn max_ratio(&self, tol: &ConstraintResiduals) -> f64 {
        (self.det_drift / tol.det_drift)
            .max(self.div_et / tol.div_et)
            .max(self.curl_compat / tol.curl_compat)
    }

    pub fn within(&self, tol: &ConstraintResiduals) -> bool {
        self.det_drift <= tol.det_drift && self.div_et <= tol.div_et && self.curl_compat <= tol.curl_compat
    }
}

/// Constraint residuals of a strain field.
pub fn strain_residuals(e: &TensorField) -> ConstraintResiduals {
    let grid = e.grid().clone();
    let n = e.dim();
    let det_drift = det_i_plus_e(e).iter().fold(0.0f64, |m, d| m.max((d - 1.0).abs()));
    let div_et = crate::spectral::column_divergence(e).l2_norm();

    let er = e.to_real();
    let prod = |a: usize, b: usize| -> Vec<f64> { er[a].iter().zip(&er[b]).map(|(x, y)| x * y).collect() };
    // antisymmetric in (j, m): evaluate j < m and count twice
    let mut energy = 0.0;
    for i in 0..n {
        for j in 0..n {
            for m in (j + 1)..n {
                let mut r = partial_derivative(e.comp(i, j), m).expect("axis in range");
                r.axpy(-1.0, &partial_derivative(e.comp(i, m), j).expect("axis in range"));
                for l in 0..n {
                    let mut q: Vec<f64> = prod(l * n + j, i * n + m);
                    for (x, y) in q.iter_mut().zip(prod(l * n + m, i * n + j)) {
                        *x -= y;
                    }
                    let q = from_physical_dealiased(&grid, &q);
                    r.axpy(-1.0, &partial_derivative(&q, l).expect("axis in range"));
                }
                energy += 2.0 * r.l2_norm().powi(2);
            }
        }
    }
    ConstraintResiduals {
        det_drift,
        div_et,
        curl_compat: energy.sqrt(),
    }
}

pub fn constraint_residuals(state: &State) -> ConstraintResiduals {
    strain_residuals(&state.e)
}

/// `½‖v‖² + ½‖E‖²` with the box-averaged `L²` norm.
pub fn elastic_energy(state: &State) -> f64 {
    0.5 * state.v.l2_norm().powi(2) + 0.5 * state.e.l2_norm().powi(2)
}

/// `μ‖∇v‖²`, the viscous dissipation rate.
pub fn dissipation_rate(v: &VectorField, mu: f64) -> f64 {
    mu * velocity_gradient(v).l2_norm().powi(2)
}
