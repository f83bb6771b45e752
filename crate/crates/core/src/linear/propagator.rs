//! Per-mode linear propagation shared by every time stepper.
//!
//! In Fourier space the linear part of the system couples, for each
//! wavevector `k` with `n = k/|k|` and every transverse direction, the
//! velocity and the amplitude `c = Λ^{-1}∇·E` through
//!
//! ```text
//! d/dt (v, c) = [[-μ|k|², κ], [-κ, 0]] (v, c),   κ = |k| (or 0 if the
//!                                                coupling is explicit)
//! ```
//!
//! A strain coefficient `Ê` splits into its transverse `c`-part and a
//! remainder `Ê₀ = Ê + i c_T nᵀ` that the linear dynamics leave constant;
//! `Ê = Ê₀ - i c_T nᵀ` reassembles it.
//!
//! Every scheme is written as `y ← G0 y + h G1 N + h G2 (N - N_prev)`.

use nalgebra::{Matrix2, Matrix6};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::spectral::{Grid, TensorField, VectorField};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time discretization of the linear part; nonlinear terms are always explicit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Scheme {
    /// Exponential integrator with second-order Adams–Bashforth forcing.
    #[default]
    ImexEtdAb2,
    /// Crank–Nicolson on the linear part, AB2 on the rest.
    ImexCnAb2,
    /// First-order exponential Euler.
    ImexEuler,
}

/// How the linear elastic coupling `(+Λc, -Λv)` is advanced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[derive(Default)]
pub enum Coupling {
    /// Inside the exact per-mode linear propagator.
    #[default]
    Exponential,
    /// With the explicit (nonlinear) terms.
    Explicit,
    /// Dropped entirely.
    Off,
}

type M2 = [[f64; 2]; 2];

/// Update coefficients for one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub g0: M2,
    pub g1: M2,
    pub g2: M2,
}

fn to_m2(m: &Matrix2<f64>) -> M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

/// `(e^z, φ1(z), φ2(z))` for a real scalar, stable near zero.
pub(crate) fn phi_scalar(z: f64) -> (f64, f64, f64) {
    if z.abs() < 1e-3 {
        let e = z.exp();
        let p1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z.powi(4) / 120.0;
        let p2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z.powi(4) / 720.0;
        (e, p1, p2)
    } else {
        let em1 = z.exp_m1();
        (z.exp(), em1 / z, (em1 - z) / (z * z))
    }
}

impl ModeCoefficients {
    /// Coefficients for the mode matrix `[[a, κ], [-κ, 0]]` and step `h`.
    pub fn new(scheme: Scheme, h: f64, a: f64, kappa: f64) -> Self {
        let mut c = match scheme {
            Scheme::ImexEtdAb2 | Scheme::ImexEuler => Self::exponential(h, a, kappa),
            Scheme::ImexCnAb2 => Self::crank_nicolson(h, a, kappa),
        };
        if scheme == Scheme::ImexEuler {
            c.g2 = [[0.0; 2]; 2];
        }
        c
    }

    fn exponential(h: f64, a: f64, kappa: f64) -> Self {
        if kappa == 0.0 {
            let (e, p1, p2) = phi_scalar(h * a);
            return ModeCoefficients {
                g0: [[e, 0.0], [0.0, 1.0]],
                g1: [[p1, 0.0], [0.0, 1.0]],
                g2: [[p2, 0.0], [0.0, 0.5]],
            };
        }
        // exp([[Z, I, 0], [0, 0, I], [0, 0, 0]]) = [[e^Z, φ1(Z), φ2(Z)], ...]
        let mut big = Matrix6::<f64>::zeros();
        big[(0, 0)] = h * a;
        big[(0, 1)] = h * kappa;
        big[(1, 0)] = -h * kappa;
        big[(0, 2)] = 1.0;
        big[(1, 3)] = 1.0;
        big[(2, 4)] = 1.0;
        big[(3, 5)] = 1.0;
        let ex = big.exp();
        let block = |c0: usize| Matrix2::new(ex[(0, c0)], ex[(0, c0 + 1)], ex[(1, c0)], ex[(1, c0 + 1)]);
        ModeCoefficients {
            g0: to_m2(&block(0)),
            g1: to_m2(&block(2)),
            g2: to_m2(&block(4)),
        }
    }

    fn crank_nicolson(h: f64, a: f64, kappa: f64) -> Self {
        let m = Matrix2::new(a, kappa, -kappa, 0.0) * (0.5 * h);
        let id = Matrix2::identity();
        let inv = (id - m).try_inverse().expect("I - hM/2 is invertible for a <= 0");
        ModeCoefficients {
            g0: to_m2(&(inv * (id + m))),
            g1: to_m2(&inv),
            g2: to_m2(&(inv * 0.5)),
        }
    }

    /// First-order start: the history term is dropped.
    pub fn startup(&self) -> Self {
        ModeCoefficients {
            g2: [[0.0; 2]; 2],
            ..*self
        }
    }

    #[inline]
    pub fn apply(
        &self,
        y: [Complex64; 2],
        n: [Complex64; 2],
        n_prev: Option<[Complex64; 2]>,
        h: f64,
    ) -> [Complex64; 2] {
        let mut out = [ZERO; 2];
        for r in 0..2 {
            let mut acc = ZERO;
            for c in 0..2 {
                acc += y[c] * self.g0[r][c] + n[c] * (h * self.g1[r][c]);
                if let Some(p) = n_prev {
                    acc += (n[c] - p[c]) * (h * self.g2[r][c]);
                }
            }
            out[r] = acc;
        }
        out
    }

    /// Weight of the history term on a mode with no linear dynamics.
    fn neutral_g2(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::ImexEuler => 0.0,
            _ => 0.5,
        }
    }
}

/// Grid-wide table of [`ModeCoefficients`], keyed by `|k|^2`.
#[derive(Clone, Debug)]
pub struct LinearPropagator {
    grid: Grid,
    scheme: Scheme,
    coupling: Coupling,
    mu: f64,
    h: f64,
    by_k2: Vec<Option<ModeCoefficients>>,
    dealias: bool,
}

impl LinearPropagator {
    pub fn new(grid: &Grid, scheme: Scheme, coupling: Coupling, mu: f64, h: f64) -> Self {
        let mut by_k2 = vec![None; grid.max_k2() as usize + 1];
        for m in 0..grid.len() {
            let k2 = grid.k2(m) as usize;
            if k2 == 0 || by_k2[k2].is_some() {
                continue;
            }
            let kappa = match coupling {
                Coupling::Exponential => (k2 as f64).sqrt(),
                _ => 0.0,
            };
            by_k2[k2] = Some(ModeCoefficients::new(scheme, h, -mu * k2 as f64, kappa));
        }
        LinearPropagator {
            grid: grid.clone(),
            scheme,
            coupling,
            mu,
            h,
            by_k2,
            dealias: true,
        }
    }

    /// Keep modes outside the 2/3 band instead of zeroing them.
    pub fn without_dealiasing(mut self) -> Self {
        self.dealias = false;
        self
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn coefficients(&self, k2: u32) -> Option<&ModeCoefficients> {
        self.by_k2.get(k2 as usize).and_then(|c| c.as_ref())
    }

    fn active(&self, m: usize) -> Option<ModeCoefficients> {
        if self.dealias && !self.grid.in_band(m) {
            return None;
        }
        self.by_k2[self.grid.k2(m) as usize]
    }

    /// Advances a `(v, c)` pair of vector fields mode by mode; the mean and
    /// the dealiased band are zeroed. `first` selects the startup step.
    pub fn advance_pair(
        &self,
        v: &mut VectorField,
        c: &mut VectorField,
        nv: &VectorField,
        nc: &VectorField,
        prev: Option<(&VectorField, &VectorField)>,
    ) {
        let dim = self.grid.dim();
        for m in 0..self.grid.len() {
            let Some(coef) = self.active(m) else {
                for i in 0..dim {
                    v.comp_mut(i).coeffs_mut()[m] = ZERO;
                    c.comp_mut(i).coeffs_mut()[m] = ZERO;
                }
                continue;
            };
            let coef = if prev.is_some() { coef } else { coef.startup() };
            for i in 0..dim {
                let y = [v.comp(i).coeffs()[m], c.comp(i).coeffs()[m]];
                let n = [nv.comp(i).coeffs()[m], nc.comp(i).coeffs()[m]];
                let p = prev.map(|(pv, pc)| [pv.comp(i).coeffs()[m], pc.comp(i).coeffs()[m]]);
                let out = coef.apply(y, n, p, self.h);
                v.comp_mut(i).coeffs_mut()[m] = out[0];
                c.comp_mut(i).coeffs_mut()[m] = out[1];
            }
        }
    }

    /// Advances `(v, E)` with forcing `(nv, nE)`; `nv` must already be
    /// divergence-free. Means are left at zero.
    pub fn advance_strain(
        &self,
        v: &mut VectorField,
        e: &mut TensorField,
        nv: &VectorField,
        ne: &TensorField,
        prev: Option<(&VectorField, &TensorField)>,
    ) {
        let dim = self.grid.dim();
        for m in 0..self.grid.len() {
            let Some(coef) = self.active(m) else {
                for i in 0..dim {
                    v.comp_mut(i).coeffs_mut()[m] = ZERO;
                    for j in 0..dim {
                        e.comp_mut(i, j).coeffs_mut()[m] = ZERO;
                    }
                }
                continue;
            };
            let kd = self.grid.deriv_wavenumber(m);
            let kn = kd[..dim].iter().map(|x| x * x).sum::<f64>().sqrt();
            if kn == 0.0 {
                // pure Nyquist corner, reachable only without dealiasing
                for i in 0..dim {
                    v.comp_mut(i).coeffs_mut()[m] = ZERO;
                    for j in 0..dim {
                        e.comp_mut(i, j).coeffs_mut()[m] = ZERO;
                    }
                }
                continue;
            }
            let g2_neutral = if prev.is_some() {
                coef.neutral_g2(self.scheme)
            } else {
                0.0
            };
            let coef = if prev.is_some() { coef } else { coef.startup() };
            let mut nrm = [0.0; 3];
            for j in 0..dim {
                nrm[j] = kd[j] / kn;
            }

            let get_e = |t: &TensorField| -> [[Complex64; 3]; 3] {
                let mut out = [[ZERO; 3]; 3];
                for i in 0..dim {
                    for j in 0..dim {
                        out[i][j] = t.comp(i, j).coeffs()[m];
                    }
                }
                out
            };
            // c_T = P_T (i Ê n), Ê₀ = Ê + i c_T nᵀ
            let split = |t: &[[Complex64; 3]; 3]| -> ([Complex64; 3], [[Complex64; 3]; 3]) {
                let mut c = [ZERO; 3];
                for i in 0..dim {
                    for j in 0..dim {
                        c[i] += I * t[i][j] * nrm[j];
                    }
                }
                let mut dot = ZERO;
                for i in 0..dim {
                    dot += c[i] * nrm[i];
                }
                for i in 0..dim {
                    c[i] -= dot * nrm[i];
                }
                let mut rest = *t;
                for i in 0..dim {
                    for j in 0..dim {
                        rest[i][j] += I * c[i] * nrm[j];
                    }
                }
                (c, rest)
            };

            let (c, e0) = split(&get_e(e));
            let (nc, ne0) = split(&get_e(ne));
            let prev_split = prev.map(|(pv, pe)| (pv, split(&get_e(pe))));

            let mut c_new = [ZERO; 3];
            for i in 0..dim {
                let y = [v.comp(i).coeffs()[m], c[i]];
                let n = [nv.comp(i).coeffs()[m], nc[i]];
                let p = prev_split.as_ref().map(|(pv, (pc, _))| [pv.comp(i).coeffs()[m], pc[i]]);
                let out = coef.apply(y, n, p, self.h);
                v.comp_mut(i).coeffs_mut()[m] = out[0];
                c_new[i] = out[1];
            }
            for i in 0..dim {
                for j in 0..dim {
                    let mut x = e0[i][j] + ne0[i][j] * self.h;
                    if let Some((_, (_, pe0))) = prev_split.as_ref() {
                        x += (ne0[i][j] - pe0[i][j]) * (self.h * g2_neutral);
                    }
                    e.comp_mut(i, j).coeffs_mut()[m] = x - I * c_new[i] * nrm[j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_phi_functions_match_series_at_the_switch() {
        for z in [0.999e-3, -0.999e-3, 1e-5] {
            let (_, a1, a2) = phi_scalar(z);
            let em1 = z.exp_m1();
            assert!((a1 - em1 / z).abs() < 1e-14);
            assert!((a2 - (em1 - z) / (z * z)).abs() < 1e-9);
        }
        let (e, p1, p2) = phi_scalar(-2.0);
        assert!((p1 - (e - 1.0) / -2.0).abs() < 1e-15);
        assert!((p2 - (e - 1.0 + 2.0) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn augmented_exponential_reduces_to_scalar_case() {
        let a = ModeCoefficients::new(Scheme::ImexEtdAb2, 0.01, -3.0, 1e-9);
        let b = ModeCoefficients::new(Scheme::ImexEtdAb2, 0.01, -3.0, 0.0);
        for r in 0..2 {
            for c in 0..2 {
                assert!((a.g0[r][c] - b.g0[r][c]).abs() < 1e-10);
                assert!((a.g1[r][c] - b.g1[r][c]).abs() < 1e-10);
                assert!((a.g2[r][c] - b.g2[r][c]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn crank_nicolson_is_a_cayley_transform() {
        let c = ModeCoefficients::new(Scheme::ImexCnAb2, 0.1, -4.0, 2.0);
        // G0 = G1 (I + hM/2)
        let m = [[-0.2, 0.1], [-0.1, 0.0]];
        for r in 0..2 {
            for k in 0..2 {
                let mut want = 0.0;
                for j in 0..2 {
                    let rhs = if j == k { 1.0 } else { 0.0 } + m[j][k];
                    want += c.g1[r][j] * rhs;
                }
                assert!((want - c.g0[r][k]).abs() < 1e-15);
            }
        }
    }
}
