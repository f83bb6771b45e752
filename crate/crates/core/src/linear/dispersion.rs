use std::fmt::Write as _;

use num_complex::Complex64;

use super::propagator::{ModeCoefficients, Scheme};

/// The 2×2 matrix `[[-μ|ξ|², |ξ|], [-|ξ|, 0]]` acting on a transverse
/// `(v̂, ĉ)` pair of the free mixed system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixedModeMatrix {
    pub xi_abs: f64,
    pub mu: f64,
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [Complex64; 2],
}

impl MixedModeMatrix {
    pub fn new(mu: f64, xi_abs: f64) -> Self {
        let b = mu * xi_abs * xi_abs;
        let c = xi_abs * xi_abs;
        MixedModeMatrix {
            xi_abs,
            mu,
            matrix: [[-b, xi_abs], [-xi_abs, 0.0]],
            eigenvalues: quadratic_roots(b, c),
        }
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    pub fn determinant(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }

    /// `|λ² + μ|ξ|²λ + |ξ|²|`, scaled by the largest of the three terms.
    pub fn characteristic_residual(&self, lambda: Complex64) -> f64 {
        let b = self.mu * self.xi_abs * self.xi_abs;
        let c = self.xi_abs * self.xi_abs;
        let t0 = lambda * lambda;
        let t1 = lambda * b;
        let scale = t0.norm().max(t1.norm()).max(c);
        (t0 + t1 + c).norm() / scale
    }

    /// `exp(t M)` in closed form.
    ///
    /// With `s = tr M / 2` and `δ² = s² - det M`:
    /// `exp(tM) = e^{st} [cosh(δt) I + sinh(δt)/δ (M - s I)]`.
    pub fn exp(&self, t: f64) -> [[f64; 2]; 2] {
        let s = 0.5 * self.trace();
        let d2 = s * s - self.determinant();
        let (ch, sh_over) = if d2 > 0.0 {
            let d = d2.sqrt();
            // e^{st}cosh(δt) and e^{st}sinh(δt)/δ without overflow
            let up = ((s + d) * t).exp();
            let down = ((s - d) * t).exp();
            (0.5 * (up + down), 0.5 * (up - down) / d)
        } else if d2 < 0.0 {
            let w = (-d2).sqrt();
            let e = (s * t).exp();
            (e * (w * t).cos(), e * (w * t).sin() / w)
        } else {
            let e = (s * t).exp();
            (e, e * t)
        };
        let m = &self.matrix;
        [
            [ch + sh_over * (m[0][0] - s), sh_over * m[0][1]],
            [sh_over * m[1][0], ch + sh_over * (m[1][1] - s)],
        ]
    }
}

/// Roots of `λ² + bλ + c = 0` for `b, c >= 0`, avoiding cancellation.
fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let big = -0.5 * (b + disc.sqrt());
        if big == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        [Complex64::new(big, 0.0), Complex64::new(c / big, 0.0)]
    } else {
        let w = 0.5 * (-disc).sqrt();
        [Complex64::new(-0.5 * b, w), Complex64::new(-0.5 * b, -w)]
    }
}

/// Runs the production mode update for the free mixed system and returns the
/// state at `t_end` (rounded to a whole number of steps).
pub fn evolve_mode(scheme: Scheme, mu: f64, xi_abs: f64, y0: [f64; 2], dt: f64, t_end: f64) -> [f64; 2] {
    let coef = ModeCoefficients::new(scheme, dt, -mu * xi_abs * xi_abs, xi_abs);
    let steps = (t_end / dt).round() as usize;
    let zero = [Complex64::new(0.0, 0.0); 2];
    let mut y = [Complex64::new(y0[0], 0.0), Complex64::new(y0[1], 0.0)];
    for n in 0..steps {
        let prev = if n == 0 { None } else { Some(zero) };
        y = coef.apply(y, zero, prev, dt);
    }
    [y[0].re, y[1].re]
}

/// One row of the dispersion table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersionRecord {
    pub mu: f64,
    pub xi_abs: f64,
    pub lambda: [Complex64; 2],
}

pub fn dispersion_table(mus: &[f64], xis: &[f64]) -> Vec<DispersionRecord> {
    let mut out = Vec::with_capacity(mus.len() * xis.len());
    for &mu in mus {
        for &xi in xis {
            let m = MixedModeMatrix::new(mu, xi);
            out.push(DispersionRecord {
                mu,
                xi_abs: xi,
                lambda: m.eigenvalues,
            });
        }
    }
    out
}

/// Text export: one `mu xi Re λ1 Im λ1 Re λ2 Im λ2` record per line.
pub fn format_dispersion_table(rows: &[DispersionRecord]) -> String {
    let mut s = String::from("# mu xi_abs re_lambda1 im_lambda1 re_lambda2 im_lambda2\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:.16e} {:.16e} {:.16e} {:.16e} {:.16e} {:.16e}",
            r.mu, r.xi_abs, r.lambda[0].re, r.lambda[0].im, r.lambda[1].re, r.lambda[1].im
        );
    }
    s
}

/// `n` points log-spaced on `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_of_the_matrix() {
        let m = MixedModeMatrix::new(0.7, 3.0);
        assert!((m.trace() + 0.7 * 9.0).abs() < 1e-15);
        assert!((m.determinant() - 9.0).abs() < 1e-15);
        let e0 = m.exp(0.0);
        assert_eq!(e0, [[1.0, 0.0], [0.0, 1.0]]);
    }

    #[test]
    fn unit_case_roots() {
        let m = MixedModeMatrix::new(1.0, 1.0);
        let w = 3f64.sqrt() / 2.0;
        assert!((m.eigenvalues[0] - Complex64::new(-0.5, w)).norm() < 1e-15);
        assert!((m.eigenvalues[1] - Complex64::new(-0.5, -w)).norm() < 1e-15);
    }
}
