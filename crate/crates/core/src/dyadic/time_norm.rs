use super::bank::DyadicFilterBank;
use super::spectrum::{hybrid_weight, lr_norm, NormSpec, NormVariant};
use crate::error::{Error, Result};
use crate::spectral::Components;

/// Running per-shell time integral (or supremum) for a Chemin–Lerner norm
/// `L̃^λ_T(Ḃ^s_{2,r})`, optionally with hybrid weights.
///
/// Integrals use the left-endpoint rule: `accumulate(f(t_n), dt)` adds
/// `dt · ‖Δ_q f(t_n)‖^λ` to every shell.
#[derive(Clone, Debug)]
pub struct TimeNormAccumulator {
    q_min: i32,
    s: f64,
    r: f64,
    lambda: f64,
    /// Spatial weight per shell, excluding `2^{qs}`.
    weights: Vec<f64>,
    per_shell: Vec<f64>,
    elapsed: f64,
    steps: usize,
}

impl TimeNormAccumulator {
    pub fn new(bank: &DyadicFilterBank, s: f64, r: f64, lambda: f64) -> Self {
        Self::build(bank, s, r, lambda, vec![1.0; bank.shell_count()])
    }

    /// Time norm of the hybrid space `B̃^{s,r}_μ` taken per shell.
    pub fn hybrid(bank: &DyadicFilterBank, s: f64, r: f64, mu: f64, lambda: f64) -> Self {
        let weights = bank.shells().map(|q| hybrid_weight(q, r, mu)).collect();
        let mut acc = Self::build(bank, s, 1.0, lambda, weights);
        acc.r = 1.0;
        acc
    }

    pub fn from_spec(bank: &DyadicFilterBank, spec: &NormSpec) -> Result<Self> {
        spec.validate()?;
        match spec.variant {
            NormVariant::CheminLerner { lambda } => Ok(Self::new(bank, spec.s, spec.r, lambda)),
            _ => Err(Error::InvalidParameter(
                "time accumulator needs a Chemin-Lerner spec".into(),
            )),
        }
    }

    fn build(bank: &DyadicFilterBank, s: f64, r: f64, lambda: f64, weights: Vec<f64>) -> Self {
        TimeNormAccumulator {
            q_min: bank.q_min(),
            s,
            r,
            lambda,
            weights,
            per_shell: vec![0.0; bank.shell_count()],
            elapsed: 0.0,
            steps: 0,
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn accumulate<C: Components + ?Sized>(&mut self, bank: &DyadicFilterBank, f: &C, dt: f64) -> Result<()> {
        let sp = bank.spectrum(f);
        self.accumulate_shells(sp.norms(), dt)
    }

    /// Adds one step from precomputed per-shell `L^2` norms.
    pub fn accumulate_shells(&mut self, shells: &[f64], dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        for (acc, &x) in self.per_shell.iter_mut().zip(shells) {
            if self.lambda.is_infinite() {
                *acc = acc.max(x);
            } else {
                *acc += dt * x.powf(self.lambda);
            }
        }
        self.elapsed += dt;
        self.steps += 1;
        Ok(())
    }

    /// `ℓ^r_q( 2^{qs} w_q (∫ ‖Δ_q f‖^λ dt)^{1/λ} )`.
    pub fn value(&self) -> f64 {
        let inv = if self.lambda.is_infinite() {
            1.0
        } else {
            1.0 / self.lambda
        };
        lr_norm(
            self.per_shell
                .iter()
                .zip(&self.weights)
                .enumerate()
                .map(|(i, (&a, &w))| {
                    let q = self.q_min + i as i32;
                    let t = if self.lambda.is_infinite() { a } else { a.powf(inv) };
                    2f64.powf(q as f64 * self.s) * w * t
                }),
            self.r,
        )
    }
}

/// Pure form of [`TimeNormAccumulator::accumulate`].
pub fn accumulate_time_norm<C: Components + ?Sized>(
    mut acc: TimeNormAccumulator,
    bank: &DyadicFilterBank,
    f: &C,
    dt: f64,
) -> Result<TimeNormAccumulator> {
    acc.accumulate(bank, f, dt)?;
    Ok(acc)
}
