use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which dyadic norm a [`NormSpec`] selects.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NormVariant {
    /// `Ḃ^s_{2,1}`.
    Besov21,
    /// `Ḃ^s_{2,r}`.
    Besov2r,
    /// Hybrid `B̃^{s,r}_μ`.
    Hybrid,
    /// Chemin–Lerner `L̃^λ_T(Ḃ^s_{2,r})`; evaluated along trajectories only.
    CheminLerner { lambda: f64 },
}

/// Parameters of a dyadic norm. `r` and `lambda` may be `f64::INFINITY`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "one")]
    pub mu: f64,
    pub variant: NormVariant,
}

fn one() -> f64 {
    1.0
}

impl NormSpec {
    pub fn besov(s: f64) -> Self {
        NormSpec {
            s,
            r: 1.0,
            mu: 1.0,
            variant: NormVariant::Besov21,
        }
    }

    pub fn besov_r(s: f64, r: f64) -> Self {
        NormSpec {
            s,
            r,
            mu: 1.0,
            variant: NormVariant::Besov2r,
        }
    }

    pub fn hybrid(s: f64, r: f64, mu: f64) -> Self {
        NormSpec {
            s,
            r,
            mu,
            variant: NormVariant::Hybrid,
        }
    }

    pub fn chemin_lerner(s: f64, r: f64, lambda: f64) -> Self {
        NormSpec {
            s,
            r,
            mu: 1.0,
            variant: NormVariant::CheminLerner { lambda },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {}", self.mu)));
        }
        if !(self.r >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "r must lie in [1, inf], got {}",
                self.r
            )));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be finite, got {}", self.s)));
        }
        if let NormVariant::CheminLerner { lambda } = self.variant {
            if !(lambda >= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "time exponent must lie in [1, inf], got {lambda}"
                )));
            }
        }
        Ok(())
    }

    /// Besov `r` actually used (the `Besov21` variant ignores `self.r`).
    fn effective_r(&self) -> f64 {
        match self.variant {
            NormVariant::Besov21 => 1.0,
            _ => self.r,
        }
    }
}

/// `max{μ, 2^{-q}}^{1 - 2/r}`.
pub fn hybrid_weight(q: i32, r: f64, mu: f64) -> f64 {
    let base = mu.max(2f64.powi(-q));
    let exponent = if r.is_infinite() { 1.0 } else { 1.0 - 2.0 / r };
    base.powf(exponent)
}

/// `ℓ^r` norm of a nonnegative sequence; `r = ∞` is the supremum.
pub fn lr_norm<I: IntoIterator<Item = f64>>(values: I, r: f64) -> f64 {
    if r.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else if r == 1.0 {
        values.into_iter().sum()
    } else {
        values.into_iter().map(|x| x.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Per-shell `‖Δ_q f‖_{L^2}` for `q = q_min, q_min + 1, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShellSpectrum {
    q_min: i32,
    norms: Vec<f64>,
}

impl ShellSpectrum {
    pub fn new(q_min: i32, norms: Vec<f64>) -> Self {
        ShellSpectrum { q_min, norms }
    }

    pub fn q_min(&self) -> i32 {
        self.q_min
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn shells(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.norms
            .iter()
            .enumerate()
            .map(move |(i, &x)| (self.q_min + i as i32, x))
    }

    /// `‖f‖_{Ḃ^s_{2,r}}`.
    pub fn besov(&self, s: f64, r: f64) -> f64 {
        lr_norm(self.shells().map(|(q, x)| 2f64.powf(q as f64 * s) * x), r)
    }

    /// `‖f‖_{B^s} = ‖f‖_{Ḃ^s_{2,1}}`.
    pub fn besov1(&self, s: f64) -> f64 {
        self.besov(s, 1.0)
    }

    /// `Σ_q 2^{qs} max{μ, 2^{-q}}^{1-2/r} ‖Δ_q f‖_{L^2}`.
    pub fn hybrid(&self, s: f64, r: f64, mu: f64) -> f64 {
        self.shells()
            .map(|(q, x)| 2f64.powf(q as f64 * s) * hybrid_weight(q, r, mu) * x)
            .sum()
    }

    /// Evaluates a spatial norm; Chemin–Lerner specs are rejected.
    pub fn evaluate(&self, spec: &NormSpec) -> Result<f64> {
        spec.validate()?;
        match spec.variant {
            NormVariant::Besov21 | NormVariant::Besov2r => Ok(self.besov(spec.s, spec.effective_r())),
            NormVariant::Hybrid => Ok(self.hybrid(spec.s, spec.r, spec.mu)),
            NormVariant::CheminLerner { .. } => Err(Error::InvalidParameter(
                "Chemin-Lerner norms need a trajectory; use TimeNormAccumulator".into(),
            )),
        }
    }
}
