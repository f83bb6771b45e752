//! Empirical prober for the product, paraproduct and commutator estimates.
//!
//! The inequalities hold with existential constants. For random band-limited
//! samples the prober computes `LHS / RHS` without the constant and reports
//! the spread of that ratio and how its maximum moves when the grid is
//! refined. Only `p = 2` is available, which is the only case in which the
//! dual-index product law is exercised.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bank::DyadicFilterBank;
use super::bony::{paraproduct, remainder};
use super::commutator::commutator;
use crate::error::{Error, Result};
use crate::spectral::ops::{leray_project, pointwise_product, velocity_gradient};
use crate::spectral::random::random_bandlimited;
use crate::spectral::{Grid, SpectralField, TensorField, VectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// `‖uv‖_{B^s_{2,r}} ≲ ‖u‖_∞‖v‖_{B^s_{2,r}} + ‖v‖_∞‖u‖_{B^s_{2,r}}`, `s > 0`.
    ProdPositiveS,
    /// `‖uv‖_{B^{s1+s2-N/2}_{2,r}} ≲ ‖u‖_{B^{s1}_{2,r}}‖v‖_{B^{s2}_{2,∞}}`.
    ProdTwoIndex,
    /// `‖uv‖_{B^s_{2,r}} ≲ ‖u‖_{B^s_{2,r}}‖v‖_{B^{N/2}_{2,∞} ∩ L^∞}`, `|s| < N/2`.
    ProdLinfty,
    /// `‖uv‖_{B^{-N/2}_{2,∞}} ≲ ‖u‖_{B^s_{2,1}}‖v‖_{B^{-s}_{2,∞}}`.
    ProdDual,
    /// `‖T_u v‖_{B̃^{s+t-N/2,r}_μ} ≲ ‖u‖_{B̃^{s,r}_μ}‖v‖_{B^t}`.
    HybridTuv,
    /// `‖R(u,v)‖_{B̃^{s+t-N/2,r}_μ} ≲ ‖u‖_{B̃^{s,r}_μ}‖v‖_{B^t}`.
    HybridRemainder,
    /// `‖[Λ^{-1}∇·, u·]∇E‖_{B̃^{N/2,∞}_μ} ≲ ‖∇u‖_{B^{N/2}}‖E‖_{B̃^{N/2,∞}_μ}`.
    Commutator,
}

impl Law {
    pub const ALL: [Law; 7] = [
        Law::ProdPositiveS,
        Law::ProdTwoIndex,
        Law::ProdLinfty,
        Law::ProdDual,
        Law::HybridTuv,
        Law::HybridRemainder,
        Law::Commutator,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Law::ProdPositiveS => "prod_positive_s",
            Law::ProdTwoIndex => "prod_two_index",
            Law::ProdLinfty => "prod_linfty",
            Law::ProdDual => "prod_dual",
            Law::HybridTuv => "hybrid_Tuv",
            Law::HybridRemainder => "hybrid_remainder",
            Law::Commutator => "commutator",
        }
    }

    pub fn parse(name: &str) -> Option<Law> {
        Law::ALL.into_iter().find(|l| l.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probe parameters. Unset indices take the law's default (see [`ProbeConfig::for_law`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub law: Law,
    pub dim: usize,
    pub grids: Vec<usize>,
    pub samples: usize,
    pub seed: u64,
    /// Main regularity index (`s`, or `s1` for the two-index law).
    pub s: f64,
    /// Second index (`t`, or `s2`).
    pub t: f64,
    pub r: f64,
    pub mu: f64,
}

impl ProbeConfig {
    /// Defaults: critical indices `s = t = N/2`, `r = ∞` for the hybrid laws,
    /// `s1 = s2 = N/4` for the two-index law, `s = N/4` for the `L^∞` law.
    pub fn for_law(law: Law, dim: usize) -> Self {
        let half = dim as f64 / 2.0;
        let (s, t, r) = match law {
            Law::ProdPositiveS => (half, 0.0, 1.0),
            Law::ProdTwoIndex => (half / 2.0, half / 2.0, 1.0),
            Law::ProdLinfty => (half / 2.0, 0.0, 1.0),
            Law::ProdDual => (half, 0.0, 1.0),
            Law::HybridTuv | Law::HybridRemainder => (half, half, f64::INFINITY),
            Law::Commutator => (half, 0.0, f64::INFINITY),
        };
        ProbeConfig {
            law,
            dim,
            grids: vec![64, 128],
            samples: 100,
            seed: 2024,
            s,
            t,
            r,
            mu: 1.0,
        }
    }

    /// Checks the law's hypotheses on `(s, t, r)`.
    pub fn check_side_conditions(&self) -> Result<()> {
        let half = self.dim as f64 / 2.0;
        let fail = |condition: String| {
            Err(Error::SideCondition {
                law: self.law.name().into(),
                condition,
            })
        };
        if !(self.mu > 0.0) || !(self.r >= 1.0) {
            return fail(format!("mu > 0 and r in [1, inf] (got mu={}, r={})", self.mu, self.r));
        }
        if self.samples == 0 || self.grids.is_empty() {
            return fail("at least one sample and one grid".into());
        }
        match self.law {
            Law::ProdPositiveS if !(self.s > 0.0) => fail(format!("s > 0 (got s={})", self.s)),
            Law::ProdTwoIndex if !(self.s < half && self.t < half && self.s + self.t > 0.0) => fail(format!(
                "s1, s2 < N/p and s1 + s2 > 0 (got s1={}, s2={}, N/p={half})",
                self.s, self.t
            )),
            Law::ProdLinfty if !(self.s.abs() < half) => fail(format!("|s| < N/p (got s={}, N/p={half})", self.s)),
            Law::ProdDual if !(self.s > -half && self.s <= half) => {
                fail(format!("s in (-N/p, N/p] with p >= 2 (got s={}, N/p={half})", self.s))
            }
            Law::HybridTuv => {
                let cap = (1.0 - 2.0 / self.r + half).min(half);
                if self.s <= cap {
                    Ok(())
                } else {
                    fail(format!("s <= min(1 - 2/r + N/2, N/2) = {cap} (got s={})", self.s))
                }
            }
            Law::HybridRemainder => {
                let floor = (1.0 - 2.0 / self.r).max(0.0);
                if self.s + self.t > floor {
                    Ok(())
                } else {
                    fail(format!(
                        "s + t > max(0, 1 - 2/r) = {floor} (got s+t={})",
                        self.s + self.t
                    ))
                }
            }
            _ => Ok(()),
        }
    }
}

/// Ratio statistics at one resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LawReport {
    pub points_per_axis: usize,
    pub samples: usize,
    pub max: f64,
    pub median: f64,
    pub p95: f64,
    pub all_finite: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub config: ProbeConfig,
    pub per_grid: Vec<LawReport>,
}

impl ProbeReport {
    /// Largest over smallest per-grid maximum; 1 when only one grid was run.
    pub fn stability(&self) -> f64 {
        let maxes: Vec<f64> = self.per_grid.iter().map(|r| r.max).collect();
        let hi = maxes.iter().cloned().fold(0.0, f64::max);
        let lo = maxes.iter().cloned().fold(f64::INFINITY, f64::min);
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn all_finite(&self) -> bool {
        self.per_grid.iter().all(|r| r.all_finite)
    }
}

impl fmt::Display for ProbeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.config;
        let grids: Vec<String> = self.per_grid.iter().map(|r| r.points_per_axis.to_string()).collect();
        write!(
            f,
            "law={} dim={} s={} t={} r={} mu={} samples={} seed={} grids={}",
            c.law,
            c.dim,
            c.s,
            c.t,
            c.r,
            c.mu,
            c.samples,
            c.seed,
            grids.join(",")
        )?;
        for r in &self.per_grid {
            write!(
                f,
                " | n={} max={:.6e} median={:.6e} p95={:.6e} finite={}",
                r.points_per_axis, r.max, r.median, r.p95, r.all_finite
            )?;
        }
        write!(f, " | stability={:.4}", self.stability())
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn linf(f: &SpectralField) -> f64 {
    f.to_real().iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Sampler {
    grid: Grid,
    rng: ChaCha8Rng,
}

impl Sampler {
    fn scalar(&mut self) -> SpectralField {
        let top = self.grid.points_per_axis() as f64 / 6.0;
        let a = top.ln() * self.rng.random::<f64>();
        let b = top.ln() * self.rng.random::<f64>();
        let (lo, hi) = if a < b { (a.exp(), b.exp()) } else { (b.exp(), a.exp()) };
        let hi = hi.max(lo + 1.0);
        let slope = self.rng.random_range(0.0..3.0);
        random_bandlimited(&self.grid, &mut self.rng, lo, hi, slope).expect("band contains lattice points")
    }

    fn vector(&mut self) -> VectorField {
        let comps = (0..self.grid.dim()).map(|_| self.scalar()).collect();
        leray_project(&VectorField::from_components(comps).expect("same grid"))
    }

    fn tensor(&mut self) -> TensorField {
        let n = self.grid.dim();
        TensorField::from_components((0..n * n).map(|_| self.scalar()).collect()).expect("same grid")
    }
}

fn sample_ratio(cfg: &ProbeConfig, bank: &DyadicFilterBank, sampler: &mut Sampler) -> f64 {
    let half = cfg.dim as f64 / 2.0;
    let (s, t, r, mu) = (cfg.s, cfg.t, cfg.r, cfg.mu);
    match cfg.law {
        Law::Commutator => {
            let u = sampler.vector();
            let e = sampler.tensor();
            let c = commutator(&u, &e).expect("same grid");
            let num = bank.spectrum(&c).hybrid(half, f64::INFINITY, mu);
            let den =
                bank.spectrum(&velocity_gradient(&u)).besov1(half) * bank.spectrum(&e).hybrid(half, f64::INFINITY, mu);
            ratio(num, den)
        }
        law => {
            let u = sampler.scalar();
            let v = sampler.scalar();
            let su = bank.spectrum(&u);
            let sv = bank.spectrum(&v);
            match law {
                Law::ProdPositiveS => {
                    let uv = pointwise_product(&u, &v).expect("same grid");
                    let num = bank.spectrum(&uv).besov(s, r);
                    ratio(num, linf(&u) * sv.besov(s, r) + linf(&v) * su.besov(s, r))
                }
                Law::ProdTwoIndex => {
                    let uv = pointwise_product(&u, &v).expect("same grid");
                    let num = bank.spectrum(&uv).besov(s + t - half, r);
                    ratio(num, su.besov(s, r) * sv.besov(t, f64::INFINITY))
                }
                Law::ProdLinfty => {
                    let uv = pointwise_product(&u, &v).expect("same grid");
                    let num = bank.spectrum(&uv).besov(s, r);
                    ratio(num, su.besov(s, r) * (sv.besov(half, f64::INFINITY) + linf(&v)))
                }
                Law::ProdDual => {
                    let uv = pointwise_product(&u, &v).expect("same grid");
                    let num = bank.spectrum(&uv).besov(-half, f64::INFINITY);
                    ratio(num, su.besov1(s) * sv.besov(-s, f64::INFINITY))
                }
                Law::HybridTuv => {
                    let tuv = paraproduct(bank, &u, &v).expect("same grid");
                    let num = bank.spectrum(&tuv).hybrid(s + t - half, r, mu);
                    ratio(num, su.hybrid(s, r, mu) * sv.besov1(t))
                }
                Law::HybridRemainder => {
                    let ruv = remainder(bank, &u, &v).expect("same grid");
                    let num = bank.spectrum(&ruv).hybrid(s + t - half, r, mu);
                    ratio(num, su.hybrid(s, r, mu) * sv.besov1(t))
                }
                Law::Commutator => unreachable!(),
            }
        }
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Runs the probe on every configured grid.
pub fn inequality_prober(cfg: &ProbeConfig) -> Result<ProbeReport> {
    cfg.check_side_conditions()?;
    let mut per_grid = Vec::with_capacity(cfg.grids.len());
    for &n in &cfg.grids {
        let grid = Grid::new(cfg.dim, n)?;
        let bank = DyadicFilterBank::new(&grid);
        let ratios: Vec<f64> = (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(i as u64);
                let mut sampler = Sampler {
                    grid: grid.clone(),
                    rng,
                };
                sample_ratio(cfg, &bank, &mut sampler)
            })
            .collect();
        let all_finite = ratios.iter().all(|x| x.is_finite());
        let mut sorted = ratios.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        per_grid.push(LawReport {
            points_per_axis: n,
            samples: cfg.samples,
            max: *sorted.last().unwrap_or(&0.0),
            median: quantile(&sorted, 0.5),
            p95: quantile(&sorted, 0.95),
            all_finite,
        });
    }
    Ok(ProbeReport {
        config: cfg.clone(),
        per_grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_conditions_are_named() {
        let mut cfg = ProbeConfig::for_law(Law::ProdTwoIndex, 2);
        cfg.s = 1.5;
        let err = cfg.check_side_conditions().unwrap_err().to_string();
        assert!(err.contains("s1, s2 < N/p"), "{err}");
        let mut cfg = ProbeConfig::for_law(Law::HybridTuv, 2);
        cfg.s = 1.5;
        assert!(cfg.check_side_conditions().is_err());
        for law in Law::ALL {
            ProbeConfig::for_law(law, 2).check_side_conditions().unwrap();
            ProbeConfig::for_law(law, 3).check_side_conditions().unwrap();
            assert_eq!(Law::parse(law.name()), Some(law));
        }
    }

    #[test]
    fn zero_numerator_gives_zero_ratio() {
        assert_eq!(ratio(0.0, 0.0), 0.0);
    }
}
