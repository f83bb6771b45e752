//! Littlewood–Paley blocks and the dyadic norm calculus at `p = 2`.
//!
//! The homogeneous norms ignore the mean (the homogeneous-space gauge), and
//! shells outside `[q_min, q_max]` of the bank are identically zero.

mod bank;
mod bony;
mod commutator;
pub mod probe;
pub mod profile;
mod spectrum;
mod time_norm;

pub use bank::{DyadicFilterBank, Q_MIN};
pub use bony::{bony_decomposition, paraproduct, remainder};
pub use commutator::commutator;
pub use probe::{inequality_prober, Law, LawReport, ProbeConfig, ProbeReport};
pub use spectrum::{hybrid_weight, lr_norm, NormSpec, NormVariant, ShellSpectrum};
pub use time_norm::{accumulate_time_norm, TimeNormAccumulator};

use crate::error::{Error, Result};
use crate::spectral::{Components, SpectralField};

/// `Δ_q f`; zero outside the bank's shell range.
pub fn dyadic_block(bank: &DyadicFilterBank, f: &SpectralField, q: i32) -> SpectralField {
    bank.block(f, q)
}

/// `S_q f`, including the mean.
pub fn low_freq_cutoff(bank: &DyadicFilterBank, f: &SpectralField, q: i32) -> SpectralField {
    bank.low_pass(f, q)
}

/// `Ḃ^s_{2,r}` norm; accepts the two Besov variants.
pub fn besov_norm<C: Components + ?Sized>(bank: &DyadicFilterBank, f: &C, spec: &NormSpec) -> Result<f64> {
    match spec.variant {
        NormVariant::Besov21 | NormVariant::Besov2r => bank.spectrum(f).evaluate(spec),
        _ => Err(Error::InvalidParameter(format!(
            "besov_norm needs a Besov spec, got {:?}",
            spec.variant
        ))),
    }
}

/// Hybrid `B̃^{s,r}_μ` norm.
pub fn hybrid_norm<C: Components + ?Sized>(bank: &DyadicFilterBank, f: &C, spec: &NormSpec) -> Result<f64> {
    match spec.variant {
        NormVariant::Hybrid => bank.spectrum(f).evaluate(spec),
        _ => Err(Error::InvalidParameter(format!(
            "hybrid_norm needs a hybrid spec, got {:?}",
            spec.variant
        ))),
    }
}
