//! Pseudospectral solver and dyadic norm toolkit for the incompressible
//! Hookean viscoelastic system on the periodic box `[0, 2π)^N`, `N = 2, 3`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod data;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod integrate;
pub mod linear;
pub mod spectral;
pub mod system;

pub use data::{DataKind, DataSpec};
pub use dyadic::{DyadicFilterBank, NormSpec, NormVariant, ShellSpectrum, TimeNormAccumulator};
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, ExperimentKind, Report, TimeSeriesLog, Verdict};
pub use integrate::{Integrator, IntegratorConfig, PicardConfig};
pub use linear::{Coupling, LinearPropagator, Scheme};
pub use spectral::{Grid, SpectralField, TensorField, VectorField};
pub use system::{ConstraintResiduals, State};
