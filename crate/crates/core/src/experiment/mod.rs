//! Batch experiments: configuration, runs, time series and reports.

pub mod checks;
mod config;
mod log;
mod report;
mod runs;

pub use config::{
    ConstraintSettings, DecaySettings, DispersionSettings, ExperimentConfig, ExperimentKind, GridSpec, ProbeSettings,
    UniquenessSettings,
};
pub use log::{LogRow, TimeSeriesLog, COLUMNS};
pub use report::{Report, Verdict};
pub use runs::{
    decay_trajectory, dispersion_field_error, dispersion_mode_error, run_constraint_suite, run_contraction,
    run_decay_experiment, run_dispersion_validation, run_experiment, run_probe, run_uniqueness, DecayOutcome,
    PROPAGATION_TOLERANCE,
};
