use thiserror::Error;

/// Errors raised by field algebra, norms, solvers and generators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unsupported grid: dim={dim}, points_per_axis={points} (need dim 2 or 3, power of two >= 16)")]
    InvalidGrid { dim: usize, points: usize },

    #[error(
        "grid shape mismatch: expected {expected} samples for a {dim}-d grid of {points} points per axis, got {got}"
    )]
    SizeMismatch {
        dim: usize,
        points: usize,
        expected: usize,
        got: usize,
    },

    #[error("fields live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("axis {axis} out of range for a {dim}-d grid")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error(
        "negative power Lambda^{s} needs a mean-zero field (mean-zero gauge), but the k=0 coefficient is {mean:e}"
    )]
    NonzeroMean { s: f64, mean: f64 },

    #[error("strain field has nonzero mean in component ({row},{col}) = {mean:e}; the (v,c) form requires the mean-zero gauge")]
    StrainGauge { row: usize, col: usize, mean: f64 },

    #[error("velocity field is not solenoidal: |div v| = {residual:e} relative")]
    NotSolenoidal { residual: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("side condition violated for {law}: {condition}")]
    SideCondition { law: String, condition: String },

    #[error("regularity index {rho} outside the admissible range ({lo}, {hi}]")]
    IndexOutOfRange { rho: f64, lo: f64, hi: f64 },

    #[error("empty frequency band [{lo}, {hi}] on this grid")]
    EmptyBand { lo: f64, hi: f64 },

    #[error(
        "warm-up strain violates constraints: det_drift={det_drift:e}, div_ET={div_et:e}, curl_compat={curl_compat:e}"
    )]
    WarmupResiduals {
        det_drift: f64,
        div_et: f64,
        curl_compat: f64,
    },

    #[error("non-finite state at t={t}; last good snapshot at t={last_good_t}")]
    NonFinite { t: f64, last_good_t: f64 },

    #[error("blow-up guard tripped at t={t}: critical velocity norm {norm:e} exceeds {limit:e}")]
    BlowUp { t: f64, norm: f64, limit: f64 },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
