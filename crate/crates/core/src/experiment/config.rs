use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::DataSpec;
use crate::dyadic::{NormSpec, NormVariant};
use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::spectral::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Decay,
    Dispersion,
    Probe,
    Contraction,
    Uniqueness,
    Constraints,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::Probe => "probe",
            ExperimentKind::Contraction => "contraction",
            ExperimentKind::Uniqueness => "uniqueness",
            ExperimentKind::Constraints => "constraints",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { dim: 2, n: 64 }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(self.dim, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecaySettings {
    /// Also run at half the amplitude and compare sup-in-time norms.
    pub halving_check: bool,
}

impl Default for DecaySettings {
    fn default() -> Self {
        DecaySettings { halving_check: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DispersionSettings {
    pub mus: Vec<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
    pub xi_count: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Also evolve lattice modes of a 2D field of this size (0 = skip).
    pub field_n: usize,
}

impl Default for DispersionSettings {
    fn default() -> Self {
        DispersionSettings {
            mus: vec![0.5, 1.0, 2.0],
            xi_min: 0.25,
            xi_max: 32.0,
            xi_count: 25,
            dt: 1e-4,
            t_end: 1.0,
            field_n: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    /// Law names; empty means all.
    pub laws: Vec<String>,
    pub grids: Vec<usize>,
    pub samples: usize,
    /// Random pairs for the decomposition exactness check.
    pub decomposition_samples: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            laws: Vec::new(),
            grids: vec![64, 128],
            samples: 100,
            decomposition_samples: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UniquenessSettings {
    pub scales: Vec<f64>,
    pub direction_seed: u64,
}

impl Default for UniquenessSettings {
    fn default() -> Self {
        UniquenessSettings {
            scales: vec![1e-6, 1e-8],
            direction_seed: 11,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSettings {
    /// Random admissible states for the formulation consistency check.
    pub consistency_samples: usize,
    /// Grid of the consistency check.
    pub consistency_n: usize,
}

impl Default for ConstraintSettings {
    fn default() -> Self {
        ConstraintSettings {
            consistency_samples: 100,
            consistency_n: 32,
        }
    }
}

/// Everything one run needs; read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub grid: GridSpec,
    pub integrator: IntegratorConfig,
    pub data: DataSpec,
    pub output: PathBuf,
    /// Extra norms logged along the trajectory.
    pub norms: Vec<NormSpec>,
    /// Steps between time-series rows.
    pub cadence: usize,
    /// Steps between state snapshots (0 = none).
    pub snapshot_cadence: usize,
    pub decay: DecaySettings,
    pub dispersion: DispersionSettings,
    pub probe: ProbeSettings,
    pub uniqueness: UniquenessSettings,
    pub constraints: ConstraintSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Decay,
            grid: GridSpec::default(),
            integrator: IntegratorConfig::default(),
            data: DataSpec::default(),
            output: PathBuf::from("out"),
            norms: Vec::new(),
            cadence: 10,
            snapshot_cadence: 0,
            decay: DecaySettings::default(),
            dispersion: DispersionSettings::default(),
            probe: ProbeSettings::default(),
            uniqueness: UniquenessSettings::default(),
            constraints: ConstraintSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Defaults for `kind`, matching the reference runs.
    pub fn preset(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            experiment: kind,
            ..Default::default()
        };
        match kind {
            ExperimentKind::Decay => {
                c.grid.n = 128;
                c.integrator.dt = 1e-2;
                c.integrator.t_end = 20.0;
            }
            ExperimentKind::Constraints => {
                c.grid.n = 128;
                c.integrator.dt = 1e-3;
                c.integrator.t_end = 1.0;
                c.cadence = 50;
            }
            ExperimentKind::Contraction => {
                c.integrator.dt = 1e-3;
                c.integrator.t_end = 0.1;
                c.integrator.picard = Some(Default::default());
            }
            ExperimentKind::Uniqueness => {
                c.integrator.dt = 1e-3;
                c.integrator.t_end = 0.5;
            }
            ExperimentKind::Dispersion | ExperimentKind::Probe => {}
        }
        c
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let c: ExperimentConfig = toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid.build()?;
        self.integrator.validate()?;
        self.data.validate(&grid)?;
        if self.cadence == 0 {
            return Err(Error::InvalidParameter("cadence must be >= 1".into()));
        }
        for n in &self.norms {
            n.validate()?;
            if let NormVariant::CheminLerner { .. } = n.variant {
                continue;
            }
            // every shell weight must be finite on this grid
            let q_min = crate::dyadic::DyadicFilterBank::new(&grid).q_min();
            if !(2f64.powf(n.s * q_min as f64)).is_finite() {
                return Err(Error::InvalidParameter(format!("norm {n:?} overflows on {grid}")));
            }
        }
        Ok(())
    }
}
