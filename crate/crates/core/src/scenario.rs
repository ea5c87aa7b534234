//! Scenario files: TOML documents describing one run.
//!
//! Only `system` and `[grid]` are required. Every other section has a default,
//! and [`Scenario::to_toml`] writes the fully resolved (effective) config, so
//! parsing the echo gives back the same scenario.
//!
//! ```toml
//! system = "modified"
//! units = "normalized"
//!
//! [grid]
//! dims = [32, 32, 32]
//! h = 0.19634954084936207
//!
//! [source]
//! kind = "gaussian-cloud"
//! amplitude = 1.0
//! center = [3.0, 3.0, 3.0]
//! kappa = 2.0
//! velocity = [0.2, 0.0, 0.0]
//!
//! [ubar]
//! mode = "prescribed"
//! u0 = [0.2, 0.0, 0.0]
//!
//! [solver]
//! cfl = 0.4
//! steps = 200
//!
//! [output]
//! every = 50
//! ```

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sources::SourceSpec;
use crate::state::SolverConfig;
use crate::stepper::{ChargeMode, PrescribedUbar, System, UbarMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Si,
    /// `ε₀ = μ₀ = c = 1`.
    Normalized,
}

impl Units {
    pub fn constants(self) -> PhysicalConstants {
        match self {
            Units::Si => PhysicalConstants::si(),
            Units::Normalized => PhysicalConstants::normalized(),
        }
    }
}

impl std::str::FromStr for Units {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "si" => Ok(Units::Si),
            "normalized" => Ok(Units::Normalized),
            other => Err(Error::Config {
                path: "units".into(),
                msg: format!("expected `si` or `normalized`, got `{other}`"),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Snapshot cadence in steps; must divide the step count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub every: Option<usize>,
    #[serde(default = "default_dir")]
    pub dir: String,
}

fn default_dir() -> String {
    "out".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            every: None,
            dir: default_dir(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub system: System,
    #[serde(default)]
    pub units: Units,
    /// Overrides the constants implied by `units`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<PhysicalConstants>,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default = "zero_source")]
    pub source: SourceSpec,
    #[serde(default)]
    pub charge: ChargeMode,
    #[serde(default)]
    pub ubar: UbarMode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn zero_source() -> SourceSpec {
    SourceSpec::Zero
}

impl Scenario {
    /// A scenario with every optional section at its default.
    pub fn minimal(system: System, grid: GridSpec) -> Self {
        Self {
            system,
            units: Units::default(),
            constants: None,
            seed: 0,
            grid,
            source: SourceSpec::Zero,
            charge: ChargeMode::default(),
            ubar: UbarMode::default(),
            solver: SolverConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn constants(&self) -> PhysicalConstants {
        self.constants.unwrap_or_else(|| self.units.constants())
    }

    /// Every implicit default written out.
    pub fn effective(&self) -> Self {
        let mut s = self.clone();
        s.constants = Some(self.constants());
        s.output.every = Some(self.snapshot_every());
        s
    }

    pub fn snapshot_every(&self) -> usize {
        self.output.every.unwrap_or(self.solver.steps.max(1))
    }

    pub fn dt(&self) -> Result<f64> {
        self.solver.resolve_dt(&self.grid, &self.constants())
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.constants();
        self.dt()?;
        self.source.validate()?;
        let every = self.snapshot_every();
        if every == 0 || !self.solver.steps.is_multiple_of(every) {
            return Err(Error::Config {
                path: "output.every".into(),
                msg: format!("snapshot cadence {every} must be positive and divide solver.steps = {}", self.solver.steps),
            });
        }
        let t_end = self.dt()? * self.solver.steps as f64;
        let bound = |p: &PrescribedUbar| p.u0.norm() + p.amplitude.norm() + p.accel.norm() * t_end;
        let speeds = [
            match &self.source {
                SourceSpec::GaussianCloud(c) => c.velocity.norm(),
                SourceSpec::UniformDrift(d) => d.velocity.norm(),
                _ => 0.0,
            },
            match &self.ubar {
                UbarMode::Prescribed(p) => bound(p),
                UbarMode::Derived { fallback, .. } => bound(fallback),
            },
        ];
        for speed in speeds {
            if !(speed < k.c()) {
                return Err(Error::Superluminal { speed, c: k.c() });
            }
        }
        Ok(())
    }

    /// The effective config as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.effective()).expect("scenario serializes")
    }
}

/// Deserializes any TOML document; schema errors name the offending key path.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
        path: String::new(),
        msg: e.to_string().trim().to_string(),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        msg: e.inner().to_string().trim().to_string(),
    })
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario = parse_toml(text)?;
    scenario.validate()?;
    Ok(scenario)
}
