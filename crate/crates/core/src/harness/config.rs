//! Scenario configuration files.
//!
//! A configuration is a TOML document with one section per concern. File
//! paths inside it are resolved against the directory of the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::quadrature::Order;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Burgers,
    Bfe,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Name used in output file names.
    pub scenario: String,
    pub order: u8,
    #[serde(default = "yes")]
    pub well_balanced: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub x_a: f64,
    pub x_b: f64,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_final: f64,
    /// Defaults to 0.9 for Burgers and 0.8 for the blood-flow model.
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default = "default_dt_max")]
    pub dt_max: f64,
}

fn default_dt_max() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `e^x + amplitude · exp(−sharpness (x − center)²)`.
    ExpBump { amplitude: f64, sharpness: f64, center: f64 },
    /// Zero flow and uniform pressure.
    UniformPressure { mmhg: f64 },
    /// Discrete stationary solution compatible with the boundary data.
    Steady,
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BcSpec {
    Dirichlet { value: f64 },
    Transparent,
    Reflective,
    Pressure { mmhg: f64 },
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BcSection {
    pub left: BcSpec,
    pub right: BcSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TubeLawKind {
    Power,
    Recruitment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Constant,
    /// Linear from 1.1× to 0.9× of the given value.
    Taper,
}

/// Wall data in CGS units.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VesselSection {
    pub tube_law: TubeLawKind,
    pub profile: ProfileKind,
    pub a0: f64,
    pub h0: f64,
    pub ee: f64,
    pub ec: f64,
    #[serde(default)]
    pub pr: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Exponent of the axial velocity profile; sets the friction coefficient.
    #[serde(default = "default_velocity_profile")]
    pub velocity_profile: f64,
}

fn default_velocity_profile() -> f64 {
    2.0
}

fn default_rho() -> f64 {
    crate::bfe::profile::DEFAULT_RHO
}

fn default_mu() -> f64 {
    crate::bfe::profile::DEFAULT_MU
}

fn default_epsilon() -> f64 {
    crate::bfe::profile::DEFAULT_EPSILON
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GravitySpec {
    Constant { value: f64 },
    /// `|g| (e^{−x} − e^{−L})`.
    Smooth {
        #[serde(default = "default_modulus")]
        modulus: f64,
    },
    /// Two-column CSV file (`x,value`).
    Polyline { file: PathBuf },
    /// Built-in 12-segment polyline.
    Synthetic,
}

fn default_modulus() -> f64 {
    crate::bfe::profile::G_MODULUS
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    /// Snapshot times; the final time is always written.
    #[serde(default)]
    pub snapshots: Vec<f64>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_out(), snapshots: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ReferenceSpec {
    /// Quadrature average of the exact stationary solution.
    #[default]
    Analytic,
    /// Same scenario on a mesh `factor` times finer than the finest run.
    Fine {
        #[serde(default = "default_factor")]
        factor: usize,
    },
}

fn default_factor() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub initial: InitialCondition,
    pub bc: BcSection,
    #[serde(default)]
    pub vessel: Option<VesselSection>,
    #[serde(default)]
    pub gravity: Option<GravitySpec>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub reference: ReferenceSpec,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Built-in scenarios: `burgers-steady`, `s1`, `s2`, `s3`.
    pub fn preset(name: &str) -> Result<Self> {
        let text = match name {
            "burgers-steady" => BURGERS,
            "s1" => S1,
            "s2" => S2,
            "s3" => {
                let mut cfg = Self::from_toml(S3, Path::new("."))?;
                cfg.gravity = Some(GravitySpec::Synthetic);
                return Ok(cfg);
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown scenario {other:?} (expected burgers-steady, s1, s2 or s3)"
                )))
            }
        };
        Self::from_toml(text, Path::new("."))
    }

    pub fn order(&self) -> Result<Order> {
        Order::try_from(self.model.order)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid.x_a, self.grid.x_b, self.grid.cells)
    }

    pub fn cfl(&self) -> f64 {
        self.time.cfl.unwrap_or(match self.model.kind {
            ModelKind::Burgers => 0.9,
            ModelKind::Bfe => 0.8,
        })
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.order()?;
        self.grid()?;
        if self.model.scenario.is_empty() || self.model.scenario.contains(['/', '\\']) {
            return bad(format!("invalid scenario name {:?}", self.model.scenario));
        }
        let t = self.time.t_final;
        if !(t >= 0.0 && t.is_finite()) {
            return bad(format!("t_final must be non-negative, got {t}"));
        }
        let cfl = self.cfl();
        if !(cfl > 0.0 && cfl <= 1.0) {
            return bad(format!("CFL must lie in (0, 1], got {cfl}"));
        }
        if !(self.time.dt_max > 0.0 && self.time.dt_max.is_finite()) {
            return bad(format!("dt_max must be positive, got {}", self.time.dt_max));
        }
        if let Some(s) = self.output.snapshots.iter().find(|&&s| !(s >= 0.0 && s <= t)) {
            return bad(format!("snapshot time {s} outside [0, {t}]"));
        }
        if let ReferenceSpec::Fine { factor } = self.reference {
            if factor < 2 {
                return bad(format!("fine reference factor must be at least 2, got {factor}"));
            }
        }
        match self.model.kind {
            ModelKind::Burgers => {
                if self.vessel.is_some() || self.gravity.is_some() {
                    return bad("[vessel] and [gravity] only apply to the bfe model".into());
                }
                for side in [&self.bc.left, &self.bc.right] {
                    if matches!(side, BcSpec::Reflective | BcSpec::Pressure { .. }) {
                        return bad(format!("boundary {side:?} is not available for burgers"));
                    }
                }
                if matches!(self.initial, InitialCondition::UniformPressure { .. }) {
                    return bad("uniform-pressure initial data needs the bfe model".into());
                }
                if matches!(self.initial, InitialCondition::Steady) && !matches!(self.bc.left, BcSpec::Dirichlet { .. }) {
                    return bad("steady burgers data needs a dirichlet left boundary".into());
                }
            }
            ModelKind::Bfe => {
                if self.vessel.is_none() {
                    return bad("the bfe model needs a [vessel] section".into());
                }
                if self.grid.x_a != 0.0 {
                    return bad(format!("vessel coordinates start at 0, got x_a = {}", self.grid.x_a));
                }
                for side in [&self.bc.left, &self.bc.right] {
                    if matches!(side, BcSpec::Dirichlet { .. }) {
                        return bad("dirichlet boundaries are only available for burgers".into());
                    }
                }
                if matches!(self.initial, InitialCondition::ExpBump { .. }) {
                    return bad("exp-bump initial data needs the burgers model".into());
                }
                if matches!(self.initial, InitialCondition::Steady) && !matches!(self.bc.right, BcSpec::Pressure { .. }) {
                    return bad("steady bfe data needs a pressure right boundary".into());
                }
            }
        }
        Ok(())
    }
}

const BURGERS: &str = include_str!("../../fixtures/burgers.toml");
const S1: &str = include_str!("../../fixtures/s1.toml");
const S2: &str = include_str!("../../fixtures/s2.toml");
const S3: &str = include_str!("../../fixtures/s3.toml");

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
    }

    #[test]
    fn presets_parse() {
        for name in ["burgers-steady", "s1", "s2", "s3"] {
            let cfg = ScenarioConfig::preset(name).unwrap();
            assert_eq!(cfg.model.scenario, name);
        }
        assert!(ScenarioConfig::preset("s4").is_err());
    }

    #[test]
    fn burgers_preset_matches_the_experiment() {
        let cfg = ScenarioConfig::preset("burgers-steady").unwrap();
        assert_eq!((cfg.grid.x_a, cfg.grid.x_b, cfg.grid.cells), (-1.0, 1.0, 50));
        assert_eq!(cfg.time.t_final, 40.0);
        assert_eq!(cfg.cfl(), 0.9);
        assert_eq!(cfg.bc.left, BcSpec::Dirichlet { value: (-1.0f64).exp() });
        assert_eq!(cfg.bc.right, BcSpec::Transparent);
    }

    #[test]
    fn fixture_files_load() {
        for name in ["burgers.toml", "s1.toml", "s2.toml", "s3.toml"] {
            let cfg = ScenarioConfig::load(&fixture(name)).unwrap();
            assert_eq!(cfg.base_dir, fixture(""));
        }
        let s3 = ScenarioConfig::load(&fixture("s3.toml")).unwrap();
        let Some(GravitySpec::Polyline { file }) = &s3.gravity else { panic!("{:?}", s3.gravity) };
        assert!(s3.resolve(file).exists());
    }

    #[test]
    fn rejects_invalid_settings() {
        let base = ScenarioConfig::preset("s1").unwrap();
        let mut c = base.clone();
        c.grid.cells = 3;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.time.cfl = Some(1.2);
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.time.t_final = -1.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.model.order = 4;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.bc.left = BcSpec::Dirichlet { value: 1.0 };
        assert!(c.validate().is_err());
        let mut c = base;
        c.vessel = None;
        assert!(c.validate().is_err());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let text = S1.replace("[grid]", "[grid]\nspacing = 2.0");
        assert!(matches!(ScenarioConfig::from_toml(&text, Path::new(".")), Err(Error::Config(_))));
    }
}
