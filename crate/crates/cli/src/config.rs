//! Run configuration: a JSON file, overridden by environment variables
//! (paths only) and then by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use windfarm_core::data::{CsvSchema, ForecastConfig};
use windfarm_core::forecast::{check_bits, QuantSpec, TrainConfig};
use windfarm_core::routing::fixture::{reference_scenario, Scenario};
use windfarm_core::routing::PlannerConfig;
use windfarm_core::wind::{CpModel, TurbineModel, TurbineSpec};
use windfarm_core::Vec2;

pub const ENV_DATA: &str = "WINDFARM_DATA";
pub const ENV_SCENARIO: &str = "WINDFARM_SCENARIO";
pub const ENV_OUTPUT: &str = "WINDFARM_OUT";
pub const ENV_MODEL: &str = "WINDFARM_MODEL";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// 5-minute wind CSV.
    pub data: Option<PathBuf>,
    /// Fleet, turbines, assignment and wind; the built-in layout if absent.
    pub scenario: Option<PathBuf>,
    /// Report directory.
    pub output: Option<PathBuf>,
    /// Directory for saved forecast models; `<output>/models` if absent.
    pub model: Option<PathBuf>,
}

/// Operating point shared by every turbine.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineConfig {
    pub cp_model: CpModel,
    pub tip_speed_ratio: f64,
}

impl Default for TurbineConfig {
    fn default() -> Self {
        Self { cp_model: CpModel::default(), tip_speed_ratio: 8.1 }
    }
}

impl TurbineConfig {
    pub fn model(&self, spec: TurbineSpec) -> TurbineModel {
        TurbineModel::new(spec, self.cp_model, self.tip_speed_ratio)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct YawConfig {
    /// Hour of the held-out span reported in the single-hour table.
    pub hour: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateConfig {
    /// Hours of the held-out span to roll through; all of it if absent.
    pub hours: Option<usize>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { hours: Some(24) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub seed: u64,
    /// Weight bit width of the deployed 5-minute forecaster; 32 is float.
    pub bits: u8,
    pub csv_schema: CsvSchema,
    pub forecast: ForecastConfig,
    pub training: TrainConfig,
    pub turbine: TurbineConfig,
    pub planner: PlannerConfig,
    pub yaw: YawConfig,
    pub simulate: SimulateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            seed: 42,
            bits: 4,
            csv_schema: CsvSchema::default(),
            forecast: ForecastConfig::default(),
            training: TrainConfig::default(),
            turbine: TurbineConfig::default(),
            planner: PlannerConfig::default(),
            yaw: YawConfig::default(),
            simulate: SimulateConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub bits: Option<u8>,
    pub data: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

fn resolve(base: Option<&Path>, p: PathBuf) -> PathBuf {
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

impl RunConfig {
    /// Reads the file (relative paths inside it resolve against its
    /// directory), then applies environment and flag overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                let mut cfg: RunConfig =
                    serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?;
                let dir = p.parent().filter(|d| !d.as_os_str().is_empty());
                let paths = &mut cfg.paths;
                for slot in [&mut paths.data, &mut paths.scenario, &mut paths.output, &mut paths.model] {
                    *slot = slot.take().map(|v| resolve(dir, v));
                }
                cfg
            }
            None => RunConfig::default(),
        };
        for (var, slot) in [
            (ENV_DATA, &mut cfg.paths.data),
            (ENV_SCENARIO, &mut cfg.paths.scenario),
            (ENV_OUTPUT, &mut cfg.paths.output),
            (ENV_MODEL, &mut cfg.paths.model),
        ] {
            if let Some(v) = std::env::var_os(var).filter(|v| !v.is_empty()) {
                *slot = Some(PathBuf::from(v));
            }
        }
        if let Some(s) = overrides.seed {
            cfg.seed = s;
        }
        if let Some(b) = overrides.bits {
            cfg.bits = b;
        }
        if let Some(d) = &overrides.data {
            cfg.paths.data = Some(d.clone());
        }
        if let Some(o) = &overrides.output {
            cfg.paths.output = Some(o.clone());
        }
        cfg.training.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits != 32 {
            check_bits(self.bits)?;
        }
        self.forecast.validate()?;
        self.training.validate()?;
        if !self.turbine.tip_speed_ratio.is_finite() || self.turbine.tip_speed_ratio <= 0.0 {
            bail!("tip_speed_ratio must be positive");
        }
        if let Some(p) = &self.paths.scenario {
            if !p.is_file() {
                bail!("scenario file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    /// Quantization applied to the deployed forecaster, `None` for float.
    pub fn quant(&self) -> Option<QuantSpec> {
        (self.bits != 32).then(|| QuantSpec::uniform(self.bits))
    }

    pub fn data_path(&self) -> Result<&Path> {
        let p = self.paths.data.as_deref().context("no data file given (use --data, the config, or WINDFARM_DATA)")?;
        if !p.is_file() {
            bail!("data file {} does not exist", p.display());
        }
        Ok(p)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.paths.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn model_dir(&self) -> PathBuf {
        self.paths.model.clone().unwrap_or_else(|| self.output_dir().join("models"))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let scenario = match &self.paths.scenario {
            Some(p) => Scenario::load(p).with_context(|| format!("loading scenario {}", p.display()))?,
            None => reference_scenario(),
        };
        for u in &scenario.uavs {
            u.validate()?;
        }
        for t in &scenario.turbines {
            t.validate()?;
        }
        scenario.assignment.validate(&scenario.uavs, &scenario.turbines)?;
        Ok(scenario)
    }

    /// Turbine used for the single-turbine yaw study.
    pub fn yaw_turbine(&self) -> TurbineModel {
        self.turbine.model(TurbineSpec::sg_8_0_167("T1", Vec2::ZERO))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sead": 1}"#).is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"paths": {"data": "wind.csv"}, "bits": 8}"#).unwrap();
        let cfg = RunConfig::load(Some(&path), &Overrides { seed: Some(7), ..Overrides::default() }).unwrap();
        if std::env::var_os(ENV_DATA).is_none() {
            assert_eq!(cfg.paths.data.unwrap(), dir.path().join("wind.csv"));
        }
        assert_eq!((cfg.seed, cfg.training.seed, cfg.bits), (7, 7, 8));
    }

    #[test]
    fn bad_bit_width_is_rejected() {
        let o = Overrides { bits: Some(3), ..Overrides::default() };
        assert!(RunConfig::load(None, &o).is_err());
    }
}
