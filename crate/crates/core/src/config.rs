//! Top-level configuration, loadable from TOML or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterConfig;
use crate::error::{Error, Result};
use crate::grid::MapConfig;
use crate::io::Calibration;
use crate::localization::LocalizationConfig;
use crate::occupancy::OccupancyConfig;
use crate::sensor::SensorConfig;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub map: MapConfig,
    pub sensor: SensorConfig,
    pub occupancy: OccupancyConfig,
    pub clustering: ClusterConfig,
    pub localization: LocalizationConfig,
    /// Sensor-to-pose transform applied to dataset scans.
    pub calibration: Calibration,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.map.validate()?;
        self.sensor.validate()?;
        self.occupancy.validate()?;
        self.clustering.validate()?;
        self.localization.validate()?;
        self.calibration.to_isometry().map(|_| ())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a `.json` file as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = Config::default();
        assert_eq!(c.sensor.eta, 0.2);
        assert_eq!(c.sensor.p_th, 0.5);
        assert_eq!(c.map.voxel_size, 0.6);
        assert_eq!(c.map.extents, [200.0, 200.0, 20.0]);
        assert_eq!(c.localization.n_particles, 5000);
        c.validate().unwrap();
    }

    #[test]
    fn toml_and_json_round_trip() {
        let mut c = Config::default();
        c.sensor.eta = 0.5;
        c.clustering.connectivity = 6;
        assert_eq!(Config::from_toml_str(&c.to_toml_string()).unwrap(), c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(Config::from_json_str(&json).unwrap(), c);
    }

    #[test]
    fn partial_and_invalid() {
        let c = Config::from_toml_str("[sensor]\neta = 0.5\n").unwrap();
        assert_eq!(c.sensor.eta, 0.5);
        assert_eq!(c.sensor.p_th, 0.5);
        assert!(Config::from_toml_str("[sensor]\neta = 0.7\n").is_err());
        assert!(Config::from_toml_str("[sensor]\netta = 0.2\n").is_err());
        assert!(Config::from_toml_str("[clustering]\nconnectivity = 8\n").is_err());
    }
}
