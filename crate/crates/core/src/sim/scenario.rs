//! Scenario files: a scene, a sensor path and named phases of scan times.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::sensor::{simulate_scan, SensorPose, SimConfig};
use crate::error::{Error, Result};
use crate::sensor::LabeledScan;
use crate::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PathMotion {
    /// Circle around `center` at `height`, advancing `step_deg` per scan and
    /// looking at the center.
    Orbit {
        center: [f64; 2],
        radius: f64,
        height: f64,
        start_deg: f64,
        step_deg: f64,
    },
    /// Straight line from `start` moving `step` per scan. The sensor looks at
    /// `look_at` when given, otherwise along `yaw_deg`.
    Line {
        start: [f64; 3],
        step: [f64; 3],
        #[serde(default)]
        yaw_deg: f64,
        #[serde(default)]
        look_at: Option<[f64; 3]>,
    },
}

impl PathMotion {
    fn pose(&self, k: u64) -> SensorPose {
        let k = k as f64;
        match self {
            PathMotion::Orbit {
                center,
                radius,
                height,
                start_deg,
                step_deg,
            } => {
                let a = (start_deg + step_deg * k).to_radians();
                let c = Vec3::new(center[0], center[1], *height);
                SensorPose::looking_at(c + Vec3::new(a.cos(), a.sin(), 0.0) * *radius, &c)
            }
            PathMotion::Line {
                start,
                step,
                yaw_deg,
                look_at,
            } => {
                let p = Vec3::from(*start) + Vec3::from(*step) * k;
                match look_at {
                    Some(t) => SensorPose::looking_at(p, &Vec3::from(*t)),
                    None => SensorPose::new(p, yaw_deg.to_radians()),
                }
            }
        }
    }
}

/// Path piece that applies from scan `from` until the next segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSegment {
    pub from: u64,
    #[serde(flatten)]
    pub motion: PathMotion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SensorPath(pub Vec<PathSegment>);

impl SensorPath {
    pub fn pose(&self, t: u64) -> SensorPose {
        let k = self.0.partition_point(|s| s.from <= t).saturating_sub(1);
        let seg = &self.0[k];
        seg.motion.pose(t.saturating_sub(seg.from))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Phase {
    pub name: String,
    pub start: u64,
    pub end: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub sim: SimConfig,
    pub scene: Scene,
    pub path: SensorPath,
    pub phases: Vec<Phase>,
}

macro_rules! builtin {
    ($($fn_name:ident => $file:literal),* $(,)?) => {
        /// Names of the scenarios shipped with the crate.
        pub const BUILTIN: &[&str] = &[$($file),*];

        impl Scenario {
            /// Loads a shipped scenario by file stem.
            pub fn builtin(name: &str) -> Result<Scenario> {
                match name {
                    $($file => Scenario::from_toml_str(
                        include_str!(concat!("../../scenarios/", $file, ".toml")),
                    ),)*
                    other => Err(Error::Input(format!(
                        "unknown scenario {other:?}; known: {}",
                        BUILTIN.join(", ")
                    ))),
                }
            }
        }

        $(
            pub fn $fn_name() -> Scenario {
                Scenario::builtin($file).expect("shipped scenario parses")
            }
        )*
    };
}

builtin! {
    scenario_vacated_vehicle => "vacated_vehicle",
    scenario_occluded_vacated => "occluded_vacated",
    scenario_parking_lot => "parking_lot",
    scenario_high_dynamics => "high_dynamics",
    scenario_low_dynamics => "low_dynamics",
    scenario_corridor => "corridor",
    scenario_dynamic_corridor => "dynamic_corridor",
}

impl Scenario {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let sc: Scenario = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    /// Loads `.json` as JSON and anything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text)
        } else {
            Self::from_toml_str(&text)
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.scene.validate()?;
        if self.path.0.is_empty() || self.path.0[0].from != 0 {
            return Err(Error::Input("sensor path must start with a segment from 0".into()));
        }
        if self.path.0.windows(2).any(|w| w[0].from >= w[1].from) {
            return Err(Error::Input("path segments must have increasing `from`".into()));
        }
        if self.phases.iter().any(|p| p.start >= p.end) {
            return Err(Error::Input("phases must be nonempty".into()));
        }
        Ok(())
    }

    pub fn phase(&self, name: &str) -> Result<Range<u64>> {
        self.phases
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.start..p.end)
            .ok_or_else(|| Error::Input(format!("scenario {} has no phase {name:?}", self.name)))
    }

    /// Scan times covered by any phase.
    pub fn duration(&self) -> u64 {
        self.phases.iter().map(|p| p.end).max().unwrap_or(0)
    }

    pub fn pose(&self, t: u64) -> SensorPose {
        self.path.pose(t)
    }

    pub fn scan(&self, t: u64) -> LabeledScan {
        simulate_scan(&self.scene, &self.pose(t), t, &self.sim)
    }
}
