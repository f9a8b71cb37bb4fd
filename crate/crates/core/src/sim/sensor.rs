use nalgebra::Isometry3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::scene::Scene;
use crate::error::{Error, Result};
use crate::sensor::{LabeledPoint, LabeledScan};
use crate::Vec3;

/// A forward-looking range sensor with a regular azimuth × elevation ray
/// pattern.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub rays_horizontal: usize,
    pub rays_vertical: usize,
    /// Horizontal field of view centered on the sensor yaw (degrees).
    pub fov_horizontal_deg: f64,
    pub elevation_min_deg: f64,
    pub elevation_max_deg: f64,
    pub max_range: f64,
    /// Probability of replacing a point's label with a uniformly drawn wrong
    /// one from the scene palette.
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            rays_horizontal: 60,
            rays_vertical: 30,
            fov_horizontal_deg: 90.0,
            elevation_min_deg: -30.0,
            elevation_max_deg: 10.0,
            max_range: 60.0,
            label_noise: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rays_horizontal == 0 || self.rays_vertical == 0 {
            return Err(Error::Config("ray counts must be > 0".into()));
        }
        if !(self.fov_horizontal_deg > 0.0 && self.fov_horizontal_deg <= 360.0) {
            return Err(Error::Config("fov_horizontal_deg must be in (0, 360]".into()));
        }
        if !(self.elevation_min_deg < self.elevation_max_deg
            && self.elevation_min_deg >= -90.0
            && self.elevation_max_deg <= 90.0)
        {
            return Err(Error::Config("elevation range must be increasing within ±90°".into()));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::Config("max_range must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.label_noise) {
            return Err(Error::Config("label_noise must be in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn rays_per_scan(&self) -> usize {
        self.rays_horizontal * self.rays_vertical
    }

    /// Sensor-frame unit directions, azimuth-major.
    pub fn directions(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(self.rays_per_scan());
        let fov = self.fov_horizontal_deg.to_radians();
        let (lo, hi) = (self.elevation_min_deg.to_radians(), self.elevation_max_deg.to_radians());
        for i in 0..self.rays_horizontal {
            let az = fov * ((i as f64 + 0.5) / self.rays_horizontal as f64 - 0.5);
            for j in 0..self.rays_vertical {
                let el = lo + (hi - lo) * (j as f64 + 0.5) / self.rays_vertical as f64;
                out.push(Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin()));
            }
        }
        out
    }
}

/// Sensor position and heading.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SensorPose {
    pub position: Vec3,
    pub yaw: f64,
}

impl SensorPose {
    pub fn new(position: Vec3, yaw: f64) -> Self {
        Self { position, yaw }
    }

    pub fn looking_at(position: Vec3, target: &Vec3) -> Self {
        let d = target - position;
        Self::new(position, d.y.atan2(d.x))
    }

    /// Sensor-to-world transform, the inverse of [`to_sensor_frame`].
    pub fn to_isometry(&self) -> Isometry3<f64> {
        Isometry3::new(self.position, Vec3::z() * self.yaw)
    }

    fn rotate(&self, v: &Vec3) -> Vec3 {
        let (s, c) = self.yaw.sin_cos();
        Vec3::new(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
    }
}

fn scan_rng(seed: u64, t: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ t.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Casts every ray of the pattern at time `t` and returns the world-frame
/// hits. Rays that hit nothing within range are omitted.
pub fn simulate_scan(scene: &Scene, pose: &SensorPose, t: u64, config: &SimConfig) -> LabeledScan {
    let palette = scene.palette();
    let mut rng = scan_rng(config.seed, t);
    let mut points = Vec::with_capacity(config.rays_per_scan());
    for d in config.directions() {
        let dir = pose.rotate(&d);
        let Some((s, label)) = scene.cast(&pose.position, &dir, t, config.max_range) else {
            continue;
        };
        // one draw per hit keeps the stream independent of the palette
        let flip: f64 = rng.random();
        let pick: usize = rng.random_range(0..palette.len().max(2) - 1);
        let label = if flip < config.label_noise && palette.len() > 1 {
            let wrong: Vec<_> = palette.iter().copied().filter(|&l| l != label).collect();
            wrong[pick % wrong.len()]
        } else {
            label
        };
        points.push(LabeledPoint {
            position: pose.position + dir * s,
            label,
        });
    }
    LabeledScan {
        origin: pose.position,
        points,
        timestamp: t,
    }
}

/// Expresses a world-frame scan in the sensor frame of `pose`.
pub fn to_sensor_frame(scan: &LabeledScan, pose: &SensorPose) -> Vec<Vec3> {
    let (s, c) = pose.yaw.sin_cos();
    scan.points
        .iter()
        .map(|p| {
            let d = p.position - pose.position;
            Vec3::new(c * d.x + s * d.y, -s * d.x + c * d.y, d.z)
        })
        .collect()
}
