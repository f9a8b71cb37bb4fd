//! Deterministic box worlds that produce labeled scans with known ground
//! truth.

pub mod eval;
pub mod scenario;
pub mod scene;
pub mod sensor;

pub use scenario::{Phase, Scenario, SensorPath};
pub use scene::{Aabb, Ground, Scene, SceneObject, Trajectory};
pub use sensor::{simulate_scan, to_sensor_frame, SensorPose, SimConfig};
