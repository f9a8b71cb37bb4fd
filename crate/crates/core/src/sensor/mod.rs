//! Posed labeled scans to per-cell occupied/empty evidence.

mod model;
mod raycast;

pub use model::{
    classify_pass_through, collect_evidence, integrate_scan, pass_through_likelihood, CellEvidence, EvidenceDelta,
    LabeledPoint, LabeledScan, PassThrough, ScanStats, SensorConfig,
};
pub use raycast::traverse_ray;
