//! File formats and evaluation metrics.

pub mod diff;
pub mod kitti;
pub mod mapfile;
pub mod metrics;
pub mod poses;
pub mod sequence;

pub use diff::{diff_maps, LabelDiff, MapDiff};
pub use kitti::{
    instance_id, parse_labels, parse_scan_bin, read_labeled_scan, read_labels, read_scan_bin, semantic_class,
    write_labels, write_scan_bin,
};
pub use mapfile::{
    decode_map, encode_map, read_map, sidecar_path, write_map, write_map_with_manifest, LoadedMap, MapMeta,
    FORMAT_VERSION,
};
pub use metrics::{dynamic_cell_count, dynamic_cell_density, DynamicLabelSet};
pub use poses::{
    parse_csv_trajectory, parse_kitti_poses, read_csv_trajectory, read_kitti_poses, write_csv_trajectory,
    write_kitti_poses, Calibration, TrajectoryEstimate,
};
pub use sequence::{Sequence, SequenceWriter};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
