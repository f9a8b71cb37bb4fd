//! KITTI-style sequence directories:
//!
//! ```text
//! <root>/velodyne/000000.bin   sensor-frame points
//! <root>/labels/000000.label   one raw label per point
//! <root>/poses.txt             one 3x4 pose per scan
//! <root>/trajectory.csv        optional timestamped ground truth
//! ```
//!
//! Scan `k` has timestamp `k` unless `trajectory.csv` says otherwise.

use std::path::{Path, PathBuf};

use nalgebra::{Isometry3, Point3};

use super::kitti::{read_labeled_scan, read_scan_bin, write_labels, write_scan_bin};
use super::poses::TrajectoryEstimate;
use super::poses::{read_csv_trajectory, read_kitti_poses, write_csv_trajectory, write_kitti_poses};
use crate::error::{Error, Result};
use crate::sensor::{LabeledPoint, LabeledScan};
use crate::Vec3;

#[derive(Clone, Debug)]
pub struct Sequence {
    root: PathBuf,
    poses: Vec<Isometry3<f64>>,
}

fn frame_name(k: usize, ext: &str) -> String {
    format!("{k:06}.{ext}")
}

impl Sequence {
    /// Reads `poses.txt` and checks that a scan file exists for every pose.
    pub fn open(root: &Path) -> Result<Self> {
        let poses = read_kitti_poses(&root.join("poses.txt"))?;
        let seq = Self {
            root: root.to_path_buf(),
            poses,
        };
        let dir = root.join("velodyne");
        let n_bins = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().extension().is_some_and(|x| x == "bin"))
            .count();
        if n_bins != seq.len() {
            return Err(Error::Input(format!(
                "{} has {} poses but {} has {n_bins} scans",
                root.join("poses.txt").display(),
                seq.len(),
                dir.display()
            )));
        }
        for k in 0..seq.len() {
            if !seq.scan_path(k).is_file() {
                return Err(Error::Input(format!("missing scan {}", seq.scan_path(k).display())));
            }
        }
        Ok(seq)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn poses(&self) -> &[Isometry3<f64>] {
        &self.poses
    }

    pub fn scan_path(&self, k: usize) -> PathBuf {
        self.root.join("velodyne").join(frame_name(k, "bin"))
    }

    pub fn label_path(&self, k: usize) -> PathBuf {
        self.root.join("labels").join(frame_name(k, "label"))
    }

    /// Sensor-frame points with their semantic classes.
    pub fn labeled_points(&self, k: usize) -> Result<Vec<LabeledPoint>> {
        read_labeled_scan(&self.scan_path(k), &self.label_path(k))
    }

    /// Scan `k` in the world frame, `pose · calibration · p`.
    pub fn world_scan(&self, k: usize, calibration: &Isometry3<f64>) -> Result<LabeledScan> {
        let t = self.poses[k] * calibration;
        let points = self
            .labeled_points(k)?
            .into_iter()
            .map(|p| LabeledPoint {
                position: (t * Point3::from(p.position)).coords,
                label: p.label,
            })
            .collect();
        Ok(LabeledScan {
            origin: t.translation.vector,
            points,
            timestamp: k as u64,
        })
    }

    /// Scan `k` in the pose frame, `calibration · p`; labels are not needed.
    pub fn body_points(&self, k: usize, calibration: &Isometry3<f64>) -> Result<Vec<Vec3>> {
        Ok(read_scan_bin(&self.scan_path(k))?
            .into_iter()
            .map(|p| (calibration * Point3::from(p)).coords)
            .collect())
    }

    /// Ground truth from `trajectory.csv`, falling back to `poses.txt` with
    /// scan-index timestamps.
    pub fn ground_truth(&self) -> Result<TrajectoryEstimate> {
        let csv = self.root.join("trajectory.csv");
        if csv.is_file() {
            read_csv_trajectory(&csv)
        } else {
            Ok(TrajectoryEstimate::from_sequence(self.poses.clone()))
        }
    }
}

/// Incremental writer for a sequence directory.
#[derive(Debug)]
pub struct SequenceWriter {
    root: PathBuf,
    poses: Vec<Isometry3<f64>>,
}

impl SequenceWriter {
    pub fn create(root: &Path) -> Result<Self> {
        for sub in ["velodyne", "labels"] {
            let d = root.join(sub);
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            poses: Vec::new(),
        })
    }

    /// Appends one scan given in the sensor frame.
    pub fn push(&mut self, pose: Isometry3<f64>, points: &[Vec3], raw_labels: &[u32]) -> Result<()> {
        if points.len() != raw_labels.len() {
            return Err(Error::Input(format!(
                "{} points but {} labels",
                points.len(),
                raw_labels.len()
            )));
        }
        let k = self.poses.len();
        write_scan_bin(&self.root.join("velodyne").join(frame_name(k, "bin")), points)?;
        write_labels(&self.root.join("labels").join(frame_name(k, "label")), raw_labels)?;
        self.poses.push(pose);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Writes `poses.txt` and `trajectory.csv` and returns the paths written.
    pub fn finish(self) -> Result<Vec<PathBuf>> {
        let poses = self.root.join("poses.txt");
        write_kitti_poses(&poses, &self.poses)?;
        let csv = self.root.join("trajectory.csv");
        write_csv_trajectory(&csv, &TrajectoryEstimate::from_sequence(self.poses))?;
        Ok(vec![poses, csv])
    }
}
