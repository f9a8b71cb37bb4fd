//! Trajectories: KITTI 3×4 pose files and timestamped CSV
//! (`t,x,y,z,qx,qy,qz,qw`).

use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Quaternion, Rotation3, Translation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};

/// Timestamped poses, strictly increasing in time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryEstimate {
    poses: Vec<(f64, Isometry3<f64>)>,
}

impl TrajectoryEstimate {
    pub fn new(poses: Vec<(f64, Isometry3<f64>)>) -> Result<Self> {
        for (k, w) in poses.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Input(format!(
                    "timestamps not strictly increasing at pose {}: {} then {}",
                    k + 1,
                    w[0].0,
                    w[1].0
                )));
            }
        }
        if let Some((t, _)) = poses.iter().find(|(t, _)| !t.is_finite()) {
            return Err(Error::Input(format!("non-finite timestamp {t}")));
        }
        Ok(Self { poses })
    }

    /// Assigns timestamps 0, 1, 2, ... to an untimed pose list.
    pub fn from_sequence(poses: Vec<Isometry3<f64>>) -> Self {
        Self {
            poses: poses.into_iter().enumerate().map(|(i, p)| (i as f64, p)).collect(),
        }
    }

    pub fn poses(&self) -> &[(f64, Isometry3<f64>)] {
        &self.poses
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    /// Pose with the nearest timestamp, if within `tolerance`.
    pub fn nearest(&self, t: f64, tolerance: f64) -> Option<&Isometry3<f64>> {
        let i = self.poses.partition_point(|(s, _)| *s < t);
        [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|j| self.poses.get(j))
            .map(|(s, p)| ((s - t).abs(), p))
            .filter(|(d, _)| *d <= tolerance)
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, p)| p)
    }
}

fn rotation_from_rows(m: Matrix3<f64>) -> UnitQuaternion<f64> {
    // the file stores rotations to limited precision
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix(&m))
}

/// One pose per line, 12 row-major values of `[R | t]`.
pub fn parse_kitti_poses(text: &str, what: &str) -> Result<Vec<Isometry3<f64>>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::format(what, n as u64 + 1, e.to_string()))?;
        if vals.len() != 12 {
            return Err(Error::format(
                what,
                n as u64 + 1,
                format!("expected 12 values, got {}", vals.len()),
            ));
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::format(what, n as u64 + 1, "non-finite value"));
        }
        let r = Matrix3::new(
            vals[0], vals[1], vals[2], vals[4], vals[5], vals[6], vals[8], vals[9], vals[10],
        );
        out.push(Isometry3::from_parts(
            Translation3::new(vals[3], vals[7], vals[11]),
            rotation_from_rows(r),
        ));
    }
    Ok(out)
}

pub fn read_kitti_poses(path: &Path) -> Result<Vec<Isometry3<f64>>> {
    let text = read_text(path)?;
    parse_kitti_poses(&text, &path.display().to_string())
}

pub fn write_kitti_poses(path: &Path, poses: &[Isometry3<f64>]) -> Result<()> {
    let mut s = String::new();
    for p in poses {
        let r = p.rotation.to_rotation_matrix();
        let t = p.translation.vector;
        let mut vals = Vec::with_capacity(12);
        for i in 0..3 {
            for j in 0..3 {
                vals.push(r[(i, j)]);
            }
            vals.push(t[i]);
        }
        let line: Vec<String> = vals.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    write_bytes(path, s.as_bytes())
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvPose {
    t: f64,
    x: f64,
    y: f64,
    z: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    qw: f64,
}

pub fn parse_csv_trajectory(text: &str, what: &str) -> Result<TrajectoryEstimate> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut poses = Vec::new();
    for rec in rdr.deserialize::<CsvPose>() {
        let r = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::format(what, line, e.to_string())
        })?;
        let q = Quaternion::new(r.qw, r.qx, r.qy, r.qz);
        let vals = [r.t, r.x, r.y, r.z, r.qx, r.qy, r.qz, r.qw];
        if vals.iter().any(|v| !v.is_finite()) || q.norm() < 1e-9 {
            return Err(Error::format(what, poses.len() as u64 + 2, "invalid pose values"));
        }
        poses.push((
            r.t,
            Isometry3::from_parts(Translation3::new(r.x, r.y, r.z), UnitQuaternion::from_quaternion(q)),
        ));
    }
    TrajectoryEstimate::new(poses)
}

pub fn read_csv_trajectory(path: &Path) -> Result<TrajectoryEstimate> {
    let text = read_text(path)?;
    parse_csv_trajectory(&text, &path.display().to_string())
}

pub fn write_csv_trajectory(path: &Path, traj: &TrajectoryEstimate) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (t, p) in traj.poses() {
        let q = p.rotation.quaternion();
        let v = p.translation.vector;
        w.serialize(CsvPose {
            t: *t,
            x: v.x,
            y: v.y,
            z: v.z,
            qx: q.i,
            qy: q.j,
            qz: q.k,
            qw: q.w,
        })
        .map_err(|e| Error::Input(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    write_bytes(path, &bytes)
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_bytes(path)?).map_err(|e| {
        Error::format(
            path.display().to_string(),
            e.utf8_error().valid_up_to() as u64,
            "not UTF-8",
        )
    })
}

/// Sensor-to-pose-frame transform applied to every scan, given as a row-major
/// 4×4 homogeneous matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Calibration(pub [[f64; 4]; 4]);

impl Default for Calibration {
    fn default() -> Self {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        Self(m)
    }
}

impl Calibration {
    pub fn to_isometry(&self) -> Result<Isometry3<f64>> {
        let m = &self.0;
        if m[3] != [0.0, 0.0, 0.0, 1.0] || m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("calibration must be a finite rigid 4x4 transform".into()));
        }
        let r = Matrix3::from_fn(|i, j| m[i][j]);
        if (r.transpose() * r - Matrix3::identity()).abs().max() > 1e-6 {
            return Err(Error::Config("calibration rotation is not orthonormal".into()));
        }
        Ok(Isometry3::from_parts(
            Translation3::new(m[0][3], m[1][3], m[2][3]),
            rotation_from_rows(r),
        ))
    }
}
