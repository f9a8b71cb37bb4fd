use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::raycast::traverse_ray_into;
use crate::error::{Error, Result};
use crate::grid::{CellIndex, Label, MapStack, NdtCell, SubMap};
use crate::Vec3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Likelihood a pass-through must reach to count as an empty observation.
    pub p_th: f64,
    /// Adaptation rate; scales every evidence increment before fusion.
    pub eta: f64,
    /// Points farther than this from the sensor are dropped (m).
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            p_th: 0.5,
            eta: 0.2,
            max_range: 120.0,
        }
    }
}

impl SensorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_th > 0.0 && self.p_th < 1.0) {
            return Err(Error::Config(format!("p_th must be in (0, 1), got {}", self.p_th)));
        }
        if !(0.0..=0.5).contains(&self.eta) {
            return Err(Error::Config(format!("eta must be in [0, 0.5], got {}", self.eta)));
        }
        if !(self.max_range > 0.0) {
            return Err(Error::Config(format!("max_range must be > 0, got {}", self.max_range)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabeledPoint {
    pub position: Vec3,
    pub label: Label,
}

/// A scan posed in the world frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledScan {
    /// Sensor position.
    pub origin: Vec3,
    pub points: Vec<LabeledPoint>,
    /// Sequence number.
    pub timestamp: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PassThrough {
    Empty,
    NoEvidence,
}

/// Evidence one scan produced for one cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CellEvidence {
    pub occ: f64,
    pub emp: f64,
    pub points: Vec<Vec3>,
    pub labels: Vec<Label>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScanStats {
    pub points_total: usize,
    pub points_used: usize,
    pub out_of_range: usize,
    pub out_of_bounds: usize,
    pub cells_traversed: usize,
}

/// Per-cell evidence of one scan, before any latent weighting.
#[derive(Clone, Debug, Default)]
pub struct EvidenceDelta {
    pub submap: usize,
    pub cells: FxHashMap<CellIndex, CellEvidence>,
    pub stats: ScanStats,
}

impl EvidenceDelta {
    pub fn get(&self, idx: CellIndex) -> Option<&CellEvidence> {
        self.cells.get(&idx)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_occ(&self) -> f64 {
        self.cells.values().map(|e| e.occ).sum()
    }

    pub fn total_emp(&self) -> f64 {
        self.cells.values().map(|e| e.emp).sum()
    }

    pub fn sorted_indices(&self) -> Vec<CellIndex> {
        let mut v: Vec<_> = self.cells.keys().copied().collect();
        v.sort_unstable();
        v
    }

    /// Adds another delta's counts (and endpoint samples) into this one.
    pub fn merge(&mut self, other: &EvidenceDelta) {
        for (idx, ev) in &other.cells {
            let e = self.cells.entry(*idx).or_default();
            e.occ += ev.occ;
            e.emp += ev.emp;
            e.points.extend_from_slice(&ev.points);
            e.labels.extend_from_slice(&ev.labels);
        }
        let s = &mut self.stats;
        s.points_total += other.stats.points_total;
        s.points_used += other.stats.points_used;
        s.out_of_range += other.stats.out_of_range;
        s.out_of_bounds += other.stats.out_of_bounds;
        s.cells_traversed += other.stats.cells_traversed;
    }
}

/// Likelihood `exp(-d²/2)` at the maximum-likelihood point of the segment
/// `origin + s * direction`, `s ∈ [0, t_max]`, under the cell Gaussian.
///
/// The ML point minimizes the Mahalanobis distance to the cell mean along
/// the segment.
pub fn pass_through_likelihood(cell: &NdtCell, origin: &Vec3, direction: &Vec3, t_max: f64) -> f64 {
    let inv = cell.inverse_covariance();
    let w = inv * direction;
    let denom = direction.dot(&w);
    let s = if denom > 0.0 {
        (w.dot(&(cell.mean() - origin)) / denom).clamp(0.0, t_max)
    } else {
        0.0
    };
    cell.likelihood(&(origin + direction * s))
}

/// NDT-OM miss test for a ray that crosses `cell` without ending in it.
///
/// Cells with fewer than three points have no usable Gaussian and behave
/// like plain occupancy voxels: any pass-through is an empty observation.
pub fn classify_pass_through(cell: &NdtCell, origin: &Vec3, endpoint: &Vec3, config: &SensorConfig) -> PassThrough {
    if !cell.is_fitted() {
        return PassThrough::Empty;
    }
    let l = pass_through_likelihood(cell, origin, &(endpoint - origin), 1.0);
    if l >= config.p_th {
        PassThrough::Empty
    } else {
        PassThrough::NoEvidence
    }
}

/// Accumulates the evidence of `scan` into `delta`, classifying pass-throughs
/// against `grid` as it is. The grid is not modified.
pub fn collect_evidence(grid: &SubMap, scan: &LabeledScan, config: &SensorConfig, delta: &mut EvidenceDelta) {
    let mut ray = Vec::with_capacity(256);
    let origin_ok = grid.contains_point(&scan.origin);
    for p in &scan.points {
        delta.stats.points_total += 1;
        let pos = &p.position;
        let range = (pos - scan.origin).norm();
        if !range.is_finite() || range > config.max_range {
            delta.stats.out_of_range += 1;
            continue;
        }
        if !origin_ok || !grid.contains_point(pos) {
            delta.stats.out_of_bounds += 1;
            continue;
        }
        delta.stats.points_used += 1;

        traverse_ray_into(grid, &scan.origin, pos, &mut ray);
        let end = ray.pop().unwrap_or_else(|| grid.cell_index(pos));
        delta.stats.cells_traversed += ray.len() + 1;
        for &idx in &ray {
            let class = match grid.get(idx) {
                Some(cell) => classify_pass_through(cell, &scan.origin, pos, config),
                None => PassThrough::Empty,
            };
            if class == PassThrough::Empty {
                delta.cells.entry(idx).or_default().emp += 1.0;
            }
        }
        let ev = delta.cells.entry(end).or_default();
        ev.occ += 1.0;
        ev.points.push(*pos);
        ev.labels.push(p.label);
    }
}

/// Collects the evidence of one scan into the submap selected for its sensor
/// position, materializes every cell that received evidence and feeds the
/// endpoints into the cell Gaussians and label histograms.
///
/// Occupancy log-odds are left untouched; fusion happens in
/// [`crate::occupancy`] after the latent weights are known.
pub fn integrate_scan(map: &mut MapStack, scan: &LabeledScan, config: &SensorConfig) -> EvidenceDelta {
    let active = map.activate_for(&scan.origin);
    let grid = map.submap_mut(active);
    let mut delta = EvidenceDelta {
        submap: active,
        ..EvidenceDelta::default()
    };
    collect_evidence(grid, scan, config, &mut delta);
    let floor = grid.cov_floor();
    for (idx, ev) in &delta.cells {
        let cell = grid.get_or_insert(*idx);
        if !ev.points.is_empty() {
            cell.add_points(&ev.points, floor);
            cell.add_labels(ev.labels.iter().copied());
        }
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::MapConfig;
    use nalgebra::Matrix3;

    fn fitted_cell(spread: f64) -> NdtCell {
        // isotropic cloud with per-axis variance `spread²`
        let mut pts = Vec::new();
        for s in [-1.0, 1.0] {
            for a in 0..3 {
                let mut p = Vec3::zeros();
                p[a] = s * spread * 3f64.sqrt();
                pts.push(p);
            }
        }
        let mut cell = NdtCell::new(1e-6);
        cell.add_points(&pts, 1e-6);
        // six axis points at ±√3·s give variance 6·s²/5 with N-1 = 5
        let expected = spread * spread * 6.0 / 5.0;
        assert!((cell.covariance() - Matrix3::identity() * expected).abs().max() < 1e-12);
        cell
    }

    #[test]
    fn ray_through_mean_is_empty() {
        let cell = fitted_cell(0.1);
        let o = Vec3::new(-2.0, 0.0, 0.0);
        let e = Vec3::new(2.0, 0.0, 0.0);
        let l = pass_through_likelihood(&cell, &o, &(e - o), 1.0);
        assert!((l - 1.0).abs() < 1e-12);
        assert_eq!(
            classify_pass_through(&cell, &o, &e, &SensorConfig::default()),
            PassThrough::Empty
        );
    }

    #[test]
    fn mahalanobis_three_is_no_evidence() {
        let cell = fitted_cell(0.1);
        let sigma = cell.covariance()[(0, 0)].sqrt();
        let o = Vec3::new(-2.0, 3.0 * sigma, 0.0);
        let e = Vec3::new(2.0, 3.0 * sigma, 0.0);
        let l = pass_through_likelihood(&cell, &o, &(e - o), 1.0);
        assert!((l - (-4.5f64).exp()).abs() < 1e-12);
        assert!((l - 0.011).abs() < 1e-3);
        assert_eq!(
            classify_pass_through(&cell, &o, &e, &SensorConfig::default()),
            PassThrough::NoEvidence
        );
    }

    #[test]
    fn threshold_boundary_counts_as_empty() {
        let cell = fitted_cell(0.1);
        let sigma = cell.covariance()[(0, 0)].sqrt();
        // exp(-d²/2) = 0.5  <=>  d = sqrt(2 ln 2)
        let d = (2.0 * 2f64.ln()).sqrt();
        assert!((d - 1.177).abs() < 1e-3);
        let inside = d * sigma * (1.0 - 1e-9);
        let o = Vec3::new(-2.0, inside, 0.0);
        let e = Vec3::new(2.0, inside, 0.0);
        assert_eq!(
            classify_pass_through(&cell, &o, &e, &SensorConfig::default()),
            PassThrough::Empty
        );
        let outside = d * sigma * (1.0 + 1e-6);
        let o = Vec3::new(-2.0, outside, 0.0);
        let e = Vec3::new(2.0, outside, 0.0);
        assert_eq!(
            classify_pass_through(&cell, &o, &e, &SensorConfig::default()),
            PassThrough::NoEvidence
        );
    }

    #[test]
    fn ml_point_is_clamped_to_segment() {
        let cell = fitted_cell(0.1);
        // segment stops 1 m short of the mean
        let o = Vec3::new(-3.0, 0.0, 0.0);
        let e = Vec3::new(-1.0, 0.0, 0.0);
        assert_eq!(
            classify_pass_through(&cell, &o, &e, &SensorConfig::default()),
            PassThrough::NoEvidence
        );
    }

    #[test]
    fn unfitted_cells_are_plain_voxels() {
        let cell = NdtCell::new(1e-3);
        let o = Vec3::new(-3.0, 5.0, 0.0);
        assert_eq!(
            classify_pass_through(&cell, &o, &(o + Vec3::x()), &SensorConfig::default()),
            PassThrough::Empty
        );
    }

    #[test]
    fn single_ray_on_empty_map() {
        let mut map = MapStack::new(MapConfig::default());
        let scan = LabeledScan {
            origin: Vec3::new(0.05, 0.05, 0.0),
            points: vec![LabeledPoint {
                position: Vec3::new(5.3, 1.1, 0.2),
                label: Label::CAR,
            }],
            timestamp: 0,
        };
        let delta = integrate_scan(&mut map, &scan, &SensorConfig::default());
        let grid = map.active().unwrap();
        let ray = traverse_ray_into_vec(grid, &scan.origin, &scan.points[0].position);
        assert_eq!(grid.len(), ray.len());
        assert_eq!(delta.len(), ray.len());
        let (last, rest) = ray.split_last().unwrap();
        assert_eq!(delta.get(*last).unwrap().occ, 1.0);
        assert_eq!(delta.get(*last).unwrap().emp, 0.0);
        for idx in rest {
            let ev = delta.get(*idx).unwrap();
            assert_eq!((ev.occ, ev.emp), (0.0, 1.0));
        }
        assert_eq!(grid.get(*last).unwrap().point_count(), 1);
        assert_eq!(grid.get(*last).unwrap().logodds, 0.0);
    }

    fn traverse_ray_into_vec(grid: &SubMap, a: &Vec3, b: &Vec3) -> Vec<CellIndex> {
        super::super::traverse_ray(grid, a, b)
    }

    #[test]
    fn out_of_range_points_are_skipped() {
        let mut map = MapStack::new(MapConfig::default());
        let cfg = SensorConfig {
            max_range: 10.0,
            ..SensorConfig::default()
        };
        let scan = LabeledScan {
            origin: Vec3::zeros(),
            points: vec![
                LabeledPoint {
                    position: Vec3::new(20.0, 0.0, 0.0),
                    label: Label::ROAD,
                },
                LabeledPoint {
                    position: Vec3::new(0.0, 0.0, 9.5),
                    label: Label::ROAD,
                },
                LabeledPoint {
                    position: Vec3::new(f64::NAN, 0.0, 0.0),
                    label: Label::ROAD,
                },
                LabeledPoint {
                    position: Vec3::new(3.0, 0.0, 0.0),
                    label: Label::ROAD,
                },
            ],
            timestamp: 0,
        };
        let delta = integrate_scan(&mut map, &scan, &cfg);
        assert_eq!(delta.stats.out_of_range, 2);
        // the submap is only 20 m tall, centered on the sensor
        assert_eq!(delta.stats.out_of_bounds, 0);
        assert_eq!(delta.stats.points_used, 2);
        assert_eq!(delta.total_occ(), 2.0);
    }
}
