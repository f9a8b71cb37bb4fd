//! Helpers for scoring maps against scenario ground truth.

use std::collections::BTreeSet;
use std::ops::Range;

use super::scenario::Scenario;
use super::sensor::{to_sensor_frame, SensorPose};
use crate::error::Result;
use crate::grid::{CellIndex, Label, MapStack};
use crate::localization::{ate, localize_sequence, trajectory, AteOptions, LocalizationConfig, Pose2, StepOutcome};
use crate::pipeline::{Mapper, ScanReport};
use crate::sensor::traverse_ray;

/// A cell address across submaps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef {
    pub submap: usize,
    pub index: CellIndex,
}

/// Feeds the scenario scans with times in `range` to the mapper.
pub fn run_scans(mapper: &mut Mapper, scenario: &Scenario, range: Range<u64>) -> Vec<ScanReport> {
    range.map(|t| mapper.insert_scan(&scenario.scan(t))).collect()
}

/// Occupied cells whose majority label satisfies `pred`, sorted.
pub fn occupied_cells(map: &MapStack, pred: impl Fn(Label) -> bool) -> Vec<CellRef> {
    let mut out: Vec<CellRef> = map
        .submaps()
        .iter()
        .enumerate()
        .flat_map(|(k, s)| {
            s.iter()
                .filter(|(_, c)| c.is_occupied() && c.majority_label().is_some_and(&pred))
                .map(move |(i, _)| CellRef { submap: k, index: *i })
        })
        .collect();
    out.sort_unstable();
    out
}

pub fn posterior(map: &MapStack, cell: CellRef) -> f64 {
    map.submap(cell.submap).get(cell.index).map_or(0.5, |c| c.occupancy())
}

/// True when no object or ground overlaps the cell's voxel at any of `times`.
pub fn free_in_truth(map: &MapStack, scenario: &Scenario, cell: CellRef, times: Range<u64>) -> bool {
    let s = map.submap(cell.submap);
    let min = s.cell_min_corner(cell.index);
    !scenario.scene.voxel_ever_occupied(&min, s.voxel_size(), times)
}

/// Occupied `label` cells whose voxels are empty in the scene throughout
/// `times`: what an update over `times` should clear.
pub fn former_cells(map: &MapStack, scenario: &Scenario, label: Label, times: Range<u64>) -> Vec<CellRef> {
    occupied_cells(map, |l| l == label)
        .into_iter()
        .filter(|&c| free_in_truth(map, scenario, c, times.clone()))
        .collect()
}

/// Occupied `label` cells whose voxels still hold an object at time `t`.
pub fn persisting_cells(map: &MapStack, scenario: &Scenario, label: Label, t: u64) -> Vec<CellRef> {
    occupied_cells(map, |l| l == label)
        .into_iter()
        .filter(|c| {
            let s = map.submap(c.submap);
            scenario
                .scene
                .voxel_truth(&s.cell_min_corner(c.index), s.voxel_size(), t)
                .is_some()
        })
        .collect()
}

/// Runs `range` and returns the 1-based scan count after which every cell of
/// `cells` was first below posterior 0.5, if that happened.
pub fn scans_until_cleared(
    mapper: &mut Mapper,
    scenario: &Scenario,
    range: Range<u64>,
    cells: &[CellRef],
) -> Option<u64> {
    let mut cleared = None;
    for (k, t) in range.enumerate() {
        mapper.insert_scan(&scenario.scan(t));
        if cleared.is_none() && cells.iter().all(|&c| posterior(mapper.map(), c) < 0.5) {
            cleared = Some(k as u64 + 1);
        }
    }
    cleared
}

/// Every cell crossed by a ray of the scans in `range`, using submaps that
/// already exist in `map`.
pub fn observed_cells(map: &MapStack, scenario: &Scenario, range: Range<u64>) -> BTreeSet<CellRef> {
    let mut out = BTreeSet::new();
    for t in range {
        let scan = scenario.scan(t);
        let Some(k) = map.submaps().iter().position(|s| s.in_core(&scan.origin)) else {
            continue;
        };
        let grid = map.submap(k);
        for p in &scan.points {
            for index in traverse_ray(grid, &scan.origin, &p.position) {
                out.insert(CellRef { submap: k, index });
            }
        }
    }
    out
}

pub fn planar(pose: &SensorPose) -> Pose2 {
    Pose2::new(pose.position.x, pose.position.y, pose.yaw)
}

/// Outcome of localizing a scenario phase against a map.
#[derive(Clone, Debug)]
pub struct LocalizationRun {
    pub times: Vec<u64>,
    pub truth: Vec<Pose2>,
    pub steps: Vec<StepOutcome>,
}

impl LocalizationRun {
    pub fn estimates(&self) -> Vec<Pose2> {
        self.steps.iter().map(|s| s.estimate).collect()
    }

    /// Planar error of each step's estimate.
    pub fn errors(&self) -> Vec<f64> {
        self.steps
            .iter()
            .zip(&self.truth)
            .map(|(s, t)| (s.estimate.x - t.x).hypot(s.estimate.y - t.y))
            .collect()
    }

    /// ATE over steps `range` (indices into the run), unaligned.
    pub fn ate(&self, range: Range<usize>) -> Result<f64> {
        let times: Vec<f64> = self.times[range.clone()].iter().map(|&t| t as f64).collect();
        let est = trajectory(&times, &self.estimates()[range.clone()], 0.0)?;
        let truth = trajectory(&times, &self.truth[range], 0.0)?;
        ate(
            &est,
            &truth,
            &AteOptions {
                align: false,
                ..AteOptions::default()
            },
        )
    }

    pub fn diverged(&self) -> bool {
        self.steps.iter().any(|s| s.diverged)
    }
}

/// Localizes the scans of `range` against `map` with odometry taken from the
/// true sensor path. Particles start in the init box around the first pose.
pub fn localize_scenario(
    map: &MapStack,
    scenario: &Scenario,
    range: Range<u64>,
    cfg: &LocalizationConfig,
    seed: u64,
) -> Result<LocalizationRun> {
    let times: Vec<u64> = range.collect();
    let truth: Vec<Pose2> = times.iter().map(|&t| planar(&scenario.pose(t))).collect();
    let scans: Vec<_> = times
        .iter()
        .map(|&t| to_sensor_frame(&scenario.scan(t), &scenario.pose(t)))
        .collect();
    let odometry: Vec<Pose2> = std::iter::once(Pose2::default())
        .chain(truth.windows(2).map(|w| w[0].between(&w[1])))
        .collect();
    let Some(x0) = truth.first() else {
        return Ok(LocalizationRun {
            times,
            truth,
            steps: Vec::new(),
        });
    };
    let steps = localize_sequence(map, &scans, &odometry, x0, cfg, seed)?;
    Ok(LocalizationRun { times, truth, steps })
}
