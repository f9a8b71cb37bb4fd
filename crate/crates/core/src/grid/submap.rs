use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use super::{CellIndex, NdtCell};
use crate::error::{Error, Result};
use crate::Vec3;

/// Grid geometry shared by all submaps of a map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    /// Voxel edge length in meters.
    pub voxel_size: f64,
    /// Submap dimensions (x, y, z) in meters.
    pub extents: [f64; 3],
    /// Lattice offset in voxel units. The default puts z = 0 at a voxel center.
    pub lattice_shift: [f64; 3],
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            voxel_size: 0.6,
            extents: [200.0, 200.0, 20.0],
            lattice_shift: [0.0, 0.0, -0.5],
        }
    }
}

impl MapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.voxel_size.is_finite() && self.voxel_size > 0.0) {
            return Err(Error::Config(format!(
                "voxel_size must be > 0, got {}",
                self.voxel_size
            )));
        }
        if self.extents.iter().any(|&e| !(e.is_finite() && e >= self.voxel_size)) {
            return Err(Error::Config(format!(
                "extents must be at least one voxel, got {:?}",
                self.extents
            )));
        }
        Ok(())
    }

    /// Eigenvalue floor of cell covariances: 1e-3 · voxel².
    pub fn cov_floor(&self) -> f64 {
        1e-3 * self.voxel_size * self.voxel_size
    }

    /// Snaps a submap corner onto the shared lattice.
    fn snap(&self, corner: Vec3) -> Vec3 {
        let v = self.voxel_size;
        Vec3::from_fn(|i, _| {
            let shift = self.lattice_shift[i] * v;
            shift + ((corner[i] - shift) / v).round() * v
        })
    }
}

/// A bounded sparse voxel grid. Only cells that received evidence exist.
#[derive(Clone, Debug)]
pub struct SubMap {
    origin: Vec3,
    extents: Vec3,
    voxel_size: f64,
    dims: [i32; 3],
    cov_floor: f64,
    cells: FxHashMap<CellIndex, NdtCell>,
}

impl SubMap {
    pub fn new(origin: Vec3, extents: Vec3, voxel_size: f64) -> Self {
        let dims = [0, 1, 2].map(|i| (extents[i] / voxel_size).ceil() as i32);
        Self {
            origin,
            extents,
            voxel_size,
            dims,
            cov_floor: 1e-3 * voxel_size * voxel_size,
            cells: FxHashMap::default(),
        }
    }

    pub fn origin(&self) -> &Vec3 {
        &self.origin
    }

    pub fn extents(&self) -> &Vec3 {
        &self.extents
    }

    pub fn voxel_size(&self) -> f64 {
        self.voxel_size
    }

    pub fn dims(&self) -> [i32; 3] {
        self.dims
    }

    pub fn cov_floor(&self) -> f64 {
        self.cov_floor
    }

    /// Index of the voxel containing `p`; may lie outside the extents.
    pub fn cell_index(&self, p: &Vec3) -> CellIndex {
        let q = (p - self.origin) / self.voxel_size;
        CellIndex::new(q.x.floor() as i32, q.y.floor() as i32, q.z.floor() as i32)
    }

    pub fn cell_center(&self, idx: CellIndex) -> Vec3 {
        self.cell_min_corner(idx) + Vec3::repeat(0.5 * self.voxel_size)
    }

    pub fn cell_min_corner(&self, idx: CellIndex) -> Vec3 {
        self.origin + Vec3::new(idx.ix as f64, idx.iy as f64, idx.iz as f64) * self.voxel_size
    }

    pub fn in_bounds(&self, idx: CellIndex) -> bool {
        (0..self.dims[0]).contains(&idx.ix)
            && (0..self.dims[1]).contains(&idx.iy)
            && (0..self.dims[2]).contains(&idx.iz)
    }

    pub fn contains_point(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.origin[i] && p[i] < self.origin[i] + self.extents[i])
            && self.in_bounds(self.cell_index(p))
    }

    /// True when `p` lies in the central half of the xy footprint.
    pub fn in_core(&self, p: &Vec3) -> bool {
        (0..2).all(|i| {
            let center = self.origin[i] + 0.5 * self.extents[i];
            (p[i] - center).abs() <= 0.25 * self.extents[i]
        })
    }

    pub fn get(&self, idx: CellIndex) -> Option<&NdtCell> {
        self.cells.get(&idx)
    }

    pub fn get_mut(&mut self, idx: CellIndex) -> Option<&mut NdtCell> {
        self.cells.get_mut(&idx)
    }

    pub fn cell_at(&self, p: &Vec3) -> Option<&NdtCell> {
        self.cells.get(&self.cell_index(p))
    }

    /// Returns the cell, materializing an empty one if needed.
    pub fn get_or_insert(&mut self, idx: CellIndex) -> &mut NdtCell {
        let floor = self.cov_floor;
        self.cells.entry(idx).or_insert_with(|| NdtCell::new(floor))
    }

    pub fn insert(&mut self, idx: CellIndex, cell: NdtCell) {
        self.cells.insert(idx, cell);
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CellIndex, &NdtCell)> {
        self.cells.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&CellIndex, &mut NdtCell)> {
        self.cells.iter_mut()
    }

    /// Cell indices in ascending order, for deterministic output.
    pub fn sorted_indices(&self) -> Vec<CellIndex> {
        let mut v: Vec<_> = self.cells.keys().copied().collect();
        v.sort_unstable();
        v
    }
}

/// Ordered list of submaps, one of which receives new scans.
#[derive(Clone, Debug)]
pub struct MapStack {
    config: MapConfig,
    submaps: Vec<SubMap>,
    active: usize,
}

impl MapStack {
    pub fn new(config: MapConfig) -> Self {
        Self {
            config,
            submaps: Vec::new(),
            active: 0,
        }
    }

    /// Reassembles a stack from deserialized parts.
    pub fn from_parts(config: MapConfig, submaps: Vec<SubMap>, active: usize) -> Result<Self> {
        if !submaps.is_empty() && active >= submaps.len() {
            return Err(Error::Input(format!(
                "active submap {active} out of range ({} submaps)",
                submaps.len()
            )));
        }
        Ok(Self {
            config,
            submaps,
            active,
        })
    }

    pub fn config(&self) -> &MapConfig {
        &self.config
    }

    pub fn submaps(&self) -> &[SubMap] {
        &self.submaps
    }

    pub fn submap(&self, i: usize) -> &SubMap {
        &self.submaps[i]
    }

    pub fn submap_mut(&mut self, i: usize) -> &mut SubMap {
        &mut self.submaps[i]
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    pub fn active(&self) -> Option<&SubMap> {
        self.submaps.get(self.active)
    }

    pub fn active_mut(&mut self) -> Option<&mut SubMap> {
        self.submaps.get_mut(self.active)
    }

    /// Selects the submap that should receive a scan taken at `sensor`.
    ///
    /// The active submap is kept while the sensor stays in its central half;
    /// otherwise an existing submap centered around the sensor is reused, or a
    /// new one is allocated around it. Cells are never migrated.
    pub fn activate_for(&mut self, sensor: &Vec3) -> usize {
        if let Some(active) = self.submaps.get(self.active) {
            if active.in_core(sensor) {
                return self.active;
            }
        }
        if let Some(i) = self.submaps.iter().position(|s| s.in_core(sensor)) {
            self.active = i;
            return i;
        }
        let extents = Vec3::from_row_slice(&self.config.extents);
        let corner = self.config.snap(sensor - extents * 0.5);
        self.submaps.push(SubMap::new(corner, extents, self.config.voxel_size));
        self.active = self.submaps.len() - 1;
        self.active
    }

    /// Looks a point up in the active submap first, then in the others.
    pub fn find_cell(&self, p: &Vec3) -> Option<&NdtCell> {
        if let Some(active) = self.active() {
            if active.contains_point(p) {
                return active.cell_at(p);
            }
        }
        self.submaps
            .iter()
            .enumerate()
            .filter(|&(i, s)| i != self.active && s.contains_point(p))
            .find_map(|(_, s)| s.cell_at(p))
    }

    pub fn cell_count(&self) -> usize {
        self.submaps.iter().map(SubMap::len).sum()
    }
}
